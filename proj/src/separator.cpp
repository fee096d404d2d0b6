#include "ftfi/separator.hpp"
#include "ftfi/errors.hpp"

#include <algorithm>
#include <string>

namespace ftfi {

namespace detail {

PivotDecomposition pivot_decompose_unchecked(const WeightedTree& t)
{
    const VertexId n = t.vertex_count();
    if (n < 4)
        throw PreconditionError("pivot decomposition needs at least 4 vertices");

    // Everything below works in BFS-position space (root 0 at position 0).
    // Children of a vertex occupy a contiguous block of positions and parent
    // positions never decrease, so the sweeps touch memory almost in order;
    // only the BFS itself chases vertex ids.
    std::vector<VertexId> order(static_cast<std::size_t>(n));
    std::vector<VertexId> parent_pos(static_cast<std::size_t>(n));
    std::vector<VertexId> child_begin(static_cast<std::size_t>(n) + 1);
    order[0] = 0;
    parent_pos[0] = -1;
    VertexId tail = 1;
    const Adjacency& adj = t.adjacency();
    // Two-stage prefetch: offsets far ahead, then the neighbor lists they locate.
    constexpr VertexId kFar = 16, kNear = 8;
    for (VertexId i = 0; i < n; ++i) {
        if (i + kFar < tail)
            adj.prefetch_offsets(order[i + kFar]);
        if (i + kNear < tail)
            adj.prefetch_neighbors(order[i + kNear]);
        const VertexId v = order[i];
        // A tree has no cross edges: the parent is the only visited neighbor.
        const VertexId up = i == 0 ? -1 : order[parent_pos[i]];
        child_begin[i] = tail;
        for (const auto& nb : t.neighbors(v))
            if (nb.id != up) {
                order[tail] = nb.id;
                parent_pos[tail] = i;
                ++tail;
            }
    }
    child_begin[n] = n;

    std::vector<VertexId> size(static_cast<std::size_t>(n), 1);
    std::vector<VertexId> largest_child(static_cast<std::size_t>(n), 0);
    for (VertexId i = n - 1; i > 0; --i) {
        size[parent_pos[i]] += size[i];
        largest_child[parent_pos[i]] = std::max(largest_child[parent_pos[i]], size[i]);
    }

    // First vertex (ascending id) whose hanging subtrees all have <= n/2 vertices.
    VertexId pivot = -1, pivot_pos = -1;
    for (VertexId i = 0; i < n; ++i) {
        const long long largest = std::max(n - size[i], largest_child[i]);
        if (2 * largest <= n && (pivot < 0 || order[i] < pivot)) {
            pivot = order[i];
            pivot_pos = i;
        }
    }

    // Hanging subtrees ordered by root id (adjacency is sorted); cut at the
    // first prefix reaching 3n/4. Children appear in adjacency order, so the
    // k-th neighbor other than the BFS parent is the k-th child block entry.
    const auto nbs = t.neighbors(pivot);
    const VertexId up = pivot_pos == 0 ? -1 : order[parent_pos[pivot_pos]];
    std::vector<long long> hanging(nbs.size());
    for (std::size_t k = 0, c = static_cast<std::size_t>(child_begin[pivot_pos]); k < nbs.size(); ++k)
        hanging[k] = nbs[k].id == up ? n - size[pivot_pos] : size[c++];
    std::size_t cut = nbs.size();
    long long prefix = 0;
    for (std::size_t k = 0; k < nbs.size(); ++k) {
        prefix += hanging[k];
        if (4 * prefix >= 3LL * n) {
            cut = k;
            break;
        }
    }

    // Sides by position: the pivot's children from the cut, everything else
    // from its BFS parent. The root inherits the side of the pivot's parent.
    std::vector<signed char> side_pos(static_cast<std::size_t>(n));
    side_pos[pivot_pos] = 2;
    for (std::size_t k = 0, c = static_cast<std::size_t>(child_begin[pivot_pos]); k < nbs.size(); ++k) {
        const signed char s = k < cut ? 0 : 1;
        if (nbs[k].id == up)
            side_pos[0] = s;
        else
            side_pos[c++] = s;
    }
    for (VertexId i = 1; i < n; ++i)
        if (i != pivot_pos && parent_pos[i] != pivot_pos)
            side_pos[i] = side_pos[parent_pos[i]];

    std::vector<signed char> side(static_cast<std::size_t>(n));
    for (VertexId i = 0; i < n; ++i)
        side[order[i]] = side_pos[i];

    // Branch-free compaction; the side pattern is random.
    PivotDecomposition out;
    out.pivot = pivot;
    out.left_vertices.resize(static_cast<std::size_t>(n));
    out.right_vertices.resize(static_cast<std::size_t>(n));
    std::size_t nl = 0, nr = 0;
    for (VertexId v = 0; v < n; ++v) {
        out.left_vertices[nl] = v;
        out.right_vertices[nr] = v;
        nl += side[v] != 1;
        nr += side[v] != 0;
    }
    out.left_vertices.resize(nl);
    out.right_vertices.resize(nr);
    out.left_vertices.shrink_to_fit();
    out.right_vertices.shrink_to_fit();
    return out;
}

} // namespace detail

PivotDecomposition pivot_decompose(const WeightedTree& t)
{
    if (t.vertex_count() < 6)
        throw PreconditionError("pivot decomposition requires at least 6 vertices, got " +
                                std::to_string(t.vertex_count()));
    return detail::pivot_decompose_unchecked(t);
}

} // namespace ftfi
