#include "ftfi/integrator_tree.hpp"
#include "ftfi/errors.hpp"
#include "ftfi/separator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

namespace ftfi {

namespace {

struct Builder {
    int leaf_threshold;
    std::optional<int> quantization;
    std::vector<IntegratorTreeNode>& nodes;

    // `ids` maps the subtree's local ids to input-tree ids.
    std::int32_t build(const WeightedTree& sub, std::vector<VertexId> ids)
    {
        const auto index = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();
        const VertexId m = sub.vertex_count();

        if (m <= leaf_threshold || m < 4) {
            auto& leaf = nodes[index];
            leaf.kind = IntegratorTreeNode::Kind::Leaf;
            leaf.vertex_ids = std::move(ids);
            leaf.distances.resize(m, m);
            for (VertexId v = 0; v < m; ++v) {
                const auto dist = tree_distances_from(sub, v);
                for (VertexId u = 0; u < m; ++u)
                    leaf.distances(v, u) = dist[u];
            }
            return index;
        }

        const PivotDecomposition split = detail::pivot_decompose_unchecked(sub);
        const std::vector<double> dist = tree_distances_from(sub, split.pivot);

        WeightedTree left_tree, right_tree;
        SideArrays left = make_side(sub, split.pivot, split.left_vertices, dist, ids, left_tree);
        SideArrays right = make_side(sub, split.pivot, split.right_vertices, dist, ids, right_tree);

        std::vector<VertexId> left_ids = left.ids, right_ids = right.ids;
        {
            auto& node = nodes[index];
            node.kind = IntegratorTreeNode::Kind::Internal;
            node.pivot = ids[split.pivot];
            node.left = std::move(left);
            node.right = std::move(right);
        }
        ids.clear();
        ids.shrink_to_fit();
        // `nodes` may reallocate during recursion; never hold a reference across it.
        const std::int32_t lc = build(left_tree, std::move(left_ids));
        nodes[index].left_child = lc;
        const std::int32_t rc = build(right_tree, std::move(right_ids));
        nodes[index].right_child = rc;
        return index;
    }

    SideArrays make_side(const WeightedTree& sub, VertexId pivot, const std::vector<VertexId>& members,
                         const std::vector<double>& dist, const std::vector<VertexId>& ids,
                         WeightedTree& side_tree) const
    {
        const VertexId n = sub.vertex_count();
        std::vector<VertexId> local(n, -1);
        std::vector<char> in_side(n, 0);
        for (VertexId v : members)
            in_side[v] = 1;

        SideArrays side;
        side.to_parent.reserve(members.size());
        std::vector<Edge> edges;
        edges.reserve(members.size() - 1);

        local[pivot] = 0;
        side.to_parent.push_back(pivot);
        for (std::size_t i = 0; i < side.to_parent.size(); ++i) {
            const VertexId v = side.to_parent[i];
            for (const auto& nb : sub.neighbors(v)) {
                if (!in_side[nb.id] || local[nb.id] != -1)
                    continue;
                local[nb.id] = static_cast<VertexId>(side.to_parent.size());
                side.to_parent.push_back(nb.id);
                edges.push_back({local[v], local[nb.id], nb.w});
            }
        }
        const auto m = static_cast<VertexId>(side.to_parent.size());
        side_tree = WeightedTree(m, std::move(edges));

        side.ids.resize(m);
        std::vector<double> local_dist(m);
        for (VertexId i = 0; i < m; ++i) {
            side.ids[i] = ids[side.to_parent[i]];
            double d = dist[side.to_parent[i]];
            if (quantization)
                d = std::round(d * *quantization) / *quantization;
            local_dist[i] = d;
        }

        std::vector<VertexId> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](VertexId a, VertexId b) { return local_dist[a] < local_dist[b]; });

        side.id_d.resize(m);
        side.s_members = order;
        side.s_offsets.push_back(0);
        for (VertexId i = 0; i < m; ++i) {
            const double d = local_dist[order[i]];
            if (side.d.empty() || d != side.d.back()) {
                if (!side.d.empty())
                    side.s_offsets.push_back(i);
                side.d.push_back(d);
            }
            side.id_d[order[i]] = static_cast<std::int32_t>(side.d.size()) - 1;
        }
        side.s_offsets.push_back(m);
        return side;
    }
};

// ---------------------------------------------------------------------------
// binary format helpers (little-endian on disk)

constexpr char kMagic[8] = {'F', 'T', 'F', 'I', 'I', 'T', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value)
{
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in)
{
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
        throw ParseError("integrator tree file is truncated");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

template <typename T>
void put_array(std::ostream& out, const std::vector<T>& values)
{
    put<std::uint32_t>(out, static_cast<std::uint32_t>(values.size()));
    for (const auto& v : values)
        put<T>(out, v);
}

template <typename T>
std::vector<T> get_array(std::istream& in, std::uint32_t limit)
{
    const auto count = get<std::uint32_t>(in);
    if (count > limit)
        throw ParseError("integrator tree file has an implausible array length");
    std::vector<T> values(count);
    for (auto& v : values)
        v = get<T>(in);
    return values;
}

void put_side(std::ostream& out, const SideArrays& s)
{
    put_array(out, s.ids);
    put_array(out, s.to_parent);
    put_array(out, s.d);
    put_array(out, s.id_d);
    put_array(out, s.s_offsets);
    put_array(out, s.s_members);
}

SideArrays get_side(std::istream& in, std::uint32_t n)
{
    SideArrays s;
    s.ids = get_array<VertexId>(in, n);
    s.to_parent = get_array<VertexId>(in, n);
    s.d = get_array<double>(in, n);
    s.id_d = get_array<std::int32_t>(in, n);
    s.s_offsets = get_array<std::int32_t>(in, n + 1);
    s.s_members = get_array<VertexId>(in, n);
    const auto m = s.ids.size();
    if (s.to_parent.size() != m || s.id_d.size() != m || s.s_members.size() != m ||
        s.s_offsets.size() != s.d.size() + 1 || s.d.empty())
        throw ParseError("integrator tree file has inconsistent side arrays");
    return s;
}

} // namespace

IntegratorTree build_integrator_tree(const WeightedTree& t, const IntegratorTreeOptions& options)
{
    if (options.leaf_threshold < 3)
        throw PreconditionError("leaf threshold must be at least 3");
    if (options.quantization && *options.quantization < 1)
        throw PreconditionError("quantization q must be a positive integer");

    IntegratorTree it;
    it.n_ = t.vertex_count();
    it.leaf_threshold_ = options.leaf_threshold;
    it.quantization_ = options.quantization;

    std::vector<VertexId> ids(t.vertex_count());
    std::iota(ids.begin(), ids.end(), 0);
    Builder builder{options.leaf_threshold, options.quantization, it.nodes_};
    builder.build(t, std::move(ids));
    return it;
}

void IntegratorTree::serialize(std::ostream& out) const
{
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(n_));
    put<std::int32_t>(out, leaf_threshold_);
    put<std::int32_t>(out, quantization_.value_or(0));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(nodes_.size()));
    for (const auto& node : nodes_) {
        put<std::uint8_t>(out, static_cast<std::uint8_t>(node.kind));
        if (node.is_leaf()) {
            put_array(out, node.vertex_ids);
            const auto m = node.distances.rows();
            for (Eigen::Index i = 0; i < m; ++i)
                for (Eigen::Index j = 0; j < m; ++j)
                    put<double>(out, node.distances(i, j));
        } else {
            put<std::int32_t>(out, node.pivot);
            put<std::int32_t>(out, node.left_child);
            put<std::int32_t>(out, node.right_child);
            put_side(out, node.left);
            put_side(out, node.right);
        }
    }
    if (!out)
        throw ParseError("failed writing integrator tree");
}

IntegratorTree IntegratorTree::deserialize(std::istream& in)
{
    char magic[sizeof(kMagic)];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ParseError("not an integrator tree file (bad magic)");
    const auto version = get<std::uint32_t>(in);
    if (version != kVersion)
        throw ParseError("unsupported integrator tree format version " + std::to_string(version));

    IntegratorTree it;
    const auto n = get<std::uint32_t>(in);
    it.n_ = static_cast<VertexId>(n);
    it.leaf_threshold_ = get<std::int32_t>(in);
    const auto q = get<std::int32_t>(in);
    if (q > 0)
        it.quantization_ = q;
    const auto count = get<std::uint32_t>(in);
    if (count == 0 || count > 4 * std::max<std::uint32_t>(n, 1))
        throw ParseError("integrator tree file has an implausible node count");
    it.nodes_.resize(count);
    for (auto& node : it.nodes_) {
        const auto kind = get<std::uint8_t>(in);
        if (kind > 1)
            throw ParseError("integrator tree file has an unknown node kind");
        node.kind = static_cast<IntegratorTreeNode::Kind>(kind);
        if (node.is_leaf()) {
            node.vertex_ids = get_array<VertexId>(in, n);
            const auto m = static_cast<Eigen::Index>(node.vertex_ids.size());
            node.distances.resize(m, m);
            for (Eigen::Index i = 0; i < m; ++i)
                for (Eigen::Index j = 0; j < m; ++j)
                    node.distances(i, j) = get<double>(in);
        } else {
            node.pivot = get<std::int32_t>(in);
            node.left_child = get<std::int32_t>(in);
            node.right_child = get<std::int32_t>(in);
            if (node.left_child <= 0 || node.right_child <= 0 ||
                node.left_child >= static_cast<std::int32_t>(count) ||
                node.right_child >= static_cast<std::int32_t>(count))
                throw ParseError("integrator tree file has an invalid child index");
            node.left = get_side(in, n);
            node.right = get_side(in, n);
        }
    }
    return it;
}

void save_integrator_tree(const IntegratorTree& it, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError("cannot write " + path.string());
    it.serialize(out);
}

IntegratorTree load_integrator_tree(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open " + path.string());
    return IntegratorTree::deserialize(in);
}

IntegratorTreeStats it_stats(const IntegratorTree& it)
{
    IntegratorTreeStats stats;
    const auto nodes = it.nodes();
    stats.node_count = nodes.size();
    stats.vertex_multiplicity.assign(it.vertex_count(), 0);

    // Each node's input-tree ids come from the parent's side arrays; the root
    // holds every vertex.
    std::vector<int> depth(nodes.size(), 0);
    for (auto& m : stats.vertex_multiplicity)
        m = 1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& node = nodes[i];
        stats.depth = std::max(stats.depth, depth[i]);
        if (node.is_leaf()) {
            ++stats.leaf_count;
            continue;
        }
        for (const auto* side : {&node.left, &node.right}) {
            for (VertexId v : side->ids)
                ++stats.vertex_multiplicity[v];
            stats.side_distances.push_back(
                {static_cast<int>(i), side == &node.left, side->size(), side->distinct()});
        }
        depth[node.left_child] = depth[i] + 1;
        depth[node.right_child] = depth[i] + 1;
    }
    stats.max_vertex_multiplicity =
        stats.vertex_multiplicity.empty()
            ? 0
            : *std::max_element(stats.vertex_multiplicity.begin(), stats.vertex_multiplicity.end());
    return stats;
}

} // namespace ftfi
