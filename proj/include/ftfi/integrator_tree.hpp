#pragma once

#include "ftfi/graph.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace ftfi {

/// Per-side bookkeeping of an internal node. Side-local ids are assigned in
/// BFS order from the pivot, so the pivot is always local id 0.
struct SideArrays {
    std::vector<VertexId> ids;        // local id -> id in the input tree
    std::vector<VertexId> to_parent;  // local id -> local id in the parent node
    std::vector<double> d;            // distinct pivot distances, strictly increasing, d[0] == 0
    std::vector<std::int32_t> id_d;   // local id -> index into d
    std::vector<std::int32_t> s_offsets;  // group k is s_members[s_offsets[k] .. s_offsets[k+1])
    std::vector<VertexId> s_members;      // local ids grouped by distance, ascending within a group

    std::size_t size() const { return ids.size(); }
    std::size_t distinct() const { return d.size(); }
    std::span<const VertexId> group(std::size_t k) const
    {
        return {s_members.data() + s_offsets[k], s_members.data() + s_offsets[k + 1]};
    }
};

struct IntegratorTreeNode {
    enum class Kind : std::uint8_t { Leaf = 0, Internal = 1 };

    Kind kind = Kind::Leaf;

    // Leaf: local id -> input-tree id, and raw pairwise distances.
    std::vector<VertexId> vertex_ids;
    Matrix distances;

    // Internal: children are indices into IntegratorTree::nodes().
    VertexId pivot = -1;
    std::int32_t left_child = -1;
    std::int32_t right_child = -1;
    SideArrays left;
    SideArrays right;

    bool is_leaf() const { return kind == Kind::Leaf; }
    std::size_t vertex_count() const
    {
        return is_leaf() ? vertex_ids.size() : left.size() + right.size() - 1;
    }
};

struct IntegratorTreeOptions {
    /// Subtrees with at most this many vertices become dense leaves (>= 3).
    int leaf_threshold = 32;
    /// When set, pivot distances are rounded to multiples of 1/q before
    /// grouping and the cross-term multipliers may use the Hankel path.
    std::optional<int> quantization;
};

/// Balanced binary decomposition of a weighted tree, built once and reused
/// for every field and every f. Nodes are stored in preorder; node 0 is the
/// root and its local ids coincide with the input tree's ids.
class IntegratorTree {
public:
    IntegratorTree() = default;

    VertexId vertex_count() const { return n_; }
    int leaf_threshold() const { return leaf_threshold_; }
    std::optional<int> quantization() const { return quantization_; }
    std::span<const IntegratorTreeNode> nodes() const { return nodes_; }
    const IntegratorTreeNode& root() const { return nodes_.front(); }

    void serialize(std::ostream& out) const;
    static IntegratorTree deserialize(std::istream& in);

private:
    friend IntegratorTree build_integrator_tree(const WeightedTree&, const IntegratorTreeOptions&);

    VertexId n_ = 0;
    int leaf_threshold_ = 32;
    std::optional<int> quantization_;
    std::vector<IntegratorTreeNode> nodes_;
};

IntegratorTree build_integrator_tree(const WeightedTree& t, const IntegratorTreeOptions& options = {});
inline IntegratorTree build_integrator_tree(const WeightedTree& t, int leaf_threshold)
{
    return build_integrator_tree(t, IntegratorTreeOptions{leaf_threshold, std::nullopt});
}

void save_integrator_tree(const IntegratorTree& it, const std::filesystem::path& path);
IntegratorTree load_integrator_tree(const std::filesystem::path& path);

struct SideSummary {
    int node = 0;
    bool left = true;
    std::size_t vertices = 0;
    std::size_t distinct_distances = 0;
};

struct IntegratorTreeStats {
    std::size_t node_count = 0;
    std::size_t leaf_count = 0;
    int depth = 0;                            // root alone has depth 0
    int max_vertex_multiplicity = 0;          // nodes containing the busiest vertex
    std::vector<int> vertex_multiplicity;     // per input vertex
    std::vector<SideSummary> side_distances;  // one entry per internal-node side
};

IntegratorTreeStats it_stats(const IntegratorTree& it);

} // namespace ftfi
