#pragma once

#include "ftfi/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace ftfi {

struct Edge {
    VertexId u = 0;
    VertexId v = 0;
    double w = 0.0;
};

struct Neighbor {
    VertexId id = 0;
    double w = 0.0;
};

/// Compressed adjacency, neighbors of every vertex sorted by ascending id.
class Adjacency {
public:
    Adjacency() = default;
    Adjacency(VertexId n, std::span<const Edge> edges);

    std::span<const Neighbor> operator[](VertexId v) const
    {
        return {entries_.data() + offsets_[v], entries_.data() + offsets_[v + 1]};
    }
    VertexId vertex_count() const { return static_cast<VertexId>(offsets_.size()) - 1; }

    /// Cache hints for traversals that know which vertices come next.
    void prefetch_offsets(VertexId v) const { __builtin_prefetch(offsets_.data() + v); }
    void prefetch_neighbors(VertexId v) const { __builtin_prefetch(entries_.data() + offsets_[v]); }

private:
    std::vector<std::size_t> offsets_{0};
    std::vector<Neighbor> entries_;
};

/// Undirected graph with strictly positive edge weights. Immutable.
class WeightedGraph {
public:
    WeightedGraph() = default;
    /// Throws PreconditionError on out-of-range ids, self loops, w <= 0 or
    /// duplicate undirected edges.
    WeightedGraph(VertexId n, std::vector<Edge> edges);

    VertexId vertex_count() const { return n_; }
    std::span<const Edge> edges() const { return edges_; }
    std::span<const Neighbor> neighbors(VertexId v) const { return adjacency_[v]; }
    const Adjacency& adjacency() const { return adjacency_; }

    bool is_connected() const;

private:
    VertexId n_ = 0;
    std::vector<Edge> edges_;
    Adjacency adjacency_;
};

/// Connected acyclic weighted graph. Immutable.
class WeightedTree {
public:
    WeightedTree() = default;
    /// Throws PreconditionError unless the edges form a spanning tree on n
    /// vertices with positive weights.
    WeightedTree(VertexId n, std::vector<Edge> edges);

    VertexId vertex_count() const { return n_; }
    std::span<const Edge> edges() const { return edges_; }
    std::span<const Neighbor> neighbors(VertexId v) const { return adjacency_[v]; }
    const Adjacency& adjacency() const { return adjacency_; }

    double total_weight() const;
    WeightedGraph as_graph() const { return WeightedGraph(n_, edges_); }

private:
    VertexId n_ = 0;
    std::vector<Edge> edges_;
    Adjacency adjacency_;
};

/// Vertex-indexed tensor field, stored flattened as n x D with D the product
/// of the trailing dimensions.
class TensorField {
public:
    TensorField() = default;
    explicit TensorField(Matrix data);
    TensorField(Matrix data, std::vector<Eigen::Index> dims);

    static TensorField zeros(Eigen::Index n, std::vector<Eigen::Index> dims);

    Eigen::Index rows() const { return data_.rows(); }
    Eigen::Index width() const { return data_.cols(); }
    const std::vector<Eigen::Index>& dims() const { return dims_; }
    const Matrix& data() const { return data_; }
    Matrix& data() { return data_; }

private:
    Matrix data_;
    std::vector<Eigen::Index> dims_;
};

// ---------------------------------------------------------------------------
// ingestion

/// Parses "u v w" lines; '#' starts a comment. Vertex count is 1 + max id.
WeightedGraph load_edge_list(const std::filesystem::path& path);
WeightedGraph parse_edge_list(std::istream& in);
void write_edge_list(const WeightedGraph& g, const std::filesystem::path& path);

struct Mesh {
    WeightedGraph graph;
    Matrix positions;  // n x 3
    Matrix normals;    // n x 3, unit rows (zero rows for vertices without faces)
    bool normals_from_file = false;
    int skipped_faces = 0;
};

/// Reads OFF (or NOFF with per-vertex normals). Polygons are fan-triangulated;
/// zero-area triangles are skipped and counted.
Mesh load_off_mesh(const std::filesystem::path& path);
Mesh parse_off_mesh(std::istream& in);

// ---------------------------------------------------------------------------
// metric operations

/// Kruskal with edges ordered by (weight, min id, max id).
WeightedTree minimum_spanning_tree(const WeightedGraph& g);

/// Path-sum distances from root. Children are accumulated in ascending
/// neighbor-id order, so results are bit-reproducible.
std::vector<double> tree_distances_from(const WeightedTree& t, VertexId root);

/// Dijkstra from every source; row i holds distances from sources[i].
Matrix graph_shortest_paths(const WeightedGraph& g, std::span<const VertexId> sources);

// ---------------------------------------------------------------------------
// synthetic inputs

using WeightSampler = std::function<double(std::mt19937_64&)>;

WeightSampler unit_weights();
/// Uniform on the open interval (lo, hi).
WeightSampler uniform_weights(double lo = 0.0, double hi = 1.0);
/// Weights e/q with e uniform in {1, ..., p}.
WeightSampler quantized_weights(int q, int p);

/// Uniformly random labelled tree (Pruefer decoding).
WeightedTree random_tree(VertexId n, std::uint64_t seed, const WeightSampler& weight);

/// Path 0-1-...-(n-1) plus `extra` distinct random chords, all weights
/// uniform in (0, 1).
WeightedGraph path_plus_random_edges(VertexId n, int extra, std::uint64_t seed);

/// Unit-weight rows x cols grid, vertices in row-major order.
WeightedGraph grid_graph(int rows, int cols);

} // namespace ftfi
