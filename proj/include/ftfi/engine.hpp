#pragma once

#include "ftfi/cross_multiplier.hpp"
#include "ftfi/graph.hpp"
#include "ftfi/integrator_tree.hpp"
#include "ftfi/scalar_map.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ftfi {

struct IntegrationRequest {
    const IntegratorTree& it;
    ScalarMap f;
    const TensorField& field;
    std::optional<Strategy> strategy_hint;
};

struct SessionOptions {
    /// Forces one cross-term strategy at every internal node.
    std::optional<Strategy> strategy_hint;
    int rff_features = 256;
    std::uint64_t rff_seed = 0;
};

/// Repeated f-integration over one IntegratorTree with one f. Cross-term
/// multipliers and leaf kernels f(D) are built on first use and reused.
/// A session is not meant to be shared between threads.
class IntegrationSession {
public:
    IntegrationSession(const IntegratorTree& it, ScalarMap f, SessionOptions options = {});

    /// Builds every multiplier and leaf kernel up front.
    void prepare();

    /// out[v] = sum_j f(dist(v, j)) X[j], self term included.
    Matrix integrate(const Eigen::Ref<const Matrix>& X);
    TensorField integrate(const TensorField& X);

    /// Strategy label -> number of internal nodes using it (after prepare or integrate).
    std::map<std::string, int> strategy_usage() const;
    const ScalarMap& f() const { return f_; }

private:
    Matrix recurse(std::int32_t index, const Matrix& X);
    const CrossMultiplier& multiplier(std::int32_t index);
    const Matrix& leaf_kernel(std::int32_t index);

    const IntegratorTree& it_;
    ScalarMap f_;
    SessionOptions options_;
    std::vector<std::optional<CrossMultiplier>> multipliers_;
    std::vector<Matrix> leaf_kernels_;
    std::vector<char> leaf_ready_;
};

TensorField ftfi_integrate(const IntegrationRequest& request);

struct BruteForceOptions {
    /// Largest vertex count materialized without `allow_large`.
    Eigen::Index memory_guard = 30000;
    bool allow_large = false;
};

/// Explicit O(n^2) f-integration on a tree (the exactness oracle).
TensorField btfi_integrate(const WeightedTree& t, const ScalarMap& f, const TensorField& X,
                           const BruteForceOptions& options = {});
/// Explicit f-integration with graph shortest-path distances.
TensorField bgfi_integrate(const WeightedGraph& g, const ScalarMap& f, const TensorField& X,
                           const BruteForceOptions& options = {});

/// All pairwise tree distances, one traversal per vertex.
Matrix tree_distance_matrix(const WeightedTree& t, const BruteForceOptions& options = {});
/// All pairwise shortest-path distances (Dijkstra from every vertex).
Matrix graph_distance_matrix(const WeightedGraph& g, const BruteForceOptions& options = {});
/// f applied entrywise; NumericError names the first distance where f is not finite.
Matrix apply_entrywise(const ScalarMap& f, const Matrix& distances);

} // namespace ftfi
