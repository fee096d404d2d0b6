#pragma once

#include "ftfi/graph.hpp"
#include "ftfi/scalar_map.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ftfi {

struct MetricSample {
    VertexId v = 0;
    VertexId w = 0;
    double d_graph = 0.0;
    double d_tree = 0.0;
};

struct MetricPairDataset {
    std::vector<MetricSample> samples;
};

/// `count` uniform pairs v != w. Without replacement the pairs are distinct
/// (unordered); count may not exceed n(n-1)/2 then. The tree must span g.
MetricPairDataset sample_dataset(const WeightedGraph& g, const WeightedTree& t, int count = 100,
                                 std::uint64_t seed = 0, bool with_replacement = false);

/// f(x) = (a0 + a1 x + ...) / (b0 + b1 x + ...).
struct RationalParams {
    std::vector<double> num;
    std::vector<double> den;

    ScalarMap to_scalar_map() const { return Rational{num, den}; }
};

struct FitOptions {
    int num_degree = 2;
    int den_degree = 2;
    int steps = 200;
    double learning_rate = 1e-2;
};

struct FitResult {
    RationalParams params;
    /// MSE on raw distances; entry k is the loss before step k, the last
    /// entry the loss after the final step.
    std::vector<double> loss_trace;
    /// Index into loss_trace of the returned parameters (lowest penalized loss).
    int best_step = 0;
};

/// Adam on E[(d_graph - f(d_tree))^2], starting at f = id.
FitResult fit_rational(const MetricPairDataset& ds, const FitOptions& options = {});

/// MSE of f over the dataset; fills the analytic gradient (num then den)
/// when `gradient` is non-null.
double rational_mse(const MetricPairDataset& ds, const RationalParams& p, std::vector<double>* gradient = nullptr);

/// ||f(D_tree) - D_graph||_F / ||D_graph||_F with both matrices materialized.
double relative_frobenius_error(const WeightedGraph& g, const WeightedTree& t, const ScalarMap& f,
                                int dense_guard = 3000);

/// {"schema_version": 1, "num": [...], "den": [...]}
std::string params_to_json(const RationalParams& p);
/// Throws ParseError on malformed input.
RationalParams params_from_json(const std::string& text);

} // namespace ftfi
