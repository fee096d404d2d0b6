#pragma once

#include "ftfi/graph.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ftfi {

struct MeshInterpolationOptions {
    double mask_fraction = 0.8;
    std::vector<double> lambdas = {0.0, 0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0};
    std::uint64_t seed = 0;
    int leaf_threshold = 32;
    /// Brute-force comparison runs when n is at most this.
    Eigen::Index oracle_guard = 30000;
};

struct LambdaResult {
    double lambda = 0.0;
    double mean_cosine = 0.0;
    double ftfi_seconds = 0.0;
    std::optional<double> btfi_seconds;
    /// ||ftfi - btfi||_F / ||btfi||_F of the predicted normals.
    std::optional<double> oracle_rel_diff;
};

struct MeshInterpolationReport {
    std::size_t vertices = 0;
    std::size_t masked = 0;
    double preprocess_seconds = 0.0;
    std::vector<LambdaResult> results;
    std::size_t best = 0;  // index into results
    bool empty_mask = false;  // cosine reported as 1 by convention
};

/// Hides the normals of a random fraction of vertices and predicts them as
/// sum_j f(dist(i, j)) n_j over the visible vertices, with
/// f(x) = 1 / (1 + lambda x^2) and distances taken on the mesh MST.
MeshInterpolationReport interpolate_mesh_normals(const Mesh& mesh, const MeshInterpolationOptions& options = {});

} // namespace ftfi
