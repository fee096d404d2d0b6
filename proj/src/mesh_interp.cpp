#include "ftfi/mesh_interp.hpp"
#include "ftfi/engine.hpp"
#include "ftfi/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace ftfi {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

MeshInterpolationReport interpolate_mesh_normals(const Mesh& mesh, const MeshInterpolationOptions& options)
{
    if (!(options.mask_fraction >= 0.0 && options.mask_fraction < 1.0))
        throw PreconditionError("mask fraction must lie in [0, 1)");
    if (options.lambdas.empty())
        throw PreconditionError("lambda grid is empty");
    for (double l : options.lambdas)
        if (!(l >= 0.0) || !std::isfinite(l))
            throw PreconditionError("lambda must be finite and nonnegative");
    const VertexId n = mesh.graph.vertex_count();
    if (n < 2 || mesh.normals.rows() != n)
        throw PreconditionError("mesh needs at least two vertices with normals");

    MeshInterpolationReport report;
    report.vertices = static_cast<std::size_t>(n);

    std::vector<VertexId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(options.seed);
    std::shuffle(order.begin(), order.end(), rng);
    report.masked = static_cast<std::size_t>(std::llround(options.mask_fraction * n));
    const std::vector<VertexId> hidden(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(report.masked));
    report.empty_mask = hidden.empty();

    Matrix visible = mesh.normals;
    for (VertexId v : hidden)
        visible.row(v).setZero();

    const auto start = std::chrono::steady_clock::now();
    const WeightedTree tree = minimum_spanning_tree(mesh.graph);
    IntegratorTreeOptions it_options;
    it_options.leaf_threshold = options.leaf_threshold;
    const IntegratorTree it = build_integrator_tree(tree, it_options);
    report.preprocess_seconds = seconds_since(start);

    std::optional<Matrix> distances;
    if (n <= options.oracle_guard) {
        BruteForceOptions guard;
        guard.memory_guard = options.oracle_guard;
        distances = tree_distance_matrix(tree, guard);
    }

    for (double lambda : options.lambdas) {
        const ScalarMap f = Rational{{1.0}, {1.0, 0.0, lambda}};
        LambdaResult r;
        r.lambda = lambda;

        auto t0 = std::chrono::steady_clock::now();
        const Matrix predicted = ftfi_integrate({it, f, TensorField(visible), std::nullopt}).data();
        r.ftfi_seconds = seconds_since(t0);

        if (distances) {
            t0 = std::chrono::steady_clock::now();
            const Matrix reference = apply_entrywise(f, *distances) * visible;
            r.btfi_seconds = seconds_since(t0);
            const double denom = reference.norm();
            r.oracle_rel_diff = denom == 0.0 ? predicted.norm() : (predicted - reference).norm() / denom;
        }

        if (hidden.empty()) {
            r.mean_cosine = 1.0;
        } else {
            double sum = 0.0;
            for (VertexId v : hidden) {
                const double a = predicted.row(v).norm(), b = mesh.normals.row(v).norm();
                if (a > 0.0 && b > 0.0)
                    sum += predicted.row(v).dot(mesh.normals.row(v)) / (a * b);
            }
            r.mean_cosine = sum / static_cast<double>(hidden.size());
        }
        report.results.push_back(r);
    }
    for (std::size_t i = 1; i < report.results.size(); ++i)
        if (report.results[i].mean_cosine > report.results[report.best].mean_cosine)
            report.best = i;
    return report;
}

} // namespace ftfi
