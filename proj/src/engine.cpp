#include "ftfi/engine.hpp"
#include "ftfi/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace ftfi {

namespace {

Matrix gather(const Matrix& X, const std::vector<VertexId>& rows)
{
    Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    return out;
}

// Sums field rows that share a pivot distance.
Matrix group_sums(const SideArrays& side, const Matrix& X)
{
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(side.distinct()), X.cols());
    for (std::size_t i = 0; i < side.size(); ++i)
        out.row(side.id_d[i]) += X.row(static_cast<Eigen::Index>(i));
    return out;
}

void check_guard(Eigen::Index n, const BruteForceOptions& options)
{
    if (n > options.memory_guard && !options.allow_large)
        throw PreconditionError("brute-force integration of " + std::to_string(n) +
                                " vertices exceeds the memory guard of " + std::to_string(options.memory_guard) +
                                "; pass the override to proceed");
}

void check_field(Eigen::Index n, const TensorField& X)
{
    if (X.rows() != n)
        throw PreconditionError("field has " + std::to_string(X.rows()) + " rows but the tree has " +
                                std::to_string(n) + " vertices");
}

} // namespace

IntegrationSession::IntegrationSession(const IntegratorTree& it, ScalarMap f, SessionOptions options)
    : it_(it), f_(std::move(f)), options_(options)
{
    if (it.nodes().empty())
        throw PreconditionError("integrator tree is empty");
    multipliers_.resize(it.nodes().size());
    leaf_kernels_.resize(it.nodes().size());
    leaf_ready_.assign(it.nodes().size(), 0);
}

const CrossMultiplier& IntegrationSession::multiplier(std::int32_t index)
{
    auto& slot = multipliers_[index];
    if (!slot) {
        const auto& node = it_.nodes()[index];
        MultiplierOptions mo;
        mo.quantization = it_.quantization();
        mo.force = options_.strategy_hint;
        mo.rff_features = options_.rff_features;
        mo.rff_seed = options_.rff_seed;
        slot = build_multiplier(node.left.d, node.right.d, f_, mo);
    }
    return *slot;
}

const Matrix& IntegrationSession::leaf_kernel(std::int32_t index)
{
    if (!leaf_ready_[index]) {
        leaf_kernels_[index] = apply_entrywise(f_, it_.nodes()[index].distances);
        leaf_ready_[index] = 1;
    }
    return leaf_kernels_[index];
}

void IntegrationSession::prepare()
{
    const auto nodes = it_.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].is_leaf())
            leaf_kernel(static_cast<std::int32_t>(i));
        else
            multiplier(static_cast<std::int32_t>(i));
    }
}

std::map<std::string, int> IntegrationSession::strategy_usage() const
{
    std::map<std::string, int> usage;
    for (const auto& m : multipliers_)
        if (m)
            ++usage[m->label()];
    return usage;
}

Matrix IntegrationSession::recurse(std::int32_t index, const Matrix& X)
{
    const auto& node = it_.nodes()[index];
    if (node.is_leaf())
        return leaf_kernel(index) * X;

    const SideArrays& L = node.left;
    const SideArrays& R = node.right;
    const Matrix XL = gather(X, L.to_parent);
    const Matrix XR = gather(X, R.to_parent);
    Matrix outL = recurse(node.left_child, XL);
    Matrix outR = recurse(node.right_child, XR);

    const CrossMultiplier& C = multiplier(index);
    const Matrix CX = C.apply(group_sums(R, XR));
    const Matrix CtY = C.apply_transpose(group_sums(L, XL));

    // The cross sums also reach the pivot on the far side; its own side
    // already counted it, so one column (row) of C times the pivot row is
    // removed. C(k, 0) pairs left distance k with the pivot's distance.
    std::vector<double> pivot_col(L.distinct()), pivot_row(R.distinct());
    for (std::size_t k = 0; k < L.distinct(); ++k)
        pivot_col[k] = f_(L.d[k] + R.d[0]);
    for (std::size_t k = 0; k < R.distinct(); ++k)
        pivot_row[k] = f_(L.d[0] + R.d[k]);

    for (std::size_t v = 0; v < L.size(); ++v) {
        const auto k = L.id_d[v];
        outL.row(static_cast<Eigen::Index>(v)) += CX.row(k) - pivot_col[k] * XR.row(0);
    }
    for (std::size_t v = 1; v < R.size(); ++v) {
        const auto k = R.id_d[v];
        outR.row(static_cast<Eigen::Index>(v)) += CtY.row(k) - pivot_row[k] * XL.row(0);
    }

    // The pivot's left value now covers both sides, so the right copy is dropped.
    Matrix out(X.rows(), X.cols());
    for (std::size_t v = 0; v < L.size(); ++v)
        out.row(L.to_parent[v]) = outL.row(static_cast<Eigen::Index>(v));
    for (std::size_t v = 1; v < R.size(); ++v)
        out.row(R.to_parent[v]) = outR.row(static_cast<Eigen::Index>(v));
    return out;
}

Matrix IntegrationSession::integrate(const Eigen::Ref<const Matrix>& X)
{
    if (X.rows() != it_.vertex_count())
        throw PreconditionError("field has " + std::to_string(X.rows()) + " rows but the tree has " +
                                std::to_string(it_.vertex_count()) + " vertices");
    if (!X.allFinite())
        throw NumericError("field contains non-finite values");
    return recurse(0, Matrix(X));
}

TensorField IntegrationSession::integrate(const TensorField& X)
{
    return TensorField(integrate(X.data()), X.dims());
}

TensorField ftfi_integrate(const IntegrationRequest& request)
{
    SessionOptions options;
    options.strategy_hint = request.strategy_hint;
    IntegrationSession session(request.it, request.f, options);
    return session.integrate(request.field);
}

// ---------------------------------------------------------------------------

Matrix apply_entrywise(const ScalarMap& f, const Matrix& distances)
{
    Matrix out(distances.rows(), distances.cols());
    for (Eigen::Index i = 0; i < distances.rows(); ++i)
        for (Eigen::Index j = 0; j < distances.cols(); ++j) {
            const double value = f(distances(i, j));
            if (!std::isfinite(value))
                throw NumericError("f = " + f.describe() + " is not finite at distance " +
                                   std::to_string(distances(i, j)));
            out(i, j) = value;
        }
    return out;
}

Matrix tree_distance_matrix(const WeightedTree& t, const BruteForceOptions& options)
{
    const VertexId n = t.vertex_count();
    check_guard(n, options);
    Matrix d(n, n);
    for (VertexId v = 0; v < n; ++v) {
        const auto row = tree_distances_from(t, v);
        d.row(v) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), n);
    }
    return d;
}

Matrix graph_distance_matrix(const WeightedGraph& g, const BruteForceOptions& options)
{
    const VertexId n = g.vertex_count();
    check_guard(n, options);
    std::vector<VertexId> sources(n);
    std::iota(sources.begin(), sources.end(), 0);
    return graph_shortest_paths(g, sources);
}

TensorField btfi_integrate(const WeightedTree& t, const ScalarMap& f, const TensorField& X,
                           const BruteForceOptions& options)
{
    check_field(t.vertex_count(), X);
    const Matrix kernel = apply_entrywise(f, tree_distance_matrix(t, options));
    return TensorField(kernel * X.data(), X.dims());
}

TensorField bgfi_integrate(const WeightedGraph& g, const ScalarMap& f, const TensorField& X,
                           const BruteForceOptions& options)
{
    check_field(g.vertex_count(), X);
    const Matrix kernel = apply_entrywise(f, graph_distance_matrix(g, options));
    return TensorField(kernel * X.data(), X.dims());
}

} // namespace ftfi
