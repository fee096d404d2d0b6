#include "ftfi/spectral.hpp"
#include "ftfi/engine.hpp"
#include "ftfi/errors.hpp"
#include "ftfi/rff.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace ftfi {

namespace {

Eigen::VectorXd random_unit(Eigen::Index n, std::uint64_t seed, std::uint64_t stream)
{
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = counter_normal(seed + 0x9e37 * stream, static_cast<std::uint64_t>(i));
    return v.normalized();
}

// Two passes of classical Gram-Schmidt against the first `cols` columns.
void orthogonalize(const Eigen::MatrixXd& basis, Eigen::Index cols, Eigen::VectorXd& v)
{
    for (int pass = 0; pass < 2; ++pass)
        v -= basis.leftCols(cols) * (basis.leftCols(cols).transpose() * v);
}

} // namespace

SpectralFeatures lanczos_extreme(const SymmetricOperator& op, Eigen::Index n, const SpectralOptions& options)
{
    const int k = options.k;
    if (k < 1 || k >= n)
        throw PreconditionError("need 1 <= k < n for k = " + std::to_string(k) + ", n = " + std::to_string(n));
    const int budget = options.max_iter > 0 ? options.max_iter : 5 * k + 50;
    const Eigen::Index cap = std::min<Eigen::Index>(n, std::max(2 * k + 20, std::min(budget, options.basis_limit)));
    const double sign = options.largest ? -1.0 : 1.0;

    Eigen::MatrixXd V(n, cap), AV(n, cap), T = Eigen::MatrixXd::Zero(cap, cap);
    Eigen::Index size = 0;
    Eigen::VectorXd next = random_unit(n, options.seed, 0);
    std::uint64_t restarts = 0;

    SpectralFeatures out;
    while (out.iterations < budget) {
        V.col(size) = next;
        AV.col(size) = sign * op(next);
        ++out.iterations;
        const Eigen::VectorXd h = V.leftCols(size + 1).transpose() * AV.col(size);
        T.block(0, size, size + 1, 1) = h;
        T.block(size, 0, 1, size + 1) = h.transpose();
        ++size;

        Eigen::VectorXd r = AV.col(size - 1);
        orthogonalize(V, size, r);
        const double beta = r.norm();

        if (size >= k) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T.topLeftCorner(size, size));
            const Eigen::VectorXd& theta = eig.eigenvalues();
            const Eigen::MatrixXd& S = eig.eigenvectors();
            const double scale = std::max(1.0, theta.cwiseAbs().maxCoeff());
            out.eigenvalues.assign(k, 0.0);
            out.residual_norms.assign(k, 0.0);
            bool all = true;
            for (int i = 0; i < k; ++i) {
                const Eigen::VectorXd y = V.leftCols(size) * S.col(i);
                const Eigen::VectorXd Ay = AV.leftCols(size) * S.col(i);
                out.eigenvalues[i] = sign * theta[i];
                out.residual_norms[i] = (Ay - theta[i] * y).norm();
                all = all && out.residual_norms[i] <= options.tol * scale;
            }
            if (all || size == n) {
                out.converged = all;
                return out;
            }
            if (size == cap) {
                // Keep the most useful Ritz vectors and continue from r.
                const Eigen::Index keep = std::min<Eigen::Index>(cap - 1, k + (cap - k) / 2);
                V.leftCols(keep) = V.leftCols(size) * S.leftCols(keep);
                AV.leftCols(keep) = AV.leftCols(size) * S.leftCols(keep);
                T.setZero();
                T.topLeftCorner(keep, keep) = theta.head(keep).asDiagonal();
                size = keep;
            }
        }

        if (beta > 1e-10 * std::max(1.0, AV.col(size - 1).norm())) {
            next = r / beta;
        } else {
            // Invariant subspace found; continue with a fresh direction.
            next = random_unit(n, options.seed, ++restarts);
            orthogonalize(V, size, next);
            if (next.norm() < 1e-8)
                break;
            next.normalize();
        }
    }
    return out;
}

SpectralFeatures smallest_eigenvalues(const IntegratorTree& it, const ScalarMap& f, const SpectralOptions& options)
{
    const Eigen::Index n = it.vertex_count();
    auto session = std::make_shared<IntegrationSession>(it, f);
    SymmetricOperator op = [session](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return session->integrate(Matrix(x)).col(0);
    };

    // Symmetry precondition on a random pair.
    const Eigen::VectorXd x = random_unit(n, options.seed ^ 0x5bd1e995, 1);
    const Eigen::VectorXd y = random_unit(n, options.seed ^ 0x5bd1e995, 2);
    const Eigen::VectorXd Mx = op(x), My = op(y);
    const double gap = std::abs(Mx.dot(y) - x.dot(My));
    if (gap > 1e-9 * std::max({1.0, Mx.norm(), My.norm()}))
        throw NumericError("f-integration operator is not symmetric (gap " + std::to_string(gap) + ")");

    SpectralOptions inner = options;
    const int budget = options.max_iter > 0 ? options.max_iter : 5 * options.k + 50;
    inner.max_iter = std::max(1, budget - 2);
    SpectralFeatures out = lanczos_extreme(op, n, inner);
    out.iterations += 2;
    return out;
}

void write_spectral_csv(std::ostream& out, int k, const std::vector<std::pair<std::string, SpectralFeatures>>& rows)
{
    out << "# schema_version=1\n";
    out << "graph_id";
    for (int i = 1; i <= k; ++i)
        out << ",ev_" << i;
    out << '\n';
    out << std::setprecision(17);
    for (const auto& [id, features] : rows) {
        out << id;
        for (int i = 0; i < k; ++i) {
            out << ',';
            if (i < static_cast<int>(features.eigenvalues.size()))
                out << features.eigenvalues[i];
        }
        out << '\n';
    }
}

} // namespace ftfi
