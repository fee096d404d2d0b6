#pragma once

#include "ftfi/integrator_tree.hpp"
#include "ftfi/scalar_map.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace ftfi {

struct SpectralOptions {
    int k = 10;
    /// Residual bound ||M x - l x|| <= tol * max(1, |l_max|) for unit x.
    double tol = 1e-8;
    /// Matrix-vector products allowed; 0 means 5 k + 50.
    int max_iter = 0;
    std::uint64_t seed = 0;
    /// Largest Krylov basis kept before a thick restart.
    int basis_limit = 200;
    /// Take the k algebraically largest values instead.
    bool largest = false;
};

struct SpectralFeatures {
    std::vector<double> eigenvalues;     // ascending (descending when `largest`)
    std::vector<double> residual_norms;
    int iterations = 0;                  // matrix-vector products used
    bool converged = false;
};

using SymmetricOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Thick-restarted Lanczos with full reorthogonalization on a symmetric
/// operator of size n. Returns partial results with converged = false when
/// the product budget runs out.
SpectralFeatures lanczos_extreme(const SymmetricOperator& op, Eigen::Index n, const SpectralOptions& options = {});

/// k smallest eigenvalues of the f-distance matrix, with f-integration over
/// `it` as the only access to the matrix.
SpectralFeatures smallest_eigenvalues(const IntegratorTree& it, const ScalarMap& f, const SpectralOptions& options = {});

/// "graph_id,ev_1,...,ev_k" header then one row per graph. A leading
/// "# schema_version=1" comment line identifies the format.
void write_spectral_csv(std::ostream& out, int k,
                        const std::vector<std::pair<std::string, SpectralFeatures>>& rows);

} // namespace ftfi
