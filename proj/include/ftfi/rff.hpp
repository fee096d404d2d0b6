#pragma once

#include "ftfi/scalar_map.hpp"
#include "ftfi/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ftfi {

/// Monte-Carlo factorization of f(x + y) = E[mu(x)^T mu(y)] with
///   mu(t)_l = m^{-1/2} sqrt(tau(w_l) / p(w_l)) exp(2 pi i w_l t),
/// where tau is the Fourier transform of f under the convention
/// f(z) = int exp(2 pi i w z) tau(w) dw, and w_l ~ p (a centered Gaussian).
///
/// Frequencies come from a counter-based generator: w_l depends only on
/// (seed, l), never on evaluation order.
class RFFSampler {
public:
    /// Spectral density `tau` must be real and nonnegative.
    RFFSampler(std::function<double(double)> tau, double proposal_std, int features, std::uint64_t seed);

    /// f(z) = amplitude * exp(-z^2 / (2 sigma^2)). Without an explicit proposal
    /// width the proposal matches tau and every importance ratio is amplitude.
    static RFFSampler gaussian(double sigma, int features, std::uint64_t seed, double amplitude = 1.0,
                               double proposal_std = 0.0);

    /// Explicit frequencies and importance ratios tau/p (tests, replays).
    static RFFSampler from_frequencies(std::vector<double> omegas, std::vector<double> ratios);

    int features() const { return static_cast<int>(omegas_.size()); }
    std::span<const double> omegas() const { return omegas_; }
    std::span<const double> ratios() const { return ratios_; }

private:
    RFFSampler() = default;
    std::vector<double> omegas_;
    std::vector<double> ratios_;
};

/// Builds a sampler for f when its spectral density is known in closed form:
/// exp(u z^2 + w) with u < 0 and no linear term.
RFFSampler make_rff_sampler(const ScalarMap& f, int features, std::uint64_t seed);

/// Standard normal draw for counter `index` of stream `seed`.
double counter_normal(std::uint64_t seed, std::uint64_t index);

Eigen::VectorXcd rff_feature(double t, const RFFSampler& sampler);
/// One feature row per point.
Eigen::MatrixXcd rff_features(std::span<const double> points, const RFFSampler& sampler);

/// Unbiased estimate of C V for C(i, j) = f(x_i + y_j), as Re(U (W^T V)).
/// The discarded imaginary part is mean-zero noise; its Frobenius norm is
/// stored in `imag_norm` when given.
Matrix rff_apply(std::span<const double> x, std::span<const double> y, const RFFSampler& sampler,
                 const Eigen::Ref<const Matrix>& V, double* imag_norm = nullptr);

} // namespace ftfi
