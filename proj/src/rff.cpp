#include "ftfi/rff.hpp"
#include "ftfi/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ftfi {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform on (0, 1) from the top 53 bits.
double to_unit(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

double gaussian_pdf(double x, double s)
{
    return std::exp(-0.5 * (x / s) * (x / s)) / (s * std::sqrt(2.0 * std::numbers::pi));
}

} // namespace

double counter_normal(std::uint64_t seed, std::uint64_t index)
{
    const std::uint64_t key = splitmix64(seed ^ splitmix64(index));
    const double u1 = to_unit(splitmix64(key));
    const double u2 = to_unit(splitmix64(key + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RFFSampler::RFFSampler(std::function<double(double)> tau, double proposal_std, int features, std::uint64_t seed)
{
    if (features < 1)
        throw PreconditionError("random features need m >= 1");
    if (!(proposal_std > 0.0) || !std::isfinite(proposal_std))
        throw PreconditionError("proposal width must be positive");
    omegas_.resize(features);
    ratios_.resize(features);
    for (int l = 0; l < features; ++l) {
        const double w = proposal_std * counter_normal(seed, static_cast<std::uint64_t>(l));
        const double ratio = tau(w) / gaussian_pdf(w, proposal_std);
        if (!std::isfinite(ratio))
            throw NumericError("importance weight tau/p is not finite at frequency " + std::to_string(w));
        if (ratio < 0.0)
            throw NumericError("spectral density is negative at frequency " + std::to_string(w) +
                               "; the square-root feature form needs tau/p >= 0");
        omegas_[l] = w;
        ratios_[l] = ratio;
    }
}

RFFSampler RFFSampler::gaussian(double sigma, int features, std::uint64_t seed, double amplitude,
                                double proposal_std)
{
    if (!(sigma > 0.0))
        throw PreconditionError("gaussian width must be positive");
    if (!(amplitude >= 0.0))
        throw NumericError("negative amplitude gives a negative spectral density");
    const double matched = 1.0 / (2.0 * std::numbers::pi * sigma);
    if (proposal_std <= 0.0) {
        // tau equals amplitude times the N(0, matched^2) density.
        if (features < 1)
            throw PreconditionError("random features need m >= 1");
        RFFSampler s;
        s.omegas_.resize(features);
        s.ratios_.assign(features, amplitude);
        for (int l = 0; l < features; ++l)
            s.omegas_[l] = matched * counter_normal(seed, static_cast<std::uint64_t>(l));
        return s;
    }
    auto tau = [sigma, amplitude](double w) {
        const double a = std::numbers::pi * sigma * w;
        return amplitude * sigma * std::sqrt(2.0 * std::numbers::pi) * std::exp(-2.0 * a * a);
    };
    return RFFSampler(tau, proposal_std, features, seed);
}

RFFSampler RFFSampler::from_frequencies(std::vector<double> omegas, std::vector<double> ratios)
{
    if (omegas.empty() || omegas.size() != ratios.size())
        throw PreconditionError("frequencies and ratios must be nonempty and of equal length");
    for (double r : ratios)
        if (!(r >= 0.0) || !std::isfinite(r))
            throw NumericError("importance ratios must be finite and nonnegative");
    RFFSampler s;
    s.omegas_ = std::move(omegas);
    s.ratios_ = std::move(ratios);
    return s;
}

RFFSampler make_rff_sampler(const ScalarMap& f, int features, std::uint64_t seed)
{
    if (const auto* q = f.get_if<ExpQuadratic>(); q && q->u < 0.0 && q->v == 0.0) {
        const double sigma = std::sqrt(-1.0 / (2.0 * q->u));
        return RFFSampler::gaussian(sigma, features, seed, std::exp(q->w));
    }
    throw PreconditionError("no closed-form spectral density for f = " + f.describe() +
                            "; supply an RFFSampler with an explicit tau");
}

Eigen::VectorXcd rff_feature(double t, const RFFSampler& sampler)
{
    const int m = sampler.features();
    Eigen::VectorXcd mu(m);
    const double norm = 1.0 / std::sqrt(static_cast<double>(m));
    for (int l = 0; l < m; ++l)
        mu[l] = std::polar(norm * std::sqrt(sampler.ratios()[l]),
                           2.0 * std::numbers::pi * sampler.omegas()[l] * t);
    return mu;
}

Eigen::MatrixXcd rff_features(std::span<const double> points, const RFFSampler& sampler)
{
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(points.size()), sampler.features());
    for (std::size_t i = 0; i < points.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = rff_feature(points[i], sampler).transpose();
    return out;
}

Matrix rff_apply(std::span<const double> x, std::span<const double> y, const RFFSampler& sampler,
                 const Eigen::Ref<const Matrix>& V, double* imag_norm)
{
    if (V.rows() != static_cast<Eigen::Index>(y.size()))
        throw PreconditionError("rff_apply: V has " + std::to_string(V.rows()) + " rows, expected " +
                                std::to_string(y.size()));
    if (!V.allFinite())
        throw NumericError("rff_apply: non-finite input");
    const Eigen::MatrixXcd U = rff_features(x, sampler);
    const Eigen::MatrixXcd W = rff_features(y, sampler);
    const Eigen::MatrixXcd inner = W.transpose() * V.cast<std::complex<double>>();
    const Eigen::MatrixXcd out = U * inner;
    if (imag_norm)
        *imag_norm = out.imag().norm();
    return out.real();
}

} // namespace ftfi
