#include "ftfi/cross_multiplier.hpp"
#include "ftfi/errors.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace ftfi {

namespace detail {

RealFft::RealFft(std::size_t n) : n_(n)
{
    auto in = make_real_buffer(n);
    auto out = make_complex_buffer(n / 2 + 1);
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), out.get(), in.get(), FFTW_ESTIMATE);
    if (!forward_ || !backward_)
        throw NumericError("FFTW failed to create a plan of length " + std::to_string(n));
}

RealFft::~RealFft()
{
    if (forward_)
        fftw_destroy_plan(forward_);
    if (backward_)
        fftw_destroy_plan(backward_);
}

} // namespace detail

namespace {

using detail::MultiplierImpl;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kExpLimit = 700.0;
constexpr Eigen::Index kMaterializeLimit = Eigen::Index{1} << 24;
constexpr long long kMaxVandermondeExponent = 1'000'000;

MultiplierOptions forced(Strategy s, std::optional<int> q = std::nullopt)
{
    MultiplierOptions o;
    o.quantization = q;
    o.force = s;
    return o;
}

double max_abs(std::span<const double> s)
{
    double m = 0.0;
    for (double v : s)
        m = std::max(m, std::abs(v));
    return m;
}

void check_finite_input(std::span<const double> x, std::span<const double> y)
{
    if (x.empty() || y.empty())
        throw PreconditionError("cross multiplier needs nonempty x and y");
    for (double v : x)
        if (!std::isfinite(v))
            throw NumericError("non-finite entry in x");
    for (double v : y)
        if (!std::isfinite(v))
            throw NumericError("non-finite entry in y");
}

void check_exp_range(double lambda, std::span<const double> x, std::span<const double> y)
{
    if (std::abs(lambda) * std::max(max_abs(x), max_abs(y)) > kExpLimit)
        throw NumericError("exp(lambda * distance) would overflow (|lambda * max distance| > 700); "
                           "rescale distances or lambda");
}

double binomial(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

// ---------------------------------------------------------------------------

class DenseImpl final : public MultiplierImpl {
public:
    DenseImpl(std::span<const double> x, std::span<const double> y, ScalarMap f)
        : x_(x.begin(), x.end()), y_(y.begin(), y.end()), f_(std::move(f))
    {
        if (static_cast<Eigen::Index>(x.size()) * static_cast<Eigen::Index>(y.size()) <= kMaterializeLimit)
            c_ = materialize_cross(x, y, f_);
    }

    Matrix apply(const Eigen::Ref<const Matrix>& V) const override
    {
        if (c_.size() > 0)
            return c_ * V;
        return stream(x_, y_, V);
    }

    Matrix apply_transpose(const Eigen::Ref<const Matrix>& W) const override
    {
        if (c_.size() > 0)
            return c_.transpose() * W;
        return stream(y_, x_, W);
    }

private:
    Matrix stream(const std::vector<double>& rows, const std::vector<double>& cols,
                  const Eigen::Ref<const Matrix>& V) const
    {
        Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), V.cols());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j) {
                const double c = f_(rows[i] + cols[j]);
                if (!std::isfinite(c))
                    throw NumericError("f is not finite at distance " + std::to_string(rows[i] + cols[j]));
                out.row(static_cast<Eigen::Index>(i)) += c * V.row(static_cast<Eigen::Index>(j));
            }
        return out;
    }

    std::vector<double> x_, y_;
    ScalarMap f_;
    Matrix c_;
};

// C = Xp G Yp^T where Xp(i, l) = e^{lambda x_i} x_i^l and
// G(l, r) = a_{l+r} binom(l + r, l).
class OuterProductImpl final : public MultiplierImpl {
public:
    OuterProductImpl(std::span<const double> x, std::span<const double> y, double lambda,
                     const std::vector<double>& coeffs)
    {
        check_exp_range(lambda, x, y);
        const int terms = static_cast<int>(coeffs.size());
        xp_ = powers(x, lambda, terms);
        yp_ = powers(y, lambda, terms);
        g_ = Matrix::Zero(terms, terms);
        for (int l = 0; l < terms; ++l)
            for (int r = 0; l + r < terms; ++r)
                g_(l, r) = coeffs[l + r] * binomial(l + r, l);
    }

    Matrix apply(const Eigen::Ref<const Matrix>& V) const override
    {
        const Matrix projected = yp_.transpose() * V;
        const Matrix mixed = g_ * projected;
        return xp_ * mixed;
    }

    Matrix apply_transpose(const Eigen::Ref<const Matrix>& W) const override
    {
        const Matrix projected = xp_.transpose() * W;
        const Matrix mixed = g_.transpose() * projected;
        return yp_ * mixed;
    }

private:
    static Matrix powers(std::span<const double> v, double lambda, int terms)
    {
        Matrix p(static_cast<Eigen::Index>(v.size()), terms);
        for (std::size_t i = 0; i < v.size(); ++i) {
            double acc = lambda == 0.0 ? 1.0 : std::exp(lambda * v[i]);
            for (int l = 0; l < terms; ++l) {
                p(static_cast<Eigen::Index>(i), l) = acc;
                acc *= v[i];
            }
        }
        return p;
    }

    Matrix xp_, yp_, g_;
};

// cos / sin through the complex rank-one terms e^{+-i w x} (e^{+-i w y})^T.
class TrigImpl final : public MultiplierImpl {
public:
    TrigImpl(std::span<const double> x, std::span<const double> y, Trigonometric f) : f_(f)
    {
        u_ = phases(x, f.frequency);
        w_ = phases(y, f.frequency);
    }

    Matrix apply(const Eigen::Ref<const Matrix>& V) const override
    {
        double residual = 0.0;
        return combine(u_, w_, V, residual);
    }

    Matrix apply_transpose(const Eigen::Ref<const Matrix>& W) const override
    {
        double residual = 0.0;
        return combine(w_, u_, W, residual);
    }

    Matrix combine(const Eigen::VectorXcd& left, const Eigen::VectorXcd& right, const Eigen::Ref<const Matrix>& V,
                   double& max_residual) const
    {
        const ComplexMatrix Vc = V.cast<Complex>();
        const Eigen::RowVectorXcd plus = right.transpose() * Vc;
        const Eigen::RowVectorXcd minus = right.conjugate().transpose() * Vc;
        const ComplexMatrix t1 = left * plus;
        const ComplexMatrix t2 = left.conjugate() * minus;
        ComplexMatrix out;
        if (f_.kind == TrigKind::Cos)
            out = (t1 + t2) * 0.5;
        else
            out = (t1 - t2) / Complex(0.0, 2.0);
        max_residual = 0.0;
        for (Eigen::Index i = 0; i < out.rows(); ++i)
            for (Eigen::Index j = 0; j < out.cols(); ++j)
                max_residual =
                    std::max(max_residual, std::abs(out(i, j).imag()) / (std::abs(out(i, j).real()) + 1.0));
        if (max_residual > 1e-10)
            throw NumericError("trigonometric path left an imaginary residual of " + std::to_string(max_residual));
        return out.real();
    }

private:
    static Eigen::VectorXcd phases(std::span<const double> v, double freq)
    {
        Eigen::VectorXcd p(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i)
            p[static_cast<Eigen::Index>(i)] = std::polar(1.0, freq * v[i]);
        return p;
    }

    Trigonometric f_;
    Eigen::VectorXcd u_, w_;
};

// Embeds C into the Hankel matrix H(k, l) = f((k + l) / q) and multiplies by
// FFT convolution.
class HankelImpl final : public MultiplierImpl {
public:
    HankelImpl(std::span<const double> x, std::span<const double> y, int q, const ScalarMap& f)
        : HankelImpl(x, y, q, generator(x, y, q, f))
    {
    }

    /// `h` holds f(s / q) for s = 0 .. max index sum.
    HankelImpl(std::span<const double> x, std::span<const double> y, int q, const std::vector<double>& gen)
    {
        kx_ = grid_indices(x, q);
        ky_ = grid_indices(y, q);
        lx_ = *std::max_element(kx_.begin(), kx_.end());
        ly_ = *std::max_element(ky_.begin(), ky_.end());
        std::size_t n = 1;
        while (n < static_cast<std::size_t>(lx_ + ly_ + std::max(lx_, ly_) + 1))
            n <<= 1;
        fft_ = std::make_shared<detail::RealFft>(n);

        auto h = detail::make_real_buffer(n);
        std::fill(h.get(), h.get() + n, 0.0);
        std::copy(gen.begin(), gen.begin() + (lx_ + ly_ + 1), h.get());
        auto spectrum = detail::make_complex_buffer(fft_->spectrum_size());
        fft_->forward(h.get(), spectrum.get());
        h_hat_.resize(fft_->spectrum_size());
        for (std::size_t k = 0; k < h_hat_.size(); ++k)
            h_hat_[k] = Complex(spectrum[k][0], spectrum[k][1]);
    }

    Matrix apply(const Eigen::Ref<const Matrix>& V) const override { return correlate(ky_, ly_, kx_, V); }
    Matrix apply_transpose(const Eigen::Ref<const Matrix>& W) const override { return correlate(kx_, lx_, ky_, W); }

    static std::vector<double> generator(std::span<const double> x, std::span<const double> y, int q,
                                         const ScalarMap& f)
    {
        const auto kx = grid_indices(x, q), ky = grid_indices(y, q);
        const long long len = *std::max_element(kx.begin(), kx.end()) + *std::max_element(ky.begin(), ky.end()) + 1;
        std::vector<double> h(static_cast<std::size_t>(len));
        for (long long s = 0; s < len; ++s) {
            h[static_cast<std::size_t>(s)] = f(static_cast<double>(s) / q);
            if (!std::isfinite(h[static_cast<std::size_t>(s)]))
                throw NumericError("f is not finite at distance " + std::to_string(static_cast<double>(s) / q));
        }
        return h;
    }

    /// FFT error is about eps * max|h| in every output entry. The ratio of
    /// max|h| to a lower bound on the smallest row (and column) scale bounds
    /// the relative error of the worst row; rows of an exp-polynomial kernel
    /// can sit fifteen orders of magnitude below the largest entry.
    static double dynamic_range(std::span<const double> x, std::span<const double> y, int q,
                                const std::vector<double>& h)
    {
        const auto kx = grid_indices(x, q), ky = grid_indices(y, q);
        const auto [ylo, yhi] = std::minmax_element(ky.begin(), ky.end());
        const auto [xlo, xhi] = std::minmax_element(kx.begin(), kx.end());
        double top = 0.0;
        for (long long s = *xlo + *ylo; s <= *xhi + *yhi; ++s)
            top = std::max(top, std::abs(h[static_cast<std::size_t>(s)]));
        // Row i contains h[kx_i + min ky] and h[kx_i + max ky]; likewise for columns.
        double floor = INFINITY;
        for (long long k : kx)
            floor = std::min(floor, std::max(std::abs(h[static_cast<std::size_t>(k + *ylo)]),
                                             std::abs(h[static_cast<std::size_t>(k + *yhi)])));
        for (long long k : ky)
            floor = std::min(floor, std::max(std::abs(h[static_cast<std::size_t>(k + *xlo)]),
                                             std::abs(h[static_cast<std::size_t>(k + *xhi)])));
        return top == 0.0 ? 1.0 : top / floor;
    }

    static std::vector<long long> grid_indices(std::span<const double> v, int q)
    {
        std::vector<long long> k(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double scaled = v[i] * q;
            const double r = std::round(scaled);
            if (std::abs(scaled - r) >= 1e-9 || r < 0.0)
                throw PreconditionError("HankelFFT needs nonnegative distances on the 1/" + std::to_string(q) +
                                        " grid; got " + std::to_string(v[i]));
            k[i] = static_cast<long long>(r);
        }
        return k;
    }

private:
    // out(i) = sum_j h[out_k[i] + in_k[j]] V(j), via the reversed scatter of V.
    Matrix correlate(const std::vector<long long>& in_k, long long in_len, const std::vector<long long>& out_k,
                     const Eigen::Ref<const Matrix>& V) const
    {
        const std::size_t n = fft_->size();
        auto buf = detail::make_real_buffer(n);
        auto spec = detail::make_complex_buffer(fft_->spectrum_size());
        Matrix out(static_cast<Eigen::Index>(out_k.size()), V.cols());
        const double scale = 1.0 / static_cast<double>(n);
        for (Eigen::Index c = 0; c < V.cols(); ++c) {
            std::fill(buf.get(), buf.get() + n, 0.0);
            for (std::size_t j = 0; j < in_k.size(); ++j)
                buf[in_len - in_k[j]] += V(static_cast<Eigen::Index>(j), c);
            fft_->forward(buf.get(), spec.get());
            for (std::size_t k = 0; k < h_hat_.size(); ++k) {
                const Complex prod = Complex(spec[k][0], spec[k][1]) * h_hat_[k];
                spec[k][0] = prod.real();
                spec[k][1] = prod.imag();
            }
            fft_->backward(spec.get(), buf.get());
            for (std::size_t i = 0; i < out_k.size(); ++i)
                out(static_cast<Eigen::Index>(i), c) = buf[out_k[i] + in_len] * scale;
        }
        return out;
    }

    std::vector<long long> kx_, ky_;
    long long lx_ = 0, ly_ = 0;
    std::shared_ptr<detail::RealFft> fft_;
    std::vector<Complex> h_hat_;
};

// C = D1 K D2 with K(i, j) = 1 / ((x_i + c/2) + (y_j + c/2)).
class CauchyImpl final : public MultiplierImpl {
public:
    CauchyImpl(std::span<const double> x, std::span<const double> y, ExpOverLinear f)
    {
        check_exp_range(f.lambda, x, y);
        const auto a = static_cast<Eigen::Index>(x.size()), b = static_cast<Eigen::Index>(y.size());
        xs_.resize(a);
        ys_.resize(b);
        d1_.resize(a);
        d2_.resize(b);
        for (Eigen::Index i = 0; i < a; ++i) {
            xs_[i] = x[i] + 0.5 * f.c;
            d1_[i] = std::exp(f.lambda * x[i]);
        }
        for (Eigen::Index j = 0; j < b; ++j) {
            ys_[j] = y[j] + 0.5 * f.c;
            d2_[j] = std::exp(f.lambda * y[j]);
        }
        const double scale = std::max({max_abs(x), max_abs(y), std::abs(f.c), 1.0});
        for (Eigen::Index i = 0; i < a; ++i)
            for (Eigen::Index j = 0; j < b; ++j)
                if (std::abs(xs_[i] + ys_[j]) < 1e-12 * scale)
                    throw NumericError("exp(l z)/(z + c) has a pole at distance " + std::to_string(x[i] + y[j]));
        if (a * b <= kMaterializeLimit) {
            k_.resize(a, b);
            for (Eigen::Index i = 0; i < a; ++i)
                for (Eigen::Index j = 0; j < b; ++j)
                    k_(i, j) = 1.0 / (xs_[i] + ys_[j]);
        }
    }

    Matrix apply(const Eigen::Ref<const Matrix>& V) const override
    {
        const Matrix scaled = d2_.asDiagonal() * V;
        Matrix core = k_.size() > 0 ? Matrix(k_ * scaled) : stream(xs_, ys_, scaled);
        return d1_.asDiagonal() * core;
    }

    Matrix apply_transpose(const Eigen::Ref<const Matrix>& W) const override
    {
        const Matrix scaled = d1_.asDiagonal() * W;
        Matrix core = k_.size() > 0 ? Matrix(k_.transpose() * scaled) : stream(ys_, xs_, scaled);
        return d2_.asDiagonal() * core;
    }

private:
    static Matrix stream(const Eigen::VectorXd& rows, const Eigen::VectorXd& cols, const Matrix& V)
    {
        Matrix out = Matrix::Zero(rows.size(), V.cols());
        for (Eigen::Index i = 0; i < rows.size(); ++i)
            for (Eigen::Index j = 0; j < cols.size(); ++j)
                out.row(i) += V.row(j) / (rows[i] + cols[j]);
        return out;
    }

    Eigen::VectorXd xs_, ys_, d1_, d2_;
    Matrix k_;
};

// C = e^w D1 Vand D2 with Vand(i, j) = r_i^{s_j}, r_i = exp(2 u x_i / q),
// s_j = q y_j; the exponents are completed to 0..S_max.
class VandermondeImpl final : public MultiplierImpl {
public:
    VandermondeImpl(std::span<const double> x, std::span<const double> y, int q, ExpQuadratic f)
    {
        s_ = HankelImpl::grid_indices(y, q);
        s_max_ = *std::max_element(s_.begin(), s_.end());
        if (s_max_ > kMaxVandermondeExponent)
            throw NumericError("Vandermonde exponent range " + std::to_string(s_max_) + " exceeds the 1e6 guard");
        const auto a = static_cast<Eigen::Index>(x.size()), b = static_cast<Eigen::Index>(y.size());
        d1_.resize(a);
        r_.resize(a);
        d2_.resize(b);
        for (Eigen::Index i = 0; i < a; ++i) {
            const double arg = f.u * x[i] * x[i] + f.v * x[i];
            const double log_r = 2.0 * f.u * x[i] / q;
            if (arg > kExpLimit || log_r * static_cast<double>(s_max_) > kExpLimit)
                throw NumericError("exp-quadratic factorization overflows at distance " + std::to_string(x[i]));
            d1_[i] = std::exp(arg + f.w);
            r_[i] = std::exp(log_r);
        }
        for (Eigen::Index j = 0; j < b; ++j) {
            const double arg = f.u * y[j] * y[j] + f.v * y[j];
            if (arg > kExpLimit)
                throw NumericError("exp-quadratic factorization overflows at distance " + std::to_string(y[j]));
            d2_[j] = std::exp(arg);
        }
    }

    Matrix apply(const Eigen::Ref<const Matrix>& V) const override
    {
        // Scatter D2 V onto exponents, then Horner per row.
        Matrix z = Matrix::Zero(s_max_ + 1, V.cols());
        for (std::size_t j = 0; j < s_.size(); ++j)
            z.row(s_[j]) += d2_[static_cast<Eigen::Index>(j)] * V.row(static_cast<Eigen::Index>(j));
        Matrix out(r_.size(), V.cols());
        Eigen::RowVectorXd acc(V.cols());
        for (Eigen::Index i = 0; i < r_.size(); ++i) {
            acc = z.row(s_max_);
            for (long long s = s_max_ - 1; s >= 0; --s)
                acc = acc * r_[i] + z.row(s);
            out.row(i) = d1_[i] * acc;
        }
        return out;
    }

    Matrix apply_transpose(const Eigen::Ref<const Matrix>& W) const override
    {
        // Power sums P[s] = sum_i r_i^s (D1 W)_i, gathered at s_j.
        Matrix scaled = d1_.asDiagonal() * W;
        Matrix p(s_max_ + 1, W.cols());
        Eigen::VectorXd pw = Eigen::VectorXd::Ones(r_.size());
        for (long long s = 0; s <= s_max_; ++s) {
            p.row(s) = pw.transpose() * scaled;
            pw.array() *= r_.array();
        }
        Matrix out(static_cast<Eigen::Index>(s_.size()), W.cols());
        for (std::size_t j = 0; j < s_.size(); ++j)
            out.row(static_cast<Eigen::Index>(j)) = d2_[static_cast<Eigen::Index>(j)] * p.row(s_[j]);
        return out;
    }

private:
    std::vector<long long> s_;
    long long s_max_ = 0;
    Eigen::VectorXd d1_, r_, d2_;
};

class ComplexLowRankImpl final : public MultiplierImpl {
public:
    ComplexLowRankImpl(Eigen::MatrixXcd u, Eigen::MatrixXcd w) : u_(std::move(u)), w_(std::move(w)) {}

    Matrix apply(const Eigen::Ref<const Matrix>& V) const override
    {
        const Eigen::MatrixXcd inner = w_.transpose() * V.cast<Complex>();
        return (u_ * inner).real();
    }

    Matrix apply_transpose(const Eigen::Ref<const Matrix>& W) const override
    {
        const Eigen::MatrixXcd inner = u_.transpose() * W.cast<Complex>();
        return (w_ * inner).real();
    }

private:
    Eigen::MatrixXcd u_, w_;
};

void check_rational_denominator(std::span<const double> x, std::span<const double> y, const Rational& r)
{
    const double lo = *std::min_element(x.begin(), x.end()) + *std::min_element(y.begin(), y.end());
    const double hi = *std::max_element(x.begin(), x.end()) + *std::max_element(y.begin(), y.end());
    double coeff_scale = 0.0;
    for (double b : r.den)
        coeff_scale = std::max(coeff_scale, std::abs(b));
    constexpr int kGrid = 256;
    double prev = evaluate_polynomial(r.den, lo);
    for (int k = 0; k <= kGrid; ++k) {
        const double z = lo + (hi - lo) * k / kGrid;
        const double value = evaluate_polynomial(r.den, z);
        const double tol = 1e-12 * coeff_scale * std::max(1.0, std::pow(std::abs(z), r.den.size() - 1));
        if (std::abs(value) < tol || (value > 0.0) != (prev > 0.0))
            throw NumericError("rational denominator has a root near distance " + std::to_string(z));
        prev = value;
    }
}

bool is_polynomial_family(const ScalarMap& f)
{
    return f.get_if<Polynomial>() || f.get_if<Exponential>() || f.get_if<ExpTimesPoly>() ||
           f.get_if<Trigonometric>();
}

std::shared_ptr<const MultiplierImpl> outer_product_impl(std::span<const double> x, std::span<const double> y,
                                                         const ScalarMap& f)
{
    if (const auto* p = f.get_if<Polynomial>())
        return std::make_shared<OuterProductImpl>(x, y, 0.0, p->coeffs);
    if (const auto* e = f.get_if<Exponential>())
        return std::make_shared<OuterProductImpl>(x, y, e->lambda, std::vector<double>{1.0});
    if (const auto* e = f.get_if<ExpTimesPoly>())
        return std::make_shared<OuterProductImpl>(x, y, e->lambda, e->coeffs);
    if (const auto* t = f.get_if<Trigonometric>())
        return std::make_shared<TrigImpl>(x, y, *t);
    throw PreconditionError("OuterProductSum needs a polynomial, exponential, exp-times-polynomial or "
                            "trigonometric f; got " + f.describe());
}

// Beyond this the FFT path loses more than about 1e-9 relative accuracy in
// its smallest rows; automatic dispatch then prefers an exact strategy.
constexpr double kHankelMaxDynamicRange = 1e6;

bool hankel_is_cheap(std::span<const double> x, std::span<const double> y, int q)
{
    const double lx = max_abs(x) * q, ly = max_abs(y) * q;
    return lx + ly <= 16.0 * static_cast<double>(x.size() + y.size()) + 64.0;
}

} // namespace

// ---------------------------------------------------------------------------

std::string to_string(Strategy s)
{
    switch (s) {
    case Strategy::Dense: return "Dense";
    case Strategy::OuterProductSum: return "OuterProductSum";
    case Strategy::HankelFFT: return "HankelFFT";
    case Strategy::CauchyLike: return "CauchyLike";
    case Strategy::VandermondeQuantized: return "VandermondeQuantized";
    case Strategy::RationalSum: return "RationalSum";
    case Strategy::RFF: return "RFF";
    }
    return "?";
}

std::optional<Strategy> strategy_from_string(std::string_view name)
{
    for (auto s : {Strategy::Dense, Strategy::OuterProductSum, Strategy::HankelFFT, Strategy::CauchyLike,
                   Strategy::VandermondeQuantized, Strategy::RationalSum, Strategy::RFF})
        if (to_string(s) == name)
            return s;
    return std::nullopt;
}

double strategy_tolerance(Strategy s)
{
    switch (s) {
    case Strategy::Dense: return 1e-12;
    case Strategy::OuterProductSum: return 1e-10;
    case Strategy::HankelFFT: return 1e-9;
    case Strategy::CauchyLike: return 1e-9;
    case Strategy::VandermondeQuantized: return 1e-8;
    case Strategy::RationalSum: return 1e-10;
    case Strategy::RFF: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

CrossMultiplier::CrossMultiplier(Strategy s, std::size_t rows, std::size_t cols,
                                 std::shared_ptr<const detail::MultiplierImpl> impl, int quantization)
    : strategy_(s), rows_(rows), cols_(cols), quantization_(quantization), impl_(std::move(impl))
{
}

std::string CrossMultiplier::label() const
{
    std::string out = to_string(strategy_);
    if (strategy_ == Strategy::HankelFFT || strategy_ == Strategy::VandermondeQuantized)
        out += "(q=" + std::to_string(quantization_) + ")";
    return out;
}

Matrix CrossMultiplier::apply(const Eigen::Ref<const Matrix>& V) const
{
    if (static_cast<std::size_t>(V.rows()) != cols_)
        throw PreconditionError("apply: V has " + std::to_string(V.rows()) + " rows, C has " +
                                std::to_string(cols_) + " columns");
    if (!V.allFinite())
        throw NumericError("apply: non-finite input");
    Matrix out = impl_->apply(V);
    if (!out.allFinite())
        throw NumericError("apply: " + label() + " produced non-finite output");
    return out;
}

Matrix CrossMultiplier::apply_transpose(const Eigen::Ref<const Matrix>& W) const
{
    if (static_cast<std::size_t>(W.rows()) != rows_)
        throw PreconditionError("apply_transpose: W has " + std::to_string(W.rows()) + " rows, C has " +
                                std::to_string(rows_) + " rows");
    if (!W.allFinite())
        throw NumericError("apply_transpose: non-finite input");
    Matrix out = impl_->apply_transpose(W);
    if (!out.allFinite())
        throw NumericError("apply_transpose: " + label() + " produced non-finite output");
    return out;
}

bool is_quantized(std::span<const double> values, int q)
{
    if (q < 1)
        return false;
    for (double v : values) {
        const double scaled = v * q;
        if (!(std::abs(scaled - std::round(scaled)) < 1e-9))
            return false;
    }
    return true;
}

Matrix materialize_cross(std::span<const double> x, std::span<const double> y, const ScalarMap& f)
{
    Matrix c(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) {
            const double value = f(x[i] + y[j]);
            if (!std::isfinite(value))
                throw NumericError("f = " + f.describe() + " is not finite at distance " +
                                   std::to_string(x[i] + y[j]));
            c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
        }
    return c;
}

CrossMultiplier build_multiplier(std::span<const double> x, std::span<const double> y, const ScalarMap& f,
                                 const MultiplierOptions& options)
{
    check_finite_input(x, y);
    const int q = options.quantization.value_or(0);
    const bool y_quantized = q > 0 && is_quantized(y, q);
    const bool both_quantized = y_quantized && is_quantized(x, q);
    const auto* expquad = f.get_if<ExpQuadratic>();

    auto make = [&](Strategy s, std::shared_ptr<const MultiplierImpl> impl) {
        return CrossMultiplier(s, x.size(), y.size(), std::move(impl), q);
    };
    auto make_rff = [&]() {
        const RFFSampler sampler = make_rff_sampler(f, options.rff_features, options.rff_seed);
        return make(Strategy::RFF, std::make_shared<ComplexLowRankImpl>(rff_features(x, sampler),
                                                                        rff_features(y, sampler)));
    };

    if (options.force) {
        switch (*options.force) {
        case Strategy::Dense:
            return make(Strategy::Dense, std::make_shared<DenseImpl>(x, y, f));
        case Strategy::OuterProductSum:
            return make(Strategy::OuterProductSum, outer_product_impl(x, y, f));
        case Strategy::HankelFFT:
            if (!both_quantized)
                throw PreconditionError("HankelFFT requested but the distances are not on a 1/q grid "
                                        "(supply a quantization q that matches the tree weights)");
            return make(Strategy::HankelFFT, std::make_shared<HankelImpl>(x, y, q, f));
        case Strategy::CauchyLike:
            if (const auto* e = f.get_if<ExpOverLinear>())
                return make(Strategy::CauchyLike, std::make_shared<CauchyImpl>(x, y, *e));
            throw PreconditionError("CauchyLike needs f = exp(l z)/(z + c); got " + f.describe());
        case Strategy::VandermondeQuantized:
            if (!expquad)
                throw PreconditionError("VandermondeQuantized needs f = exp(u z^2 + v z + w); got " + f.describe());
            if (!y_quantized)
                throw PreconditionError("VandermondeQuantized needs y on a 1/q grid");
            return make(Strategy::VandermondeQuantized, std::make_shared<VandermondeImpl>(x, y, q, *expquad));
        case Strategy::RationalSum:
            if (const auto* r = f.get_if<Rational>()) {
                check_rational_denominator(x, y, *r);
                return make(Strategy::RationalSum, std::make_shared<DenseImpl>(x, y, f));
            }
            throw PreconditionError("RationalSum needs a rational f; got " + f.describe());
        case Strategy::RFF:
            return make_rff();
        }
    }

    if (is_polynomial_family(f))
        return make(Strategy::OuterProductSum, outer_product_impl(x, y, f));
    if (expquad && y_quantized)
        return make(Strategy::VandermondeQuantized, std::make_shared<VandermondeImpl>(x, y, q, *expquad));
    if (both_quantized && hankel_is_cheap(x, y, q)) {
        auto h = HankelImpl::generator(x, y, q, f);
        if (HankelImpl::dynamic_range(x, y, q, h) <= kHankelMaxDynamicRange)
            return make(Strategy::HankelFFT, std::make_shared<HankelImpl>(x, y, q, h));
    }
    if (const auto* e = f.get_if<ExpOverLinear>())
        return make(Strategy::CauchyLike, std::make_shared<CauchyImpl>(x, y, *e));
    if (const auto* r = f.get_if<Rational>()) {
        check_rational_denominator(x, y, *r);
        return make(Strategy::RationalSum, std::make_shared<DenseImpl>(x, y, f));
    }
    return make(Strategy::Dense, std::make_shared<DenseImpl>(x, y, f));
}

// ---------------------------------------------------------------------------

Matrix dense_apply(std::span<const double> x, std::span<const double> y, const ScalarMap& f,
                   const Eigen::Ref<const Matrix>& V)
{
    return build_multiplier(x, y, f, forced(Strategy::Dense)).apply(V);
}

Matrix outer_product_apply(std::span<const double> x, std::span<const double> y, const ScalarMap& f,
                           const Eigen::Ref<const Matrix>& V)
{
    return build_multiplier(x, y, f, forced(Strategy::OuterProductSum)).apply(V);
}

Matrix hankel_fft_apply(std::span<const double> x, std::span<const double> y, int q, const ScalarMap& f,
                        const Eigen::Ref<const Matrix>& V)
{
    return build_multiplier(x, y, f, forced(Strategy::HankelFFT, q)).apply(V);
}

Matrix cauchy_like_apply(std::span<const double> x, std::span<const double> y, const ScalarMap& f,
                         const Eigen::Ref<const Matrix>& V)
{
    return build_multiplier(x, y, f, forced(Strategy::CauchyLike)).apply(V);
}

Matrix vandermonde_quantized_apply(std::span<const double> x, std::span<const double> y, int q,
                                   const ScalarMap& f, const Eigen::Ref<const Matrix>& V)
{
    return build_multiplier(x, y, f, forced(Strategy::VandermondeQuantized, q)).apply(V);
}

Matrix rational_sum_apply(std::span<const double> x, std::span<const double> y, const ScalarMap& f,
                          const Eigen::Ref<const Matrix>& V)
{
    return build_multiplier(x, y, f, forced(Strategy::RationalSum)).apply(V);
}

Matrix trig_apply_with_residual(std::span<const double> x, std::span<const double> y, const Trigonometric& f,
                                const Eigen::Ref<const Matrix>& V, double& max_residual)
{
    check_finite_input(x, y);
    TrigImpl impl(x, y, f);
    Eigen::VectorXcd u(static_cast<Eigen::Index>(x.size())), w(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        u[static_cast<Eigen::Index>(i)] = std::polar(1.0, f.frequency * x[i]);
    for (std::size_t j = 0; j < y.size(); ++j)
        w[static_cast<Eigen::Index>(j)] = std::polar(1.0, f.frequency * y[j]);
    return impl.combine(u, w, V, max_residual);
}

} // namespace ftfi
