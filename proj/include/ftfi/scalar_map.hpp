#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace ftfi {

/// f(z) = sum_t coeffs[t] z^t. At most 17 coefficients (degree 16).
struct Polynomial {
    std::vector<double> coeffs;
};

/// f(z) = exp(lambda z).
struct Exponential {
    double lambda = 0.0;
};

/// f(z) = exp(lambda z) * sum_t coeffs[t] z^t.
struct ExpTimesPoly {
    double lambda = 0.0;
    std::vector<double> coeffs;
};

enum class TrigKind { Sin, Cos };

/// f(z) = sin(frequency z) or cos(frequency z).
struct Trigonometric {
    TrigKind kind = TrigKind::Cos;
    double frequency = 1.0;
};

/// f(z) = (sum_t num[t] z^t) / (sum_s den[s] z^s).
struct Rational {
    std::vector<double> num;
    std::vector<double> den;
};

/// f(z) = exp(lambda z) / (z + c).
struct ExpOverLinear {
    double lambda = 0.0;
    double c = 1.0;
};

/// f(z) = exp(u z^2 + v z + w).
struct ExpQuadratic {
    double u = 0.0;
    double v = 0.0;
    double w = 0.0;
};

/// Arbitrary callable; only the dense and Hankel paths can use it.
struct Tabulated {
    std::function<double(double)> fn;
    std::string name;
};

/// Symbolic description of the scalar function applied to tree distances.
class ScalarMap {
public:
    using Variant = std::variant<Polynomial, Exponential, ExpTimesPoly, Trigonometric, Rational,
                                 ExpOverLinear, ExpQuadratic, Tabulated>;

    static constexpr std::size_t kMaxPolynomialDegree = 16;

    ScalarMap();
    /// Validates coefficient counts and finiteness; throws PreconditionError.
    ScalarMap(Variant v);  // NOLINT(google-explicit-constructor)
    template <typename T>
        requires(!std::is_same_v<std::decay_t<T>, Variant> && !std::is_same_v<std::decay_t<T>, ScalarMap> &&
                 std::is_constructible_v<Variant, T>)
    ScalarMap(T alternative)  // NOLINT(google-explicit-constructor)
        : ScalarMap(Variant(std::move(alternative)))
    {
    }

    static ScalarMap constant(double c) { return Polynomial{{c}}; }
    static ScalarMap identity() { return Polynomial{{0.0, 1.0}}; }
    /// exp(-z^2 / (2 sigma^2)) as an exponentiated quadratic.
    static ScalarMap gaussian(double sigma);

    double operator()(double z) const;

    const Variant& variant() const { return v_; }
    template <typename T>
    const T* get_if() const
    {
        return std::get_if<T>(&v_);
    }

    /// Exact, stable identifier (hex floats), usable as a cache key.
    std::string fingerprint() const;
    /// Human-readable form in the f-spec mini-language where possible.
    std::string describe() const;

private:
    Variant v_;
};

/// Parses the CLI mini-language:
///   poly:a0,a1,...   exp:l   exppoly:l;a0,a1,...   trig:cos[,w] | trig:sin[,w]
///   rat:a0,.../b0,...   expoverlin:l,c   expquad:u,v,w   gauss:sigma
/// Throws ParseError on malformed input.
ScalarMap parse_scalar_map(std::string_view spec);

double evaluate_polynomial(const std::vector<double>& coeffs, double z);

} // namespace ftfi
