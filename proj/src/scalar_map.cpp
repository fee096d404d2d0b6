#include "ftfi/scalar_map.hpp"
#include "ftfi/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ftfi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double x, const char* what)
{
    if (!std::isfinite(x))
        throw PreconditionError(std::string("non-finite ") + what);
}

void require_coeffs(const std::vector<double>& c, const char* what)
{
    if (c.empty())
        throw PreconditionError(std::string(what) + " needs at least one coefficient");
    if (c.size() > ScalarMap::kMaxPolynomialDegree + 1)
        throw PreconditionError(std::string(what) + " degree exceeds " +
                                std::to_string(ScalarMap::kMaxPolynomialDegree));
    for (double v : c)
        require_finite(v, what);
}

std::string hex(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", x);
    return buf;
}

std::string hex_list(const std::vector<double>& c)
{
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i)
        s += (i ? "," : "") + hex(c[i]);
    return s;
}

std::string plain(double x)
{
    std::ostringstream ss;
    ss.precision(17);
    ss << x;
    return ss.str();
}

std::string plain_list(const std::vector<double>& c)
{
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i)
        s += (i ? "," : "") + plain(c[i]);
    return s;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view tok, std::string_view spec)
{
    tok = trim(tok);
    std::string s(tok);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
        throw ParseError("malformed number '" + s + "' in f spec '" + std::string(spec) + "'");
    return v;
}

std::vector<double> parse_list(std::string_view body, std::string_view spec)
{
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = body.find(',', start);
        out.push_back(parse_number(body.substr(start, comma - start), spec));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

} // namespace

double evaluate_polynomial(const std::vector<double>& coeffs, double z)
{
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
        acc = acc * z + *it;
    return acc;
}

ScalarMap::ScalarMap() : ScalarMap(Polynomial{{0.0}}) {}

ScalarMap::ScalarMap(Variant v) : v_(std::move(v))
{
    std::visit(overloaded{
                   [](const Polynomial& p) { require_coeffs(p.coeffs, "polynomial"); },
                   [](const Exponential& e) { require_finite(e.lambda, "exponential rate"); },
                   [](const ExpTimesPoly& e) {
                       require_finite(e.lambda, "exponential rate");
                       require_coeffs(e.coeffs, "exp-times-polynomial");
                   },
                   [](const Trigonometric& t) { require_finite(t.frequency, "frequency"); },
                   [](const Rational& r) {
                       require_coeffs(r.num, "rational numerator");
                       require_coeffs(r.den, "rational denominator");
                       bool nonzero = false;
                       for (double b : r.den)
                           nonzero = nonzero || b != 0.0;
                       if (!nonzero)
                           throw PreconditionError("rational denominator is identically zero");
                   },
                   [](const ExpOverLinear& e) {
                       require_finite(e.lambda, "exponential rate");
                       require_finite(e.c, "shift");
                   },
                   [](const ExpQuadratic& q) {
                       require_finite(q.u, "quadratic coefficient");
                       require_finite(q.v, "linear coefficient");
                       require_finite(q.w, "constant coefficient");
                   },
                   [](const Tabulated& t) {
                       if (!t.fn)
                           throw PreconditionError("tabulated f needs a callable");
                   },
               },
               v_);
}

ScalarMap ScalarMap::gaussian(double sigma)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw PreconditionError("gaussian width must be positive");
    return ExpQuadratic{-1.0 / (2.0 * sigma * sigma), 0.0, 0.0};
}

double ScalarMap::operator()(double z) const
{
    return std::visit(
        overloaded{
            [z](const Polynomial& p) { return evaluate_polynomial(p.coeffs, z); },
            [z](const Exponential& e) { return std::exp(e.lambda * z); },
            [z](const ExpTimesPoly& e) { return std::exp(e.lambda * z) * evaluate_polynomial(e.coeffs, z); },
            [z](const Trigonometric& t) {
                return t.kind == TrigKind::Cos ? std::cos(t.frequency * z) : std::sin(t.frequency * z);
            },
            [z](const Rational& r) { return evaluate_polynomial(r.num, z) / evaluate_polynomial(r.den, z); },
            [z](const ExpOverLinear& e) { return std::exp(e.lambda * z) / (z + e.c); },
            [z](const ExpQuadratic& q) { return std::exp(q.u * z * z + q.v * z + q.w); },
            [z](const Tabulated& t) { return t.fn(z); },
        },
        v_);
}

std::string ScalarMap::fingerprint() const
{
    return std::visit(
        overloaded{
            [](const Polynomial& p) { return "poly[" + hex_list(p.coeffs) + "]"; },
            [](const Exponential& e) { return "exp[" + hex(e.lambda) + "]"; },
            [](const ExpTimesPoly& e) { return "exppoly[" + hex(e.lambda) + ";" + hex_list(e.coeffs) + "]"; },
            [](const Trigonometric& t) {
                return std::string(t.kind == TrigKind::Cos ? "cos[" : "sin[") + hex(t.frequency) + "]";
            },
            [](const Rational& r) { return "rat[" + hex_list(r.num) + "/" + hex_list(r.den) + "]"; },
            [](const ExpOverLinear& e) { return "expoverlin[" + hex(e.lambda) + "," + hex(e.c) + "]"; },
            [](const ExpQuadratic& q) {
                return "expquad[" + hex(q.u) + "," + hex(q.v) + "," + hex(q.w) + "]";
            },
            // Callables have no value identity; the name is the key.
            [](const Tabulated& t) { return "tab[" + t.name + "]"; },
        },
        v_);
}

std::string ScalarMap::describe() const
{
    return std::visit(
        overloaded{
            [](const Polynomial& p) { return "poly:" + plain_list(p.coeffs); },
            [](const Exponential& e) { return "exp:" + plain(e.lambda); },
            [](const ExpTimesPoly& e) { return "exppoly:" + plain(e.lambda) + ";" + plain_list(e.coeffs); },
            [](const Trigonometric& t) {
                return std::string(t.kind == TrigKind::Cos ? "trig:cos," : "trig:sin,") + plain(t.frequency);
            },
            [](const Rational& r) { return "rat:" + plain_list(r.num) + "/" + plain_list(r.den); },
            [](const ExpOverLinear& e) { return "expoverlin:" + plain(e.lambda) + "," + plain(e.c); },
            [](const ExpQuadratic& q) { return "expquad:" + plain(q.u) + "," + plain(q.v) + "," + plain(q.w); },
            [](const Tabulated& t) { return "tabulated:" + t.name; },
        },
        v_);
}

ScalarMap parse_scalar_map(std::string_view spec)
{
    const std::string_view full = spec;
    spec = trim(spec);
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos)
        throw ParseError("f spec '" + std::string(full) + "' lacks a 'kind:' prefix");
    const auto kind = trim(spec.substr(0, colon));
    const auto body = trim(spec.substr(colon + 1));
    if (body.empty())
        throw ParseError("f spec '" + std::string(full) + "' has no parameters");

    auto expect_count = [&](const std::vector<double>& v, std::size_t n) {
        if (v.size() != n)
            throw ParseError("f spec '" + std::string(full) + "' expects " + std::to_string(n) +
                             " parameter(s)");
    };

    try {
        if (kind == "poly")
            return Polynomial{parse_list(body, full)};
        if (kind == "exp") {
            auto v = parse_list(body, full);
            expect_count(v, 1);
            return Exponential{v[0]};
        }
        if (kind == "exppoly") {
            const auto semi = body.find(';');
            if (semi == std::string_view::npos)
                throw ParseError("f spec '" + std::string(full) + "' expects 'exppoly:lambda;a0,...'");
            return ExpTimesPoly{parse_number(body.substr(0, semi), full), parse_list(body.substr(semi + 1), full)};
        }
        if (kind == "trig") {
            const auto comma = body.find(',');
            const auto name = trim(body.substr(0, comma));
            double freq = 1.0;
            if (comma != std::string_view::npos)
                freq = parse_number(body.substr(comma + 1), full);
            if (name == "cos")
                return Trigonometric{TrigKind::Cos, freq};
            if (name == "sin")
                return Trigonometric{TrigKind::Sin, freq};
            throw ParseError("f spec '" + std::string(full) + "': trig kind must be sin or cos");
        }
        if (kind == "rat") {
            const auto slash = body.find('/');
            if (slash == std::string_view::npos)
                throw ParseError("f spec '" + std::string(full) + "' expects 'rat:a0,.../b0,...'");
            return Rational{parse_list(body.substr(0, slash), full), parse_list(body.substr(slash + 1), full)};
        }
        if (kind == "expoverlin") {
            auto v = parse_list(body, full);
            expect_count(v, 2);
            return ExpOverLinear{v[0], v[1]};
        }
        if (kind == "expquad") {
            auto v = parse_list(body, full);
            expect_count(v, 3);
            return ExpQuadratic{v[0], v[1], v[2]};
        }
        if (kind == "gauss") {
            auto v = parse_list(body, full);
            expect_count(v, 1);
            return ScalarMap::gaussian(v[0]);
        }
    } catch (const PreconditionError& e) {
        throw ParseError("f spec '" + std::string(full) + "': " + e.what());
    }
    throw ParseError("unknown f kind '" + std::string(kind) + "' in '" + std::string(full) + "'");
}

} // namespace ftfi
