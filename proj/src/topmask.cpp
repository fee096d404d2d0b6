#include "ftfi/topmask.hpp"
#include "ftfi/engine.hpp"
#include "ftfi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ftfi {

namespace {

bool integral_weights(const WeightedTree& t)
{
    for (const auto& e : t.edges())
        if (e.w != std::round(e.w))
            return false;
    return true;
}

double tree_diameter(const WeightedTree& t)
{
    const auto first = tree_distances_from(t, 0);
    const auto far = static_cast<VertexId>(std::max_element(first.begin(), first.end()) - first.begin());
    const auto second = tree_distances_from(t, far);
    return *std::max_element(second.begin(), second.end());
}

std::vector<double> square_polynomial(const std::vector<double>& p)
{
    std::vector<double> out(2 * p.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j)
            out[i + j] += p[i] * p[j];
    return out;
}

struct Aggregates {
    Matrix numerator;    // L x d, phi(q_i)^T devec(D1_i)
    Eigen::VectorXd normalizer;  // L, phi(q_i)^T D2_i
};

// Steps 1-3 of Algorithm 1 for one scalar function of the tree distance.
Aggregates integrate_aggregates(const Matrix& phi_q, const Matrix& phi_k, const Matrix& V, const IntegratorTree& it,
                                const ScalarMap& f)
{
    const Eigen::Index L = V.rows(), m = phi_k.cols(), d = V.cols();
    Matrix B(L, m * d + m);
    for (Eigen::Index i = 0; i < L; ++i) {
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < d; ++b)
                B(i, a * d + b) = phi_k(i, a) * V(i, b);
        B.row(i).tail(m) = phi_k.row(i);
    }
    IntegrationSession session(it, f);
    const Matrix D = session.integrate(B);

    Aggregates out{Matrix(L, d), Eigen::VectorXd(L)};
    for (Eigen::Index i = 0; i < L; ++i) {
        const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> d1(
            D.row(i).data(), m, d);
        out.numerator.row(i) = phi_q.row(i) * d1;
        out.normalizer[i] = phi_q.row(i).dot(D.row(i).tail(m));
    }
    return out;
}

void check_inputs(const AttentionInputs& in)
{
    if (in.Q.rows() < 1)
        throw PreconditionError("attention needs L >= 1");
    if (in.K.rows() != in.Q.rows() || in.V.rows() != in.Q.rows())
        throw PreconditionError("Q, K and V must have the same number of rows");
    if (in.Q.cols() != in.K.cols())
        throw PreconditionError("Q and K must have the same width");
    if (!in.Q.allFinite() || !in.K.allFinite() || !in.V.allFinite())
        throw NumericError("attention inputs contain non-finite values");
}

} // namespace

WeightedTree grid_mst(int rows, int cols)
{
    if (rows < 1 || cols < 1)
        throw PreconditionError("grid needs at least one row and one column");
    if (rows * cols == 1)
        return WeightedTree(1, {});
    return minimum_spanning_tree(grid_graph(rows, cols));
}

std::string to_string(FeatureMap phi)
{
    switch (phi) {
    case FeatureMap::ReLU: return "relu";
    case FeatureMap::Square: return "square";
    case FeatureMap::Fourth: return "fourth";
    case FeatureMap::Exp: return "exp";
    }
    return "?";
}

FeatureMap feature_map_from_string(std::string_view name)
{
    if (name == "relu")
        return FeatureMap::ReLU;
    if (name == "square" || name == "x2")
        return FeatureMap::Square;
    if (name == "fourth" || name == "x4")
        return FeatureMap::Fourth;
    if (name == "exp")
        return FeatureMap::Exp;
    throw ParseError("unknown feature map '" + std::string(name) + "' (relu, square, fourth, exp)");
}

Matrix apply_feature_map(FeatureMap phi, const Matrix& X)
{
    switch (phi) {
    case FeatureMap::ReLU: return X.cwiseMax(0.0);
    case FeatureMap::Square: return X.array().square().matrix();
    case FeatureMap::Fourth: return X.array().square().square().matrix();
    case FeatureMap::Exp: return X.array().exp().matrix();
    }
    return X;
}

std::string to_string(MaskLink g) { return g == MaskLink::Exp ? "exp" : "recip"; }

MaskLink mask_link_from_string(std::string_view name)
{
    if (name == "exp")
        return MaskLink::Exp;
    if (name == "recip" || name == "reciprocal")
        return MaskLink::Reciprocal;
    throw ParseError("unknown mask link '" + std::string(name) + "' (exp, recip)");
}

TopologicalMask::TopologicalMask(const WeightedTree& tree, MaskLink g, std::vector<double> coeffs,
                                 int leaf_threshold)
    : g_(g), coeffs_(std::move(coeffs))
{
    tree_ = std::make_shared<const WeightedTree>(tree);
    IntegratorTreeOptions options;
    options.leaf_threshold = leaf_threshold;
    if (integral_weights(tree))
        options.quantization = 1;
    it_ = std::make_shared<const IntegratorTree>(build_integrator_tree(tree, options));
    diameter_ = tree.vertex_count() > 1 ? tree_diameter(tree) : 0.0;
    validate();
}

TopologicalMask::TopologicalMask(std::shared_ptr<const WeightedTree> tree, std::shared_ptr<const IntegratorTree> it,
                                 double diameter, MaskLink g, std::vector<double> coeffs)
    : tree_(std::move(tree)), it_(std::move(it)), diameter_(diameter), g_(g), coeffs_(std::move(coeffs))
{
    validate();
}

TopologicalMask TopologicalMask::with_coefficients(std::vector<double> coeffs) const
{
    return TopologicalMask(tree_, it_, diameter_, g_, std::move(coeffs));
}

void TopologicalMask::validate() const
{
    const int t = degree();
    if (t != 1 && t != 2 && t != 5 && t != 10)
        throw PreconditionError("mask degree t must be 1, 2, 5 or 10; got " + std::to_string(t));
    for (double a : coeffs_)
        if (!std::isfinite(a))
            throw PreconditionError("mask coefficients must be finite");
    if (g_ != MaskLink::Reciprocal)
        return;
    std::vector<double> probes;
    if (it_->quantization())
        for (double x = 0.0; x <= diameter_; x += 1.0)
            probes.push_back(x);
    else
        for (int k = 0; k <= 1024; ++k)
            probes.push_back(diameter_ * k / 1024.0);
    for (double x : probes)
        if (!(evaluate_polynomial(coeffs_, x) > 0.0))
            throw PreconditionError("reciprocal mask has a pole or sign change: the polynomial is " +
                                    std::to_string(evaluate_polynomial(coeffs_, x)) + " at distance " +
                                    std::to_string(x));
}

double TopologicalMask::value(double distance) const
{
    const double p = evaluate_polynomial(coeffs_, distance);
    return g_ == MaskLink::Exp ? std::exp(p) : 1.0 / p;
}

ScalarMap TopologicalMask::f() const
{
    if (g_ == MaskLink::Reciprocal)
        return Rational{{1.0}, coeffs_};
    if (degree() == 1)
        return ExpTimesPoly{coeffs_[1], {std::exp(coeffs_[0])}};
    if (degree() == 2)
        return ExpQuadratic{coeffs_[2], coeffs_[1], coeffs_[0]};
    const auto c = coeffs_;
    return Tabulated{[c](double x) { return std::exp(evaluate_polynomial(c, x)); },
                     "exp(" + ScalarMap(Polynomial{c}).describe() + ")"};
}

ScalarMap TopologicalMask::derivative(int k) const
{
    if (k < 0 || k > degree())
        throw PreconditionError("coefficient index out of range");
    const auto c = coeffs_;
    const std::string poly = ScalarMap(Polynomial{c}).describe();
    if (g_ == MaskLink::Exp) {
        // d/da_k exp(P(x)) = exp(P(x)) x^k
        if (degree() == 1) {
            std::vector<double> monomial(k + 1, 0.0);
            monomial[k] = std::exp(c[0]);
            return ExpTimesPoly{c[1], monomial};
        }
        return Tabulated{[c, k](double x) { return std::exp(evaluate_polynomial(c, x)) * std::pow(x, k); },
                         "x^" + std::to_string(k) + " exp(" + poly + ")"};
    }
    // d/da_k 1/P(x) = -x^k / P(x)^2
    if (2 * degree() <= static_cast<int>(ScalarMap::kMaxPolynomialDegree)) {
        std::vector<double> monomial(k + 1, 0.0);
        monomial[k] = -1.0;
        return Rational{monomial, square_polynomial(c)};
    }
    return Tabulated{[c, k](double x) {
                         const double p = evaluate_polynomial(c, x);
                         return -std::pow(x, k) / (p * p);
                     },
                     "-x^" + std::to_string(k) + " / (" + poly + ")^2"};
}

Matrix TopologicalMask::dense() const
{
    const VertexId n = tree_->vertex_count();
    Matrix M(n, n);
    for (VertexId v = 0; v < n; ++v) {
        const auto d = tree_distances_from(*tree_, v);
        for (VertexId u = 0; u < n; ++u)
            M(v, u) = value(d[u]);
    }
    return M;
}

Matrix masked_attention_explicit(const AttentionInputs& in, const Matrix& M, Eigen::Index dense_guard)
{
    check_inputs(in);
    const Eigen::Index L = in.Q.rows();
    if (L > dense_guard)
        throw PreconditionError("explicit attention with L = " + std::to_string(L) + " exceeds the dense guard of " +
                                std::to_string(dense_guard));
    if (M.rows() != L || M.cols() != L)
        throw PreconditionError("mask must be L x L");
    const Matrix A = M.cwiseProduct(apply_feature_map(in.phi, in.Q) * apply_feature_map(in.phi, in.K).transpose());
    const Eigen::VectorXd D = A.rowwise().sum();
    for (Eigen::Index i = 0; i < L; ++i)
        if (D[i] == 0.0 || !std::isfinite(D[i]))
            throw NumericError("row normalizer " + std::to_string(i) + " is " + std::to_string(D[i]));
    return D.cwiseInverse().asDiagonal() * (A * in.V);
}

Matrix masked_attention_fast(const AttentionInputs& in, const TopologicalMask& mask)
{
    check_inputs(in);
    if (in.Q.rows() != mask.integrator_tree().vertex_count())
        throw PreconditionError("mask covers " + std::to_string(mask.integrator_tree().vertex_count()) +
                                " tokens, inputs have " + std::to_string(in.Q.rows()));
    const Matrix phi_q = apply_feature_map(in.phi, in.Q);
    const Matrix phi_k = apply_feature_map(in.phi, in.K);
    const Aggregates agg = integrate_aggregates(phi_q, phi_k, in.V, mask.integrator_tree(), mask.f());
    for (Eigen::Index i = 0; i < agg.normalizer.size(); ++i)
        if (!(agg.normalizer[i] > 0.0))
            throw NumericError("row normalizer " + std::to_string(i) + " is " + std::to_string(agg.normalizer[i]) +
                               "; the mask or feature map is not positive");
    return agg.normalizer.cwiseInverse().asDiagonal() * agg.numerator;
}

std::vector<double> mask_gradients(const AttentionInputs& in, const TopologicalMask& mask, const Matrix& upstream)
{
    check_inputs(in);
    if (upstream.rows() != in.V.rows() || upstream.cols() != in.V.cols())
        throw PreconditionError("upstream gradient must be L x d");
    const Matrix phi_q = apply_feature_map(in.phi, in.Q);
    const Matrix phi_k = apply_feature_map(in.phi, in.K);
    const IntegratorTree& it = mask.integrator_tree();
    const Aggregates base = integrate_aggregates(phi_q, phi_k, in.V, it, mask.f());
    for (Eigen::Index i = 0; i < base.normalizer.size(); ++i)
        if (!(base.normalizer[i] > 0.0))
            throw NumericError("row normalizer " + std::to_string(i) + " is not positive");

    // out_i = N_i / n_i, so d out_i = dN_i / n_i - N_i dn_i / n_i^2.
    const Eigen::VectorXd un = (upstream.cwiseProduct(base.numerator)).rowwise().sum();
    std::vector<double> grad(mask.parameter_count(), 0.0);
    for (int k = 0; k <= mask.degree(); ++k) {
        const Aggregates d = integrate_aggregates(phi_q, phi_k, in.V, it, mask.derivative(k));
        double g = 0.0;
        for (Eigen::Index i = 0; i < in.V.rows(); ++i) {
            const double n = base.normalizer[i];
            g += upstream.row(i).dot(d.numerator.row(i)) / n - un[i] * d.normalizer[i] / (n * n);
        }
        grad[k] = g;
    }
    return grad;
}

} // namespace ftfi
