#include "oracles.hpp"

#include "ftfi/errors.hpp"
#include "ftfi/topmask.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace ftfi;

namespace {

std::vector<Edge> edge_list(const WeightedTree& t) { return {t.edges().begin(), t.edges().end()}; }

AttentionInputs random_inputs(Eigen::Index L, Eigen::Index m, Eigen::Index d, FeatureMap phi, std::mt19937_64& rng)
{
    AttentionInputs in;
    in.Q = oracle::random_matrix(L, m, rng);
    in.K = oracle::random_matrix(L, m, rng);
    in.V = oracle::random_matrix(L, d, rng);
    if (phi == FeatureMap::ReLU) {
        // Keep every normalizer positive: one coordinate of q and k is shifted up.
        in.Q.col(0).array() += 3.0;
        in.K.col(0).array() += 3.0;
    }
    if (phi == FeatureMap::Exp) {
        in.Q *= 0.5;
        in.K *= 0.5;
    }
    in.phi = phi;
    return in;
}

// Per-entry mask from independently computed tree distances.
Matrix oracle_mask(const WeightedTree& t, MaskLink g, const std::vector<double>& a)
{
    const Matrix d = oracle::tree_distances(t.vertex_count(), edge_list(t));
    Matrix m(d.rows(), d.cols());
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j) {
            double p = 0.0;
            for (std::size_t k = a.size(); k-- > 0;)
                p = p * d(i, j) + a[k];
            m(i, j) = g == MaskLink::Exp ? std::exp(p) : 1.0 / p;
        }
    return m;
}

// Unmasked linear attention with the bracketing phi(Q) (phi(K)^T V).
Matrix unmasked(const AttentionInputs& in)
{
    const Matrix q = apply_feature_map(in.phi, in.Q), k = apply_feature_map(in.phi, in.K);
    const Matrix num = q * (k.transpose() * in.V);
    const Eigen::VectorXd den = q * k.transpose().rowwise().sum();
    return den.cwiseInverse().asDiagonal() * num;
}

} // namespace

TEST_CASE("grid spanning trees")
{
    const WeightedTree line = grid_mst(1, 4);
    CHECK(line.vertex_count() == 4);
    for (const auto& e : line.edges())
        CHECK(std::abs(e.u - e.v) == 1);
    const WeightedTree square = grid_mst(2, 2);
    REQUIRE(square.edges().size() == 3);
    std::set<std::pair<VertexId, VertexId>> got;
    for (const auto& e : square.edges())
        got.insert({std::min(e.u, e.v), std::max(e.u, e.v)});
    CHECK(got == std::set<std::pair<VertexId, VertexId>>{{0, 1}, {0, 2}, {1, 3}});
    const WeightedTree vit = grid_mst(14, 14);
    CHECK(vit.vertex_count() == 196);
    CHECK(vit.edges().size() == 195);
    CHECK(grid_mst(1, 1).vertex_count() == 1);
}

TEST_CASE("explicit attention basics")
{
    std::mt19937_64 rng(1);
    const AttentionInputs in = random_inputs(32, 4, 3, FeatureMap::Square, rng);
    const Matrix ones = Matrix::Ones(32, 32);
    CHECK(oracle::rel_frobenius(masked_attention_explicit(in, ones), unmasked(in)) <= 1e-12);

    AttentionInputs single = random_inputs(1, 4, 3, FeatureMap::Square, rng);
    CHECK((masked_attention_explicit(single, Matrix::Constant(1, 1, 2.0)) - single.V).norm() <= 1e-14);

    // D^{-1} A is row stochastic: pushing V = 1 through returns 1.
    AttentionInputs stochastic = in;
    stochastic.V = Matrix::Ones(32, 1);
    const Matrix M = oracle_mask(grid_mst(4, 8), MaskLink::Exp, {0.1, -0.3});
    CHECK((masked_attention_explicit(stochastic, M) - Matrix::Ones(32, 1)).norm() <= 1e-12);

    CHECK_THROWS_AS(masked_attention_explicit(in, Matrix::Zero(32, 32)), NumericError);
    CHECK_THROWS_AS(masked_attention_explicit(in, Matrix::Ones(31, 31)), PreconditionError);
}

TEST_CASE("mask parameterization")
{
    const WeightedTree t = grid_mst(3, 3);
    const TopologicalMask quad(t, MaskLink::Exp, {0.1, -0.2, 0.01});
    CHECK(quad.parameter_count() == 3);
    CHECK(quad.degree() == 2);
    CHECK(oracle::rel_frobenius(quad.dense(), oracle_mask(t, MaskLink::Exp, {0.1, -0.2, 0.01})) <= 1e-14);
    const TopologicalMask rec(t, MaskLink::Reciprocal, {1.0, 1.0});
    CHECK(rec.value(3.0) == doctest::Approx(0.25));
    CHECK(rec.f()(3.0) == doctest::Approx(0.25));
    for (int t_deg : {5, 10}) {
        std::vector<double> a(static_cast<std::size_t>(t_deg) + 1, 0.0);
        a[0] = 1.0;
        a[1] = -0.01;
        const TopologicalMask m(t, MaskLink::Exp, a);
        CHECK(m.f()(2.0) == doctest::Approx(std::exp(0.98)));
    }
    CHECK_THROWS_AS(TopologicalMask(t, MaskLink::Exp, {1, 1, 1, 1}), PreconditionError);
    // 1 - x crosses zero inside the diameter of a 3 x 3 grid tree.
    CHECK_THROWS_AS(TopologicalMask(t, MaskLink::Reciprocal, {1.0, -1.0}), PreconditionError);
    CHECK(quad.with_coefficients({0, 0, 0}).dense().isOnes());
}

TEST_CASE("fast attention matches the explicit oracle")
{
    std::mt19937_64 rng(7);
    SUBCASE("constant mask is unmasked attention")
    {
        const AttentionInputs in = random_inputs(16, 3, 2, FeatureMap::Fourth, rng);
        const TopologicalMask mask(grid_mst(4, 4), MaskLink::Exp, {0.0, 0.0});
        CHECK(oracle::rel_frobenius(masked_attention_fast(in, mask), unmasked(in)) <= 1e-10);
    }
    SUBCASE("8 x 8, square features, quadratic exp mask")
    {
        const AttentionInputs in = random_inputs(64, 4, 3, FeatureMap::Square, rng);
        const std::vector<double> a{0.3, -0.4, 0.02};
        const TopologicalMask mask(grid_mst(8, 8), MaskLink::Exp, a);
        const Matrix expected = masked_attention_explicit(in, oracle_mask(mask.tree(), MaskLink::Exp, a));
        CHECK(oracle::rel_frobenius(masked_attention_fast(in, mask), expected) <= 1e-6);
    }
    SUBCASE("14 x 14, relu features, 1 / (1 + d)")
    {
        const AttentionInputs in = random_inputs(196, 4, 3, FeatureMap::ReLU, rng);
        const TopologicalMask mask(grid_mst(14, 14), MaskLink::Reciprocal, {1.0, 1.0});
        const Matrix expected = masked_attention_explicit(in, oracle_mask(mask.tree(), MaskLink::Reciprocal, {1, 1}));
        CHECK(oracle::rel_frobenius(masked_attention_fast(in, mask), expected) <= 1e-6);
    }
    SUBCASE("mismatched sizes")
    {
        const AttentionInputs in = random_inputs(15, 2, 2, FeatureMap::Square, rng);
        const TopologicalMask mask(grid_mst(4, 4), MaskLink::Exp, {0.0, 0.0});
        CHECK_THROWS_AS(masked_attention_fast(in, mask), PreconditionError);
    }
}

TEST_CASE("gradients")
{
    std::mt19937_64 rng(11);
    const AttentionInputs in = random_inputs(64, 3, 2, FeatureMap::Square, rng);
    const Matrix upstream = oracle::random_matrix(64, 2, rng);
    for (MaskLink g : {MaskLink::Exp, MaskLink::Reciprocal}) {
        const std::vector<double> a = g == MaskLink::Exp ? std::vector<double>{0.2, -0.3, 0.01}
                                                         : std::vector<double>{1.0, 0.5, 0.05};
        const TopologicalMask mask(grid_mst(8, 8), g, a);
        const auto grad = mask_gradients(in, mask, upstream);
        REQUIRE(grad.size() == 3);
        for (std::size_t k = 0; k < 3; ++k) {
            const double h = 1e-5;
            auto up = a, down = a;
            up[k] += h;
            down[k] -= h;
            const double fp = (upstream.array() * masked_attention_fast(in, mask.with_coefficients(up)).array()).sum();
            const double fm =
                (upstream.array() * masked_attention_fast(in, mask.with_coefficients(down)).array()).sum();
            const double fd = (fp - fm) / (2 * h);
            CAPTURE(k);
            // Central differences carry about 1e-10 of roundoff at h = 1e-5.
            CHECK(std::abs(grad[k] - fd) <= 1e-4 * std::max(std::abs(fd), 1e-6));
        }
        for (double v : mask_gradients(in, mask, Matrix::Zero(64, 2)))
            CHECK(v == 0.0);
    }
    // A constant mask cancels in the normalization, so a_0 has no effect.
    const TopologicalMask flat(grid_mst(8, 8), MaskLink::Exp, {0.7, 0.0});
    const auto grad = mask_gradients(in, flat, upstream);
    CHECK(std::abs(grad[0]) <= 1e-10 * (1 + std::abs(grad[1])));
}
