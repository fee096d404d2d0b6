#include "oracles.hpp"

#include "ftfi/errors.hpp"
#include "ftfi/spectral.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <sstream>

using namespace ftfi;

TEST_CASE("two vertices")
{
    const IntegratorTree it = build_integrator_tree(WeightedTree(2, {{0, 1, 1.5}}), 32);
    SpectralOptions o;
    o.k = 1;
    const auto r = smallest_eigenvalues(it, ScalarMap::identity(), o);
    REQUIRE(r.converged);
    CHECK(r.eigenvalues[0] == doctest::Approx(-1.5).epsilon(1e-12));
    o.largest = true;
    CHECK(smallest_eigenvalues(it, ScalarMap::identity(), o).eigenvalues[0] == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("zero kernel")
{
    const IntegratorTree it = build_integrator_tree(random_tree(50, 1, uniform_weights()), 8);
    const auto r = smallest_eigenvalues(it, ScalarMap::constant(0.0));
    REQUIRE(r.eigenvalues.size() == 10);
    for (double v : r.eigenvalues)
        CHECK(std::abs(v) <= 1e-14);
}

TEST_CASE("agreement with a dense eigensolver")
{
    std::mt19937_64 rng(3);
    const std::vector<ScalarMap> kernels{ScalarMap::identity(), Exponential{-0.5}, Rational{{1}, {1, 0, 1}},
                                         ScalarMap::gaussian(0.7)};
    for (int trial = 0; trial < 8; ++trial) {
        const int n = std::uniform_int_distribution<int>(20, 300)(rng);
        const auto edges = oracle::random_attachment_tree(n, rng, 0.1, 1.0);
        const WeightedTree t(n, edges);
        const IntegratorTree it = build_integrator_tree(t, 16);
        const ScalarMap& f = kernels[static_cast<std::size_t>(trial) % kernels.size()];
        const Matrix d = oracle::tree_distances(n, edges);
        Matrix m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m(i, j) = f(d(i, j));
        const Eigen::VectorXd exact = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
        SpectralOptions o;
        o.max_iter = 2000;
        o.seed = static_cast<std::uint64_t>(trial);
        const auto r = smallest_eigenvalues(it, f, o);
        CAPTURE(n);
        CAPTURE(trial);
        REQUIRE(r.converged);
        for (int k = 0; k < 10; ++k)
            CHECK(std::abs(r.eigenvalues[static_cast<std::size_t>(k)] - exact[k]) <= 1e-6);
        CHECK(r.iterations <= 2000);
    }
}

TEST_CASE("operator-level checks")
{
    const Eigen::VectorXd diag = Eigen::VectorXd::LinSpaced(100, 1.0, 100.0);
    const SymmetricOperator op = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return diag.cwiseProduct(x); };
    SpectralOptions o;
    o.k = 3;
    const auto r = lanczos_extreme(op, 100, o);
    REQUIRE(r.converged);
    CHECK(r.eigenvalues[0] == doctest::Approx(1.0));
    CHECK(r.eigenvalues[2] == doctest::Approx(3.0));
    for (double res : r.residual_norms)
        CHECK(res <= 1e-8 * 100);

    o.k = 100;
    CHECK_THROWS_AS(lanczos_extreme(op, 100, o), PreconditionError);
    // A tiny budget reports partial results instead of failing.
    o.k = 5;
    o.max_iter = 6;
    CHECK(!lanczos_extreme(op, 100, o).converged);

}

TEST_CASE("feature CSV")
{
    SpectralFeatures a;
    a.eigenvalues = {-1.5, 0.25};
    SpectralFeatures b;
    b.eigenvalues = {2.0};
    std::ostringstream out;
    write_spectral_csv(out, 2, {{"g1", a}, {"g2", b}});
    CHECK(out.str() == "# schema_version=1\ngraph_id,ev_1,ev_2\ng1,-1.5,0.25\ng2,2,\n");
    std::ostringstream empty;
    write_spectral_csv(empty, 3, {});
    CHECK(empty.str() == "# schema_version=1\ngraph_id,ev_1,ev_2,ev_3\n");
}
