// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
#include "oracles.hpp"

#include "ftfi/cross_multiplier.hpp"
#include "ftfi/engine.hpp"
#include "ftfi/errors.hpp"
#include "ftfi/learnfit.hpp"
#include "ftfi/mesh_interp.hpp"
#include "ftfi/rff.hpp"
#include "ftfi/separator.hpp"
#include "ftfi/spectral.hpp"
#include "ftfi/topmask.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <queue>
#include <sstream>
#include <string>

using namespace ftfi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Best of `repeats` runs; the minimum is the least noisy estimate on a shared machine.
double best_time(int repeats, const std::function<void()>& body)
{
    double best = INFINITY;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = Clock::now();
        body();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

// Least-squares slope of log(t) against log(n).
double loglog_slope(const std::vector<double>& n, const std::vector<double>& t)
{
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        mx += std::log(n[i]);
        my += std::log(t[i]);
    }
    mx /= static_cast<double>(n.size());
    my /= static_cast<double>(n.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        sxy += (std::log(n[i]) - mx) * (std::log(t[i]) - my);
        sxx += (std::log(n[i]) - mx) * (std::log(n[i]) - mx);
    }
    return sxy / sxx;
}

// ---------------------------------------------------------------------------

void exactness(Verdict& v)
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    const std::vector<ScalarMap> families{
        Polynomial{{0.3, -0.2, 0.1, -0.05, 0.01}},
        Exponential{-0.8},
        ExpTimesPoly{-0.6, {1.0, -0.5, 0.25}},
        Trigonometric{TrigKind::Cos, 1.3},
        Trigonometric{TrigKind::Sin, 0.7},
        ExpOverLinear{-0.4, 0.5},
        Rational{{1.0, 0.5, 0.1}, {1.0, 0.3, 0.2}},
    };
    const ScalarMap expquad = ExpQuadratic{-0.05, 0.1, -0.2};
    const Eigen::Index widths[] = {1, 3, 8};
    double worst = 0.0;
    int runs = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const VertexId n = std::uniform_int_distribution<VertexId>(10, 2000)(rng);
        const Eigen::Index D = widths[trial % 3];
        const TensorField X(oracle::random_matrix(n, D, rng));
        const WeightedTree t = random_tree(n, rng(), uniform_weights());
        const IntegratorTree it = build_integrator_tree(t, 16);
        for (const auto& f : families) {
            const TensorField fast = ftfi_integrate({it, f, X, std::nullopt});
            worst = std::max(worst, oracle::rel_frobenius(fast.data(), btfi_integrate(t, f, X).data()));
            ++runs;
        }
        // Exponentiated quadratic on a tree with weights on a 1/4 grid.
        const WeightedTree tq = random_tree(n, rng(), quantized_weights(4, 4));
        const IntegratorTree itq = build_integrator_tree(tq, IntegratorTreeOptions{16, 4});
        IntegrationSession session(itq, expquad);
        const Matrix fast = session.integrate(X.data());
        worst = std::max(worst, oracle::rel_frobenius(fast, btfi_integrate(tq, expquad, X).data()));
        v.require(session.strategy_usage().count("VandermondeQuantized(q=4)") > 0 || itq.root().is_leaf(),
                  "quantized tree did not use the Vandermonde path");
        ++runs;
    }
    const double elapsed = seconds_since(t0);
    v.require(worst <= 1e-8, "relative difference above 1e-8");
    v.require(elapsed <= 300.0, "suite slower than 5 min");
    v.detail << runs << " integrations, max rel diff " << worst << ", " << elapsed << " s";
}

bool side_connected(const WeightedTree& t, const std::vector<VertexId>& side)
{
    std::vector<char> in(static_cast<std::size_t>(t.vertex_count()), 0), seen(in.size(), 0);
    for (VertexId x : side)
        in[static_cast<std::size_t>(x)] = 1;
    std::queue<VertexId> q;
    q.push(side.front());
    seen[static_cast<std::size_t>(side.front())] = 1;
    std::size_t reached = 0;
    while (!q.empty()) {
        const VertexId x = q.front();
        q.pop();
        ++reached;
        for (const auto& nb : t.neighbors(x))
            if (in[static_cast<std::size_t>(nb.id)] && !seen[static_cast<std::size_t>(nb.id)]) {
                seen[static_cast<std::size_t>(nb.id)] = 1;
                q.push(nb.id);
            }
    }
    return reached == side.size();
}

void decomposition(Verdict& v)
{
    std::mt19937_64 rng(202);
    int bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const VertexId n = std::uniform_int_distribution<VertexId>(6, 5000)(rng);
        const WeightedTree t = random_tree(n, rng(), uniform_weights());
        const PivotDecomposition d = pivot_decompose(t);
        const std::size_t quarter = static_cast<std::size_t>((n + 3) / 4);
        std::vector<VertexId> both;
        std::set_intersection(d.left_vertices.begin(), d.left_vertices.end(), d.right_vertices.begin(),
                              d.right_vertices.end(), std::back_inserter(both));
        const bool ok = d.left_vertices.size() >= quarter && d.right_vertices.size() >= quarter &&
                        both == std::vector<VertexId>{d.pivot} &&
                        d.left_vertices.size() + d.right_vertices.size() == static_cast<std::size_t>(n) + 1 &&
                        side_connected(t, d.left_vertices) && side_connected(t, d.right_vertices);
        bad += ok ? 0 : 1;
    }
    v.require(bad == 0, std::to_string(bad) + " trees violate the split invariants");

    // Each repeat times a different random tree. Repeating one small tree lets
    // the branch predictor learn its degree sequence, which flatters small n.
    std::vector<double> sizes, times;
    for (double n : {1e3, 3e3, 1e4, 3e4, 1e5, 3e5, 1e6}) {
        const int repeats = n <= 1e5 ? 15 : 5;
        double best = INFINITY;
        for (int r = 0; r < repeats; ++r) {
            const WeightedTree t = random_tree(static_cast<VertexId>(n), 1000 + static_cast<std::uint64_t>(r),
                                               uniform_weights());
            best = std::min(best, best_time(1, [&] { (void)pivot_decompose(t); }));
        }
        sizes.push_back(n);
        times.push_back(best);
    }
    const double slope = loglog_slope(sizes, times);
    v.require(slope <= 1.15, "runtime exponent above 1.15");
    v.detail << "1000 trees ok=" << (bad == 0) << ", runtime exponent " << slope << " (1e3: " << times.front() * 1e3
             << " ms, 1e6: " << times.back() * 1e3 << " ms)";
}

void membership(Verdict& v)
{
    int worst_slack = 1 << 30;
    for (int e = 10; e <= 14; ++e) {
        const VertexId n = 1 << e;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const IntegratorTree it = build_integrator_tree(random_tree(n, seed * 31 + static_cast<std::uint64_t>(e),
                                                                        uniform_weights()),
                                                            16);
            const auto stats = it_stats(it);
            const double bound = std::log(static_cast<double>(n)) / std::log(4.0 / 3.0) + 2.0;
            v.require(stats.max_vertex_multiplicity <= bound, "n=" + std::to_string(n) + " exceeds the bound");
            worst_slack = std::min(worst_slack, static_cast<int>(std::floor(bound)) - stats.max_vertex_multiplicity);
        }
    }
    v.detail << "n = 2^10..2^14, 3 trees each, smallest slack to the bound " << worst_slack;
}

void scaling(Verdict& v)
{
    const ScalarMap f = Polynomial{{1.0, -0.5, 0.25}};
    std::mt19937_64 rng(303);
    // Each round times every size once on a fresh tree, smallest first, so N
    // and 2N run back to back under the same machine state. The ratio is taken
    // per round and the median over rounds is reported. Repeating one tree
    // lets small sizes live in cache and in the branch history.
    constexpr int lo = 10, hi = 16, rounds = 15;
    std::vector<std::vector<double>> secs(hi + 1);
    for (int r = 0; r < rounds; ++r)
        for (int e = lo; e <= hi; ++e) {
            const VertexId n = VertexId{1} << e;
            const WeightedTree t = random_tree(n, static_cast<std::uint64_t>(100 * e + r), unit_weights());
            const IntegratorTree it = build_integrator_tree(t, 32);
            IntegrationSession session(it, f);
            session.prepare();
            const Matrix X = oracle::random_matrix(n, 1, rng);
            (void)session.integrate(X);
            secs[e].push_back(best_time(3, [&] { (void)session.integrate(X); }));
        }
    auto median = [](std::vector<double> a) {
        std::nth_element(a.begin(), a.begin() + a.size() / 2, a.end());
        return a[a.size() / 2];
    };
    double worst_ratio = 0.0;
    std::ostringstream series, ratios;
    for (int e = lo; e <= hi; ++e) {
        series << (e == lo ? "" : ",") << median(secs[e]) * 1e3;
        if (e == lo)
            continue;
        std::vector<double> paired;
        for (int r = 0; r < rounds; ++r)
            paired.push_back(secs[e][r] / secs[e - 1][r]);
        const double ratio = median(paired);
        worst_ratio = std::max(worst_ratio, ratio);
        ratios << (e == lo + 1 ? "" : ",") << ratio;
    }
    v.require(worst_ratio <= 2.8, "doubling ratio above 2.8");

    const VertexId n = 8192;
    const WeightedTree t = random_tree(n, 99, unit_weights());
    const IntegratorTree it = build_integrator_tree(t, 32);
    IntegrationSession session(it, f);
    session.prepare();
    const Matrix X = oracle::random_matrix(n, 1, rng);
    const Matrix K = apply_entrywise(f, tree_distance_matrix(t));
    Matrix out(n, 1);
    const double brute = best_time(5, [&] { out.noalias() = K * X; });
    const double fast = best_time(20, [&] { (void)session.integrate(X); });
    const double diff = oracle::rel_frobenius(session.integrate(X), K * X);
    v.require(brute / fast >= 2.0, "speedup below 2x");
    v.require(diff <= 1e-8, "FTFI and BTFI disagree at n=8192");
    v.detail << "median integrate ms for 2^10..2^16 [" << series.str() << "], paired doubling ratios ["
             << ratios.str() << "], worst " << worst_ratio
             << "; n=8192 BTFI " << brute * 1e3 << " ms vs FTFI " << fast * 1e3 << " ms (" << brute / fast << "x)";
}

void structured(Verdict& v)
{
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<std::size_t> size(1, 512);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::map<Strategy, double> worst;
    double worst_adjoint = 0.0;
    auto points = [&](std::size_t n, double hi) {
        std::vector<double> p(n);
        for (auto& x : p)
            x = hi * unit(rng);
        return p;
    };
    auto grid = [&](std::size_t n, int q, int span) {
        std::vector<double> p(n);
        std::uniform_int_distribution<int> k(0, span);
        for (auto& x : p)
            x = static_cast<double>(k(rng)) / q;
        return p;
    };
    auto check = [&](std::span<const double> x, std::span<const double> y, const ScalarMap& f, std::optional<int> q,
                     Strategy s) {
        MultiplierOptions o;
        o.quantization = q;
        o.force = s;
        const CrossMultiplier c = build_multiplier(x, y, f, o);
        const Matrix dense = oracle::naive_cross(x, y, f);
        const Matrix V = oracle::random_matrix(static_cast<Eigen::Index>(y.size()), 2, rng);
        const Matrix W = oracle::random_matrix(static_cast<Eigen::Index>(x.size()), 2, rng);
        const Matrix CV = c.apply(V), CtW = c.apply_transpose(W);
        const double err = std::max(oracle::rel_frobenius(CV, dense * V),
                                    oracle::rel_frobenius(CtW, dense.transpose() * W));
        worst[s] = std::max(worst[s], err);
        const double lhs = (CV.array() * W.array()).sum(), rhs = (V.array() * CtW.array()).sum();
        // Relative to the size of the terms being summed, so near-zero inner products do not blow up.
        const double scale = std::max(std::abs(lhs), (CV.cwiseAbs().array() * W.cwiseAbs().array()).sum());
        worst_adjoint = std::max(worst_adjoint, std::abs(lhs - rhs) / scale);
    };
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t a = size(rng), b = size(rng);
        const auto x = points(a, 4.0), y = points(b, 4.0);
        const double u = -0.5 * unit(rng);
        check(x, y, ScalarMap(Rational{{1.0, unit(rng)}, {1.0, unit(rng), unit(rng)}}), std::nullopt, Strategy::Dense);
        switch (trial % 4) {
        case 0: check(x, y, Polynomial{{unit(rng), -unit(rng), unit(rng), 0.1}}, std::nullopt, Strategy::OuterProductSum); break;
        case 1: check(x, y, ExpTimesPoly{-unit(rng), {1.0, unit(rng)}}, std::nullopt, Strategy::OuterProductSum); break;
        case 2: check(x, y, Trigonometric{TrigKind::Cos, 2 * unit(rng)}, std::nullopt, Strategy::OuterProductSum); break;
        default: check(x, y, Exponential{-unit(rng)}, std::nullopt, Strategy::OuterProductSum); break;
        }
        check(x, y, ExpOverLinear{-unit(rng), 0.1 + unit(rng)}, std::nullopt, Strategy::CauchyLike);
        check(x, y, Rational{{unit(rng), 1.0, unit(rng)}, {1.0, unit(rng), unit(rng)}}, std::nullopt,
              Strategy::RationalSum);
        const int q = 1 + trial % 8;
        const auto gx = grid(a, q, 16 * q), gy = grid(b, q, 16 * q);
        const double w = 0.5 + unit(rng);
        check(gx, gy, Tabulated{[w](double z) { return std::sqrt(z + w); }, "sqrt_shift"}, q, Strategy::HankelFFT);
        check(x, gy, ExpQuadratic{u * 0.1, unit(rng) - 0.5, 0.0}, q, Strategy::VandermondeQuantized);
    }
    std::ostringstream per;
    for (const auto& [s, err] : worst) {
        v.require(err <= strategy_tolerance(s), to_string(s) + " above its tolerance");
        per << to_string(s) << "=" << err << " ";
    }
    v.require(worst_adjoint <= 1e-9, "adjoint identity above 1e-9");
    v.detail << "200 instances; max rel err " << per.str() << "; adjoint " << worst_adjoint;
}

void random_features(Verdict& v)
{
    std::mt19937_64 rng(505);
    // Entry-wise unbiasedness over 2000 seeds at 20 sampled pairs.
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<double> x(20), y(20);
    for (auto& t : x)
        t = u(rng);
    for (auto& t : y)
        t = u(rng);
    const ScalarMap f = ScalarMap::gaussian(1.0);
    const int seeds = 2000;
    std::vector<double> sum(20, 0.0), sum_sq(20, 0.0);
    for (int s = 0; s < seeds; ++s) {
        const RFFSampler sampler = make_rff_sampler(f, 32, static_cast<std::uint64_t>(s) + 10000);
        for (std::size_t i = 0; i < 20; ++i) {
            const double e = (rff_feature(x[i], sampler).transpose() * rff_feature(y[i], sampler))(0, 0).real();
            sum[i] += e;
            sum_sq[i] += e * e;
        }
    }
    double worst_z = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
        const double mean = sum[i] / seeds;
        const double se = std::sqrt((sum_sq[i] / seeds - mean * mean) / seeds);
        worst_z = std::max(worst_z, std::abs(mean - f(x[i] + y[i])) / se);
    }
    v.require(worst_z <= 4.0, "entry estimate beyond 4 standard errors");

    auto median_error = [&](int m) {
        std::mt19937_64 local(606);
        std::uniform_real_distribution<double> d(0.0, 3.0);
        std::vector<double> a(256), b(256);
        for (auto& t : a)
            t = d(local);
        for (auto& t : b)
            t = d(local);
        const Matrix V = oracle::random_matrix(256, 4, local);
        const Matrix exact = oracle::naive_cross(a, b, f) * V;
        std::vector<double> errors;
        for (int s = 0; s < 21; ++s)
            errors.push_back(oracle::rel_frobenius(rff_apply(a, b, make_rff_sampler(f, m, 500 + s), V), exact));
        return median(errors);
    };
    const double e1024 = median_error(1024), e4096 = median_error(4096);
    v.require(e4096 <= 0.05, "median error at m=4096 above 0.05");
    v.require(e4096 / e1024 >= 0.4 && e4096 / e1024 <= 0.7, "error ratio for 4x features outside [0.4, 0.7]");
    v.detail << "max |z| " << worst_z << " over 20 entries; median rel err m=1024 " << e1024 << ", m=4096 " << e4096
             << " (ratio " << e4096 / e1024 << ")";
}

void learnable(Verdict& v)
{
    const WeightedGraph g = path_plus_random_edges(800, 600, 0);
    const WeightedTree t = minimum_spanning_tree(g);
    const auto ds = sample_dataset(g, t, 100, 0);
    const FitResult fit = fit_rational(ds);
    const double eps_id = relative_frobenius_error(g, t, ScalarMap::identity());
    const double eps_fit = relative_frobenius_error(g, t, fit.params.to_scalar_map());
    double best40 = fit.loss_trace.front();
    for (std::size_t k = 1; k <= 40; ++k)
        best40 = std::min(best40, fit.loss_trace[k]);
    v.require(eps_fit < eps_id, "fitted error not below the identity baseline");
    v.require(best40 < fit.loss_trace.front(), "loss did not decrease within 40 steps");

    const WeightedTree tree = random_tree(300, 5, uniform_weights());
    const double eps_tree = relative_frobenius_error(tree.as_graph(), tree, ScalarMap::identity());
    v.require(eps_tree <= 1e-12, "tree input has nonzero error at init");
    v.detail << "eps id " << eps_id << " -> fitted " << eps_fit << "; loss " << fit.loss_trace.front() << " -> "
             << fit.loss_trace[40] << " at step 40; tree eps " << eps_tree;
}

void attention(Verdict& v)
{
    std::mt19937_64 rng(707);
    const int sides[][2] = {{4, 4}, {8, 8}, {14, 14}};
    const FeatureMap phis[] = {FeatureMap::ReLU, FeatureMap::Square, FeatureMap::Fourth, FeatureMap::Exp};
    const int degrees[] = {1, 2, 5, 10};
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst = 0.0, worst_grad = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto& side = sides[trial % 3];
        const FeatureMap phi = phis[(trial / 3) % 4];
        const MaskLink g = trial % 2 == 0 ? MaskLink::Exp : MaskLink::Reciprocal;
        const int t = degrees[(trial / 2) % 4];
        const WeightedTree tree = grid_mst(side[0], side[1]);
        const double diam = side[0] + side[1];
        // Coefficients scaled by the diameter keep every term of the polynomial O(1).
        std::vector<double> a(static_cast<std::size_t>(t) + 1);
        for (std::size_t k = 0; k < a.size(); ++k)
            a[k] = (g == MaskLink::Exp ? unit(rng) : 0.5 * (unit(rng) + 1.0)) / std::pow(diam, static_cast<double>(k));
        if (g == MaskLink::Reciprocal)
            a[0] = 1.0;
        const TopologicalMask mask(tree, g, a);

        const Eigen::Index L = side[0] * side[1];
        AttentionInputs in;
        in.Q = oracle::random_matrix(L, 4, rng);
        in.K = oracle::random_matrix(L, 4, rng);
        in.V = oracle::random_matrix(L, 3, rng);
        in.phi = phi;
        if (phi == FeatureMap::ReLU) {
            in.Q.col(0).array() += 3.0;
            in.K.col(0).array() += 3.0;
        }
        const Matrix dense_mask = [&] {
            const Matrix d = oracle::tree_distances(tree.vertex_count(), {tree.edges().begin(), tree.edges().end()});
            return d.unaryExpr([&](double x) { return mask.value(x); }).eval();
        }();
        worst = std::max(worst, oracle::rel_frobenius(masked_attention_fast(in, mask),
                                                      masked_attention_explicit(in, dense_mask)));

        const Matrix upstream = oracle::random_matrix(L, 3, rng);
        const auto grad = mask_gradients(in, mask, upstream);
        std::vector<double> fd(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double h = 1e-5 / std::pow(diam, static_cast<double>(k));
            auto up = a, down = a;
            up[k] += h;
            down[k] -= h;
            const double fp = (upstream.array() * masked_attention_fast(in, mask.with_coefficients(up)).array()).sum();
            const double fm = (upstream.array() * masked_attention_fast(in, mask.with_coefficients(down)).array()).sum();
            fd[k] = (fp - fm) / (2 * h);
        }
        // Componentwise against the largest component: the exp link has an exactly zero a_0 gradient.
        double scale = 0.0, err = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double w = std::pow(diam, -static_cast<double>(k));
            scale = std::max(scale, std::abs(fd[k]) * w);
            err = std::max(err, std::abs(grad[k] - fd[k]) * w);
        }
        worst_grad = std::max(worst_grad, err / scale);
    }
    v.require(worst <= 1e-6, "fast path differs from the explicit oracle");
    v.require(worst_grad <= 1e-4, "gradients differ from finite differences");
    v.detail << "50 instances, max rel diff " << worst << ", max gradient rel err " << worst_grad;
}

void spectral(Verdict& v)
{
    std::mt19937_64 rng(808);
    const std::vector<ScalarMap> kernels{ScalarMap::identity(), Exponential{-0.5}, Rational{{1}, {1, 0, 1}},
                                         ScalarMap::gaussian(0.7)};
    double worst = 0.0;
    int max_products = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = std::uniform_int_distribution<int>(20, 300)(rng);
        const auto edges = oracle::random_attachment_tree(n, rng, 0.0, 1.0);
        const WeightedTree t(n, edges);
        const ScalarMap& f = kernels[static_cast<std::size_t>(trial) % kernels.size()];
        const Matrix m = oracle::tree_distances(n, edges).unaryExpr([&](double d) { return f(d); });
        const Eigen::VectorXd exact = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
        SpectralOptions o;
        o.k = 10;
        o.max_iter = 2000;
        o.seed = static_cast<std::uint64_t>(trial);
        const auto r = smallest_eigenvalues(build_integrator_tree(t, 16), f, o);
        v.require(r.converged, "solver did not converge on trial " + std::to_string(trial));
        for (int k = 0; k < 10; ++k)
            worst = std::max(worst, std::abs(r.eigenvalues[static_cast<std::size_t>(k)] - exact[k]));
        max_products = std::max(max_products, r.iterations);
    }
    v.require(worst <= 1e-6, "eigenvalue error above 1e-6");
    v.detail << "20 trees, max abs err " << worst << ", at most " << max_products << " products";
}

void mesh(Verdict& v)
{
    const Mesh m = load_off_mesh(FTFI_DATA_DIR "/bumpy_ellipsoid.off");
    const auto report = interpolate_mesh_normals(m);
    double worst = 0.0;
    for (const auto& r : report.results) {
        v.require(r.oracle_rel_diff.has_value(), "brute-force comparison missing");
        worst = std::max(worst, r.oracle_rel_diff.value_or(INFINITY));
    }
    const auto& best = report.results[report.best];
    v.require(worst <= 1e-8, "FTFI and BTFI predictions differ");
    v.require(best.mean_cosine > 0.0, "no lambda with positive cosine similarity");
    v.detail << report.vertices << " vertices, " << report.masked << " masked, max rel diff " << worst
             << ", best lambda " << best.lambda << " cosine " << best.mean_cosine;
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, void (*)(Verdict&)>> criteria{
        {"exactness", exactness},         {"decomposition", decomposition}, {"membership", membership},
        {"scaling", scaling},             {"structured", structured},       {"random-features", random_features},
        {"learnable-f", learnable},       {"masked-attention", attention},  {"spectral", spectral},
        {"mesh-interpolation", mesh},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        const auto t0 = Clock::now();
        try {
            criteria[i].second(v);
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << "exception: " << e.what();
        }
        failures += v.pass ? 0 : 1;
        std::printf("%s %zu %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    v.detail.str().c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
