#include "ftfi/learnfit.hpp"
#include "ftfi/engine.hpp"
#include "ftfi/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

namespace ftfi {

namespace {

constexpr double kMargin = 1e-3;
constexpr int kPenaltyGrid = 256;

void require_spanning(const WeightedGraph& g, const WeightedTree& t)
{
    if (g.vertex_count() != t.vertex_count())
        throw PreconditionError("tree has " + std::to_string(t.vertex_count()) + " vertices, graph has " +
                                std::to_string(g.vertex_count()));
    for (const auto& e : t.edges()) {
        bool found = false;
        for (const auto& nb : g.neighbors(e.u))
            if (nb.id == e.v && nb.w == e.w)
                found = true;
        if (!found)
            throw PreconditionError("tree edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                                    " is not an edge of the graph");
    }
}

double max_tree_distance(const MetricPairDataset& ds)
{
    double m = 0.0;
    for (const auto& s : ds.samples)
        m = std::max(m, s.d_tree);
    return m;
}

// Smallest denominator value on the penalty grid and where it occurs.
std::pair<double, double> min_denominator(const std::vector<double>& den, double hi)
{
    double best = INFINITY, at = 0.0;
    for (int k = 0; k < kPenaltyGrid; ++k) {
        const double z = hi * k / (kPenaltyGrid - 1);
        const double q = evaluate_polynomial(den, z);
        if (q < best) {
            best = q;
            at = z;
        }
    }
    return {best, at};
}

double penalty(const RationalParams& p, double hi, std::vector<double>* gradient)
{
    const auto [q, z] = min_denominator(p.den, hi);
    const double gap = std::max(0.0, kMargin - q);
    if (gradient && gap > 0.0) {
        double zk = 1.0;
        for (std::size_t k = 0; k < p.den.size(); ++k) {
            (*gradient)[p.num.size() + k] += -2.0 * gap * zk;
            zk *= z;
        }
    }
    return gap * gap;
}

} // namespace

MetricPairDataset sample_dataset(const WeightedGraph& g, const WeightedTree& t, int count, std::uint64_t seed,
                                 bool with_replacement)
{
    require_spanning(g, t);
    const auto n = static_cast<long long>(g.vertex_count());
    if (count < 0)
        throw PreconditionError("sample count must be nonnegative");
    if (n < 2 && count > 0)
        throw PreconditionError("sampling pairs needs at least two vertices");
    if (!with_replacement && count > n * (n - 1) / 2)
        throw PreconditionError("cannot draw " + std::to_string(count) + " distinct pairs from " +
                                std::to_string(n) + " vertices; allow replacement");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(n - 1));
    std::set<std::pair<VertexId, VertexId>> seen;
    MetricPairDataset ds;
    while (static_cast<int>(ds.samples.size()) < count) {
        const VertexId v = pick(rng), w = pick(rng);
        if (v == w)
            continue;
        if (!with_replacement && !seen.insert(std::minmax(v, w)).second)
            continue;
        ds.samples.push_back({v, w, 0.0, 0.0});
    }

    std::map<VertexId, std::vector<std::size_t>> by_source;
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
        by_source[ds.samples[i].v].push_back(i);
    std::vector<VertexId> sources;
    for (const auto& [v, _] : by_source)
        sources.push_back(v);
    if (sources.empty())
        return ds;
    const Matrix graph_d = graph_shortest_paths(g, sources);
    for (std::size_t r = 0; r < sources.size(); ++r) {
        const auto tree_d = tree_distances_from(t, sources[r]);
        for (std::size_t i : by_source[sources[r]]) {
            ds.samples[i].d_graph = graph_d(static_cast<Eigen::Index>(r), ds.samples[i].w);
            ds.samples[i].d_tree = tree_d[ds.samples[i].w];
        }
    }
    return ds;
}

double rational_mse(const MetricPairDataset& ds, const RationalParams& p, std::vector<double>* gradient)
{
    if (ds.samples.empty())
        throw PreconditionError("dataset is empty");
    const std::size_t na = p.num.size(), nb = p.den.size();
    if (gradient)
        gradient->assign(na + nb, 0.0);
    double loss = 0.0;
    const double scale = 1.0 / static_cast<double>(ds.samples.size());
    for (const auto& s : ds.samples) {
        const double x = s.d_tree;
        const double P = evaluate_polynomial(p.num, x);
        const double Q = evaluate_polynomial(p.den, x);
        const double r = s.d_graph - P / Q;
        loss += r * r * scale;
        if (!gradient)
            continue;
        // d/da_k (P/Q) = x^k / Q,  d/db_k (P/Q) = -P x^k / Q^2.
        double xk = 1.0;
        for (std::size_t k = 0; k < std::max(na, nb); ++k) {
            if (k < na)
                (*gradient)[k] += -2.0 * r * xk / Q * scale;
            if (k < nb)
                (*gradient)[na + k] += 2.0 * r * P * xk / (Q * Q) * scale;
            xk *= x;
        }
    }
    return loss;
}

FitResult fit_rational(const MetricPairDataset& ds, const FitOptions& options)
{
    if (options.steps < 1)
        throw PreconditionError("fit needs at least one step");
    if (options.num_degree < 1 || options.den_degree < 0 ||
        options.num_degree > static_cast<int>(ScalarMap::kMaxPolynomialDegree) ||
        options.den_degree > static_cast<int>(ScalarMap::kMaxPolynomialDegree))
        throw PreconditionError("degrees must satisfy 1 <= t <= 16 and 0 <= s <= 16");
    if (!(options.learning_rate > 0.0))
        throw PreconditionError("learning rate must be positive");
    if (ds.samples.empty())
        throw PreconditionError("dataset is empty");

    // Fit on distances divided by their mean tree distance.
    double s = 0.0;
    for (const auto& x : ds.samples)
        s += x.d_tree;
    s /= static_cast<double>(ds.samples.size());
    if (!(s > 0.0))
        s = 1.0;
    MetricPairDataset scaled = ds;
    for (auto& x : scaled.samples) {
        x.d_tree /= s;
        x.d_graph /= s;
    }
    const double hi = max_tree_distance(scaled);

    RationalParams p;
    p.num.assign(options.num_degree + 1, 0.0);
    p.num[1] = 1.0;
    p.den.assign(options.den_degree + 1, 0.0);
    p.den[0] = 1.0;

    auto unscale = [s](const RationalParams& q) {
        RationalParams out = q;
        for (std::size_t k = 0; k < out.num.size(); ++k)
            out.num[k] *= std::pow(s, 1.0 - static_cast<double>(k));
        for (std::size_t k = 0; k < out.den.size(); ++k)
            out.den[k] *= std::pow(s, -static_cast<double>(k));
        return out;
    };

    const std::size_t dim = p.num.size() + p.den.size();
    std::vector<double> m(dim, 0.0), v(dim, 0.0), grad;
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    FitResult result;
    double best = INFINITY;
    RationalParams best_params = p;
    for (int step = 0; step <= options.steps; ++step) {
        const double mse = rational_mse(scaled, p, &grad);
        const double total = mse + penalty(p, hi, &grad);
        if (!std::isfinite(total))
            throw NumericError("fit diverged at step " + std::to_string(step));
        result.loss_trace.push_back(mse * s * s);
        if (total < best) {
            best = total;
            best_params = p;
            result.best_step = step;
        }
        if (step == options.steps)
            break;
        const double c1 = 1.0 - std::pow(beta1, step + 1), c2 = 1.0 - std::pow(beta2, step + 1);
        for (std::size_t k = 0; k < dim; ++k) {
            m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k];
            v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k];
            const double delta = options.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
            if (k < p.num.size())
                p.num[k] -= delta;
            else
                p.den[k - p.num.size()] -= delta;
        }
    }

    if (min_denominator(best_params.den, hi).first <= 0.0)
        throw NumericError("fitted denominator reaches zero on the observed distance range");
    result.params = unscale(best_params);
    return result;
}

double relative_frobenius_error(const WeightedGraph& g, const WeightedTree& t, const ScalarMap& f, int dense_guard)
{
    if (g.vertex_count() != t.vertex_count())
        throw PreconditionError("graph and tree vertex counts differ");
    BruteForceOptions guard;
    guard.memory_guard = dense_guard;
    const Matrix graph_d = graph_distance_matrix(g, guard);
    const Matrix tree_f = apply_entrywise(f, tree_distance_matrix(t, guard));
    const double denom = graph_d.norm();
    if (denom == 0.0)
        throw PreconditionError("graph distance matrix is zero");
    return (tree_f - graph_d).norm() / denom;
}

std::string params_to_json(const RationalParams& p)
{
    nlohmann::json j;
    j["schema_version"] = 1;
    j["num"] = p.num;
    j["den"] = p.den;
    return j.dump(2) + "\n";
}

RationalParams params_from_json(const std::string& text)
{
    try {
        const auto j = nlohmann::json::parse(text);
        // Files written before versioning carry no schema field.
        if (j.contains("schema_version") && j.at("schema_version").get<int>() != 1)
            throw ParseError("unsupported rational parameter schema_version " + j.at("schema_version").dump());
        RationalParams p;
        p.num = j.at("num").get<std::vector<double>>();
        p.den = j.at("den").get<std::vector<double>>();
        if (p.num.empty() || p.den.empty())
            throw ParseError("rational parameters need nonempty num and den");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad rational parameter JSON: ") + e.what());
    }
}

} // namespace ftfi
