#include "ftfi/bench.hpp"
#include "ftfi/engine.hpp"
#include "ftfi/errors.hpp"

#include <chrono>
#include <limits>
#include <map>
#include <iomanip>
#include <ostream>
#include <random>

namespace ftfi {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string usage_string(const std::map<std::string, int>& usage)
{
    std::string s;
    for (const auto& [label, count] : usage) {
        if (!s.empty())
            s += ';';
        s += label + ":" + std::to_string(count);
    }
    return s;
}

bool rff_available(const ScalarMap& f)
{
    try {
        make_rff_sampler(f, 1, 0);
        return true;
    } catch (const PreconditionError&) {
        return false;
    }
}

} // namespace

std::vector<BenchRecord> run_bench(const BenchOptions& options)
{
    if (options.repeats < 1)
        throw PreconditionError("repeats must be at least 1");
    if (options.field_width < 1)
        throw PreconditionError("field width must be at least 1");

    std::vector<WeightedGraph> graphs;
    if (options.kind == BenchOptions::Kind::Mesh) {
        graphs.push_back(load_off_mesh(options.mesh).graph);
    } else {
        for (long long n : options.sizes) {
            if (n < 2 || n > std::numeric_limits<VertexId>::max())
                throw PreconditionError("benchmark sizes must be at least 2");
            const int extra = static_cast<int>(std::llround(options.extra_edge_ratio * static_cast<double>(n)));
            graphs.push_back(path_plus_random_edges(static_cast<VertexId>(n), extra, options.seed));
        }
    }

    BruteForceOptions guard;
    guard.memory_guard = options.oracle_guard;
    guard.allow_large = options.force_dense;
    const bool with_rff = rff_available(options.f);

    std::vector<BenchRecord> records;
    for (const auto& g : graphs) {
        const long long n = g.vertex_count();
        const bool oracle = n <= options.oracle_guard || options.force_dense;
        std::mt19937_64 rng(options.seed);
        std::normal_distribution<double> normal;
        Matrix X(n, options.field_width);
        for (Eigen::Index i = 0; i < X.size(); ++i)
            X.data()[i] = normal(rng);

        std::optional<Matrix> reference;
        for (int r = 0; r < options.repeats; ++r) {
            auto add = [&](const char* method, const char* phase, double seconds) -> BenchRecord& {
                BenchRecord rec;
                rec.n = n;
                rec.method = method;
                rec.phase = phase;
                rec.repeat = r;
                rec.seconds = seconds;
                rec.oracle_skipped = !oracle;
                records.push_back(rec);
                return records.back();
            };

            if (oracle) {
                auto t0 = Clock::now();
                const WeightedTree tree = minimum_spanning_tree(g);
                const Matrix K = apply_entrywise(options.f, tree_distance_matrix(tree, guard));
                add("BTFI", "preprocess", since(t0));
                t0 = Clock::now();
                Matrix out = K * X;
                add("BTFI", "integrate", since(t0));
                reference = std::move(out);
            }

            auto t0 = Clock::now();
            const WeightedTree tree = minimum_spanning_tree(g);
            IntegratorTreeOptions it_options;
            it_options.leaf_threshold = options.leaf_threshold;
            const IntegratorTree it = build_integrator_tree(tree, it_options);
            IntegrationSession session(it, options.f);
            session.prepare();
            const double pre = since(t0);
            t0 = Clock::now();
            const Matrix fast = session.integrate(X);
            const double integ = since(t0);
            const std::string labels = usage_string(session.strategy_usage());
            add("FTFI", "preprocess", pre).strategies = labels;
            auto& rec = add("FTFI", "integrate", integ);
            rec.strategies = labels;
            if (reference)
                rec.max_abs_diff = (fast - *reference).cwiseAbs().maxCoeff();

            if (with_rff) {
                t0 = Clock::now();
                SessionOptions so;
                so.strategy_hint = Strategy::RFF;
                so.rff_seed = options.seed + static_cast<std::uint64_t>(r);
                IntegrationSession approx(it, options.f, so);
                approx.prepare();
                const double rpre = since(t0);
                t0 = Clock::now();
                const Matrix est = approx.integrate(X);
                const double rint = since(t0);
                add("RFF", "preprocess", rpre).strategies = usage_string(approx.strategy_usage());
                auto& rr = add("RFF", "integrate", rint);
                rr.strategies = usage_string(approx.strategy_usage());
                if (reference)
                    rr.max_abs_diff = (est - *reference).cwiseAbs().maxCoeff();
            }

            if (oracle && options.with_graph_oracle) {
                t0 = Clock::now();
                const Matrix K = apply_entrywise(options.f, graph_distance_matrix(g, guard));
                add("BGFI", "preprocess", since(t0));
                t0 = Clock::now();
                const Matrix out = K * X;
                add("BGFI", "integrate", since(t0));
            }
        }
    }
    return records;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records)
{
    out << "# schema_version=1\n";
    out << "n,method,phase,repeat,seconds,max_abs_diff,oracle_skipped,strategies\n";
    out << std::setprecision(9);
    for (const auto& r : records) {
        out << r.n << ',' << r.method << ',' << r.phase << ',' << r.repeat << ',' << r.seconds << ',';
        if (r.max_abs_diff)
            out << *r.max_abs_diff;
        out << ',' << (r.oracle_skipped ? 1 : 0) << ',' << r.strategies << '\n';
    }
}

} // namespace ftfi
