// Command-line front end. Exit codes: 0 ok, 1 unexpected failure, 2 bad
// input (parse), 3 precondition violated, 4 numerical failure.

#include "ftfi/bench.hpp"
#include "ftfi/engine.hpp"
#include "ftfi/errors.hpp"
#include "ftfi/io.hpp"
#include "ftfi/learnfit.hpp"
#include "ftfi/mesh_interp.hpp"
#include "ftfi/spectral.hpp"
#include "ftfi/topmask.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <random>

using namespace ftfi;
using nlohmann::json;

namespace {

constexpr const char* kFunctionHelp =
    "f spec: poly:a0,a1,..  exp:l  exppoly:l;a0,a1,..  trig:cos[,w]  trig:sin[,w]  "
    "rat:a0,../b0,..  expoverlin:l,c  expquad:u,v,w  gauss:sigma";

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw PreconditionError("cannot write " + path);
    return out;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

WeightedTree tree_from_file(const std::string& path)
{
    const WeightedGraph g = load_edge_list(path);
    const auto edges = g.edges();
    return WeightedTree(g.vertex_count(), std::vector<Edge>(edges.begin(), edges.end()));
}

void emit_json(const json& j, const std::string& path)
{
    if (path.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        auto out = open_out(path);
        out << j.dump(2) << '\n';
    }
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what)
{
    std::vector<T> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::stringstream cs(cell);
        T v;
        if (!(cs >> v) || !(cs >> std::ws).eof())
            throw ParseError(std::string("bad ") + what + " list '" + text + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw ParseError(std::string("empty ") + what + " list");
    return out;
}

// ---------------------------------------------------------------------------

struct IntegrateArgs {
    std::string tree, graph, f, field, out, strategy;
    int random_width = 0;
    std::uint64_t seed = 0;
    int leaf_threshold = 32;
    int quantization = 0;
};

int cmd_integrate(const IntegrateArgs& a)
{
    const ScalarMap f = parse_scalar_map(a.f);
    std::optional<Strategy> hint;
    if (!a.strategy.empty()) {
        hint = strategy_from_string(a.strategy);
        if (!hint)
            throw ParseError("unknown strategy '" + a.strategy + "'");
    }
    auto t0 = Clock::now();
    const WeightedTree tree = a.graph.empty() ? tree_from_file(a.tree) : minimum_spanning_tree(load_edge_list(a.graph));
    const double load = since(t0);

    Matrix X;
    if (!a.field.empty()) {
        X = load_field_csv(a.field);
    } else {
        if (a.random_width < 1)
            throw PreconditionError("give --field or --random D with D >= 1");
        std::mt19937_64 rng(a.seed);
        std::normal_distribution<double> normal;
        X.resize(tree.vertex_count(), a.random_width);
        for (Eigen::Index i = 0; i < X.size(); ++i)
            X.data()[i] = normal(rng);
    }

    t0 = Clock::now();
    IntegratorTreeOptions options;
    options.leaf_threshold = a.leaf_threshold;
    if (a.quantization > 0)
        options.quantization = a.quantization;
    const IntegratorTree it = build_integrator_tree(tree, options);
    SessionOptions so;
    so.strategy_hint = hint;
    IntegrationSession session(it, f, so);
    session.prepare();
    const double pre = since(t0);
    t0 = Clock::now();
    const Matrix out = session.integrate(TensorField(X)).data();
    const double integ = since(t0);

    auto file = open_out(a.out);
    write_field_csv(file, out);

    json j;
    j["schema_version"] = 1;
    j["command"] = "integrate";
    j["n"] = tree.vertex_count();
    j["width"] = X.cols();
    j["f"] = f.describe();
    j["load_seconds"] = load;
    j["preprocess_seconds"] = pre;
    j["integrate_seconds"] = integ;
    j["strategies"] = session.strategy_usage();
    std::cout << j.dump() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct BuildItArgs {
    std::string tree, graph, out;
    int leaf_threshold = 32;
    int quantization = 0;
};

int cmd_build_it(const BuildItArgs& a)
{
    const WeightedTree tree = a.graph.empty() ? tree_from_file(a.tree) : minimum_spanning_tree(load_edge_list(a.graph));
    IntegratorTreeOptions options;
    options.leaf_threshold = a.leaf_threshold;
    if (a.quantization > 0)
        options.quantization = a.quantization;
    const auto t0 = Clock::now();
    const IntegratorTree it = build_integrator_tree(tree, options);
    const double seconds = since(t0);
    save_integrator_tree(it, a.out);
    const IntegratorTreeStats stats = it_stats(it);
    json j;
    j["schema_version"] = 1;
    j["command"] = "build-it";
    j["n"] = it.vertex_count();
    j["nodes"] = stats.node_count;
    j["leaves"] = stats.leaf_count;
    j["depth"] = stats.depth;
    j["max_vertex_multiplicity"] = stats.max_vertex_multiplicity;
    j["seconds"] = seconds;
    std::cout << j.dump() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string sizes = "1024,4096", kind = "synthetic", mesh, f = "poly:1,-0.5,0.25", out;
    int repeats = 1;
    double extra_edge_ratio = 0.75;
    int width = 1;
    int leaf_threshold = 32;
    std::uint64_t seed = 0;
    bool force_dense = false;
    bool no_graph_oracle = false;
};

int cmd_bench(const BenchArgs& a)
{
    BenchOptions o;
    if (a.kind == "synthetic") {
        o.kind = BenchOptions::Kind::Synthetic;
        o.sizes = parse_list<long long>(a.sizes, "size");
    } else if (a.kind == "mesh") {
        if (a.mesh.empty())
            throw ParseError("--kind mesh needs --mesh path");
        o.kind = BenchOptions::Kind::Mesh;
        o.mesh = a.mesh;
    } else {
        throw ParseError("--kind must be synthetic or mesh");
    }
    o.f = parse_scalar_map(a.f);
    o.repeats = a.repeats;
    o.extra_edge_ratio = a.extra_edge_ratio;
    o.field_width = a.width;
    o.leaf_threshold = a.leaf_threshold;
    o.seed = a.seed;
    o.force_dense = a.force_dense;
    o.with_graph_oracle = !a.no_graph_oracle;
    const auto records = run_bench(o);
    if (a.out.empty()) {
        write_bench_csv(std::cout, records);
    } else {
        auto out = open_out(a.out);
        write_bench_csv(out, records);
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct MeshArgs {
    std::string off, lambdas = "0,0.1,1,10,100,1000,10000", out;
    double mask_fraction = 0.8;
    std::uint64_t seed = 0;
    int leaf_threshold = 32;
    bool force_dense = false;
};

int cmd_mesh_interpolate(const MeshArgs& a)
{
    const Mesh mesh = load_off_mesh(a.off);
    if (mesh.graph.edges().empty())
        throw PreconditionError("mesh has no faces");
    MeshInterpolationOptions o;
    o.mask_fraction = a.mask_fraction;
    o.lambdas = parse_list<double>(a.lambdas, "lambda");
    o.seed = a.seed;
    o.leaf_threshold = a.leaf_threshold;
    if (a.force_dense)
        o.oracle_guard = std::numeric_limits<Eigen::Index>::max();
    const auto report = interpolate_mesh_normals(mesh, o);

    json j;
    j["schema_version"] = 1;
    j["command"] = "mesh-interpolate";
    j["vertices"] = report.vertices;
    j["masked"] = report.masked;
    j["skipped_faces"] = mesh.skipped_faces;
    j["preprocess_seconds"] = report.preprocess_seconds;
    json results = json::array();
    for (const auto& r : report.results) {
        json e;
        e["lambda"] = r.lambda;
        e["mean_cosine"] = r.mean_cosine;
        e["ftfi_seconds"] = r.ftfi_seconds;
        e["btfi_seconds"] = r.btfi_seconds ? json(*r.btfi_seconds) : json(nullptr);
        e["oracle_rel_diff"] = r.oracle_rel_diff ? json(*r.oracle_rel_diff) : json(nullptr);
        results.push_back(e);
    }
    j["results"] = results;
    j["best_lambda"] = report.results[report.best].lambda;
    j["best_mean_cosine"] = report.results[report.best].mean_cosine;
    if (report.empty_mask) {
        j["warning"] = "no vertices masked; cosine similarity reported as 1 by convention";
        std::cerr << "warning: mask fraction selects no vertices; cosine similarity reported as 1\n";
    }
    emit_json(j, a.out);
    return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
    std::string graph, degrees = "2,2", out;
    int samples = 100;
    int steps = 200;
    double lr = 1e-2;
    std::uint64_t seed = 0;
};

json epsilon_or_null(const WeightedGraph& g, const WeightedTree& t, const ScalarMap& f)
{
    if (g.vertex_count() > 3000)
        return nullptr;
    return relative_frobenius_error(g, t, f);
}

int cmd_fit(const FitArgs& a)
{
    const auto degrees = parse_list<int>(a.degrees, "degree");
    if (degrees.size() != 2)
        throw ParseError("--degrees takes t,s");
    const WeightedGraph g = load_edge_list(a.graph);
    const WeightedTree t = minimum_spanning_tree(g);
    const auto ds = sample_dataset(g, t, a.samples, a.seed);
    FitOptions o;
    o.num_degree = degrees[0];
    o.den_degree = degrees[1];
    o.steps = a.steps;
    o.learning_rate = a.lr;
    const FitResult fit = fit_rational(ds, o);

    json j;
    j["schema_version"] = 1;
    j["command"] = "fit";
    j["num"] = fit.params.num;
    j["den"] = fit.params.den;
    j["best_step"] = fit.best_step;
    j["loss_trace"] = fit.loss_trace;
    j["epsilon_before"] = epsilon_or_null(g, t, ScalarMap::identity());
    j["epsilon_after"] = epsilon_or_null(g, t, fit.params.to_scalar_map());
    emit_json(j, a.out);
    return 0;
}

struct EvalArgs {
    std::string graph, params;
};

int cmd_eval_eps(const EvalArgs& a)
{
    const RationalParams p = params_from_json(read_file(a.params));
    const WeightedGraph g = load_edge_list(a.graph);
    const WeightedTree t = minimum_spanning_tree(g);
    json j;
    j["schema_version"] = 1;
    j["command"] = "eval-eps";
    j["epsilon"] = relative_frobenius_error(g, t, p.to_scalar_map());
    std::cout << j.dump() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct FeaturesArgs {
    std::string graphs, f = "poly:0,1", out;
    int k = 10;
    double tol = 1e-8;
    int max_iter = 0;
    int leaf_threshold = 32;
    std::uint64_t seed = 0;
};

// Graphs with n <= k: all n eigenvalues from n products with unit vectors.
SpectralFeatures small_spectrum(const IntegratorTree& it, const ScalarMap& f)
{
    const Eigen::Index n = it.vertex_count();
    IntegrationSession session(it, f);
    const Matrix M = session.integrate(Matrix(Matrix::Identity(n, n)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (M + M.transpose()));
    SpectralFeatures out;
    out.eigenvalues.assign(eig.eigenvalues().data(), eig.eigenvalues().data() + n);
    out.residual_norms.assign(n, 0.0);
    out.iterations = static_cast<int>(n);
    out.converged = true;
    return out;
}

int cmd_features(const FeaturesArgs& a)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(a.graphs))
        throw ParseError("--graphs must be a directory: " + a.graphs);
    const ScalarMap f = parse_scalar_map(a.f);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.graphs))
        if (entry.is_regular_file())
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<std::pair<std::string, SpectralFeatures>> rows;
    for (const auto& path : files) {
        const WeightedTree t = minimum_spanning_tree(load_edge_list(path));
        IntegratorTreeOptions o;
        o.leaf_threshold = a.leaf_threshold;
        const IntegratorTree it = build_integrator_tree(t, o);
        SpectralFeatures sf;
        if (t.vertex_count() <= a.k) {
            sf = small_spectrum(it, f);
        } else {
            SpectralOptions so;
            so.k = a.k;
            so.tol = a.tol;
            so.max_iter = a.max_iter;
            so.seed = a.seed;
            sf = smallest_eigenvalues(it, f, so);
            if (!sf.converged)
                std::cerr << "warning: " << path.filename().string() << ": eigenvalues did not converge within "
                          << sf.iterations << " products\n";
        }
        rows.emplace_back(path.stem().string(), std::move(sf));
    }
    if (a.out.empty()) {
        write_spectral_csv(std::cout, a.k, rows);
    } else {
        auto out = open_out(a.out);
        write_spectral_csv(out, a.k, rows);
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct AttentionArgs {
    std::string grid = "8,8", phi = "square", g = "exp", coeffs;
    int t = 2;
    int dqk = 8;
    int dv = 8;
    std::uint64_t seed = 0;
};

int cmd_attention_demo(const AttentionArgs& a)
{
    const auto hw = parse_list<int>(a.grid, "grid");
    if (hw.size() != 2)
        throw ParseError("--grid takes h,w");
    const MaskLink g = mask_link_from_string(a.g);
    std::vector<double> coeffs;
    if (!a.coeffs.empty()) {
        coeffs = parse_list<double>(a.coeffs, "coefficient");
        if (static_cast<int>(coeffs.size()) != a.t + 1)
            throw ParseError("--coeffs needs t + 1 = " + std::to_string(a.t + 1) + " values");
    } else {
        coeffs.assign(a.t + 1, 0.0);
        coeffs[0] = g == MaskLink::Exp ? 0.0 : 1.0;
        coeffs[1] = g == MaskLink::Exp ? -0.1 : 1.0;
    }
    if (a.dqk < 1 || a.dv < 1)
        throw PreconditionError("feature widths must be positive");

    const WeightedTree tree = grid_mst(hw[0], hw[1]);
    const TopologicalMask mask(tree, g, coeffs);
    const Eigen::Index L = tree.vertex_count();
    std::mt19937_64 rng(a.seed);
    std::normal_distribution<double> normal(0.0, 0.5);
    auto random = [&](Eigen::Index r, Eigen::Index c) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = normal(rng);
        return m;
    };
    AttentionInputs in{random(L, a.dqk), random(L, a.dqk), random(L, a.dv), feature_map_from_string(a.phi)};

    auto t0 = Clock::now();
    const Matrix fast = masked_attention_fast(in, mask);
    const double fast_s = since(t0);
    t0 = Clock::now();
    const Matrix slow = masked_attention_explicit(in, mask.dense());
    const double slow_s = since(t0);

    json j;
    j["schema_version"] = 1;
    j["command"] = "attention-demo";
    j["tokens"] = L;
    j["phi"] = to_string(in.phi);
    j["g"] = to_string(g);
    j["coeffs"] = coeffs;
    j["max_relative_deviation"] = (fast - slow).cwiseAbs().maxCoeff() / std::max(slow.cwiseAbs().maxCoeff(), 1e-300);
    j["relative_frobenius"] = (fast - slow).norm() / slow.norm();
    j["fast_seconds"] = fast_s;
    j["explicit_seconds"] = slow_s;
    std::cout << j.dump() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Fast f-integration of fields over weighted trees"};
    app.require_subcommand(1);
    app.footer(kFunctionHelp);

    IntegrateArgs ia;
    auto* integrate = app.add_subcommand("integrate", "integrate a field over a tree (or the MST of a graph)");
    auto* tree_opt = integrate->add_option("--tree", ia.tree, "edge list of a tree")->check(CLI::ExistingFile);
    auto* graph_opt = integrate->add_option("--graph", ia.graph, "edge list of a graph; its MST is used")
                          ->check(CLI::ExistingFile);
    tree_opt->excludes(graph_opt);
    integrate->add_option("--f", ia.f, kFunctionHelp)->required();
    auto* field_opt = integrate->add_option("--field", ia.field, "field CSV")->check(CLI::ExistingFile);
    auto* random_opt = integrate->add_option("--random", ia.random_width, "random N(0,1) field of width D");
    field_opt->excludes(random_opt);
    integrate->add_option("--seed", ia.seed);
    integrate->add_option("--leaf-threshold", ia.leaf_threshold)->capture_default_str();
    integrate->add_option("--quantization", ia.quantization, "distance grid 1/q (enables the Hankel path)");
    integrate->add_option("--strategy", ia.strategy, "force a cross-term strategy");
    integrate->add_option("--out", ia.out, "output field CSV")->required();

    BuildItArgs ba;
    auto* build_it = app.add_subcommand("build-it", "build and save an IntegratorTree");
    auto* bt = build_it->add_option("--tree", ba.tree)->check(CLI::ExistingFile);
    auto* bg = build_it->add_option("--graph", ba.graph)->check(CLI::ExistingFile);
    bt->excludes(bg);
    build_it->add_option("--leaf-threshold", ba.leaf_threshold)->capture_default_str();
    build_it->add_option("--quantization", ba.quantization);
    build_it->add_option("--out", ba.out)->required();

    BenchArgs be;
    auto* bench = app.add_subcommand("bench", "time FTFI against brute force");
    bench->add_option("--sizes", be.sizes, "comma-separated vertex counts")->capture_default_str();
    bench->add_option("--kind", be.kind, "synthetic or mesh")->capture_default_str();
    bench->add_option("--mesh", be.mesh, "OFF mesh for --kind mesh")->check(CLI::ExistingFile);
    bench->add_option("--f", be.f, kFunctionHelp)->capture_default_str();
    bench->add_option("--repeats", be.repeats)->capture_default_str();
    bench->add_option("--extra-edge-ratio", be.extra_edge_ratio, "random edges per vertex")->capture_default_str();
    bench->add_option("--width", be.width, "field width D")->capture_default_str();
    bench->add_option("--leaf-threshold", be.leaf_threshold)->capture_default_str();
    bench->add_option("--seed", be.seed);
    bench->add_flag("--force-dense", be.force_dense, "run dense oracles beyond the memory guard");
    bench->add_flag("--no-graph-oracle", be.no_graph_oracle, "skip BGFI");
    bench->add_option("--out", be.out, "CSV path (default stdout)");

    MeshArgs ma;
    auto* mesh = app.add_subcommand("mesh-interpolate", "predict masked vertex normals on a mesh");
    mesh->add_option("--off", ma.off)->required()->check(CLI::ExistingFile);
    mesh->add_option("--mask-fraction", ma.mask_fraction)->capture_default_str();
    mesh->add_option("--lambda", ma.lambdas, "comma-separated lambda grid for 1/(1+l x^2)")->capture_default_str();
    mesh->add_option("--seed", ma.seed);
    mesh->add_option("--leaf-threshold", ma.leaf_threshold)->capture_default_str();
    mesh->add_flag("--force-dense", ma.force_dense, "run the brute-force check beyond the memory guard");
    mesh->add_option("--out", ma.out, "JSON path (default stdout)");

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "fit a rational f mapping MST distances to graph distances");
    fit->add_option("--graph", fa.graph)->required()->check(CLI::ExistingFile);
    fit->add_option("--degrees", fa.degrees, "t,s")->capture_default_str();
    fit->add_option("--samples", fa.samples)->capture_default_str();
    fit->add_option("--steps", fa.steps)->capture_default_str();
    fit->add_option("--lr", fa.lr)->capture_default_str();
    fit->add_option("--seed", fa.seed);
    fit->add_option("--out", fa.out, "JSON path (default stdout)");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval-eps", "relative Frobenius error of a fitted f");
    eval->add_option("--graph", ea.graph)->required()->check(CLI::ExistingFile);
    eval->add_option("--params", ea.params, "JSON from fit")->required();

    FeaturesArgs fe;
    auto* features = app.add_subcommand("features", "smallest eigenvalues of f-distance matrices");
    features->add_option("--graphs", fe.graphs, "directory of edge lists")->required();
    features->add_option("--f", fe.f, kFunctionHelp)->capture_default_str();
    features->add_option("--k", fe.k)->capture_default_str();
    features->add_option("--tol", fe.tol)->capture_default_str();
    features->add_option("--max-iter", fe.max_iter, "matrix-vector products (default 5k+50)");
    features->add_option("--leaf-threshold", fe.leaf_threshold)->capture_default_str();
    features->add_option("--seed", fe.seed);
    features->add_option("--out", fe.out, "CSV path (default stdout)");

    AttentionArgs aa;
    auto* attention = app.add_subcommand("attention-demo", "masked low-rank attention on a grid MST");
    attention->add_option("--grid", aa.grid, "h,w")->capture_default_str();
    attention->add_option("--phi", aa.phi, "relu, square, fourth, exp")->capture_default_str();
    attention->add_option("--g", aa.g, "exp or recip")->capture_default_str();
    attention->add_option("--t", aa.t, "mask polynomial degree (1, 2, 5, 10)")->capture_default_str();
    attention->add_option("--coeffs", aa.coeffs, "a0,..,at");
    attention->add_option("--d-qk", aa.dqk)->capture_default_str();
    attention->add_option("--d-v", aa.dv)->capture_default_str();
    attention->add_option("--seed", aa.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*integrate) {
            if (ia.tree.empty() && ia.graph.empty())
                throw ParseError("integrate needs --tree or --graph");
            return cmd_integrate(ia);
        }
        if (*build_it) {
            if (ba.tree.empty() && ba.graph.empty())
                throw ParseError("build-it needs --tree or --graph");
            return cmd_build_it(ba);
        }
        if (*bench)
            return cmd_bench(be);
        if (*mesh)
            return cmd_mesh_interpolate(ma);
        if (*fit)
            return cmd_fit(fa);
        if (*eval)
            return cmd_eval_eps(ea);
        if (*features)
            return cmd_features(fe);
        if (*attention)
            return cmd_attention_demo(aa);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        for (auto* sub : app.get_subcommands())
            std::cerr << sub->help();
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
