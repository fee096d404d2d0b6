#include "ftfi/errors.hpp"
#include "ftfi/graph.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

using namespace ftfi;

namespace {

// Prim's algorithm on a dense weight matrix; returns the total weight.
double prim_weight(const WeightedGraph& g)
{
    const int n = g.vertex_count();
    Matrix w = Matrix::Constant(n, n, INFINITY);
    for (const auto& e : g.edges())
        w(e.u, e.v) = w(e.v, e.u) = e.w;
    std::vector<char> in(n, 0);
    std::vector<double> best(n, INFINITY);
    best[0] = 0.0;
    double total = 0.0;
    for (int step = 0; step < n; ++step) {
        int u = -1;
        for (int v = 0; v < n; ++v)
            if (!in[v] && (u < 0 || best[v] < best[u]))
                u = v;
        in[u] = 1;
        total += best[u];
        for (int v = 0; v < n; ++v)
            if (!in[v])
                best[v] = std::min(best[v], w(u, v));
    }
    return total;
}

// Floyd-Warshall all-pairs distances.
Matrix floyd(const WeightedGraph& g)
{
    const int n = g.vertex_count();
    Matrix d = Matrix::Constant(n, n, INFINITY);
    for (int v = 0; v < n; ++v)
        d(v, v) = 0.0;
    for (const auto& e : g.edges())
        d(e.u, e.v) = d(e.v, e.u) = std::min(d(e.u, e.v), e.w);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
    return d;
}

} // namespace

TEST_CASE("edge list parsing")
{
    std::istringstream in("# header\n0 1 0.5\n1 2 2 # trailing\n\n2 3 1\n");
    const WeightedGraph g = parse_edge_list(in);
    CHECK(g.vertex_count() == 4);
    CHECK(g.edges().size() == 3);
    CHECK(g.neighbors(1).size() == 2);
    CHECK(g.neighbors(1)[0].id == 0);
    CHECK(g.neighbors(1)[1].w == 2.0);
}

TEST_CASE("edge list errors carry line numbers")
{
    std::istringstream bad("0 1 1\n1 x 2\n");
    try {
        parse_edge_list(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::istringstream negative("0 1 1\n1 2 -3\n");
    try {
        parse_edge_list(negative);
        FAIL("expected PreconditionError");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("graph and tree validation")
{
    CHECK_THROWS_AS(WeightedGraph(3, {{0, 0, 1.0}}), PreconditionError);
    CHECK_THROWS_AS(WeightedGraph(3, {{0, 1, 0.0}}), PreconditionError);
    CHECK_THROWS_AS(WeightedGraph(3, {{0, 1, 1.0}, {1, 0, 2.0}}), PreconditionError);
    CHECK_THROWS_AS(WeightedGraph(2, {{0, 2, 1.0}}), PreconditionError);
    CHECK_THROWS_AS(WeightedTree(3, {{0, 1, 1.0}}), PreconditionError);
    CHECK_THROWS_AS(WeightedTree(4, {{0, 1, 1.0}, {1, 0, 1.0}, {2, 3, 1.0}}), PreconditionError);
    CHECK_NOTHROW(WeightedTree(1, {}));
    const WeightedTree t(3, {{0, 1, 1.5}, {1, 2, 2.0}});
    CHECK(t.total_weight() == 3.5);
}

TEST_CASE("tensor field shape checks")
{
    CHECK_THROWS_AS(TensorField(Matrix::Zero(4, 6), {2, 2}), PreconditionError);
    const TensorField f(Matrix::Zero(4, 6), {2, 3});
    CHECK(f.width() == 6);
    Matrix bad = Matrix::Zero(2, 2);
    bad(1, 1) = NAN;
    CHECK_THROWS(TensorField(bad));
}

TEST_CASE("minimum spanning tree weight matches Prim")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const WeightedGraph g = path_plus_random_edges(60, 80, seed);
        const WeightedTree t = minimum_spanning_tree(g);
        CHECK(t.vertex_count() == 60);
        CHECK(t.total_weight() == doctest::Approx(prim_weight(g)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(minimum_spanning_tree(WeightedGraph(4, {{0, 1, 1.0}, {2, 3, 1.0}})), PreconditionError);
}

TEST_CASE("Dijkstra matches Floyd-Warshall")
{
    const WeightedGraph g = path_plus_random_edges(70, 100, 4);
    std::vector<VertexId> all(70);
    std::iota(all.begin(), all.end(), 0);
    const Matrix d = graph_shortest_paths(g, all);
    CHECK((d - floyd(g)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("tree distances match the relaxation oracle")
{
    std::mt19937_64 rng(1);
    const auto edges = oracle::random_attachment_tree(80, rng);
    const WeightedTree t(80, edges);
    const Matrix d = oracle::tree_distances(80, edges);
    for (VertexId v = 0; v < 80; v += 7) {
        const auto row = tree_distances_from(t, v);
        for (VertexId u = 0; u < 80; ++u)
            CHECK(row[u] == doctest::Approx(d(v, u)).epsilon(1e-13));
    }
}

TEST_CASE("synthetic generators")
{
    const WeightedTree a = random_tree(100, 3, uniform_weights());
    const WeightedTree b = random_tree(100, 3, uniform_weights());
    REQUIRE(a.edges().size() == 99);
    for (std::size_t i = 0; i < 99; ++i) {
        CHECK(a.edges()[i].u == b.edges()[i].u);
        CHECK(a.edges()[i].w == b.edges()[i].w);
        CHECK(a.edges()[i].w > 0.0);
        CHECK(a.edges()[i].w < 1.0);
    }
    const WeightedTree q = random_tree(50, 1, quantized_weights(4, 4));
    for (const auto& e : q.edges())
        CHECK(e.w * 4 == std::round(e.w * 4));
    const WeightedGraph g = path_plus_random_edges(800, 600, 0);
    CHECK(g.edges().size() == 799 + 600);
    CHECK(g.is_connected());
    const WeightedGraph grid = grid_graph(3, 4);
    CHECK(grid.vertex_count() == 12);
    CHECK(grid.edges().size() == 3 * 3 + 2 * 4);
}

TEST_CASE("OFF meshes")
{
    // Unit right tetrahedron corner plus a quad that is fan-triangulated.
    std::istringstream in("OFF\n# comment\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n1 1 0\n"
                          "3 0 2 1\n3 0 1 3\n4 1 2 2 4\n");
    const Mesh m = parse_off_mesh(in);
    CHECK(m.graph.vertex_count() == 5);
    CHECK_FALSE(m.normals_from_file);
    CHECK(m.skipped_faces == 1);  // the degenerate fan triangle (1, 2, 2)
    // Vertex 3 only touches face (0, 1, 3), whose normal is -y.
    CHECK(m.normals(3, 1) == doctest::Approx(-1.0));
    for (Eigen::Index v = 0; v < 5; ++v)
        CHECK(m.normals.row(v).norm() == doctest::Approx(1.0));

    std::istringstream noff("NOFF\n3 1 0\n0 0 0 0 0 1\n1 0 0 0 0 1\n0 1 0 0 0 1\n3 0 1 2\n");
    const Mesh with_normals = parse_off_mesh(noff);
    CHECK(with_normals.normals_from_file);
    CHECK(with_normals.normals(1, 2) == 1.0);

    std::istringstream broken("OFF\n3 1 0\n0 0 0\n1 0 0\n");
    CHECK_THROWS_AS(parse_off_mesh(broken), ParseError);
}
