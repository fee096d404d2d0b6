#include "ftfi/graph.hpp"
#include "ftfi/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>
#include <unordered_set>

namespace ftfi {

namespace {

std::uint64_t edge_key(VertexId u, VertexId v)
{
    if (u > v)
        std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}

void validate_edges(VertexId n, std::span<const Edge> edges)
{
    if (n < 0)
        throw PreconditionError("negative vertex count");
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges.size() * 2);
    for (const auto& e : edges) {
        if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n)
            throw PreconditionError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                    ") has a vertex id outside [0, " + std::to_string(n) + ")");
        if (e.u == e.v)
            throw PreconditionError("self loop at vertex " + std::to_string(e.u));
        if (!(e.w > 0.0) || !std::isfinite(e.w))
            throw PreconditionError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                    ") has nonpositive weight");
        if (!seen.insert(edge_key(e.u, e.v)).second)
            throw PreconditionError("duplicate edge (" + std::to_string(e.u) + ", " +
                                    std::to_string(e.v) + ")");
    }
}

class DisjointSets {
public:
    explicit DisjointSets(VertexId n) : parent_(n), rank_(n, 0)
    {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    VertexId find(VertexId v)
    {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }

    bool unite(VertexId a, VertexId b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        if (rank_[a] < rank_[b])
            std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b])
            ++rank_[a];
        return true;
    }

private:
    std::vector<VertexId> parent_;
    std::vector<int> rank_;
};

bool connected(const Adjacency& adj)
{
    const VertexId n = adj.vertex_count();
    if (n <= 1)
        return true;
    std::vector<char> seen(n, 0);
    std::vector<VertexId> stack{0};
    seen[0] = 1;
    VertexId count = 1;
    while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        for (const auto& nb : adj[v]) {
            if (!seen[nb.id]) {
                seen[nb.id] = 1;
                ++count;
                stack.push_back(nb.id);
            }
        }
    }
    return count == n;
}

} // namespace

// ---------------------------------------------------------------------------

Adjacency::Adjacency(VertexId n, std::span<const Edge> edges) : offsets_(n + 1, 0)
{
    for (const auto& e : edges) {
        ++offsets_[e.u + 1];
        ++offsets_[e.v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    entries_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : edges) {
        entries_[fill[e.u]++] = {e.v, e.w};
        entries_[fill[e.v]++] = {e.u, e.w};
    }
    for (VertexId v = 0; v < n; ++v)
        std::sort(entries_.begin() + offsets_[v], entries_.begin() + offsets_[v + 1],
                  [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
}

WeightedGraph::WeightedGraph(VertexId n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges))
{
    validate_edges(n_, edges_);
    adjacency_ = Adjacency(n_, edges_);
}

bool WeightedGraph::is_connected() const { return connected(adjacency_); }

WeightedTree::WeightedTree(VertexId n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges))
{
    if (n_ < 1)
        throw PreconditionError("a tree needs at least one vertex");
    validate_edges(n_, edges_);
    if (static_cast<VertexId>(edges_.size()) != n_ - 1)
        throw PreconditionError("a tree on " + std::to_string(n_) + " vertices needs " +
                                std::to_string(n_ - 1) + " edges, got " +
                                std::to_string(edges_.size()));
    adjacency_ = Adjacency(n_, edges_);
    if (!connected(adjacency_))
        throw PreconditionError("tree edges do not connect all vertices");
}

double WeightedTree::total_weight() const
{
    double s = 0.0;
    for (const auto& e : edges_)
        s += e.w;
    return s;
}

TensorField::TensorField(Matrix data) : TensorField(data, {data.cols()}) {}

TensorField::TensorField(Matrix data, std::vector<Eigen::Index> dims)
    : data_(std::move(data)), dims_(std::move(dims))
{
    Eigen::Index prod = 1;
    for (auto d : dims_) {
        if (d < 1)
            throw PreconditionError("tensor field dimensions must be positive");
        prod *= d;
    }
    if (dims_.empty() || prod != data_.cols())
        throw PreconditionError("tensor field trailing shape does not match the flattened width");
    if (!data_.allFinite())
        throw NumericError("tensor field contains non-finite entries");
}

TensorField TensorField::zeros(Eigen::Index n, std::vector<Eigen::Index> dims)
{
    Eigen::Index prod = 1;
    for (auto d : dims)
        prod *= d;
    return TensorField(Matrix::Zero(n, prod), std::move(dims));
}

// ---------------------------------------------------------------------------
// ingestion

WeightedGraph parse_edge_list(std::istream& in)
{
    std::vector<Edge> edges;
    VertexId max_id = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        std::istringstream ss(line);
        long long u = 0, v = 0;
        double w = 0.0;
        if (!(ss >> u)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            throw ParseError("line " + std::to_string(lineno) + ": expected 'u v w'");
        }
        std::string rest;
        if (!(ss >> v >> w) || (ss >> rest))
            throw ParseError("line " + std::to_string(lineno) + ": expected 'u v w'");
        if (u < 0 || v < 0 || u > std::numeric_limits<VertexId>::max() - 1 ||
            v > std::numeric_limits<VertexId>::max() - 1)
            throw ParseError("line " + std::to_string(lineno) + ": vertex id out of range");
        if (!(w > 0.0))
            throw PreconditionError("line " + std::to_string(lineno) + ": nonpositive weight");
        edges.push_back({static_cast<VertexId>(u), static_cast<VertexId>(v), w});
        max_id = std::max<VertexId>(max_id, static_cast<VertexId>(std::max(u, v)));
    }
    return WeightedGraph(max_id + 1, std::move(edges));
}

WeightedGraph load_edge_list(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open edge list " + path.string());
    return parse_edge_list(in);
}

void write_edge_list(const WeightedGraph& g, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot write " + path.string());
    out.precision(17);
    out << "# n=" << g.vertex_count() << " m=" << g.edges().size() << "\n";
    for (const auto& e : g.edges())
        out << e.u << ' ' << e.v << ' ' << e.w << '\n';
}

namespace {

// Next whitespace-separated token, skipping '#' comments.
bool next_token(std::istream& in, std::string& tok)
{
    while (in >> tok) {
        if (tok[0] == '#') {
            std::string discard;
            std::getline(in, discard);
            continue;
        }
        return true;
    }
    return false;
}

template <typename T>
T read_number(std::istream& in, const char* what)
{
    std::string tok;
    if (!next_token(in, tok))
        throw ParseError(std::string("OFF: unexpected end of file reading ") + what);
    std::istringstream ss(tok);
    T value{};
    if (!(ss >> value))
        throw ParseError(std::string("OFF: malformed ") + what + " '" + tok + "'");
    return value;
}

} // namespace

Mesh parse_off_mesh(std::istream& in)
{
    std::string header;
    if (!next_token(in, header) || (header != "OFF" && header != "NOFF"))
        throw ParseError("OFF: missing 'OFF' header");
    const bool with_normals = header == "NOFF";

    const auto nv = read_number<long long>(in, "vertex count");
    const auto nf = read_number<long long>(in, "face count");
    read_number<long long>(in, "edge count");
    if (nv < 1 || nf < 0 || nv > std::numeric_limits<VertexId>::max())
        throw ParseError("OFF: invalid counts");

    Mesh mesh;
    const auto n = static_cast<VertexId>(nv);
    mesh.positions.resize(n, 3);
    mesh.normals = Matrix::Zero(n, 3);
    for (VertexId i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c)
            mesh.positions(i, c) = read_number<double>(in, "vertex coordinate");
        if (with_normals)
            for (int c = 0; c < 3; ++c)
                mesh.normals(i, c) = read_number<double>(in, "vertex normal");
    }

    std::vector<Edge> edges;
    std::unordered_set<std::uint64_t> seen;
    Matrix accum = Matrix::Zero(n, 3);
    auto add_edge = [&](VertexId a, VertexId b) {
        if (seen.insert(edge_key(a, b)).second)
            edges.push_back({std::min(a, b), std::max(a, b),
                             (mesh.positions.row(a) - mesh.positions.row(b)).norm()});
    };

    std::vector<VertexId> poly;
    for (long long f = 0; f < nf; ++f) {
        const auto k = read_number<long long>(in, "face size");
        if (k < 3)
            throw ParseError("OFF: face " + std::to_string(f) + " has fewer than 3 vertices");
        poly.resize(k);
        for (auto& id : poly) {
            const auto raw = read_number<long long>(in, "face vertex index");
            if (raw < 0 || raw >= nv)
                throw ParseError("OFF: face " + std::to_string(f) + " references vertex " +
                                 std::to_string(raw));
            id = static_cast<VertexId>(raw);
        }
        for (long long t = 1; t + 1 < k; ++t) {
            const VertexId a = poly[0], b = poly[t], c = poly[t + 1];
            const Eigen::Vector3d pa = mesh.positions.row(a), pb = mesh.positions.row(b),
                                  pc = mesh.positions.row(c);
            const Eigen::Vector3d cross = (pb - pa).cross(pc - pa);
            const double scale = std::max({(pb - pa).squaredNorm(), (pc - pa).squaredNorm(), 1e-300});
            if (a == b || b == c || a == c || cross.norm() <= 1e-14 * scale) {
                ++mesh.skipped_faces;
                continue;
            }
            add_edge(a, b);
            add_edge(b, c);
            add_edge(a, c);
            // |cross| = 2 * area, so summing raw cross products is area weighting.
            for (VertexId v : {a, b, c})
                accum.row(v) += cross.transpose();
        }
    }
    mesh.graph = WeightedGraph(n, std::move(edges));

    if (with_normals) {
        mesh.normals_from_file = true;
        for (VertexId i = 0; i < n; ++i) {
            const double len = mesh.normals.row(i).norm();
            if (len > 0.0)
                mesh.normals.row(i) /= len;
        }
    } else {
        for (VertexId i = 0; i < n; ++i) {
            const double len = accum.row(i).norm();
            if (len > 0.0)
                mesh.normals.row(i) = accum.row(i) / len;
        }
    }
    return mesh;
}

Mesh load_off_mesh(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open mesh " + path.string());
    return parse_off_mesh(in);
}

// ---------------------------------------------------------------------------
// metric operations

WeightedTree minimum_spanning_tree(const WeightedGraph& g)
{
    const VertexId n = g.vertex_count();
    if (n == 0)
        throw PreconditionError("minimum spanning tree of an empty graph");
    std::vector<Edge> sorted(g.edges().begin(), g.edges().end());
    for (auto& e : sorted)
        if (e.u > e.v)
            std::swap(e.u, e.v);
    std::sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) {
        if (a.w != b.w)
            return a.w < b.w;
        if (a.u != b.u)
            return a.u < b.u;
        return a.v < b.v;
    });

    DisjointSets sets(n);
    std::vector<Edge> chosen;
    chosen.reserve(n - 1);
    for (const auto& e : sorted) {
        if (sets.unite(e.u, e.v)) {
            chosen.push_back(e);
            if (static_cast<VertexId>(chosen.size()) == n - 1)
                break;
        }
    }
    if (static_cast<VertexId>(chosen.size()) != n - 1)
        throw PreconditionError("graph is disconnected; no spanning tree exists");
    return WeightedTree(n, std::move(chosen));
}

std::vector<double> tree_distances_from(const WeightedTree& t, VertexId root)
{
    const VertexId n = t.vertex_count();
    if (root < 0 || root >= n)
        throw PreconditionError("root " + std::to_string(root) + " is not a vertex of the tree");
    std::vector<double> dist(n, 0.0);
    std::vector<VertexId> parent(n, -1);
    std::vector<VertexId> stack{root};
    parent[root] = root;
    while (!stack.empty()) {
        const VertexId v = stack.back();
        stack.pop_back();
        for (const auto& nb : t.neighbors(v)) {
            if (parent[nb.id] != -1)
                continue;
            parent[nb.id] = v;
            dist[nb.id] = dist[v] + nb.w;
            stack.push_back(nb.id);
        }
    }
    return dist;
}

Matrix graph_shortest_paths(const WeightedGraph& g, std::span<const VertexId> sources)
{
    const VertexId n = g.vertex_count();
    if (!g.is_connected())
        throw PreconditionError("shortest paths require a connected graph");
    Matrix out(static_cast<Eigen::Index>(sources.size()), n);

    using Item = std::pair<double, VertexId>;
    std::vector<double> dist(n);
    for (std::size_t s = 0; s < sources.size(); ++s) {
        const VertexId src = sources[s];
        if (src < 0 || src >= n)
            throw PreconditionError("source " + std::to_string(src) + " is not a vertex");
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        dist[src] = 0.0;
        heap.emplace(0.0, src);
        while (!heap.empty()) {
            const auto [d, v] = heap.top();
            heap.pop();
            if (d > dist[v])
                continue;
            for (const auto& nb : g.neighbors(v)) {
                const double cand = d + nb.w;
                if (cand < dist[nb.id]) {
                    dist[nb.id] = cand;
                    heap.emplace(cand, nb.id);
                }
            }
        }
        for (VertexId v = 0; v < n; ++v)
            out(static_cast<Eigen::Index>(s), v) = dist[v];
    }
    return out;
}

// ---------------------------------------------------------------------------
// synthetic inputs

WeightSampler unit_weights()
{
    return [](std::mt19937_64&) { return 1.0; };
}

WeightSampler uniform_weights(double lo, double hi)
{
    return [lo, hi](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> dist(lo, hi);
        double w = dist(rng);
        while (w <= lo)
            w = dist(rng);
        return w;
    };
}

WeightSampler quantized_weights(int q, int p)
{
    if (q < 1 || p < 1)
        throw PreconditionError("quantized weights need q >= 1 and p >= 1");
    return [q, p](std::mt19937_64& rng) {
        std::uniform_int_distribution<int> dist(1, p);
        return static_cast<double>(dist(rng)) / q;
    };
}

WeightedTree random_tree(VertexId n, std::uint64_t seed, const WeightSampler& weight)
{
    if (n < 1)
        throw PreconditionError("random tree needs n >= 1");
    std::mt19937_64 rng(seed);
    std::vector<Edge> edges;
    edges.reserve(n > 0 ? n - 1 : 0);
    if (n == 2)
        edges.push_back({0, 1, weight(rng)});
    if (n > 2) {
        std::vector<VertexId> code(n - 2);
        std::uniform_int_distribution<VertexId> pick(0, n - 1);
        for (auto& c : code)
            c = pick(rng);
        std::vector<VertexId> degree(n, 1);
        for (auto c : code)
            ++degree[c];
        // Linear-time Pruefer decoding.
        VertexId ptr = 0;
        while (degree[ptr] != 1)
            ++ptr;
        VertexId leaf = ptr;
        for (auto c : code) {
            edges.push_back({leaf, c, 0.0});
            if (--degree[c] == 1 && c < ptr) {
                leaf = c;
            } else {
                ++ptr;
                while (degree[ptr] != 1)
                    ++ptr;
                leaf = ptr;
            }
        }
        edges.push_back({leaf, n - 1, 0.0});
        for (auto& e : edges)
            e.w = weight(rng);
    }
    return WeightedTree(n, std::move(edges));
}

WeightedGraph path_plus_random_edges(VertexId n, int extra, std::uint64_t seed)
{
    if (n < 2)
        throw PreconditionError("synthetic graph needs n >= 2");
    const long long max_extra = static_cast<long long>(n) * (n - 1) / 2 - (n - 1);
    if (extra < 0 || extra > max_extra)
        throw PreconditionError("cannot add " + std::to_string(extra) + " distinct chords to a path of " +
                                std::to_string(n) + " vertices");
    std::mt19937_64 rng(seed);
    auto weight = uniform_weights(0.0, 1.0);
    std::vector<Edge> edges;
    std::unordered_set<std::uint64_t> seen;
    for (VertexId i = 0; i + 1 < n; ++i) {
        edges.push_back({i, i + 1, weight(rng)});
        seen.insert(edge_key(i, i + 1));
    }
    std::uniform_int_distribution<VertexId> pick(0, n - 1);
    int added = 0;
    while (added < extra) {
        const VertexId u = pick(rng), v = pick(rng);
        if (u == v || !seen.insert(edge_key(u, v)).second)
            continue;
        edges.push_back({std::min(u, v), std::max(u, v), weight(rng)});
        ++added;
    }
    return WeightedGraph(n, std::move(edges));
}

WeightedGraph grid_graph(int rows, int cols)
{
    if (rows < 1 || cols < 1)
        throw PreconditionError("grid needs positive dimensions");
    std::vector<Edge> edges;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const VertexId v = r * cols + c;
            if (c + 1 < cols)
                edges.push_back({v, v + 1, 1.0});
            if (r + 1 < rows)
                edges.push_back({v, v + cols, 1.0});
        }
    return WeightedGraph(rows * cols, std::move(edges));
}

} // namespace ftfi
