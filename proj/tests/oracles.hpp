#pragma once
// Independent reference computations shared by the unit tests. Nothing here
// calls into the library's own distance or integration code.

#include "ftfi/graph.hpp"
#include "ftfi/scalar_map.hpp"

#include <cmath>
#include <queue>
#include <random>
#include <span>
#include <vector>

namespace oracle {

using ftfi::Matrix;

// Pairwise distances of a tree by relaxing edges until nothing changes
// (Bellman-Ford from every source). Quadratic-times-n, fine for n <= 400.
inline Matrix tree_distances(int n, const std::vector<ftfi::Edge>& edges)
{
    Matrix d = Matrix::Constant(n, n, INFINITY);
    for (int s = 0; s < n; ++s) {
        d(s, s) = 0.0;
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& e : edges) {
                if (d(s, e.u) + e.w < d(s, e.v)) {
                    d(s, e.v) = d(s, e.u) + e.w;
                    changed = true;
                }
                if (d(s, e.v) + e.w < d(s, e.u)) {
                    d(s, e.u) = d(s, e.v) + e.w;
                    changed = true;
                }
            }
        }
    }
    return d;
}

// out[i] = sum_j f(d(i, j)) X[j], one pair at a time.
inline Matrix naive_integrate(const Matrix& d, const ftfi::ScalarMap& f, const Matrix& X)
{
    Matrix out = Matrix::Zero(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j)
            out.row(i) += f(d(i, j)) * X.row(j);
    return out;
}

// Random tree by attaching vertex v to a uniformly chosen earlier vertex.
inline std::vector<ftfi::Edge> random_attachment_tree(int n, std::mt19937_64& rng, double lo = 0.0,
                                                      double hi = 1.0)
{
    std::vector<ftfi::Edge> edges;
    std::uniform_real_distribution<double> w(lo, hi);
    for (int v = 1; v < n; ++v) {
        const int parent = std::uniform_int_distribution<int>(0, v - 1)(rng);
        double weight = w(rng);
        while (weight <= 0.0)
            weight = w(rng);
        edges.push_back({parent, v, weight});
    }
    return edges;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = g(rng);
    return m;
}

inline double rel_frobenius(const Matrix& a, const Matrix& b)
{
    const double denom = b.norm();
    return denom == 0.0 ? a.norm() : (a - b).norm() / denom;
}

// C(i, j) = f(x_i + y_j), entry by entry.
inline Matrix naive_cross(std::span<const double> x, std::span<const double> y, const ftfi::ScalarMap& f)
{
    Matrix c(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f(x[i] + y[j]);
    return c;
}

} // namespace oracle
