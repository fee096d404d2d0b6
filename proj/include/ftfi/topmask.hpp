#pragma once

#include "ftfi/integrator_tree.hpp"
#include "ftfi/scalar_map.hpp"

#include <memory>
#include <string>
#include <vector>

namespace ftfi {

/// Unit-weight h x w grid reduced to its minimum spanning tree; tokens are
/// numbered row-major.
WeightedTree grid_mst(int rows, int cols);

enum class FeatureMap { ReLU, Square, Fourth, Exp };
std::string to_string(FeatureMap phi);
/// Accepts relu, square (x2), fourth (x4), exp.
FeatureMap feature_map_from_string(std::string_view name);
Matrix apply_feature_map(FeatureMap phi, const Matrix& X);

struct AttentionInputs {
    Matrix Q;  // L x m
    Matrix K;  // L x m
    Matrix V;  // L x d
    FeatureMap phi = FeatureMap::ReLU;
};

enum class MaskLink { Exp, Reciprocal };
std::string to_string(MaskLink g);
MaskLink mask_link_from_string(std::string_view name);

/// Mask M(i, j) = g(a_0 + a_1 x + ... + a_t x^t) at x = tree distance(i, j),
/// with g = exp or g(z) = 1/z and t in {1, 2, 5, 10}.
class TopologicalMask {
public:
    /// The reciprocal link requires the polynomial to stay positive on
    /// [0, tree diameter]; PreconditionError otherwise.
    TopologicalMask(const WeightedTree& tree, MaskLink g, std::vector<double> coeffs, int leaf_threshold = 16);

    /// Same tree and link with new coefficients; the IntegratorTree is shared.
    TopologicalMask with_coefficients(std::vector<double> coeffs) const;

    MaskLink link() const { return g_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    std::size_t parameter_count() const { return coeffs_.size(); }
    const std::vector<double>& coefficients() const { return coeffs_; }
    const IntegratorTree& integrator_tree() const { return *it_; }
    const WeightedTree& tree() const { return *tree_; }

    double value(double distance) const;
    ScalarMap f() const;
    /// d f / d a_k as a function of distance.
    ScalarMap derivative(int k) const;
    /// Dense L x L mask for the explicit oracle.
    Matrix dense() const;

private:
    TopologicalMask(std::shared_ptr<const WeightedTree> tree, std::shared_ptr<const IntegratorTree> it,
                    double diameter, MaskLink g, std::vector<double> coeffs);
    void validate() const;

    std::shared_ptr<const WeightedTree> tree_;
    std::shared_ptr<const IntegratorTree> it_;
    double diameter_ = 0.0;
    MaskLink g_;
    std::vector<double> coeffs_;
};

/// D^{-1} (M o phi(Q) phi(K)^T) V computed densely. L <= dense_guard.
Matrix masked_attention_explicit(const AttentionInputs& in, const Matrix& M, Eigen::Index dense_guard = 4096);

/// Algorithm 1 with f-integration over the mask's tree as the fast
/// multiplication by M. The V1 rows are vec(phi(k_i)^T v_i) in row-major
/// (m x d) order.
Matrix masked_attention_fast(const AttentionInputs& in, const TopologicalMask& mask);

/// Gradient of <upstream, masked_attention_fast(in, mask)> with respect to
/// the mask coefficients a_0..a_t, by forward-mode differentiation of f.
std::vector<double> mask_gradients(const AttentionInputs& in, const TopologicalMask& mask, const Matrix& upstream);

} // namespace ftfi
