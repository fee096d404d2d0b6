#pragma once

#include "ftfi/rff.hpp"
#include "ftfi/scalar_map.hpp"
#include "ftfi/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ftfi {

/// How a cross-term matrix C(i, j) = f(x_i + y_j) is multiplied.
enum class Strategy {
    Dense,                 // materialized (or streamed) C
    OuterProductSum,       // polynomial / exponential / exp x poly / trig
    HankelFFT,             // both sides on a 1/q grid, any f
    CauchyLike,            // exp(l z) / (z + c)
    VandermondeQuantized,  // exp(u z^2 + v z + w) with y on a 1/q grid
    RationalSum,           // rational f, dense evaluation
    RFF,                   // random Fourier features (approximate)
};

std::string to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view name);

/// Documented agreement with dense materialization (relative Frobenius);
/// RFF has no deterministic bound and reports infinity.
double strategy_tolerance(Strategy s);

struct MultiplierOptions {
    /// Grid denominator q of the caller's distances, when known.
    std::optional<int> quantization;
    /// Forces a strategy; build_multiplier throws if it cannot apply.
    std::optional<Strategy> force;
    int rff_features = 256;
    std::uint64_t rff_seed = 0;
};

namespace detail {
struct MultiplierImpl {
    virtual ~MultiplierImpl() = default;
    virtual Matrix apply(const Eigen::Ref<const Matrix>& V) const = 0;
    virtual Matrix apply_transpose(const Eigen::Ref<const Matrix>& W) const = 0;
};
} // namespace detail

/// Immutable strategy object for v -> C v and w -> C^T w. Copies share state.
class CrossMultiplier {
public:
    CrossMultiplier(Strategy s, std::size_t rows, std::size_t cols, std::shared_ptr<const detail::MultiplierImpl> impl,
                    int quantization = 0);

    Strategy strategy() const { return strategy_; }
    /// Strategy name plus parameters, e.g. "HankelFFT(q=4)".
    std::string label() const;
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    /// V is cols() x D; returns rows() x D.
    Matrix apply(const Eigen::Ref<const Matrix>& V) const;
    /// W is rows() x D; returns cols() x D.
    Matrix apply_transpose(const Eigen::Ref<const Matrix>& W) const;

private:
    Strategy strategy_;
    std::size_t rows_;
    std::size_t cols_;
    int quantization_;
    std::shared_ptr<const detail::MultiplierImpl> impl_;
};

/// Picks the first applicable strategy in the order OuterProductSum,
/// VandermondeQuantized, HankelFFT, CauchyLike, RationalSum, Dense unless
/// options.force names one.
CrossMultiplier build_multiplier(std::span<const double> x, std::span<const double> y, const ScalarMap& f,
                                 const MultiplierOptions& options = {});

/// True when every value is within 1e-9 of an integer multiple of 1/q.
bool is_quantized(std::span<const double> values, int q);

/// Dense materialization C(i, j) = f(x_i + y_j).
Matrix materialize_cross(std::span<const double> x, std::span<const double> y, const ScalarMap& f);

// Direct entry points for the individual strategies.
Matrix dense_apply(std::span<const double> x, std::span<const double> y, const ScalarMap& f,
                   const Eigen::Ref<const Matrix>& V);
Matrix outer_product_apply(std::span<const double> x, std::span<const double> y, const ScalarMap& f,
                           const Eigen::Ref<const Matrix>& V);
Matrix hankel_fft_apply(std::span<const double> x, std::span<const double> y, int q, const ScalarMap& f,
                        const Eigen::Ref<const Matrix>& V);
Matrix cauchy_like_apply(std::span<const double> x, std::span<const double> y, const ScalarMap& f,
                         const Eigen::Ref<const Matrix>& V);
Matrix vandermonde_quantized_apply(std::span<const double> x, std::span<const double> y, int q,
                                   const ScalarMap& f, const Eigen::Ref<const Matrix>& V);
Matrix rational_sum_apply(std::span<const double> x, std::span<const double> y, const ScalarMap& f,
                          const Eigen::Ref<const Matrix>& V);

/// Trigonometric outer-product path returning the largest imaginary residual
/// |Im(out_ij)| / (|out_ij| + 1) of the complex two-term evaluation.
Matrix trig_apply_with_residual(std::span<const double> x, std::span<const double> y, const Trigonometric& f,
                                const Eigen::Ref<const Matrix>& V, double& max_residual);

} // namespace ftfi
