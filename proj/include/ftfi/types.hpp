#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace ftfi {

using VertexId = std::int32_t;

/// Row-major dense matrix; fields are stored one vertex per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

} // namespace ftfi
