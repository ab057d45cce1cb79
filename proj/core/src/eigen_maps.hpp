#pragma once

#include <Eigen/Dense>

#include "swarm/matrix.hpp"

namespace swarm::ad::detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

inline MapMat map(Matrix& m) { return {m.data(), m.rows(), m.cols()}; }
inline ConstMapMat map(const Matrix& m) { return {m.data(), m.rows(), m.cols()}; }

/// Rows [row0, row0+rows) and columns [col0, col0+cols) of m as a view.
inline StridedMap block(Matrix& m, int row0, int rows, int col0, int cols) {
  return {m.data() + static_cast<std::ptrdiff_t>(row0) * m.cols() + col0, rows, cols,
          Eigen::OuterStride<>(m.cols())};
}
inline ConstStridedMap block(const Matrix& m, int row0, int rows, int col0, int cols) {
  return {m.data() + static_cast<std::ptrdiff_t>(row0) * m.cols() + col0, rows, cols,
          Eigen::OuterStride<>(m.cols())};
}

}  // namespace swarm::ad::detail
