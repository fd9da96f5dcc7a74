#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ltd3/errors.hpp"

namespace ltd3 {

/// Dense row-major matrix of 64-bit floats. Batches are laid out one sample
/// per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Gradients for a parameter list, index-aligned with the tensors they
/// differentiate.
using ParamGrads = std::vector<Matrix>;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw NumericError(what + ": non-finite entries");
}

inline void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                          const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(what + ": expected " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()));
  }
}

/// Horizontal concatenation of row-aligned blocks.
inline Matrix hcat(std::initializer_list<const Matrix*> blocks) {
  Eigen::Index rows = -1, cols = 0;
  for (const Matrix* b : blocks) {
    if (b->cols() == 0) continue;
    if (rows >= 0 && b->rows() != rows) throw DimensionError("hcat: row mismatch");
    rows = b->rows();
    cols += b->cols();
  }
  Matrix out(rows < 0 ? 0 : rows, cols);
  Eigen::Index c = 0;
  for (const Matrix* b : blocks) {
    if (b->cols() == 0) continue;
    out.middleCols(c, b->cols()) = *b;
    c += b->cols();
  }
  return out;
}

inline Matrix row_from(const std::vector<double>& v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

inline std::vector<double> to_std(const Matrix& row) {
  return std::vector<double>(row.data(), row.data() + row.size());
}

}  // namespace ltd3
