#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bartsens {

/// Dense row-major matrix of doubles; rows are observations.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }

  std::span<const double> row(int r) const {
    return {values.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }

  Matrix select_rows(std::span<const int> idx) const {
    Matrix out(static_cast<int>(idx.size()), cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (int c = 0; c < cols; ++c) out(static_cast<int>(i), c) = (*this)(idx[i], c);
    return out;
  }
};

}  // namespace bartsens
