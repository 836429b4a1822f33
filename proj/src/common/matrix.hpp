#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace snail {

// Dense row-major matrix over any scalar the kernels are instantiated with.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}
  Matrix(size_t rows, size_t cols, const T& fill) : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Matrix zeros(size_t rows, size_t cols) { return Matrix(rows, cols, T(0.0)); }
  static Matrix identity(size_t n) {
    Matrix m = zeros(n, n);
    for (size_t i = 0; i < n; ++i) m(i, i) = T(1.0);
    return m;
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  T& operator()(size_t r, size_t c) { return a_[r * cols_ + c]; }
  const T& operator()(size_t r, size_t c) const { return a_[r * cols_ + c]; }
  std::vector<T>& data() { return a_; }
  const std::vector<T>& data() const { return a_; }

 private:
  size_t rows_ = 0, cols_ = 0;
  std::vector<T> a_;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace snail
