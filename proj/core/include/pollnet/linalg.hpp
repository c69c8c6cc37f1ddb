#ifndef POLLNET_LINALG_HPP
#define POLLNET_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "pollnet/errors.hpp"

namespace pollnet {

using Vec = std::vector<double>;

/// Small dense row-major matrix. The networks here have a handful of queues,
/// so everything is direct and allocation-light; no BLAS.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  Vec row(int i) const {
    return Vec(data_.begin() + static_cast<std::ptrdiff_t>(i) * cols_,
               data_.begin() + static_cast<std::ptrdiff_t>(i + 1) * cols_);
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  const std::vector<double>& data() const { return data_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

/// Row vector times matrix.
inline Vec operator*(const Vec& x, const Matrix& m) {
  Vec y(m.cols(), 0.0);
  for (int i = 0; i < m.rows(); ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < m.cols(); ++j) y[j] += x[i] * m(i, j);
  }
  return y;
}

/// Matrix times column vector.
inline Vec operator*(const Matrix& m, const Vec& x) {
  Vec y(m.rows(), 0.0);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) y[i] += m(i, j) * x[j];
  return y;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Throws NumericError on a (near-)singular pivot.
inline Vec solve_linear(Matrix a, Vec b) {
  const int n = a.rows();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;

  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) < 1e-300)
      throw NumericError("singular linear system");
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      a(r, col) = 0.0;
      for (int j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
      b[r] -= f * b[col];
    }
  }
  Vec x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

}  // namespace pollnet

#endif
