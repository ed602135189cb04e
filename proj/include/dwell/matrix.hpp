#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dwell {

/// Small dense real matrix, row-major storage. Intended for desk-scale
/// problems (n <= 20); all operations are O(n^3) or better and allocate
/// freely.
class Matrix {
public:
  Matrix() = default;

  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols), 0.0) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("Matrix: dimensions must be positive");
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const int r = static_cast<int>(rows.size());
    const int c = static_cast<int>(rows.begin()->size());
    Matrix m(r, c);
    int i = 0;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != c) throw std::invalid_argument("Matrix: ragged initializer");
      int j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(int r, int c) { return a_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return a_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::vector<double>& data() { return a_; }
  const std::vector<double>& data() const { return a_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : a_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("Matrix multiply: shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend std::vector<double> operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols_ != static_cast<int>(x.size())) throw std::invalid_argument("Matrix-vector multiply: shape mismatch");
    std::vector<double> y(static_cast<std::size_t>(a.rows_), 0.0);
    for (int i = 0; i < a.rows_; ++i) {
      double s = 0.0;
      for (int j = 0; j < a.cols_; ++j) s += a(i, j) * x[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] = s;
    }
    return y;
  }
  friend std::vector<double> operator*(const Matrix& a, const std::vector<double>& x) {
    return a * std::span<const double>(x);
  }

  /// Maximum absolute row sum.
  double norm_inf() const {
    double best = 0.0;
    for (int i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  /// Maximum absolute column sum.
  double norm_one() const {
    double best = 0.0;
    for (int j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (int i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  double norm_fro() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

  double max_abs() const {
    double best = 0.0;
    for (double v : a_) best = std::max(best, std::abs(v));
    return best;
  }

  bool all_finite() const {
    for (double v : a_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Matrix symmetrized() const {
    if (!square()) throw std::invalid_argument("symmetrized: matrix must be square");
    Matrix s(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
    return s;
  }

private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix: shape mismatch");
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
/// Throws std::domain_error naming the offending pivot when the matrix is
/// not positive definite.
inline Matrix cholesky_factor(const Matrix& s) {
  if (!s.square()) throw std::invalid_argument("cholesky: matrix must be square");
  const int n = s.rows();
  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = s(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw std::domain_error("cholesky: non-positive pivot at index " + std::to_string(j) +
                                            " (value " + std::to_string(d) + ")");
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

/// Solves L y = b for lower-triangular L.
inline std::vector<double> forward_subst(const Matrix& l, std::span<const double> b) {
  const int n = l.rows();
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double v = b[static_cast<std::size_t>(i)];
    for (int k = 0; k < i; ++k) v -= l(i, k) * y[static_cast<std::size_t>(k)];
    y[static_cast<std::size_t>(i)] = v / l(i, i);
  }
  return y;
}

/// Solves L^T x = y for lower-triangular L.
inline std::vector<double> backward_subst_t(const Matrix& l, std::span<const double> y) {
  const int n = l.rows();
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    double v = y[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < n; ++k) v -= l(k, i) * x[static_cast<std::size_t>(k)];
    x[static_cast<std::size_t>(i)] = v / l(i, i);
  }
  return x;
}

/// In-place partial-pivot LU solve of a general square system. Throws
/// std::runtime_error on numerical singularity.
inline std::vector<double> lu_solve(Matrix a, std::vector<double> b) {
  if (!a.square() || a.rows() != static_cast<int>(b.size()))
    throw std::invalid_argument("lu_solve: shape mismatch");
  const int n = a.rows();
  std::vector<int> piv(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (a(p, k) == 0.0) throw std::runtime_error("lu_solve: singular system");
    piv[static_cast<std::size_t>(k)] = p;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(p)]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      a(i, k) = f;
      for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      b[static_cast<std::size_t>(i)] -= f * b[static_cast<std::size_t>(k)];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    double v = b[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) v -= a(i, j) * b[static_cast<std::size_t>(j)];
    b[static_cast<std::size_t>(i)] = v / a(i, i);
  }
  return b;
}

/// Symmetric positive definite matrix. The constructor symmetrizes the
/// input and computes the Cholesky factor, which doubles as the
/// positive-definiteness witness.
class SpdMatrix {
public:
  explicit SpdMatrix(const Matrix& m) : p_(m.symmetrized()), chol_(cholesky_factor(p_)) {
    if (!p_.all_finite()) throw std::invalid_argument("SpdMatrix: non-finite entries");
  }

  int dim() const { return p_.rows(); }
  const Matrix& matrix() const { return p_; }
  const Matrix& cholesky() const { return chol_; }

  /// x^T P x
  double quad(std::span<const double> x) const {
    double s = 0.0;
    for (int i = 0; i < p_.rows(); ++i)
      for (int j = 0; j < p_.cols(); ++j) s += x[static_cast<std::size_t>(i)] * p_(i, j) * x[static_cast<std::size_t>(j)];
    return s;
  }

private:
  Matrix p_;
  Matrix chol_;
};

}  // namespace dwell
