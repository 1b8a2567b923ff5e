#pragma once

#include <algorithm>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "pie/scalar.hpp"

namespace pie {

// Small dense matrix over an exact or floating scalar. Used for boundary
// matrices and other objects of size O(n); bulk numerics go through Eigen.
template <class S>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, S(0)) {
    if (rows < 0 || cols < 0) throw UsageError("negative matrix dimension");
  }
  Mat(std::initializer_list<std::initializer_list<S>> init) {
    rows_ = static_cast<int>(init.size());
    cols_ = rows_ ? static_cast<int>(init.begin()->size()) : 0;
    for (const auto& row : init) {
      if (static_cast<int>(row.size()) != cols_) throw UsageError("ragged matrix initializer");
      for (const auto& v : row) data_.push_back(v);
    }
  }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = S(1);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  S& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  const S& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  Mat transpose() const {
    Mat t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Mat block(int r0, int c0, int nr, int nc) const {
    if (r0 < 0 || c0 < 0 || r0 + nr > rows_ || c0 + nc > cols_) throw UsageError("block out of range");
    Mat b(nr, nc);
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }

  void set_block(int r0, int c0, const Mat& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw UsageError("block out of range");
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  Mat operator+(const Mat& o) const {
    check_same(o);
    Mat r = *this;
    for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] += o.data_[k];
    return r;
  }
  Mat operator-(const Mat& o) const {
    check_same(o);
    Mat r = *this;
    for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] -= o.data_[k];
    return r;
  }
  Mat operator-() const {
    Mat r = *this;
    for (auto& v : r.data_) v = -v;
    return r;
  }
  Mat operator*(const S& s) const {
    Mat r = *this;
    for (auto& v : r.data_) v *= s;
    return r;
  }
  Mat operator*(const Mat& o) const {
    if (cols_ != o.rows_) throw UsageError("matrix product dimension mismatch");
    Mat r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        const S& a = (*this)(i, k);
        if (ScalarTraits<S>::is_zero(a)) continue;
        for (int j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
      }
    return r;
  }
  bool operator==(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_; }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const S& v) { return ScalarTraits<S>::is_zero(v); });
  }

  template <class T>
  Mat<T> cast() const {
    Mat<T> r(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r(i, j) = scalar_cast<T>((*this)(i, j));
    return r;
  }

  Eigen::MatrixXd to_eigen() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) m(i, j) = to_double((*this)(i, j));
    return m;
  }

 private:
  void check_same(const Mat& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw UsageError("matrix dimension mismatch");
  }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<S> data_;
};

template <class S>
Mat<S> hstack(const Mat<S>& a, const Mat<S>& b) {
  if (a.rows() != b.rows()) throw UsageError("hstack row mismatch");
  Mat<S> r(a.rows(), a.cols() + b.cols());
  r.set_block(0, 0, a);
  r.set_block(0, a.cols(), b);
  return r;
}

template <class S>
Mat<S> vstack(const Mat<S>& a, const Mat<S>& b) {
  if (a.cols() != b.cols()) throw UsageError("vstack column mismatch");
  Mat<S> r(a.rows() + b.rows(), a.cols());
  r.set_block(0, 0, a);
  r.set_block(a.rows(), 0, b);
  return r;
}

// Numerical rank: singular values at or below rel_tol * sigma_max count as zero.
inline int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-9) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return r;
}

template <class S>
int numerical_rank(const Mat<S>& m, double rel_tol = 1e-9) {
  return numerical_rank(m.to_eigen(), rel_tol);
}

// Gauss-Jordan elimination with partial pivoting (largest magnitude, ties to
// the lowest row). Returns J with J*A in reduced row echelon form, and the
// pivot columns in increasing order. `rank` rows are kept; entries below them
// are cleared, which is exact for rationals and a rounding cleanup for doubles.
template <class S>
struct GaussJordan {
  Mat<S> J;
  Mat<S> reduced;
  std::vector<int> pivots;
};

template <class S>
GaussJordan<S> gauss_jordan(const Mat<S>& a, int rank) {
  const int r = a.rows();
  const int c = a.cols();
  Mat<S> m = a;
  Mat<S> J = Mat<S>::identity(r);
  std::vector<int> pivots;
  int row = 0;
  double scale = 0.0;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) scale = std::max(scale, std::abs(to_double(a(i, j))));
  const double tiny = ScalarTraits<S>::exact ? 0.0 : 1e-12 * scale;
  for (int col = 0; col < c && row < rank; ++col) {
    int best = -1;
    S best_abs(0);
    for (int i = row; i < r; ++i) {
      S v = ScalarTraits<S>::abs(m(i, col));
      if (best < 0 ? !ScalarTraits<S>::is_zero(v) : v > best_abs) {
        best = i;
        best_abs = v;
      }
    }
    if (best < 0 || to_double(best_abs) <= tiny) continue;
    if (best != row) {
      for (int j = 0; j < c; ++j) std::swap(m(row, j), m(best, j));
      for (int j = 0; j < r; ++j) std::swap(J(row, j), J(best, j));
    }
    S inv = S(1) / m(row, col);
    for (int j = 0; j < c; ++j) m(row, j) *= inv;
    for (int j = 0; j < r; ++j) J(row, j) *= inv;
    for (int i = 0; i < r; ++i) {
      if (i == row) continue;
      S f = m(i, col);
      if (ScalarTraits<S>::is_zero(f)) continue;
      for (int j = 0; j < c; ++j) m(i, j) -= f * m(row, j);
      for (int j = 0; j < r; ++j) J(i, j) -= f * J(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  for (int i = row; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = S(0);
  return {J, m, pivots};
}

template <class S>
Mat<S> inverse(const Mat<S>& a) {
  if (a.rows() != a.cols()) throw UsageError("inverse of non-square matrix");
  const int n = a.rows();
  if (numerical_rank(a) < n) throw ConstructionError("matrix is singular");
  auto gj = gauss_jordan(a, n);
  return gj.J;
}

}  // namespace pie
