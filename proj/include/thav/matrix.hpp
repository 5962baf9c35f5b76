#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "thav/error.hpp"

namespace thav {

namespace detail {

inline void require_finite(double v, const char* where) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::NonFinite, std::string("non-finite entry in ") + where);
  }
}

}  // namespace detail

/**
 * Dense row-major n x d matrix of reals. Used for data sets and for
 * matrices that are not symmetric (e.g. the d^2 x d^2 Hessian blocks).
 */
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/**
 * Dense symmetric d x d matrix. Every write goes to both (i, j) and (j, i),
 * so symmetry holds exactly; non-finite values are rejected on write.
 */
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  static SymMatrix identity(std::size_t dim) {
    SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.data_[i * dim + i] = 1.0;
    return m;
  }

  static SymMatrix diagonal(std::span<const double> diag) {
    SymMatrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m.set(i, i, diag[i]);
    return m;
  }

  /// Builds from full rows; rejects asymmetric or non-finite input.
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t d = rows.size();
    SymMatrix m(d);
    for (std::size_t i = 0; i < d; ++i) {
      if (rows[i].size() != d) {
        throw Error(ErrorKind::DimensionMismatch, "matrix rows must have length " + std::to_string(d));
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) {
        const double a = rows[i][j];
        const double b = rows[j][i];
        detail::require_finite(a, "SymMatrix");
        const double scale = std::max({1.0, std::abs(a), std::abs(b)});
        if (std::abs(a - b) > 1e-12 * scale) {
          throw Error(ErrorKind::InvalidArgument,
                      "matrix is not symmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        }
        m.set(i, j, a);
      }
    }
    return m;
  }

  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<std::vector<double>> v;
    for (const auto& r : rows) v.emplace_back(r);
    return from_rows(v);
  }

  /// Takes a full row-major buffer and symmetrizes it by averaging (i, j) and (j, i).
  static SymMatrix symmetrized(std::size_t dim, std::span<const double> full) {
    if (full.size() != dim * dim) throw Error(ErrorKind::DimensionMismatch, "buffer size");
    SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = i; j < dim; ++j) {
        m.set(i, j, i == j ? full[i * dim + i] : 0.5 * (full[i * dim + j] + full[j * dim + i]));
      }
    }
    return m;
  }

  std::size_t dim() const noexcept { return dim_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

  void set(std::size_t i, std::size_t j, double v) {
    detail::require_finite(v, "SymMatrix::set");
    data_[i * dim_ + j] = v;
    data_[j * dim_ + i] = v;
  }

  /// Full row-major storage (both triangles).
  std::span<const double> values() const noexcept { return data_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += data_[i * dim_ + i];
    return t;
  }

  bool operator==(const SymMatrix&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Lower-triangular factor with a strictly positive diagonal.
class LowerTriangular {
 public:
  LowerTriangular() = default;
  explicit LowerTriangular(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return j > i ? 0.0 : data_[i * dim_ + j]; }

  /// L * L^T.
  SymMatrix reconstruct() const {
    SymMatrix m(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0.0;
        const double* li = &data_[i * dim_];
        const double* lj = &data_[j * dim_];
        for (std::size_t k = 0; k <= j; ++k) s += li[k] * lj[k];
        m.set(i, j, s);
      }
    }
    return m;
  }

  /// y = L * x.
  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < dim_; ++i) {
      double s = 0.0;
      const double* li = &data_[i * dim_];
      for (std::size_t k = 0; k <= i; ++k) s += li[k] * x[k];
      y[i] = s;
    }
  }

  double log_det() const {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += std::log(data_[i * dim_ + i]);
    return 2.0 * s;
  }

 private:
  template <class M>
  friend LowerTriangular cholesky_impl(const M& m, std::size_t d);
  friend SymMatrix invert_spd(const SymMatrix& m);

  std::size_t dim_ = 0;
  std::vector<double> data_;
};

template <class M>
LowerTriangular cholesky_impl(const M& m, std::size_t d) {
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += m(i, i);
  const double pivot_floor = 1e-12 * trace / static_cast<double>(d);

  LowerTriangular l(d);
  auto& a = l.data_;
  for (std::size_t i = 0; i < d; ++i) {
    double* li = &a[i * d];
    for (std::size_t j = 0; j < i; ++j) {
      const double* lj = &a[j * d];
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      li[j] = s / lj[j];
    }
    double s = m(i, i);
    for (std::size_t k = 0; k < i; ++k) s -= li[k] * li[k];
    if (!(s > pivot_floor) || !(s > 0.0)) throw NotPositiveDefiniteError(i, s);
    li[i] = std::sqrt(s);
  }
  return l;
}

/**
 * Cholesky factorization m = L L^T. Throws NotPositiveDefiniteError when a
 * pivot falls to or below 1e-12 * trace(m) / d.
 */
inline LowerTriangular cholesky(const SymMatrix& m) {
  if (m.dim() == 0) throw Error(ErrorKind::InvalidArgument, "empty matrix");
  return cholesky_impl(m, m.dim());
}

/// Inverse of a positive definite matrix through its Cholesky factor.
inline SymMatrix invert_spd(const SymMatrix& m) {
  const std::size_t d = m.dim();
  const LowerTriangular l = cholesky(m);
  const auto& a = l.data_;

  // Row-major inverse of L, lower triangular.
  std::vector<double> inv(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    inv[i * d + i] = 1.0 / a[i * d + i];
    for (std::size_t j = 0; j < i; ++j) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s += a[i * d + k] * inv[k * d + j];
      inv[i * d + j] = -s / a[i * d + i];
    }
  }
  // m^{-1} = L^{-T} L^{-1}; entry (i, j) = sum_{k >= max(i,j)} inv[k][i] inv[k][j].
  std::vector<double> out(d * d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    const double* row = &inv[k * d];
    for (std::size_t i = 0; i <= k; ++i) {
      const double ri = row[i];
      if (ri == 0.0) continue;
      double* oi = &out[i * d];
      for (std::size_t j = 0; j <= i; ++j) oi[j] += ri * row[j];
    }
  }
  SymMatrix result(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) result.set(i, j, out[i * d + j]);
  }
  return result;
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const SymMatrix& m) {
  const std::size_t d = m.dim();
  if (d == 0) throw Error(ErrorKind::InvalidArgument, "empty matrix");
  Eigen::MatrixXd a(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) a(i, j) = m(i, j);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonFinite, "eigenvalue iteration failed");
  }
  return solver.eigenvalues().minCoeff();
}

/// Maximum absolute row sum.
inline double inf_operator_norm(const SymMatrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

inline bool is_positive_definite(const SymMatrix& m) {
  try {
    (void)cholesky(m);
    return true;
  } catch (const NotPositiveDefiniteError&) {
    return false;
  }
}

inline SymMatrix add_scaled_identity(const SymMatrix& m, double c) {
  SymMatrix out = m;
  for (std::size_t i = 0; i < m.dim(); ++i) out.set(i, i, m(i, i) + c);
  return out;
}

/// Product of two symmetric matrices (not symmetric in general).
inline DenseMatrix multiply(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "multiply");
  const std::size_t d = a.dim();
  DenseMatrix out(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

}  // namespace thav
