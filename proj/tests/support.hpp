#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "thav/thav.hpp"

// Helpers shared by the test suites. Nothing here calls into the code under
// test except for the matrix and config containers.

namespace thav::fixtures {

inline double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  }
  return m;
}

inline std::vector<double> dense_product(const SymMatrix& a, const SymMatrix& b) {
  const std::size_t d = a.dim();
  std::vector<double> out(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] += a(i, k) * b(k, j);
    }
  }
  return out;
}

inline double identity_error(const SymMatrix& a, const SymMatrix& b) {
  const std::size_t d = a.dim();
  const auto p = dense_product(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) m = std::max(m, std::abs(p[i * d + j] - (i == j ? 1.0 : 0.0)));
  }
  return m;
}

/// Symmetric matrix with entries uniform on [-1, 1].
inline SymMatrix random_symmetric(Rng& rng, std::size_t d) {
  SymMatrix m(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) m.set(i, j, rng.uniform(-1.0, 1.0));
  }
  return m;
}

/// A A^T / k + eps I with A a d x k Gaussian matrix.
inline SymMatrix random_spd(Rng& rng, std::size_t d, std::size_t k = 0, double eps = 0.1) {
  if (k == 0) k = d + 2;
  std::vector<double> a(d * k);
  for (double& x : a) x = rng.normal();
  SymMatrix m(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < k; ++c) s += a[i * k + c] * a[j * k + c];
      m.set(i, j, s / static_cast<double>(k) + (i == j ? eps : 0.0));
    }
  }
  return m;
}

/// Correlation matrix of a random Gaussian sample, as a covariance.
inline CovarianceMatrix random_correlation(Rng& rng, std::size_t d, std::size_t n) {
  const SymMatrix m = random_spd(rng, d, n, 0.0);
  SymMatrix c(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) c.set(i, j, i == j ? 1.0 : m(i, j) / std::sqrt(m(i, i) * m(j, j)));
  }
  return {c, n};
}

/// Eigenvalues by cyclic Jacobi rotations, sorted ascending.
inline std::vector<double> jacobi_eigenvalues(const SymMatrix& m) {
  const std::size_t d = m.dim();
  std::vector<double> a(m.values().begin(), m.values().end());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) off += a[p * d + q] * a[p * d + q];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a[p * d + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a[k * d + p];
          const double akq = a[k * d + q];
          a[k * d + p] = c * akp - s * akq;
          a[k * d + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a[p * d + k];
          const double aqk = a[q * d + k];
          a[p * d + k] = c * apk - s * aqk;
          a[q * d + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(d);
  for (std::size_t i = 0; i < d; ++i) ev[i] = a[i * d + i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Gauss-Jordan inverse with partial pivoting on a dense row-major matrix.
inline std::vector<double> gauss_jordan_inverse(std::vector<double> a, std::size_t n) {
  std::vector<double> inv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(a[col * n + k], a[piv * n + k]);
      std::swap(inv[col * n + k], inv[piv * n + k]);
    }
    const double p = a[col * n + col];
    for (std::size_t k = 0; k < n; ++k) {
      a[col * n + k] /= p;
      inv[col * n + k] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r * n + k] -= f * a[col * n + k];
        inv[r * n + k] -= f * inv[col * n + k];
      }
    }
  }
  return inv;
}

/// log |det| of a general square matrix by LU with partial pivoting.
inline long double log_abs_det(std::vector<long double> a, std::size_t n) {
  long double acc = 0.0L;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
    }
    const long double p = a[col * n + col];
    acc += std::log(std::abs(p));
    for (std::size_t r = col + 1; r < n; ++r) {
      const long double f = a[r * n + col] / p;
      for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
    }
  }
  return acc;
}

/**
 * Worst relative gap between -gamma and central second differences of
 * log det at theta. gamma is indexed as Gamma_{(j,k),(l,m)} and compared with
 * d^2 log det / d theta_kj d theta_lm = -Sigma_jl Sigma_km.
 */
inline double hessian_fd_relative_error(const SymMatrix& theta, const DenseMatrix& gamma, long double h = 1e-4L) {
  const std::size_t d = theta.dim();
  const std::vector<long double> base(theta.values().begin(), theta.values().end());
  auto f = [&](std::size_t a, long double da, std::size_t b, long double db) {
    std::vector<long double> x = base;
    x[a] += da;
    x[b] += db;
    return log_abs_det(std::move(x), d);
  };
  double worst = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t l = 0; l < d; ++l) {
        for (std::size_t m = 0; m < d; ++m) {
          const std::size_t a = k * d + j;
          const std::size_t b = l * d + m;
          const auto fd = static_cast<double>((f(a, h, b, h) - f(a, h, b, -h) - f(a, -h, b, h) + f(a, -h, b, -h)) / (4 * h * h));
          const double expected = -gamma(j * d + k, l * d + m);
          worst = std::max(worst, std::abs(fd - expected) / std::abs(expected));
        }
      }
    }
  }
  return worst;
}

/**
 * Closed-form 2x2 graphical lasso with unpenalized diagonal. W keeps the
 * diagonal of S and w12 = soft(s12, r); theta = W^{-1}.
 */
inline SymMatrix glasso_2x2(double s11, double s22, double s12, double r) {
  const double w12 = std::abs(s12) > r ? s12 - r * (s12 > 0 ? 1.0 : -1.0) : 0.0;
  const double det = s11 * s22 - w12 * w12;
  return SymMatrix::from_rows({{s22 / det, -w12 / det}, {-w12 / det, s11 / det}});
}

/// A materialized path built from explicit estimates, for calibration tests.
struct ManualPath {
  std::vector<double> grid;
  std::vector<SymMatrix> thetas;

  std::size_t size() const noexcept { return grid.size(); }
  double r(std::size_t k) const { return grid[k]; }
  const SymMatrix& theta(std::size_t k) const { return thetas[k]; }
};

/**
 * Random path whose estimates drift apart as r shrinks, so that violations
 * land at varied grid positions. Diagonals stay positive for rescaling.
 */
inline ManualPath fuzz_path(Rng& rng, std::size_t d, std::size_t m) {
  ManualPath p;
  double r = rng.uniform(0.02, 0.1);
  for (std::size_t k = 0; k < m; ++k) {
    p.grid.push_back(r);
    r += rng.uniform(0.005, 0.05);
  }
  SymMatrix base(d);
  SymMatrix drift(d);
  for (std::size_t i = 0; i < d; ++i) {
    base.set(i, i, rng.uniform(0.8, 1.5));
    for (std::size_t j = i + 1; j < d; ++j) {
      base.set(i, j, rng.uniform(-0.3, 0.3));
      drift.set(i, j, rng.uniform(-1.0, 1.0));
    }
  }
  const double power = rng.uniform(0.5, 3.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double amount = std::pow(1.0 - static_cast<double>(k) / static_cast<double>(m), power);
    SymMatrix t(d);
    for (std::size_t i = 0; i < d; ++i) {
      t.set(i, i, base(i, i) * (1.0 + 0.3 * amount * rng.uniform()));
      for (std::size_t j = i + 1; j < d; ++j) {
        t.set(i, j, base(i, j) * (1 - amount) + 0.4 * amount * drift(i, j) + 0.02 * rng.uniform(-1, 1));
      }
    }
    p.thetas.push_back(std::move(t));
  }
  return p;
}

inline AvConfig fuzz_config(Rng& rng) {
  AvConfig c;
  c.C = rng.uniform(0.05, 2.0);
  c.rescale = rng.coin();
  if (rng.below(4) == 0) c.loss = LossKind::quantile(rng.uniform(0.05, 0.6));
  return c;
}

}  // namespace thav::fixtures
