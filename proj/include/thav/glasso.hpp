#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "thav/error.hpp"
#include "thav/matrix.hpp"

namespace thav {

/// Empirical covariance together with the number of samples it came from.
struct CovarianceMatrix {
  SymMatrix base;
  std::size_t n_samples = 0;

  std::size_t dim() const noexcept { return base.dim(); }
  double operator()(std::size_t i, std::size_t j) const { return base(i, j); }
};

/// Nonempty, strictly increasing list of positive regularization parameters.
class RegGrid {
 public:
  RegGrid() = default;
  explicit RegGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw Error(ErrorKind::InvalidArgument, "regularization grid is empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]) || values_[i] <= 0.0) {
        throw Error(ErrorKind::InvalidArgument, "grid values must be positive and finite");
      }
      if (i > 0 && !(values_[i] > values_[i - 1])) {
        throw Error(ErrorKind::InvalidArgument, "grid values must be strictly increasing");
      }
    }
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

/**
 * S = (1/n) Z^T Z, on column-centered data unless the caller asserts the
 * data are already centered.
 */
inline CovarianceMatrix empirical_covariance(const DenseMatrix& data, bool assume_centered) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n < 2 || d < 2) throw Error(ErrorKind::InvalidArgument, "need n >= 2 and d >= 2");
  for (double v : data.values()) detail::require_finite(v, "data");

  std::vector<double> mean(d, 0.0);
  if (!assume_centered) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) mean[j] += data(i, j);
    }
    for (double& m : mean) m /= static_cast<double>(n);
  }
  std::vector<double> acc(d * d, 0.0);
  std::vector<double> centered(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) centered[j] = data(i, j) - mean[j];
    for (std::size_t a = 0; a < d; ++a) {
      const double za = centered[a];
      if (za == 0.0) continue;
      double* row = &acc[a * d];
      for (std::size_t b = 0; b <= a; ++b) row[b] += za * centered[b];
    }
  }
  SymMatrix s(d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b <= a; ++b) s.set(a, b, acc[a * d + b] / static_cast<double>(n));
  }
  return {std::move(s), n};
}

/// Largest absolute off-diagonal entry: the smallest r with an empty estimated graph.
inline double r_max(const CovarianceMatrix& s) {
  const std::size_t d = s.dim();
  double best = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) best = std::max(best, std::abs(s(i, j)));
  }
  return best;
}

/// {floor + i (r_max - floor) / m : i = 1..m}; the last value is r_max exactly.
inline RegGrid default_grid(const CovarianceMatrix& s, std::size_t m = 40, double floor = 0.05) {
  if (m == 0) throw Error(ErrorKind::InvalidArgument, "grid size must be positive");
  const double top = r_max(s);
  if (!(top > floor)) {
    throw Error(ErrorKind::GridDegenerate,
                "r_max = " + std::to_string(top) + " does not exceed " + std::to_string(floor) +
                    "; supply an explicit grid");
  }
  std::vector<double> values(m);
  for (std::size_t i = 1; i <= m; ++i) {
    values[i - 1] = floor + static_cast<double>(i) * (top - floor) / static_cast<double>(m);
  }
  values.back() = top;
  return RegGrid(std::move(values));
}

struct FitOptions {
  double tol = 1e-6;
  int max_iter = 1000;
  /// Called after every outer sweep with the iteration number and current estimate.
  std::function<void(int, const SymMatrix&)> on_sweep;
};

struct GlassoEstimate {
  SymMatrix theta;
  double r = 0.0;
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
};

namespace detail {

inline double kkt_residual_with_inverse(const SymMatrix& s, const SymMatrix& theta, const SymMatrix& theta_inv,
                                        double r) {
  const std::size_t d = s.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const double g = s(i, j) - theta_inv(i, j);
      double v;
      if (i == j) {
        v = std::abs(g);
      } else if (theta(i, j) != 0.0) {
        v = std::abs(g + r * (theta(i, j) > 0.0 ? 1.0 : -1.0));
      } else {
        v = std::max(0.0, std::abs(g) - r);
      }
      worst = std::max(worst, v);
    }
  }
  return worst;
}

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace detail

/**
 * Largest violation of the stationarity conditions
 * S - theta^{-1} + r Z = 0 over admissible subgradients Z (Z_ii = 0).
 */
inline double kkt_residual(const CovarianceMatrix& s, const SymMatrix& theta, double r) {
  if (s.dim() != theta.dim()) throw Error(ErrorKind::DimensionMismatch, "kkt_residual");
  return detail::kkt_residual_with_inverse(s.base, theta, invert_spd(theta), r);
}

/// tr(S theta) - log det theta + r * sum_{i != j} |theta_ij|.
inline double glasso_objective(const CovarianceMatrix& s, const SymMatrix& theta, double r) {
  if (s.dim() != theta.dim()) throw Error(ErrorKind::DimensionMismatch, "glasso_objective");
  const std::size_t d = s.dim();
  double tr = 0.0;
  double penalty = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      tr += s(i, j) * theta(i, j);
      if (i != j) penalty += std::abs(theta(i, j));
    }
  }
  return tr - cholesky(theta).log_det() + r * penalty;
}

/**
 * Graphical lasso with an off-diagonal penalty.
 *
 * Block coordinate descent over the rows/columns of theta. For column j the
 * off-diagonal block solves the lasso
 *
 *   min_b  s12^T b + (s22 / 2) b^T A b + r |b|_1,   A = theta_11^{-1},
 *
 * by cyclic coordinate descent, then theta_22 = 1/s22 + b^T A b, which keeps
 * the working covariance diagonal at S_jj. The working covariance W = theta^{-1}
 * is carried along by rank-one updates, so theta stays positive definite and
 * the objective never increases between block updates.
 *
 * Stops when the mean absolute change of the off-diagonal of W drops below
 * tol * mean|S_off| and the KKT residual, computed from an exact inverse, is
 * at most tol * max(1, r). Otherwise the estimate is returned with
 * converged = false after max_iter sweeps.
 */
inline GlassoEstimate fit(const CovarianceMatrix& cov, double r, const FitOptions& options = {},
                          const SymMatrix* warm_start = nullptr) {
  const SymMatrix& s = cov.base;
  const std::size_t d = s.dim();
  if (d == 0) throw Error(ErrorKind::InvalidArgument, "empty covariance");
  if (!std::isfinite(r) || r < 0.0) throw Error(ErrorKind::InvalidArgument, "r must be a non-negative real");
  if (!(options.tol > 0.0) || options.max_iter < 1) {
    throw Error(ErrorKind::InvalidArgument, "tol must be positive and max_iter at least 1");
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (!(s(i, i) > 0.0)) {
      throw Error(ErrorKind::DegenerateColumn, "zero variance in column " + std::to_string(i));
    }
  }
  // Without a penalty the problem is only well posed for nonsingular S.
  if (r == 0.0) (void)cholesky(s);

  std::vector<double> theta(d * d, 0.0);
  std::vector<double> w(d * d, 0.0);
  if (warm_start != nullptr) {
    if (warm_start->dim() != d) throw Error(ErrorKind::DimensionMismatch, "warm start dimension");
    const SymMatrix inv = invert_spd(*warm_start);
    std::copy(warm_start->values().begin(), warm_start->values().end(), theta.begin());
    std::copy(inv.values().begin(), inv.values().end(), w.begin());
  } else {
    for (std::size_t i = 0; i < d; ++i) {
      theta[i * d + i] = 1.0 / s(i, i);
      w[i * d + i] = s(i, i);
    }
  }

  double s_off_mean = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i != j) s_off_mean += std::abs(s(i, j));
    }
  }
  if (d > 1) s_off_mean /= static_cast<double>(d * (d - 1));

  const double tol = options.tol;
  double inner_tol = tol / 10.0;
  const double kkt_target = tol * std::max(1.0, r);
  constexpr int kMaxInnerPasses = 10000;

  std::vector<double> beta(d), v(d), u(d), w_old_col(d), w_prev;
  std::vector<std::size_t> active;
  active.reserve(d);

  auto to_sym = [&] {
    SymMatrix out(d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j <= i; ++j) out.set(i, j, theta[i * d + j]);
    }
    return out;
  };

  auto update_block = [&](std::size_t j) {
    const double s22 = s(j, j);
    const double w22 = w[j * d + j];
    const double* wj = &w[j * d];

    for (std::size_t k = 0; k < d; ++k) beta[k] = k == j ? 0.0 : theta[j * d + k];
    // v = W_{., -j} beta; v[j] is then w12^T beta.
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      if (beta[k] == 0.0) continue;
      const double* wk = &w[k * d];
      for (std::size_t m = 0; m < d; ++m) v[m] += beta[k] * wk[m];
    }

    auto coordinate = [&](std::size_t k) {
      const double qkk = s22 * (w[k * d + k] - wj[k] * wj[k] / w22);
      const double a_beta = v[k] - wj[k] * v[j] / w22;
      const double partial = s(j, k) + s22 * a_beta - qkk * beta[k];
      const double next = detail::soft_threshold(-partial, r) / qkk;
      const double delta = next - beta[k];
      if (delta != 0.0) {
        beta[k] = next;
        const double* wk = &w[k * d];
        for (std::size_t m = 0; m < d; ++m) v[m] += delta * wk[m];
      }
      return std::abs(delta) * qkk;
    };

    for (int pass = 0; pass < kMaxInnerPasses; ++pass) {
      double largest = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        if (k != j) largest = std::max(largest, coordinate(k));
      }
      if (largest <= inner_tol) break;
      active.clear();
      for (std::size_t k = 0; k < d; ++k) {
        if (k != j && beta[k] != 0.0) active.push_back(k);
      }
      for (int inner = 0; inner < kMaxInnerPasses; ++inner) {
        double moved = 0.0;
        for (std::size_t k : active) moved = std::max(moved, coordinate(k));
        if (moved <= inner_tol) break;
      }
    }

    // u = A beta with A = W_11 - w12 w12^T / w22.
    double quad = 0.0;
    for (std::size_t m = 0; m < d; ++m) {
      u[m] = m == j ? 0.0 : v[m] - wj[m] * v[j] / w22;
      quad += beta[m] * u[m];
    }
    for (std::size_t m = 0; m < d; ++m) w_old_col[m] = wj[m];

    // W_11 <- A + s22 u u^T, w12 <- -s22 u, w22 <- s22. Column j is
    // overwritten below, so the inner loop may run over it.
    for (std::size_t a = 0; a < d; ++a) {
      if (a == j) continue;
      double* wa = &w[a * d];
      const double ca = w_old_col[a] / w22;
      const double ua = s22 * u[a];
      for (std::size_t b = 0; b < d; ++b) wa[b] += ua * u[b] - ca * w_old_col[b];
    }
    for (std::size_t k = 0; k < d; ++k) {
      if (k == j) continue;
      w[j * d + k] = w[k * d + j] = -s22 * u[k];
      theta[j * d + k] = theta[k * d + j] = beta[k];
    }
    w[j * d + j] = s22;
    theta[j * d + j] = 1.0 / s22 + quad;
  };

  GlassoEstimate est;
  est.r = r;
  // Once the KKT target is met the fit is certified. Further sweeps only
  // sharpen theta (its error is about theta e theta for a W residual e), and
  // are capped at as many sweeps as certification took.
  std::optional<SymMatrix> certified;
  double certified_kkt = 0.0;
  int polish_until = 0;
  auto finish = [&](SymMatrix theta_hat, double kkt, int iterations) {
    est.theta = std::move(theta_hat);
    est.converged = true;
    est.kkt_residual = kkt;
    est.iterations = iterations;
    return est;
  };

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    w_prev = w;
    for (std::size_t j = 0; j < d; ++j) update_block(j);
    est.iterations = iter;

    if (options.on_sweep) options.on_sweep(iter, to_sym());

    double change = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        if (i != j) change += std::abs(w[i * d + j] - w_prev[i * d + j]);
      }
    }
    if (d > 1) change /= static_cast<double>(d * (d - 1));

    if (certified || change <= tol * s_off_mean) {
      SymMatrix current = to_sym();
      const SymMatrix w_exact = invert_spd(current);
      const double kkt = detail::kkt_residual_with_inverse(s, current, w_exact, r);
      const double norm = inf_operator_norm(current);
      const double theta_target = kkt_target / std::max(1.0, norm * norm);
      if (kkt <= kkt_target) {
        if (kkt <= theta_target) return finish(std::move(current), kkt, iter);
        if (!certified) {
          polish_until = std::min(options.max_iter, 2 * iter);
        }
        if (!certified || kkt < certified_kkt) {
          certified = current;
          certified_kkt = kkt;
        }
      }
      // Refresh the working covariance to shed drift from the rank-one updates.
      std::copy(w_exact.values().begin(), w_exact.values().end(), w.begin());
      // The inner lasso tolerance bounds how small the residual can get.
      inner_tol = std::min(inner_tol, std::max(theta_target / 10.0, 1e-14));
    }
    if (certified && iter >= polish_until) return finish(std::move(*certified), certified_kkt, iter);
  }
  if (certified) return finish(std::move(*certified), certified_kkt, options.max_iter);
  est.theta = to_sym();
  est.converged = false;
  est.kkt_residual = kkt_residual(cov, est.theta, r);
  return est;
}

/// Estimates aligned with an ascending grid.
struct GlassoPath {
  RegGrid grid;
  std::vector<GlassoEstimate> estimates;

  std::size_t size() const noexcept { return estimates.size(); }
  double r(std::size_t k) const { return grid[k]; }
  const SymMatrix& theta(std::size_t k) const { return estimates[k].theta; }
};

namespace detail {

/// Warm-started fit with a single cold-start retry; throws PathFailureError.
inline GlassoEstimate fit_for_path(const CovarianceMatrix& cov, double r, const FitOptions& options,
                                   const SymMatrix* warm) {
  if (warm != nullptr) {
    try {
      GlassoEstimate est = fit(cov, r, options, warm);
      if (est.converged) return est;
    } catch (const NotPositiveDefiniteError&) {
    }
  }
  try {
    GlassoEstimate est = fit(cov, r, options, nullptr);
    if (est.converged) return est;
    throw PathFailureError(r, "kkt residual " + std::to_string(est.kkt_residual));
  } catch (const NotPositiveDefiniteError& e) {
    throw PathFailureError(r, e.what());
  }
}

}  // namespace detail

/**
 * Solution path over the grid, computed from the largest r downwards with
 * each fit warm-started from the previous estimate. The largest r starts from
 * diag(1 / S_ii).
 */
inline GlassoPath path(const CovarianceMatrix& cov, const RegGrid& grid, const FitOptions& options = {}) {
  GlassoPath out{grid, std::vector<GlassoEstimate>(grid.size())};
  const SymMatrix* previous = nullptr;
  for (std::size_t k = grid.size(); k-- > 0;) {
    out.estimates[k] = detail::fit_for_path(cov, grid[k], options, previous);
    previous = &out.estimates[k].theta;
  }
  return out;
}

/**
 * Path whose estimates are computed on first access, top of the grid first.
 * Asking for index k fits every grid point from the top down to k, so a
 * scan that stops early never pays for the small-r end of the path.
 */
class LazyPath {
 public:
  LazyPath(CovarianceMatrix cov, RegGrid grid, FitOptions options = {})
      : cov_(std::move(cov)), grid_(std::move(grid)), options_(std::move(options)), estimates_(grid_.size()) {}

  std::size_t size() const noexcept { return grid_.size(); }
  double r(std::size_t k) const { return grid_[k]; }
  const RegGrid& grid() const noexcept { return grid_; }
  const CovarianceMatrix& covariance() const noexcept { return cov_; }

  const GlassoEstimate& estimate(std::size_t k) const {
    if (k >= size()) throw Error(ErrorKind::InvalidArgument, "path index out of range");
    while (lowest_ > k) {
      const std::size_t next = lowest_ - 1;
      const SymMatrix* warm = next + 1 < size() ? &estimates_[next + 1]->theta : nullptr;
      estimates_[next] = detail::fit_for_path(cov_, grid_[next], options_, warm);
      lowest_ = next;
    }
    return *estimates_[k];
  }

  const SymMatrix& theta(std::size_t k) const { return estimate(k).theta; }

  /// Number of grid points fitted so far.
  std::size_t fitted() const noexcept { return size() - lowest_; }

  GlassoPath materialize() const {
    if (size() > 0) (void)estimate(0);
    GlassoPath out{grid_, {}};
    for (const auto& e : estimates_) out.estimates.push_back(*e);
    return out;
  }

 private:
  CovarianceMatrix cov_;
  RegGrid grid_;
  FitOptions options_;
  mutable std::vector<std::optional<GlassoEstimate>> estimates_;
  mutable std::size_t lowest_ = estimates_.size();
};

}  // namespace thav
