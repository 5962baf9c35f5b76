#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "thav/edge_set.hpp"
#include "thav/error.hpp"
#include "thav/glasso.hpp"
#include "thav/matrix.hpp"

namespace thav {

/// Distance between two estimates, measured on the off-diagonal entries.
struct LossKind {
  enum class Variant { SupOffDiagonal, Quantile };

  Variant variant = Variant::SupOffDiagonal;
  double alpha = 0.0;

  static LossKind sup() { return {}; }

  /// (1 - alpha)-quantile of the absolute off-diagonal differences.
  static LossKind quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "quantile alpha must lie strictly between 0 and 1");
    }
    return {Variant::Quantile, alpha};
  }

  bool operator==(const LossKind&) const = default;
};

struct AvConfig {
  double C = 0.7;
  LossKind loss = LossKind::sup();
  /// Rescale estimates to unit diagonal before comparing and thresholding.
  bool rescale = true;
};

/// A grid pair (r_lower < r_upper) whose loss exceeded C (r_lower + r_upper).
struct Violation {
  double r_lower = 0.0;
  double r_upper = 0.0;
  double loss = 0.0;
};

struct AvResult {
  double r_hat = 0.0;
  std::size_t index = 0;
  SymMatrix estimate;
  std::optional<Violation> first_violation;
};

struct ThavResult {
  AvResult av;
  double lambda = 1.0;
  double t = 0.0;
  SymMatrix theta_t;
  EdgeSet edges;
};

/// theta_ij / sqrt(theta_ii theta_jj); the diagonal comes out as exactly 1.
inline SymMatrix rescale_unit_diagonal(const SymMatrix& theta) {
  const std::size_t d = theta.dim();
  std::vector<double> root(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!(theta(i, i) > 0.0)) {
      throw Error(ErrorKind::NonPositiveDiagonal, "diagonal entry " + std::to_string(i) + " is not positive");
    }
    root[i] = std::sqrt(theta(i, i));
  }
  SymMatrix out(d);
  for (std::size_t i = 0; i < d; ++i) {
    out.set(i, i, 1.0);
    for (std::size_t j = i + 1; j < d; ++j) out.set(i, j, theta(i, j) / (root[i] * root[j]));
  }
  return out;
}

/**
 * Off-diagonal distance between a and b. The quantile variant uses the
 * nearest-rank rule on the multiset over ordered pairs i != j.
 */
inline double pair_loss(const SymMatrix& a, const SymMatrix& b, const LossKind& kind = LossKind::sup()) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "pair_loss");
  const std::size_t d = a.dim();
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "pair_loss needs dimension >= 2");

  if (kind.variant == LossKind::Variant::SupOffDiagonal) {
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    }
    return worst;
  }

  std::vector<double> diffs;
  diffs.reserve(d * (d - 1));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i != j) diffs.push_back(std::abs(a(i, j) - b(i, j)));
    }
  }
  const double n = static_cast<double>(diffs.size());
  // Guard the ceiling against products like 0.5 * 6 landing a hair above 3.
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - kind.alpha) * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, diffs.size());
  std::nth_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(rank - 1), diffs.end());
  return diffs[rank - 1];
}

/// Entries with |theta_ij| > t are kept, all others (diagonal included) set to zero.
inline SymMatrix threshold(const SymMatrix& theta, double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "threshold must be non-negative");
  const std::size_t d = theta.dim();
  SymMatrix out(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const double v = theta(i, j);
      if (std::abs(v) > t) out.set(i, j, v);
    }
  }
  return out;
}

namespace detail {

inline void validate(const AvConfig& config) {
  if (!(config.C > 0.0) || !std::isfinite(config.C)) {
    throw Error(ErrorKind::InvalidArgument, "C must be a positive real");
  }
  if (config.loss.variant == LossKind::Variant::Quantile && !(config.loss.alpha > 0.0 && config.loss.alpha < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "quantile alpha must lie strictly between 0 and 1");
  }
}

/// Estimates as seen by the loss: rescaled on demand and cached.
template <class Path>
class ComparedEstimates {
 public:
  ComparedEstimates(const Path& path, bool rescale) : path_(path), rescale_(rescale), cache_(path.size()) {}

  const SymMatrix& operator[](std::size_t k) {
    if (!rescale_) return path_.theta(k);
    if (!cache_[k]) cache_[k] = rescale_unit_diagonal(path_.theta(k));
    return *cache_[k];
  }

  SymMatrix take(std::size_t k) {
    if (!rescale_) return path_.theta(k);
    (void)(*this)[k];
    return std::move(*cache_[k]);
  }

 private:
  const Path& path_;
  bool rescale_;
  std::vector<std::optional<SymMatrix>> cache_;
};

}  // namespace detail

/**
 * Adaptive validation: the smallest grid value r such that every pair
 * r', r'' >= r on the grid satisfies loss <= C (r' + r'').
 *
 * Scans r downward from the second-largest grid value; at level r it compares
 * the estimate at r with every estimate above it, largest first. The scan
 * stops at the first violation and returns the next-larger grid value, which
 * is the minimum of the admissible set (every level at or below a violating
 * pair keeps that pair among its constraints). Only the grid points down to
 * the violation are ever requested from the path.
 *
 * Path needs size(), r(k) and theta(k), with k indexing an ascending grid.
 */
template <class Path>
AvResult av_select(const Path& path, const AvConfig& config = {}) {
  detail::validate(config);
  const std::size_t m = path.size();
  if (m == 0) throw Error(ErrorKind::InvalidArgument, "empty path");

  detail::ComparedEstimates<Path> est(path, config.rescale);
  for (std::size_t k = m - 1; k-- > 0;) {
    const double r = path.r(k);
    for (std::size_t upper = m - 1; upper > k; --upper) {
      const double r_upper = path.r(upper);
      const double loss = pair_loss(est[k], est[upper], config.loss);
      if (loss > config.C * (r + r_upper)) {
        AvResult out;
        out.index = k + 1;
        out.r_hat = path.r(k + 1);
        out.first_violation = Violation{r, r_upper, loss};
        out.estimate = est.take(k + 1);
        return out;
      }
    }
  }
  AvResult out;
  out.index = 0;
  out.r_hat = path.r(0);
  out.estimate = est.take(0);
  return out;
}

/**
 * Direct transcription of the selection rule: for each candidate in
 * ascending order, check every grid pair at or above it. O(m^2) losses,
 * computed once. Used as an oracle for av_select.
 */
template <class Path>
AvResult av_select_naive(const Path& path, const AvConfig& config = {}) {
  detail::validate(config);
  const std::size_t m = path.size();
  if (m == 0) throw Error(ErrorKind::InvalidArgument, "empty path");

  detail::ComparedEstimates<Path> est(path, config.rescale);
  std::vector<double> loss(m * m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) loss[a * m + b] = pair_loss(est[a], est[b], config.loss);
  }

  std::optional<Violation> blocking;
  for (std::size_t k = 0; k < m; ++k) {
    bool admissible = true;
    for (std::size_t a = k; a < m && admissible; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) {
        if (loss[a * m + b] > config.C * (path.r(a) + path.r(b))) {
          admissible = false;
          blocking = Violation{path.r(a), path.r(b), loss[a * m + b]};
          break;
        }
      }
    }
    if (admissible) {
      AvResult out;
      out.index = k;
      out.r_hat = path.r(k);
      out.estimate = est.take(k);
      out.first_violation = blocking;
      return out;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "no admissible grid value");  // unreachable: the top is admissible
}

/**
 * Thresholded adaptive validation: select r_hat, then keep the entries of the
 * selected estimate whose magnitude exceeds t = lambda C r_hat.
 */
template <class Path>
ThavResult thav(const Path& path, const AvConfig& config = {}, double lambda = 1.0) {
  if (!(lambda > 0.0 && lambda <= 3.0)) {
    throw Error(ErrorKind::LambdaOutOfRange, "lambda must lie in (0, 3], got " + std::to_string(lambda));
  }
  ThavResult out;
  out.av = av_select(path, config);
  out.lambda = lambda;
  out.t = lambda * config.C * out.av.r_hat;
  out.theta_t = threshold(out.av.estimate, out.t);
  out.edges = edge_set_of(out.theta_t, 0.0);
  return out;
}

}  // namespace thav
