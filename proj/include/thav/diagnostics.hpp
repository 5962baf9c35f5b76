#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "thav/edge_set.hpp"
#include "thav/error.hpp"
#include "thav/matrix.hpp"

// Small-dimension checks of the incoherence-type conditions behind the
// l-infinity bound for the graphical lasso. Gamma is d^2 x d^2, so everything
// here is capped in dimension.

namespace thav {

inline constexpr std::size_t kDefaultDiagnosticsCap = 50;

/// Ordered vertex pairs of the true graph plus all self-pairs.
class SupportSet {
 public:
  using Pair = std::pair<std::size_t, std::size_t>;

  explicit SupportSet(const EdgeSet& edges) : dim_(edges.dim()) {
    for (std::size_t i = 0; i < dim_; ++i) pairs_.emplace_back(i, i);
    for (const auto& [i, j] : edges) {
      pairs_.emplace_back(i, j);
      pairs_.emplace_back(j, i);
    }
    std::sort(pairs_.begin(), pairs_.end());
  }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Pair>& pairs() const noexcept { return pairs_; }
  bool contains(std::size_t i, std::size_t j) const {
    return std::binary_search(pairs_.begin(), pairs_.end(), Pair{i, j});
  }

  /// Ordered off-diagonal pairs outside the support.
  std::vector<Pair> complement() const {
    std::vector<Pair> out;
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j < dim_; ++j) {
        if (i != j && !contains(i, j)) out.emplace_back(i, j);
      }
    }
    return out;
  }

 private:
  std::size_t dim_;
  std::vector<Pair> pairs_;
};

struct TheoryConstants {
  double kappa_sigma = 0.0;
  double kappa_gamma = 0.0;
  double alpha_incoherence = 0.0;
  std::size_t degree = 0;
  /// +inf for an empty graph (degree 0).
  double c_prime = 0.0;
  /// Largest r covered by the bound; +inf for an empty graph.
  double r_upper = 0.0;
  /// kappa_gamma (alpha + 8) / 4, the constant in the theorem statement.
  double c_bound_gamma = 0.0;
  /// kappa_sigma (alpha + 8) / 4, the constant reached at the end of its proof.
  double c_bound_sigma = 0.0;
};

namespace detail {

inline void check_cap(std::size_t d, std::size_t cap) {
  if (d > cap) {
    throw Error(ErrorKind::DimensionCapExceeded,
                "dimension " + std::to_string(d) + " exceeds diagnostics cap " + std::to_string(cap));
  }
}

inline double gamma_entry(const SymMatrix& sigma, std::size_t j, std::size_t k, std::size_t l, std::size_t m) {
  return sigma(j, l) * sigma(k, m);
}

struct GammaBlocks {
  SymMatrix sigma;
  SupportSet support;
  SymMatrix gamma_ss_inv;
};

inline GammaBlocks gamma_blocks(const SymMatrix& theta, std::size_t cap) {
  check_cap(theta.dim(), cap);
  SymMatrix sigma = invert_spd(theta);
  SupportSet support(edge_set_of(theta));
  const auto& s = support.pairs();
  SymMatrix gamma_ss(s.size());
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      gamma_ss.set(a, b, gamma_entry(sigma, s[a].first, s[a].second, s[b].first, s[b].second));
    }
  }
  SymMatrix inv;
  try {
    inv = invert_spd(gamma_ss);
  } catch (const NotPositiveDefiniteError& e) {
    throw Error(ErrorKind::SingularGammaSS, e.what());
  }
  return {std::move(sigma), std::move(support), std::move(inv)};
}

inline double incoherence_from(const GammaBlocks& g) {
  const auto& s = g.support.pairs();
  const std::size_t ns = s.size();
  std::vector<double> row(ns);
  double worst = 0.0;  // empty maximum over the complement
  for (const auto& [j, k] : g.support.complement()) {
    for (std::size_t b = 0; b < ns; ++b) row[b] = gamma_entry(g.sigma, j, k, s[b].first, s[b].second);
    double norm = 0.0;
    for (std::size_t c = 0; c < ns; ++c) {
      double v = 0.0;
      for (std::size_t b = 0; b < ns; ++b) v += row[b] * g.gamma_ss_inv(b, c);
      norm += std::abs(v);
    }
    worst = std::max(worst, norm);
  }
  return 1.0 - worst;
}

}  // namespace detail

/**
 * Gamma_{(j,k),(l,m)} = Sigma_jl Sigma_km, i.e. Sigma ⊗ Sigma with pair (j, k)
 * at flat index j d + k. This is the Hessian of -log det evaluated at
 * theta = Sigma^{-1}, taken as the derivative of the gradient matrix
 * Omega^{-T} with respect to Omega_lm.
 */
inline DenseMatrix hessian_gamma(const SymMatrix& sigma, std::size_t cap = kDefaultDiagnosticsCap) {
  const std::size_t d = sigma.dim();
  detail::check_cap(d, cap);
  DenseMatrix g(d * d, d * d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t l = 0; l < d; ++l) {
        for (std::size_t m = 0; m < d; ++m) g(j * d + k, l * d + m) = sigma(j, l) * sigma(k, m);
      }
    }
  }
  return g;
}

/**
 * alpha = 1 - max_{e outside S} || Gamma_eS (Gamma_SS)^{-1} ||_1 where S is the
 * support of theta (with self-pairs). Values <= 0 mean the condition fails;
 * they are returned, not raised. An empty complement gives alpha = 1.
 */
inline double incoherence(const SymMatrix& theta, std::size_t cap = kDefaultDiagnosticsCap) {
  return detail::incoherence_from(detail::gamma_blocks(theta, cap));
}

inline TheoryConstants theory_constants(const SymMatrix& theta, std::size_t cap = kDefaultDiagnosticsCap) {
  const detail::GammaBlocks g = detail::gamma_blocks(theta, cap);
  TheoryConstants c;
  c.kappa_sigma = inf_operator_norm(g.sigma);
  c.kappa_gamma = inf_operator_norm(g.gamma_ss_inv);
  c.alpha_incoherence = detail::incoherence_from(g);
  c.degree = edge_set_of(theta).max_degree();
  if (c.degree == 0) {
    c.c_prime = std::numeric_limits<double>::infinity();
  } else {
    const double deg = static_cast<double>(c.degree);
    c.c_prime = std::min(1.0 / (3.0 * c.kappa_gamma * deg),
                         1.0 / (3.0 * std::pow(c.kappa_sigma, 3) * c.kappa_gamma * deg));
  }
  c.r_upper = 4.0 * c.c_prime / (c.kappa_sigma * (c.alpha_incoherence + 8.0));
  c.c_bound_gamma = c.kappa_gamma * (c.alpha_incoherence + 8.0) / 4.0;
  c.c_bound_sigma = c.kappa_sigma * (c.alpha_incoherence + 8.0) / 4.0;
  return c;
}

}  // namespace thav
