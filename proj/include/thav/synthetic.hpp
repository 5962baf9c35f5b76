#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "thav/edge_set.hpp"
#include "thav/error.hpp"
#include "thav/matrix.hpp"
#include "thav/rng.hpp"

namespace thav {

enum class Topology { Random, ScaleFree };

struct TopologySpec {
  Topology kind = Topology::Random;
  /// Connection probability; only meaningful for Random.
  double p = 0.0;

  static TopologySpec random(double p) { return {Topology::Random, p}; }
  static TopologySpec scale_free() { return {Topology::ScaleFree, 0.0}; }

  bool operator==(const TopologySpec&) const = default;
};

inline std::string to_string(const TopologySpec& t) {
  if (t.kind == Topology::ScaleFree) return "scale-free";
  char buf[64];
  std::snprintf(buf, sizeof buf, "random:%.17g", t.p);
  return buf;
}

/// True precision matrix (unit diagonal) and its graph.
struct GroundTruth {
  SymMatrix theta;
  EdgeSet edges;
  TopologySpec topology;
  /// Diagonal constant before the rescaling to unit diagonal.
  double mu = 0.0;
  RngSeed seed;
};

enum class Preprocessing { Raw, Standardized, Nonparanormal };

inline const char* to_string(Preprocessing p) {
  switch (p) {
    case Preprocessing::Raw: return "raw";
    case Preprocessing::Standardized: return "standardized";
    case Preprocessing::Nonparanormal: return "nonparanormal";
  }
  return "raw";
}

/// n samples (rows) of d variables (columns).
struct Dataset {
  DenseMatrix values;
  Preprocessing preprocessing = Preprocessing::Raw;

  std::size_t n() const noexcept { return values.rows(); }
  std::size_t d() const noexcept { return values.cols(); }
};

/// Gilbert graph G(d, p): each pair, in canonical order, kept with probability p.
inline EdgeSet gilbert_edges(std::size_t d, double p, const RngSeed& seed) {
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "need d >= 2");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "p must lie in [0, 1]");
  Rng rng(seed, RngPurpose::GilbertGraph);
  std::vector<EdgeSet::Edge> pairs;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (rng.uniform() < p) pairs.emplace_back(i, j);
    }
  }
  return EdgeSet(d, std::move(pairs));
}

/**
 * Barabási–Albert preferential attachment with one edge per new node:
 * start from the edge (0, 1), then attach each further node to an existing
 * node chosen with probability proportional to its degree. Produces a tree.
 */
inline EdgeSet barabasi_albert_edges(std::size_t d, const RngSeed& seed) {
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "need d >= 2");
  Rng rng(seed, RngPurpose::ScaleFreeGraph);
  std::vector<EdgeSet::Edge> pairs{{0, 1}};
  // Each edge contributes both endpoints, so a uniform pick is degree-weighted.
  std::vector<std::size_t> endpoints{0, 1};
  endpoints.reserve(2 * d);
  for (std::size_t node = 2; node < d; ++node) {
    const std::size_t target = endpoints[rng.below(endpoints.size())];
    pairs.emplace_back(target, node);
    endpoints.push_back(target);
    endpoints.push_back(node);
  }
  return EdgeSet(d, std::move(pairs));
}

/// Rounds down to one decimal place.
inline double floor_to_one_decimal(double x) { return std::floor(x * 10.0) / 10.0; }

/**
 * Precision matrix from an edge set and one weight per edge (canonical
 * order). The diagonal is set to mu = -floor_1dp(lambda_min(W)) where W holds
 * the weights off the diagonal; when that leaves the matrix singular (lambda_min
 * a multiple of 0.1, or an empty graph) mu is raised by 0.1, and it is never
 * below 0.1. The result is divided by mu to get a unit diagonal.
 */
inline GroundTruth assemble_precision(const EdgeSet& edges, std::span<const double> weights,
                                      const TopologySpec& topology = {}, const RngSeed& seed = {}) {
  const std::size_t d = edges.dim();
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "need d >= 2");
  if (weights.size() != edges.size()) throw Error(ErrorKind::DimensionMismatch, "one weight per edge");

  SymMatrix off(d);
  std::size_t e = 0;
  for (const auto& [i, j] : edges) {
    if (weights[e] == 0.0) throw Error(ErrorKind::InvalidArgument, "edge weights must be nonzero");
    off.set(i, j, weights[e++]);
  }
  const double lambda_min = min_eigenvalue(off);
  double mu = -floor_to_one_decimal(lambda_min);
  if (lambda_min + mu < 1e-9) mu += 0.1;
  mu = std::max(mu, 0.1);

  GroundTruth out;
  out.theta = SymMatrix(d);
  for (std::size_t i = 0; i < d; ++i) out.theta.set(i, i, 1.0);
  for (const auto& [i, j] : edges) out.theta.set(i, j, off(i, j) / mu);
  if (!is_positive_definite(out.theta)) {
    throw Error(ErrorKind::GenerationFailure, "generated precision matrix is not positive definite");
  }
  out.edges = edges;
  out.topology = topology;
  out.mu = mu;
  out.seed = seed;
  return out;
}

/// Draws edge weights uniformly from [-0.9, -0.5] ∪ [0.5, 0.9] and assembles the precision matrix.
inline GroundTruth build_precision(const EdgeSet& edges, const RngSeed& seed, const TopologySpec& topology = {}) {
  Rng rng(seed, RngPurpose::EdgeWeights);
  std::vector<double> weights;
  weights.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const bool negative = rng.coin();
    const double magnitude = rng.uniform(0.5, 0.9);
    weights.push_back(negative ? -magnitude : magnitude);
  }
  return assemble_precision(edges, weights, topology, seed);
}

/// Graph and precision matrix for one replicate.
inline GroundTruth generate_truth(const TopologySpec& topology, std::size_t d, const RngSeed& seed) {
  const EdgeSet edges = topology.kind == Topology::Random ? gilbert_edges(d, topology.p, seed)
                                                          : barabasi_albert_edges(d, seed);
  return build_precision(edges, seed, topology);
}

/// n rows z = L g with L L^T = theta^{-1} and g standard normal.
inline Dataset sample_gaussian(const GroundTruth& truth, std::size_t n, const RngSeed& seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need n >= 1");
  const std::size_t d = truth.theta.dim();
  const LowerTriangular l = cholesky(invert_spd(truth.theta));
  Rng rng(seed, RngPurpose::Samples);
  Dataset out{DenseMatrix(n, d), Preprocessing::Raw};
  std::vector<double> g(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& x : g) x = rng.normal();
    l.multiply(g, out.values.row(i));
  }
  return out;
}

namespace detail {

/// Centers column j and scales to unit sample variance (n - 1). Returns false for a constant column.
inline bool standardize_column(DenseMatrix& m, std::size_t j) {
  const std::size_t n = m.rows();
  double mean = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean += m(i, j);
    scale = std::max(scale, std::abs(m(i, j)));
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = m(i, j) - mean;
    ss += c * c;
  }
  const double var = ss / static_cast<double>(n - 1);
  if (!(var > 1e-24 * std::max(1.0, scale * scale))) {
    for (std::size_t i = 0; i < n; ++i) m(i, j) -= mean;
    return false;
  }
  const double sd = std::sqrt(var);
  for (std::size_t i = 0; i < n; ++i) m(i, j) = (m(i, j) - mean) / sd;
  return true;
}

}  // namespace detail

/// Column means 0 and sample variances (n - 1 denominator) 1.
inline Dataset standardize(const Dataset& data) {
  if (data.n() < 2) throw Error(ErrorKind::InvalidArgument, "need n >= 2 to standardize");
  Dataset out = data;
  for (std::size_t j = 0; j < out.d(); ++j) {
    if (!detail::standardize_column(out.values, j)) {
      throw Error(ErrorKind::DegenerateColumn, "column " + std::to_string(j) + " has zero variance");
    }
  }
  out.preprocessing = Preprocessing::Standardized;
  return out;
}

/// Average ranks (1-based) within one column; ties share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> column) {
  const std::size_t n = column.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::vector<double> ranks(n);
  for (std::size_t start = 0; start < n;) {
    std::size_t stop = start + 1;
    while (stop < n && column[order[stop]] == column[order[start]]) ++stop;
    const double rank = 0.5 * static_cast<double>(start + 1 + stop);
    for (std::size_t k = start; k < stop; ++k) ranks[order[k]] = rank;
    start = stop;
  }
  return ranks;
}

/**
 * Rank-based Gaussianization: each value becomes Phi^{-1}(rank / (n + 1))
 * with average ranks for ties, then every column is standardized. A column
 * with a single distinct value maps to zeros.
 */
inline Dataset nonparanormal(const Dataset& data) {
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "need n >= 2 for the nonparanormal transform");
  const boost::math::normal_distribution<double> standard;
  Dataset out{DenseMatrix(n, d), Preprocessing::Nonparanormal};
  std::vector<double> column(n);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = data.values(i, j);
    const auto ranks = average_ranks(column);
    for (std::size_t i = 0; i < n; ++i) {
      out.values(i, j) = boost::math::quantile(standard, ranks[i] / static_cast<double>(n + 1));
    }
    (void)detail::standardize_column(out.values, j);
  }
  return out;
}

}  // namespace thav
