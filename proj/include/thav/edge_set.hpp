#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "thav/error.hpp"
#include "thav/matrix.hpp"

namespace thav {

/**
 * Undirected simple graph on vertices 0..dim-1, stored as sorted canonical
 * pairs (i < j). File formats and the CLI number vertices from 1.
 */
class EdgeSet {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  EdgeSet() = default;
  explicit EdgeSet(std::size_t dim) : dim_(dim) {}

  /// Accepts pairs in either orientation; rejects self-loops and out-of-range indices.
  EdgeSet(std::size_t dim, std::vector<Edge> pairs) : dim_(dim), pairs_(std::move(pairs)) {
    for (auto& [i, j] : pairs_) {
      if (i == j) throw Error(ErrorKind::InvalidArgument, "self-loop at vertex " + std::to_string(i));
      if (i >= dim_ || j >= dim_) throw Error(ErrorKind::InvalidArgument, "vertex index out of range");
      if (i > j) std::swap(i, j);
    }
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  const std::vector<Edge>& pairs() const noexcept { return pairs_; }
  auto begin() const noexcept { return pairs_.begin(); }
  auto end() const noexcept { return pairs_.end(); }

  bool contains(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return std::binary_search(pairs_.begin(), pairs_.end(), Edge{i, j});
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> deg(dim_, 0);
    for (const auto& [i, j] : pairs_) {
      ++deg[i];
      ++deg[j];
    }
    return deg;
  }

  std::size_t max_degree() const {
    const auto deg = degrees();
    return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
  }

  /// |this ∩ other|.
  std::size_t intersection_size(const EdgeSet& other) const {
    std::size_t count = 0;
    auto a = pairs_.begin();
    auto b = other.pairs_.begin();
    while (a != pairs_.end() && b != other.pairs_.end()) {
      if (*a < *b) {
        ++a;
      } else if (*b < *a) {
        ++b;
      } else {
        ++count;
        ++a;
        ++b;
      }
    }
    return count;
  }

  bool operator==(const EdgeSet&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Edge> pairs_;
};

/// Off-diagonal support {(i, j), i < j : |theta_ij| > tol}.
inline EdgeSet edge_set_of(const SymMatrix& theta, double tol = 0.0) {
  const std::size_t d = theta.dim();
  std::vector<EdgeSet::Edge> pairs;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (std::abs(theta(i, j)) > tol) pairs.emplace_back(i, j);
    }
  }
  return EdgeSet(d, std::move(pairs));
}

}  // namespace thav
