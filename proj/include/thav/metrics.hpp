#pragma once

#include <cstddef>
#include <utility>

#include "thav/edge_set.hpp"
#include "thav/error.hpp"
#include "thav/glasso.hpp"

namespace thav {

struct RecoveryScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/**
 * Precision |est ∩ truth| / |est|, recall |est ∩ truth| / |truth| and their
 * harmonic mean. Two empty sets score (1, 1, 1); an undefined ratio with the
 * other set nonempty scores 0, and F1 is 0 whenever P + R = 0.
 */
inline RecoveryScores scores(const EdgeSet& truth, const EdgeSet& est) {
  if (truth.dim() != est.dim()) throw Error(ErrorKind::DimensionMismatch, "edge sets differ in dimension");
  RecoveryScores s;
  s.tp = est.intersection_size(truth);
  s.fp = est.size() - s.tp;
  s.fn = truth.size() - s.tp;
  if (truth.empty() && est.empty()) {
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  s.precision = est.empty() ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(est.size());
  s.recall = truth.empty() ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(truth.size());
  const double sum = s.precision + s.recall;
  s.f1 = sum > 0.0 ? 2.0 * s.precision * s.recall / sum : 0.0;
  return s;
}

/// F1 between two estimated supports; symmetric in its arguments.
inline double f1_similarity(const EdgeSet& a, const EdgeSet& b) { return scores(a, b).f1; }

struct OracleChoice {
  double r = 0.0;
  std::size_t index = 0;
  RecoveryScores scores;
};

/// Grid point whose raw (unthresholded) support scores the best F1; ties go to the larger r.
template <class Path>
OracleChoice oracle_select(const Path& path, const EdgeSet& truth) {
  const std::size_t m = path.size();
  if (m == 0) throw Error(ErrorKind::InvalidArgument, "empty path");
  OracleChoice best;
  bool have = false;
  for (std::size_t k = m; k-- > 0;) {
    const RecoveryScores s = scores(truth, edge_set_of(path.theta(k)));
    if (!have || s.f1 > best.scores.f1) {
      best = {path.r(k), k, s};
      have = true;
    }
  }
  return best;
}

}  // namespace thav
