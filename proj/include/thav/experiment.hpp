#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "thav/calibration.hpp"
#include "thav/edge_set.hpp"
#include "thav/error.hpp"
#include "thav/glasso.hpp"
#include "thav/io.hpp"
#include "thav/metrics.hpp"
#include "thav/rng.hpp"
#include "thav/synthetic.hpp"

namespace thav {

struct ExperimentSpec {
  TopologySpec topology = TopologySpec::random(0.015);
  std::size_t d = 200;
  std::size_t n = 300;
  std::size_t reps = 1;
  std::uint64_t seed = 1;
  std::vector<double> C{0.7};
  double lambda = 1.0;
  std::size_t grid_size = 40;
  double tol = 1e-6;
  int max_iter = 1000;
  LossKind loss = LossKind::sup();
  bool nonparanormal = false;
  /// Record wall-clock time per replicate; when false runtime_ms is written as 0.
  bool timing = true;
  /// Worker threads for replicates; 0 picks the hardware concurrency.
  std::size_t threads = 1;

  void validate() const {
    if (reps < 1) throw Error(ErrorKind::InvalidArgument, "reps must be at least 1");
    if (d < 2) throw Error(ErrorKind::InvalidArgument, "d must be at least 2");
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "n must be at least 2");
    if (C.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one C");
    for (double c : C) {
      if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "C must be positive");
    }
    if (!(lambda > 0.0 && lambda <= 3.0)) throw Error(ErrorKind::LambdaOutOfRange, "lambda must lie in (0, 3]");
    if (grid_size < 1) throw Error(ErrorKind::InvalidArgument, "grid size must be positive");
    if (!(tol > 0.0) || max_iter < 1) throw Error(ErrorKind::InvalidArgument, "tol > 0 and max_iter >= 1 required");
    if (topology.kind == Topology::Random && !(topology.p >= 0.0 && topology.p <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "p must lie in [0, 1]");
    }
    if (loss.variant == LossKind::Variant::Quantile && !(loss.alpha > 0.0 && loss.alpha < 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "quantile alpha must lie in (0, 1)");
    }
  }

  FitOptions fit_options() const {
    FitOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    return o;
  }
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One (replicate, C) outcome. Failed replicates carry NaN in every score.
struct ResultRow {
  TopologySpec topology;
  std::size_t d = 0;
  std::size_t n = 0;
  /// derive_seed(master, stream) of the replicate.
  std::uint64_t seed = 0;
  double C = 0.0;
  double lambda = 1.0;
  double r_hat = kNaN;
  double t = kNaN;
  double f1 = kNaN;
  double precision = kNaN;
  double recall = kNaN;
  double oracle_f1 = kNaN;
  double oracle_r = kNaN;
  double runtime_ms = 0.0;

  /// Not serialized.
  bool failed = false;
  std::string error;
  ErrorKind error_kind = ErrorKind::InvalidArgument;
  EdgeSet edges;
};

struct ResultsTable {
  std::vector<ResultRow> rows;

  bool any_failed() const {
    return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.failed; });
  }

  /// Order by (topology, d, n, seed, C).
  void sort() {
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
      const auto key = [](const ResultRow& r) {
        return std::tuple(static_cast<int>(r.topology.kind), r.topology.p, r.d, r.n, r.seed, r.C);
      };
      return key(a) < key(b);
    });
  }
};

inline const char* kResultsHeader =
    "topology,d,n,seed,C,lambda,r_hat,t,f1,precision,recall,oracle_f1,oracle_r,runtime_ms";

inline std::string results_to_csv(const ResultsTable& table) {
  std::string out = kResultsHeader;
  out += '\n';
  const auto num = [](double v) { return std::isnan(v) ? std::string("nan") : io::format_double(v); };
  for (const auto& r : table.rows) {
    out += to_string(r.topology) + ',' + std::to_string(r.d) + ',' + std::to_string(r.n) + ',' +
           std::to_string(r.seed) + ',' + num(r.C) + ',' + num(r.lambda) + ',' + num(r.r_hat) + ',' + num(r.t) +
           ',' + num(r.f1) + ',' + num(r.precision) + ',' + num(r.recall) + ',' + num(r.oracle_f1) + ',' +
           num(r.oracle_r) + ',' + num(r.runtime_ms) + '\n';
  }
  return out;
}

/// Per-C averages over the successful replicates.
struct SummaryRow {
  double C = 0.0;
  std::size_t replicates = 0;
  double f1 = kNaN;
  double f1_sd = kNaN;
  double precision = kNaN;
  double recall = kNaN;
  double r_hat = kNaN;
  double oracle_f1 = kNaN;
};

inline std::vector<SummaryRow> summarize(const ResultsTable& table) {
  std::vector<double> cs;
  for (const auto& r : table.rows) cs.push_back(r.C);
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());

  std::vector<SummaryRow> out;
  for (double c : cs) {
    SummaryRow s;
    s.C = c;
    double f1 = 0, f1sq = 0, p = 0, rec = 0, rh = 0, of1 = 0;
    for (const auto& r : table.rows) {
      if (r.C != c || r.failed) continue;
      ++s.replicates;
      f1 += r.f1;
      f1sq += r.f1 * r.f1;
      p += r.precision;
      rec += r.recall;
      rh += r.r_hat;
      of1 += r.oracle_f1;
    }
    if (s.replicates > 0) {
      const double k = static_cast<double>(s.replicates);
      s.f1 = f1 / k;
      s.f1_sd = s.replicates > 1 ? std::sqrt(std::max(0.0, (f1sq - k * s.f1 * s.f1) / (k - 1.0))) : 0.0;
      s.precision = p / k;
      s.recall = rec / k;
      s.r_hat = rh / k;
      s.oracle_f1 = of1 / k;
    }
    out.push_back(s);
  }
  return out;
}

/**
 * Everything after data generation for one replicate: preprocess, covariance,
 * default grid, one shared path, thAV for every C, oracle. Rows for all C
 * values are returned; a failure marks all of them.
 */
inline std::vector<ResultRow> run_replicate(const GroundTruth& truth, const Dataset& raw, const ExperimentSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<ResultRow> rows(spec.C.size());
  for (std::size_t c = 0; c < rows.size(); ++c) {
    rows[c].topology = truth.topology;
    rows[c].d = raw.d();
    rows[c].n = raw.n();
    rows[c].seed = derive_seed(truth.seed);
    rows[c].C = spec.C[c];
    rows[c].lambda = spec.lambda;
  }
  try {
    const Dataset data = spec.nonparanormal ? nonparanormal(raw) : standardize(raw);
    const CovarianceMatrix cov = empirical_covariance(data.values, false);
    const GlassoPath p = path(cov, default_grid(cov, spec.grid_size), spec.fit_options());
    const OracleChoice oracle = oracle_select(p, truth.edges);
    for (std::size_t c = 0; c < rows.size(); ++c) {
      AvConfig config;
      config.C = spec.C[c];
      config.loss = spec.loss;
      const ThavResult res = thav::thav(p, config, spec.lambda);
      const RecoveryScores s = scores(truth.edges, res.edges);
      ResultRow& row = rows[c];
      row.r_hat = res.av.r_hat;
      row.t = res.t;
      row.f1 = s.f1;
      row.precision = s.precision;
      row.recall = s.recall;
      row.oracle_f1 = oracle.scores.f1;
      row.oracle_r = oracle.r;
      row.edges = res.edges;
    }
  } catch (const Error& e) {
    for (auto& row : rows) {
      ResultRow blank;
      blank.topology = row.topology;
      blank.d = row.d;
      blank.n = row.n;
      blank.seed = row.seed;
      blank.C = row.C;
      blank.lambda = row.lambda;
      row = std::move(blank);
      row.failed = true;
      row.error = e.what();
      row.error_kind = e.kind();
    }
  }
  if (spec.timing) {
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (auto& row : rows) row.runtime_ms = ms;
  }
  return rows;
}

/// Ground truth and raw samples of replicate k.
inline std::pair<GroundTruth, Dataset> generate_replicate(const ExperimentSpec& spec, std::size_t k) {
  const RngSeed seed{spec.seed, k};
  GroundTruth truth = generate_truth(spec.topology, spec.d, seed);
  Dataset data = sample_gaussian(truth, spec.n, seed);
  return {std::move(truth), std::move(data)};
}

/**
 * generate -> sample -> standardize (or nonparanormal) -> covariance ->
 * default grid -> path -> thAV per C -> scores, plus the oracle. Replicate k
 * uses stream k of the master seed. The table is sorted before returning, so
 * the thread count never changes the output.
 */
inline ResultsTable run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<std::vector<ResultRow>> per_rep(spec.reps);

  auto work = [&](std::size_t k) {
    try {
      auto [truth, data] = generate_replicate(spec, k);
      per_rep[k] = run_replicate(truth, data, spec);
    } catch (const Error& e) {
      const RngSeed seed{spec.seed, k};
      std::vector<ResultRow> rows(spec.C.size());
      for (std::size_t c = 0; c < rows.size(); ++c) {
        rows[c].topology = spec.topology;
        rows[c].d = spec.d;
        rows[c].n = spec.n;
        rows[c].seed = derive_seed(seed);
        rows[c].C = spec.C[c];
        rows[c].lambda = spec.lambda;
        rows[c].failed = true;
        rows[c].error = e.what();
        rows[c].error_kind = e.kind();
      }
      per_rep[k] = std::move(rows);
    }
  };

  std::size_t threads = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : spec.threads;
  threads = std::min(threads, spec.reps);
  if (threads <= 1) {
    for (std::size_t k = 0; k < spec.reps; ++k) work(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < spec.reps;) work(k);
      });
    }
  }

  ResultsTable table;
  for (auto& rows : per_rep) {
    for (auto& row : rows) table.rows.push_back(std::move(row));
  }
  table.sort();
  return table;
}

struct SweepRow {
  double t = 0.0;
  RecoveryScores scores;
};

struct SweepCurve {
  std::vector<SweepRow> rows;
  double r_hat = 0.0;
  /// t* = lambda C r_hat and the scores there.
  double marker_t = 0.0;
  RecoveryScores marker;

  /// Highest F1 among the swept thresholds.
  double peak_f1() const {
    double best = 0.0;
    for (const auto& r : rows) best = std::max(best, r.scores.f1);
    return best;
  }
};

/// Scores threshold(AV estimate, t) against truth for each t.
template <class Path>
SweepCurve sweep_threshold(const Path& path, const AvConfig& config, const EdgeSet& truth,
                           const std::vector<double>& thresholds, double lambda = 1.0) {
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    if (!(thresholds[k] >= 0.0)) throw Error(ErrorKind::InvalidArgument, "thresholds must be non-negative");
    if (k > 0 && thresholds[k] < thresholds[k - 1]) throw Error(ErrorKind::InvalidArgument, "thresholds must be sorted");
  }
  const ThavResult res = thav::thav(path, config, lambda);
  SweepCurve curve;
  curve.r_hat = res.av.r_hat;
  curve.marker_t = res.t;
  curve.marker = scores(truth, res.edges);
  for (double t : thresholds) curve.rows.push_back({t, scores(truth, edge_set_of(threshold(res.av.estimate, t)))});
  return curve;
}

/// n evenly spaced thresholds from 0 to hi inclusive.
inline std::vector<double> linear_thresholds(double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = n == 1 ? 0.0 : hi * static_cast<double>(k) / static_cast<double>(n - 1);
  return out;
}

inline std::string sweep_to_csv(const SweepCurve& curve) {
  std::string out = "# r_hat = " + io::format_double(curve.r_hat) + "\n# marker_t = " + io::format_double(curve.marker_t) +
                    "\nt,f1,precision,recall\n";
  for (const auto& r : curve.rows) {
    out += io::format_double(r.t) + ',' + io::format_double(r.scores.f1) + ',' + io::format_double(r.scores.precision) +
           ',' + io::format_double(r.scores.recall) + '\n';
  }
  return out;
}

}  // namespace thav
