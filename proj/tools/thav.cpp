// Command-line front end: data generation, fitting, calibration, benchmarks,
// threshold sweeps, theory diagnostics and graph export.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thav/thav.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

int exit_code_for(thav::ErrorKind kind) {
  using thav::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::LambdaOutOfRange:
    case ErrorKind::DimensionCapExceeded:
      return kExitUsage;
    case ErrorKind::Parse:
    case ErrorKind::Io:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::DegenerateColumn:
    case ErrorKind::NonFinite:
      return kExitData;
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::PathFailure:
    case ErrorKind::GridDegenerate:
    case ErrorKind::NonPositiveDiagonal:
    case ErrorKind::SingularGammaSS:
    case ErrorKind::GenerationFailure:
      return kExitNumerical;
  }
  return kExitNumerical;
}

thav::TopologySpec parse_topology(const std::string& s) {
  if (s == "scale-free") return thav::TopologySpec::scale_free();
  if (s.rfind("random:", 0) == 0) {
    const double p = thav::io::parse_double(s.substr(7), "--topology");
    if (!(p >= 0.0 && p <= 1.0)) throw thav::Error(thav::ErrorKind::InvalidArgument, "p must lie in [0, 1]");
    return thav::TopologySpec::random(p);
  }
  if (s == "random") return thav::TopologySpec::random(-1.0);  // p = 3/d, filled in later
  throw thav::Error(thav::ErrorKind::InvalidArgument, "topology must be random[:<p>] or scale-free");
}

thav::LossKind parse_loss(const std::string& s) {
  if (s == "sup") return thav::LossKind::sup();
  if (s.rfind("quantile:", 0) == 0) return thav::LossKind::quantile(thav::io::parse_double(s.substr(9), "--loss"));
  throw thav::Error(thav::ErrorKind::InvalidArgument, "loss must be sup or quantile:<alpha>");
}

/// Flags shared by every subcommand.
struct Common {
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::size_t reps = 1;
  std::vector<double> C{0.7};
  double lambda = 1.0;
  std::size_t grid_size = 40;
  double tol = 1e-6;
  int max_iter = 1000;
  std::string loss = "sup";
  bool npn = false;
  std::string topology = "random";
  std::size_t d = 200;
  std::size_t n = 300;
  std::string out;
  std::size_t threads = 1;
  bool no_timing = false;

  thav::ExperimentSpec spec() const {
    thav::ExperimentSpec s;
    s.topology = parse_topology(topology);
    if (s.topology.kind == thav::Topology::Random && s.topology.p < 0.0) {
      s.topology.p = d > 0 ? std::min(1.0, 3.0 / static_cast<double>(d)) : 0.0;
    }
    s.d = d;
    s.n = n;
    s.reps = reps;
    s.seed = seed;
    s.C = C;
    s.lambda = lambda;
    s.grid_size = grid_size;
    s.tol = tol;
    s.max_iter = max_iter;
    s.loss = parse_loss(loss);
    s.nonparanormal = npn;
    s.timing = !no_timing;
    s.threads = threads;
    s.validate();
    return s;
  }
};

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    thav::io::write_file(out, text);
  }
}

thav::Dataset load_dataset(const std::string& path, bool npn) {
  const thav::Dataset raw = thav::io::read_dataset(path);
  return npn ? thav::nonparanormal(raw) : thav::standardize(raw);
}

thav::CovarianceMatrix covariance_from(const std::string& data_path, const std::string& cov_path, bool npn) {
  if (!cov_path.empty()) {
    const thav::SymMatrix s = thav::io::read_matrix(cov_path);
    return {s, 0};
  }
  if (data_path.empty()) throw thav::Error(thav::ErrorKind::InvalidArgument, "need --data or --cov");
  const thav::Dataset data = load_dataset(data_path, npn);
  return thav::empirical_covariance(data.values, false);
}

thav::AvConfig av_config(const Common& c, double C) {
  thav::AvConfig config;
  config.C = C;
  config.loss = parse_loss(c.loss);
  return config;
}

void print_scores(std::ostream& os, const thav::RecoveryScores& s) {
  os << "precision = " << thav::io::format_double(s.precision) << "\n"
     << "recall = " << thav::io::format_double(s.recall) << "\n"
     << "f1 = " << thav::io::format_double(s.f1) << "\n"
     << "tp = " << s.tp << "\nfp = " << s.fp << "\nfn = " << s.fn << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graphical lasso with thresholded adaptive validation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value file; command-line flags take precedence");

  Common c;
  app.add_option("--seed", c.seed, "Master seed");
  app.add_option("--stream", c.stream, "Replicate stream index (generate, sweep-threshold, diagnose)");
  app.add_option("--reps", c.reps, "Replicates")->check(CLI::PositiveNumber);
  app.add_option("--C", c.C, "AV constant; repeat for several")->expected(1, -1)->take_all();
  app.add_option("--lambda", c.lambda, "Threshold multiplier in (0, 3]");
  app.add_option("--grid-size", c.grid_size, "Points in the regularization grid")->check(CLI::PositiveNumber);
  app.add_option("--tol", c.tol, "Solver tolerance");
  app.add_option("--max-iter", c.max_iter, "Solver sweep limit")->check(CLI::PositiveNumber);
  app.add_option("--loss", c.loss, "sup | quantile:<alpha>");
  app.add_flag("--npn", c.npn, "Apply the nonparanormal transform instead of plain standardization");
  app.add_option("--topology", c.topology, "random[:<p>] | scale-free (random alone uses p = 3/d)");
  app.add_option("--d", c.d, "Dimension")->check(CLI::PositiveNumber);
  app.add_option("--n", c.n, "Sample size")->check(CLI::PositiveNumber);
  app.add_option("--out", c.out, "Output file or prefix (default stdout)");
  app.add_option("--threads", c.threads, "Worker threads for replicates (0 = all cores)");
  app.add_flag("--no-timing", c.no_timing, "Write runtime_ms as 0 for byte-reproducible tables");

  // generate
  auto* generate = app.add_subcommand("generate", "Ground truth and samples; writes <out>_data.csv, <out>_truth.csv, <out>_truth.meta");
  bool header = false;
  generate->add_flag("--header", header, "Write a header line in the data CSV");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Graphical lasso for one r (or the whole default path with --path)");
  std::string data_path, cov_path;
  std::optional<double> r_value;
  bool whole_path = false;
  fit_cmd->add_option("--data", data_path, "Dataset CSV (standardized before fitting)");
  fit_cmd->add_option("--cov", cov_path, "Covariance matrix CSV (used as is)");
  fit_cmd->add_option("--r", r_value, "Regularization parameter");
  fit_cmd->add_flag("--path", whole_path, "Fit the default grid and report each point");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "AV selection and thresholding on a dataset");
  calibrate->add_option("--data", data_path, "Dataset CSV")->required();

  // recover
  auto* recover = app.add_subcommand("recover", "End-to-end thAV on a dataset; with a truth, emits results rows");
  std::string truth_edges, truth_meta;
  recover->add_option("--data", data_path, "Dataset CSV (raw samples)")->required();
  recover->add_option("--truth", truth_edges, "Ground-truth edge list (i,j,weight)");
  recover->add_option("--meta", truth_meta, "Ground-truth metadata sidecar");

  // eval
  auto* eval = app.add_subcommand("eval", "Precision, recall and F1 of an edge list against a truth");
  std::string est_edges;
  eval->add_option("--truth", truth_edges, "Truth edge list")->required();
  eval->add_option("--estimate", est_edges, "Estimated edge list")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Replicated simulation study; writes the results table");

  // sweep-threshold
  auto* sweep = app.add_subcommand("sweep-threshold", "F1/precision/recall of the AV estimate over thresholds");
  std::size_t points = 101;
  std::optional<double> t_max;
  sweep->add_option("--points", points, "Number of thresholds")->check(CLI::PositiveNumber);
  sweep->add_option("--t-max", t_max, "Largest threshold (default: largest off-diagonal of the estimate)");

  // diagnose
  auto* diagnose = app.add_subcommand("diagnose", "Incoherence and bound constants of a precision matrix");
  std::string theta_path;
  diagnose->add_option("--theta", theta_path, "Precision matrix CSV (default: generate one from --topology/--d)");

  // export
  auto* export_cmd = app.add_subcommand("export", "Convert an edge list to DOT or edge CSV");
  std::string edges_path, format = "dot";
  export_cmd->add_option("--edges", edges_path, "Edge list CSV")->required();
  export_cmd->add_option("--format", format, "dot | edge-csv")->check(CLI::IsMember({"dot", "edge-csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate->parsed()) {
      const thav::ExperimentSpec spec = c.spec();
      const thav::RngSeed seed{spec.seed, c.stream};
      const thav::GroundTruth truth = thav::generate_truth(spec.topology, spec.d, seed);
      const thav::Dataset data = thav::sample_gaussian(truth, spec.n, seed);
      const std::string prefix = c.out.empty() ? "thav" : c.out;
      thav::io::write_dataset(prefix + "_data.csv", data, header);
      thav::io::write_truth(prefix + "_truth.csv", prefix + "_truth.meta", truth);
      std::cout << "edges = " << truth.edges.size() << "\nmu = " << thav::io::format_double(truth.mu) << "\n";
      return kExitOk;
    }

    if (fit_cmd->parsed()) {
      const thav::CovarianceMatrix cov = covariance_from(data_path, cov_path, c.npn);
      thav::FitOptions options;
      options.tol = c.tol;
      options.max_iter = c.max_iter;
      if (whole_path) {
        const thav::GlassoPath p = thav::path(cov, thav::default_grid(cov, c.grid_size), options);
        std::string text = "r,edges,iterations,kkt_residual\n";
        for (std::size_t k = 0; k < p.size(); ++k) {
          const auto& e = p.estimates[k];
          text += thav::io::format_double(e.r) + ',' + std::to_string(thav::edge_set_of(e.theta).size()) + ',' +
                  std::to_string(e.iterations) + ',' + thav::io::format_double(e.kkt_residual) + '\n';
        }
        emit(c.out, text);
        return kExitOk;
      }
      if (!r_value) throw thav::Error(thav::ErrorKind::InvalidArgument, "fit needs --r or --path");
      const thav::GlassoEstimate est = thav::fit(cov, *r_value, options);
      std::cerr << "iterations = " << est.iterations << "\nconverged = " << (est.converged ? "true" : "false")
                << "\nkkt_residual = " << thav::io::format_double(est.kkt_residual) << "\n";
      emit(c.out, thav::io::matrix_to_csv(est.theta));
      return est.converged ? kExitOk : kExitNumerical;
    }

    if (calibrate->parsed()) {
      const thav::Dataset data = load_dataset(data_path, c.npn);
      const thav::CovarianceMatrix cov = thav::empirical_covariance(data.values, false);
      thav::FitOptions options;
      options.tol = c.tol;
      options.max_iter = c.max_iter;
      const thav::LazyPath lazy(cov, thav::default_grid(cov, c.grid_size), options);
      std::string text;
      for (double C : c.C) {
        const thav::ThavResult res = thav::thav(lazy, av_config(c, C), c.lambda);
        text += "C = " + thav::io::format_double(C) + "\nlambda = " + thav::io::format_double(c.lambda) +
                "\nr_hat = " + thav::io::format_double(res.av.r_hat) + "\nt = " + thav::io::format_double(res.t) +
                "\nedges = " + std::to_string(res.edges.size()) + "\n";
        if (c.C.size() == 1 && !c.out.empty()) thav::io::write_file(c.out, thav::io::edges_to_csv(res.edges));
      }
      std::cout << text;
      return kExitOk;
    }

    if (recover->parsed()) {
      const thav::ExperimentSpec spec = [&] {
        Common copy = c;
        const thav::Dataset probe = thav::io::read_dataset(data_path);
        copy.d = probe.d();
        copy.n = probe.n();
        return copy.spec();
      }();
      const thav::Dataset raw = thav::io::read_dataset(data_path);
      if (truth_edges.empty() != truth_meta.empty()) {
        throw thav::Error(thav::ErrorKind::InvalidArgument, "--truth and --meta go together");
      }
      if (!truth_edges.empty()) {
        const thav::GroundTruth truth = thav::io::read_truth(truth_edges, truth_meta);
        if (truth.theta.dim() != raw.d()) throw thav::Error(thav::ErrorKind::DimensionMismatch, "truth and data differ in d");
        thav::ResultsTable table{thav::run_replicate(truth, raw, spec)};
        table.sort();
        emit(c.out, thav::results_to_csv(table));
        for (const auto& row : table.rows) {
          if (row.failed) {
            std::cerr << "replicate failed: " << row.error << "\n";
            return exit_code_for(row.error_kind);
          }
        }
        return kExitOk;
      }
      const thav::Dataset data = spec.nonparanormal ? thav::nonparanormal(raw) : thav::standardize(raw);
      const thav::CovarianceMatrix cov = thav::empirical_covariance(data.values, false);
      const thav::LazyPath lazy(cov, thav::default_grid(cov, spec.grid_size), spec.fit_options());
      const thav::ThavResult res = thav::thav(lazy, av_config(c, spec.C.front()), spec.lambda);
      std::cerr << "r_hat = " << thav::io::format_double(res.av.r_hat) << "\nt = " << thav::io::format_double(res.t)
                << "\nedges = " << res.edges.size() << "\n";
      emit(c.out, thav::io::edges_to_csv(res.edges));
      return kExitOk;
    }

    if (eval->parsed()) {
      const thav::io::WeightedEdges truth = thav::io::edges_from_csv(thav::io::read_file(truth_edges), c.d);
      const thav::io::WeightedEdges est = thav::io::edges_from_csv(thav::io::read_file(est_edges), c.d);
      std::ostringstream os;
      print_scores(os, thav::scores(truth.edges, est.edges));
      emit(c.out, os.str());
      return kExitOk;
    }

    if (bench->parsed()) {
      const thav::ExperimentSpec spec = c.spec();
      const thav::ResultsTable table = thav::run_experiment(spec);
      emit(c.out, thav::results_to_csv(table));
      for (const auto& s : thav::summarize(table)) {
        std::fprintf(stderr, "C = %.3g: replicates %zu, f1 %.3f (%.3f), precision %.3f, recall %.3f, r_hat %.4f, oracle f1 %.3f\n",
                     s.C, s.replicates, s.f1, s.f1_sd, s.precision, s.recall, s.r_hat, s.oracle_f1);
      }
      for (const auto& row : table.rows) {
        if (row.failed) {
          std::cerr << "replicate " << row.seed << " failed: " << row.error << "\n";
          return exit_code_for(row.error_kind);
        }
      }
      return kExitOk;
    }

    if (sweep->parsed()) {
      const thav::ExperimentSpec spec = c.spec();
      auto [truth, raw] = thav::generate_replicate(spec, c.stream);
      const thav::Dataset data = spec.nonparanormal ? thav::nonparanormal(raw) : thav::standardize(raw);
      const thav::CovarianceMatrix cov = thav::empirical_covariance(data.values, false);
      const thav::GlassoPath p = thav::path(cov, thav::default_grid(cov, spec.grid_size), spec.fit_options());
      std::string text;
      for (double C : spec.C) {
        const thav::AvConfig config = av_config(c, C);
        double hi = t_max.value_or(0.0);
        if (!t_max) {
          const thav::AvResult av = thav::av_select(p, config);
          for (std::size_t i = 0; i < av.estimate.dim(); ++i) {
            for (std::size_t j = i + 1; j < av.estimate.dim(); ++j) hi = std::max(hi, std::abs(av.estimate(i, j)));
          }
        }
        const thav::SweepCurve curve =
            thav::sweep_threshold(p, config, truth.edges, thav::linear_thresholds(hi, points), spec.lambda);
        text += "# C = " + thav::io::format_double(C) + "\n" + thav::sweep_to_csv(curve);
      }
      emit(c.out, text);
      return kExitOk;
    }

    if (diagnose->parsed()) {
      thav::SymMatrix theta;
      if (!theta_path.empty()) {
        theta = thav::io::read_matrix(theta_path);
      } else {
        const thav::ExperimentSpec spec = c.spec();
        theta = thav::generate_truth(spec.topology, spec.d, {spec.seed, c.stream}).theta;
      }
      const thav::TheoryConstants k = thav::theory_constants(theta);
      emit(c.out, thav::io::key_values_to_text({
                      {"format_version", std::to_string(thav::io::kFormatVersion)},
                      {"kappa_sigma", thav::io::format_double(k.kappa_sigma)},
                      {"kappa_gamma", thav::io::format_double(k.kappa_gamma)},
                      {"alpha_incoherence", thav::io::format_double(k.alpha_incoherence)},
                      {"degree", std::to_string(k.degree)},
                      {"c_prime", thav::io::format_double(k.c_prime)},
                      {"r_upper", thav::io::format_double(k.r_upper)},
                      {"c_bound_gamma", thav::io::format_double(k.c_bound_gamma)},
                      {"c_bound_sigma", thav::io::format_double(k.c_bound_sigma)},
                  }));
      return kExitOk;
    }

    if (export_cmd->parsed()) {
      const thav::io::WeightedEdges we = thav::io::edges_from_csv(thav::io::read_file(edges_path), c.d);
      emit(c.out, format == "dot" ? thav::io::edges_to_dot(we.edges) : thav::io::edges_to_csv(we.edges));
      return kExitOk;
    }
  } catch (const thav::Error& e) {
    std::cerr << "error (" << thav::to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
