#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "thav/edge_set.hpp"
#include "thav/error.hpp"
#include "thav/matrix.hpp"
#include "thav/synthetic.hpp"

// Text formats. Numbers are written with 17 significant digits so every
// double round-trips exactly; vertex indices in files start at 1.

namespace thav::io {

inline constexpr int kFormatVersion = 1;

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

/// Strict decimal parse: the whole field must be consumed and the value finite.
inline double parse_double(const std::string& raw, const std::string& where) {
  const std::size_t first = raw.find_first_not_of(" \t\r");
  if (first == std::string::npos) throw Error(ErrorKind::Parse, where + ": empty field");
  const std::string field = raw.substr(first, raw.find_last_not_of(" \t\r") - first + 1);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || errno == ERANGE || !std::isfinite(v)) {
    throw Error(ErrorKind::Parse, where + ": not a finite number: '" + field + "'");
  }
  return v;
}

inline std::size_t parse_index(const std::string& field, const std::string& where) {
  if (field.empty() || field.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorKind::Parse, where + ": not a vertex index: '" + field + "'");
  }
  return static_cast<std::size_t>(std::stoull(field));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << content;
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

/// Non-blank lines with their 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string>> content_lines(const std::string& text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::istringstream in(text);
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (!trim(line).empty()) out.emplace_back(no, line);
  }
  return out;
}

// ---- dense matrices --------------------------------------------------------

inline std::string matrix_to_csv(const SymMatrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.dim(); ++i) {
    for (std::size_t j = 0; j < m.dim(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

/// d rows of d values, no header. Symmetry is checked to 1e-12 relative.
inline SymMatrix matrix_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  for (const auto& [no, line] : content_lines(text)) {
    const auto fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, "line " + std::to_string(no)));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::Parse, "matrix file is empty");
  for (const auto& row : rows) {
    if (row.size() != rows.size()) throw Error(ErrorKind::Parse, "matrix must be square");
  }
  try {
    return SymMatrix::from_rows(rows);
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

inline SymMatrix read_matrix(const std::string& path) { return matrix_from_csv(read_file(path)); }
inline void write_matrix(const std::string& path, const SymMatrix& m) { write_file(path, matrix_to_csv(m)); }

// ---- datasets --------------------------------------------------------------

/// n rows of d values. A first line that does not parse as numbers is taken as a header.
inline Dataset dataset_from_csv(const std::string& text) {
  const auto lines = content_lines(text);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& [no, line] = lines[k];
    const auto fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    try {
      for (const auto& f : fields) row.push_back(parse_double(f, "line " + std::to_string(no)));
    } catch (const Error&) {
      if (k == 0) continue;
      throw;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(no) + ": expected " +
                                        std::to_string(rows.front().size()) + " columns");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::Parse, "dataset has no rows");
  Dataset out{DenseMatrix(rows.size(), rows.front().size()), Preprocessing::Raw};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) out.values(i, j) = rows[i][j];
  }
  return out;
}

inline std::string dataset_to_csv(const Dataset& data, bool header = false) {
  std::string out;
  if (header) {
    for (std::size_t j = 0; j < data.d(); ++j) {
      if (j > 0) out += ',';
      out += "x" + std::to_string(j + 1);
    }
    out += '\n';
  }
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t j = 0; j < data.d(); ++j) {
      if (j > 0) out += ',';
      out += format_double(data.values(i, j));
    }
    out += '\n';
  }
  return out;
}

inline Dataset read_dataset(const std::string& path) { return dataset_from_csv(read_file(path)); }
inline void write_dataset(const std::string& path, const Dataset& data, bool header = false) {
  write_file(path, dataset_to_csv(data, header));
}

// ---- edge lists ------------------------------------------------------------

/// Header `i,j`, one edge per line.
inline std::string edges_to_csv(const EdgeSet& edges) {
  std::string out = "i,j\n";
  for (const auto& [i, j] : edges) out += std::to_string(i + 1) + "," + std::to_string(j + 1) + "\n";
  return out;
}

/// Header `i,j,weight` with the entries of theta on each edge.
inline std::string weighted_edges_to_csv(const EdgeSet& edges, const SymMatrix& theta) {
  std::string out = "i,j,weight\n";
  for (const auto& [i, j] : edges) {
    out += std::to_string(i + 1) + "," + std::to_string(j + 1) + "," + format_double(theta(i, j)) + "\n";
  }
  return out;
}

struct WeightedEdges {
  EdgeSet edges;
  /// Aligned with edges (canonical order).
  std::vector<double> weights;
};

/// Reads `i,j` or `i,j,weight` rows (header optional) on vertices 1..dim.
inline WeightedEdges edges_from_csv(const std::string& text, std::size_t dim) {
  std::map<EdgeSet::Edge, double> entries;
  const auto lines = content_lines(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& [no, line] = lines[k];
    const auto fields = split_csv_line(line);
    const std::string where = "line " + std::to_string(no);
    if (k == 0 && !fields.empty() && fields[0] == "i") continue;
    if (fields.size() != 2 && fields.size() != 3) throw Error(ErrorKind::Parse, where + ": expected i,j[,weight]");
    std::size_t i = parse_index(fields[0], where);
    std::size_t j = parse_index(fields[1], where);
    if (i < 1 || j < 1 || i > dim || j > dim) throw Error(ErrorKind::Parse, where + ": vertex out of range");
    if (i == j) throw Error(ErrorKind::Parse, where + ": self-loop");
    if (i > j) std::swap(i, j);
    const double w = fields.size() == 3 ? parse_double(fields[2], where) : 1.0;
    if (!entries.emplace(EdgeSet::Edge{i - 1, j - 1}, w).second) {
      throw Error(ErrorKind::Parse, where + ": duplicate edge");
    }
  }
  WeightedEdges out;
  std::vector<EdgeSet::Edge> pairs;
  for (const auto& [e, w] : entries) {
    pairs.push_back(e);
    out.weights.push_back(w);
  }
  out.edges = EdgeSet(dim, std::move(pairs));
  return out;
}

// ---- DOT ---------------------------------------------------------------------

/// Undirected DOT graph; vertices without edges are left out.
inline std::string edges_to_dot(const EdgeSet& edges) {
  if (edges.empty()) return "graph G { }\n";
  std::string out = "graph G {\n";
  for (const auto& [i, j] : edges) out += "  " + std::to_string(i + 1) + " -- " + std::to_string(j + 1) + ";\n";
  out += "}\n";
  return out;
}

// ---- key = value -----------------------------------------------------------

using KeyValues = std::map<std::string, std::string>;

/// `key = value` lines; `#` starts a comment, blank lines are skipped.
inline KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Parse, "line " + std::to_string(no) + ": expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::Parse, "line " + std::to_string(no) + ": empty key");
    out[std::move(key)] = trim(std::string_view(line).substr(eq + 1));
  }
  return out;
}

inline std::string key_values_to_text(const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  return out;
}

// ---- ground truth ----------------------------------------------------------

inline std::string truth_metadata(const GroundTruth& truth) {
  return key_values_to_text({
      {"format_version", std::to_string(kFormatVersion)},
      {"topology", truth.topology.kind == Topology::ScaleFree ? "scale-free" : "random"},
      {"d", std::to_string(truth.theta.dim())},
      {"p", format_double(truth.topology.p)},
      {"mu", format_double(truth.mu)},
      {"seed", std::to_string(truth.seed.master)},
      {"stream", std::to_string(truth.seed.stream)},
  });
}

inline void write_truth(const std::string& edges_path, const std::string& meta_path, const GroundTruth& truth) {
  write_file(edges_path, weighted_edges_to_csv(truth.edges, truth.theta));
  write_file(meta_path, truth_metadata(truth));
}

namespace detail {

inline const std::string& require_key(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw Error(ErrorKind::Parse, "missing key '" + key + "'");
  return it->second;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorKind::Parse, key + ": not an unsigned integer: '" + s + "'");
  }
  errno = 0;
  const auto v = std::strtoull(s.c_str(), nullptr, 10);
  if (errno == ERANGE) throw Error(ErrorKind::Parse, key + ": out of range");
  return v;
}

}  // namespace detail

/// Rebuilds a ground truth from its edge list and metadata sidecar.
inline GroundTruth truth_from_text(const std::string& edges_text, const std::string& meta_text) {
  const KeyValues kv = parse_key_values(meta_text);
  if (detail::require_key(kv, "format_version") != std::to_string(kFormatVersion)) {
    throw Error(ErrorKind::Parse, "unsupported format_version");
  }
  const std::size_t d = detail::parse_u64(detail::require_key(kv, "d"), "d");
  if (d < 2) throw Error(ErrorKind::Parse, "d must be at least 2");
  const std::string& kind = detail::require_key(kv, "topology");
  TopologySpec topology;
  if (kind == "scale-free") {
    topology = TopologySpec::scale_free();
  } else if (kind == "random") {
    topology = TopologySpec::random(parse_double(detail::require_key(kv, "p"), "p"));
  } else {
    throw Error(ErrorKind::Parse, "unknown topology '" + kind + "'");
  }

  const WeightedEdges we = edges_from_csv(edges_text, d);
  GroundTruth truth;
  truth.theta = SymMatrix::identity(d);
  std::size_t k = 0;
  for (const auto& [i, j] : we.edges) truth.theta.set(i, j, we.weights[k++]);
  truth.edges = we.edges;
  truth.topology = topology;
  truth.mu = parse_double(detail::require_key(kv, "mu"), "mu");
  truth.seed.master = detail::parse_u64(detail::require_key(kv, "seed"), "seed");
  if (const auto it = kv.find("stream"); it != kv.end()) truth.seed.stream = detail::parse_u64(it->second, "stream");
  return truth;
}

inline GroundTruth read_truth(const std::string& edges_path, const std::string& meta_path) {
  return truth_from_text(read_file(edges_path), read_file(meta_path));
}

}  // namespace thav::io
