#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ddfi/graph.hpp"
#include "ddfi/matrix.hpp"

namespace ddfi {

// File formats:
//   edge list   one edge per line, "src<TAB>dst", 0-based ids, '#' comments
//   labels      CSV "node_id,label,split"; empty label means unknown
//   features    CSV "node_id,f0,...,f{d-1}"; empty cell or "nan" means missing
// Doubles are written with shortest round-trip formatting so files are
// byte-stable across runs.

/// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

inline std::int64_t parse_int(std::string_view s, const std::string& file, std::size_t line_no) {
  s = trim(s);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InputError(file + ":" + std::to_string(line_no) +
                     ": expected integer, got '" + std::string(s) + "'");
  return value;
}

inline double parse_double(std::string_view s, const std::string& file, std::size_t line_no) {
  s = trim(s);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InputError(file + ":" + std::to_string(line_no) +
                     ": expected number, got '" + std::string(s) + "'");
  return value;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  return out;
}

} // namespace detail

inline std::vector<std::pair<std::int64_t, std::int64_t>> read_edge_pairs(const std::string& path) {
  auto in = detail::open_input(path);
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    const auto tab = sv.find('\t');
    if (tab == std::string_view::npos)
      throw InputError(path + ":" + std::to_string(line_no) + ": expected 'src<TAB>dst'");
    pairs.emplace_back(detail::parse_int(sv.substr(0, tab), path, line_no),
                       detail::parse_int(sv.substr(tab + 1), path, line_no));
  }
  return pairs;
}

inline SparseGraph read_edge_list(const std::string& path, std::size_t num_nodes) {
  const auto pairs = read_edge_pairs(path);
  return build_graph(std::span<const std::pair<std::int64_t, std::int64_t>>(pairs), num_nodes);
}

inline void write_edge_list(const std::string& path, const SparseGraph& g) {
  auto out = detail::open_output(path);
  out << "# src\tdst\n";
  for (const auto& [u, v] : g.undirected_edges())
    out << u << '\t' << v << '\n';
}

inline LabelSet read_labels(const std::string& path, std::size_t num_nodes) {
  auto in = detail::open_input(path);
  LabelSet ls;
  ls.labels.assign(num_nodes, kUnknownLabel);
  ls.split.assign(num_nodes, Split::test);
  std::vector<bool> seen(num_nodes, false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::trim(line);
    if (sv.empty()) continue;
    if (line_no == 1 && sv.rfind("node_id", 0) == 0) continue; // header
    const auto fields = detail::split_csv(sv);
    if (fields.size() != 3)
      throw InputError(path + ":" + std::to_string(line_no) + ": expected 'node_id,label,split'");
    const std::int64_t node = detail::parse_int(fields[0], path, line_no);
    if (node < 0 || static_cast<std::size_t>(node) >= num_nodes)
      throw InputError(path + ":" + std::to_string(line_no) + ": node id out of range");
    if (seen[static_cast<std::size_t>(node)])
      throw InputError(path + ":" + std::to_string(line_no) + ": duplicate node id");
    seen[static_cast<std::size_t>(node)] = true;
    const auto label_field = detail::trim(fields[1]);
    if (!label_field.empty())
      ls.labels[static_cast<std::size_t>(node)] =
          static_cast<int>(detail::parse_int(label_field, path, line_no));
    const auto split_field = detail::trim(fields[2]);
    Split s;
    if (split_field == "train") s = Split::train;
    else if (split_field == "val") s = Split::val;
    else if (split_field == "test") s = Split::test;
    else
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": split must be train/val/test, got '" + std::string(split_field) + "'");
    ls.split[static_cast<std::size_t>(node)] = s;
    if (s == Split::train && ls.labels[static_cast<std::size_t>(node)] == kUnknownLabel)
      throw InputError(path + ":" + std::to_string(line_no) + ": train node without label");
  }
  for (std::size_t u = 0; u < num_nodes; ++u)
    if (!seen[u])
      throw InputError(path + ": node " + std::to_string(u) + " missing from split");
  return ls;
}

inline void write_labels(const std::string& path, const LabelSet& ls) {
  auto out = detail::open_output(path);
  out << "node_id,label,split\n";
  for (std::size_t u = 0; u < ls.num_nodes(); ++u) {
    out << u << ',';
    if (ls.is_known(u)) out << ls.labels[u];
    out << ',';
    switch (ls.split[u]) {
      case Split::train: out << "train"; break;
      case Split::val: out << "val"; break;
      case Split::test: out << "test"; break;
    }
    out << '\n';
  }
}

/// Plain dense matrix CSV with a f0..f{d-1} header and no mask semantics.
inline void write_matrix_csv(const std::string& path, const Matrix& m) {
  auto out = detail::open_output(path);
  out << "node_id";
  for (std::size_t c = 0; c < m.cols; ++c) out << ",f" << c;
  out << '\n';
  for (std::size_t r = 0; r < m.rows; ++r) {
    out << r;
    for (std::size_t c = 0; c < m.cols; ++c) out << ',' << format_double(m(r, c));
    out << '\n';
  }
}

inline Matrix read_matrix_csv(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  const auto header = detail::split_csv(detail::trim(line));
  if (header.size() < 2 || detail::trim(header[0]) != "node_id")
    throw InputError(path + ":1: expected header 'node_id,f0,...'");
  const std::size_t dim = header.size() - 1;
  std::vector<double> values;
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::trim(line);
    if (sv.empty()) continue;
    const auto fields = detail::split_csv(sv);
    if (fields.size() != dim + 1)
      throw InputError(path + ":" + std::to_string(line_no) + ": ragged row");
    const std::int64_t node = detail::parse_int(fields[0], path, line_no);
    if (node != static_cast<std::int64_t>(rows))
      throw InputError(path + ":" + std::to_string(line_no) + ": node ids must be 0..n-1 in order");
    for (std::size_t c = 0; c < dim; ++c)
      values.push_back(detail::parse_double(fields[c + 1], path, line_no));
    ++rows;
  }
  Matrix m(rows, dim);
  m.data = std::move(values);
  return m;
}

} // namespace ddfi
