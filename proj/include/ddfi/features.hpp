#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "ddfi/graph.hpp"
#include "ddfi/io.hpp"
#include "ddfi/matrix.hpp"
#include "ddfi/rng.hpp"

namespace ddfi {

/// Dense node-by-dim feature matrix paired with a known-entry mask.
/// Unknown entries hold 0 internally; NaN never survives ingestion.
struct FeatureTable {
  Matrix values;
  std::vector<std::uint8_t> known; // row-major, parallel to values.data

  FeatureTable() = default;
  FeatureTable(std::size_t nodes, std::size_t dim, bool all_known = true)
      : values(nodes, dim), known(nodes * dim, all_known ? 1 : 0) {}

  std::size_t num_nodes() const { return values.rows; }
  std::size_t dim() const { return values.cols; }

  bool is_known(std::size_t i, std::size_t j) const {
    return known[i * values.cols + j] != 0;
  }
  void set(std::size_t i, std::size_t j, double v) {
    values(i, j) = v;
    known[i * values.cols + j] = 1;
  }
  void clear(std::size_t i, std::size_t j) {
    values(i, j) = 0.0;
    known[i * values.cols + j] = 0;
  }

  double known_fraction() const {
    if (known.empty()) return 0.0;
    std::size_t n = 0;
    for (auto k : known) n += k;
    return static_cast<double>(n) / static_cast<double>(known.size());
  }
};

inline FeatureTable load_features(const std::string& path, std::size_t num_nodes) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  const auto header = detail::split_csv(detail::trim(line));
  if (header.size() < 2 || detail::trim(header[0]) != "node_id")
    throw InputError(path + ":1: expected header 'node_id,f0,...,f{d-1}'");
  const std::size_t dim = header.size() - 1;

  FeatureTable table(num_nodes, dim, false);
  std::vector<bool> seen(num_nodes, false);
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::trim(line);
    if (sv.empty()) continue;
    const auto fields = detail::split_csv(sv);
    if (fields.size() != dim + 1)
      throw InputError(path + ":" + std::to_string(line_no) + ": ragged row (" +
                       std::to_string(fields.size() - 1) + " of " +
                       std::to_string(dim) + " features)");
    const std::int64_t node = detail::parse_int(fields[0], path, line_no);
    if (node < 0 || static_cast<std::size_t>(node) >= num_nodes)
      throw InputError(path + ":" + std::to_string(line_no) + ": node id out of range");
    if (seen[static_cast<std::size_t>(node)])
      throw InputError(path + ":" + std::to_string(line_no) + ": duplicate node id");
    seen[static_cast<std::size_t>(node)] = true;
    for (std::size_t c = 0; c < dim; ++c) {
      const auto cell = detail::trim(fields[c + 1]);
      if (cell.empty() || cell == "nan" || cell == "NaN" || cell == "NAN") continue;
      table.set(static_cast<std::size_t>(node), c, detail::parse_double(cell, path, line_no));
    }
    ++rows;
  }
  if (rows != num_nodes)
    throw InputError(path + ": expected " + std::to_string(num_nodes) + " rows, got " +
                     std::to_string(rows));
  return table;
}

inline void write_features(const std::string& path, const FeatureTable& table) {
  auto out = detail::open_output(path);
  out << "node_id";
  for (std::size_t c = 0; c < table.dim(); ++c) out << ",f" << c;
  out << '\n';
  for (std::size_t r = 0; r < table.num_nodes(); ++r) {
    out << r;
    for (std::size_t c = 0; c < table.dim(); ++c) {
      out << ',';
      if (table.is_known(r, c)) out << format_double(table.values(r, c));
      else out << "nan";
    }
    out << '\n';
  }
}

/// Each currently-known entry goes unknown independently with probability
/// `rate`. Never resurrects an unknown entry.
inline FeatureTable mask_uniform(const FeatureTable& x, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw InputError("mask_uniform: rate must be in [0, 1)");
  FeatureTable out = x;
  Rng rng(derive_seed(seed, seed_stream::kMaskUniform));
  for (std::size_t i = 0; i < out.num_nodes(); ++i)
    for (std::size_t j = 0; j < out.dim(); ++j)
      if (out.is_known(i, j) && rng.bernoulli(rate)) out.clear(i, j);
  return out;
}

/// Whole-row missingness: each node independently loses its entire feature
/// row with probability `rate`.
inline FeatureTable mask_structural(const FeatureTable& x, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw InputError("mask_structural: rate must be in [0, 1)");
  FeatureTable out = x;
  Rng rng(derive_seed(seed, seed_stream::kMaskStructural));
  for (std::size_t i = 0; i < out.num_nodes(); ++i)
    if (rng.bernoulli(rate))
      for (std::size_t j = 0; j < out.dim(); ++j) out.clear(i, j);
  return out;
}

/// Clears the feature rows of every node in the given split (used to hide
/// test-node features from the training stage in inductive runs).
inline FeatureTable clear_split_rows(const FeatureTable& x, const LabelSet& labels, Split s) {
  FeatureTable out = x;
  for (std::size_t i = 0; i < out.num_nodes(); ++i)
    if (labels.split[i] == s)
      for (std::size_t j = 0; j < out.dim(); ++j) out.clear(i, j);
  return out;
}

/// Planted-partition generator used for all desk-scale experiments.
struct SyntheticSpec {
  std::size_t num_nodes = 1500;
  int num_classes = 3;
  double p_in = 0.02;
  double p_out = 0.002;
  std::size_t feature_dim = 64;
  double class_mean_scale = 1.0;
  double noise_sigma = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_nodes == 0) throw InputError("synthetic spec: num_nodes must be > 0");
    if (num_classes < 1) throw InputError("synthetic spec: num_classes must be >= 1");
    if (!(0.0 <= p_out && p_out <= p_in && p_in <= 1.0))
      throw InputError("synthetic spec: need 0 <= p_out <= p_in <= 1");
    if (feature_dim == 0) throw InputError("synthetic spec: feature_dim must be > 0");
    if (!(noise_sigma > 0.0)) throw InputError("synthetic spec: noise_sigma must be > 0");
  }
};

struct SyntheticDataset {
  SparseGraph graph;
  FeatureTable features;
  LabelSet labels;
};

/// Nodes are assigned to classes round-robin; each intra-class pair is linked
/// with probability p_in and each inter-class pair with p_out. Per-node
/// features are the class mean (one centered Gaussian draw per class, scaled
/// by class_mean_scale) plus i.i.d. Gaussian noise. The split is a 40/30/30
/// stratified shuffle. Bit-identical across runs for a fixed seed.
inline SyntheticDataset generate_sbm(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n = spec.num_nodes;
  const int k = spec.num_classes;

  std::vector<int> cls(n);
  for (std::size_t i = 0; i < n; ++i) cls[i] = static_cast<int>(i % k);

  std::vector<EdgePair> edges;
  {
    Rng rng(derive_seed(spec.seed, seed_stream::kSbmEdges));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double p = (cls[i] == cls[j]) ? spec.p_in : spec.p_out;
        if (p > 0.0 && rng.bernoulli(p))
          edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
      }
    }
  }

  Matrix class_means(static_cast<std::size_t>(k), spec.feature_dim);
  {
    Rng rng(derive_seed(spec.seed, seed_stream::kSbmClassMeans));
    for (double& v : class_means.data) v = spec.class_mean_scale * rng.normal();
  }

  FeatureTable features(n, spec.feature_dim, true);
  {
    Rng rng(derive_seed(spec.seed, seed_stream::kSbmNoise));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < spec.feature_dim; ++j)
        features.values(i, j) =
            class_means(static_cast<std::size_t>(cls[i]), j) + spec.noise_sigma * rng.normal();
  }

  LabelSet labels;
  labels.labels = cls;
  labels.split.assign(n, Split::test);
  {
    Rng rng(derive_seed(spec.seed, seed_stream::kSbmSplit));
    for (int c = 0; c < k; ++c) {
      std::vector<NodeId> members;
      for (std::size_t i = 0; i < n; ++i)
        if (cls[i] == c) members.push_back(static_cast<NodeId>(i));
      // Fisher-Yates, then contiguous 40/30/30 blocks.
      for (std::size_t i = members.size(); i > 1; --i)
        std::swap(members[i - 1], members[rng.below(i)]);
      const std::size_t n_train = (members.size() * 40) / 100;
      const std::size_t n_val = (members.size() * 30) / 100;
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (i < n_train) labels.split[members[i]] = Split::train;
        else if (i < n_train + n_val) labels.split[members[i]] = Split::val;
        else labels.split[members[i]] = Split::test;
      }
    }
  }

  return {build_graph(edges, n), std::move(features), std::move(labels)};
}

struct InductiveSplit {
  SparseGraph train_graph; // induced on train+val nodes, node ids preserved
  SparseGraph full_graph;
};

/// Removes every edge incident to a test node; node ids are preserved so the
/// two graphs index the same feature rows.
inline InductiveSplit inductive_split(const SparseGraph& g, const LabelSet& labels) {
  if (labels.split.size() != g.num_nodes)
    throw InputError("inductive_split: split size does not match node count");
  std::vector<EdgePair> kept;
  for (const auto& [u, v] : g.undirected_edges())
    if (labels.split[u] != Split::test && labels.split[v] != Split::test)
      kept.emplace_back(u, v);
  return {build_graph(kept, g.num_nodes), g};
}

} // namespace ddfi
