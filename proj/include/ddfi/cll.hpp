#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "ddfi/graph.hpp"
#include "ddfi/matrix.hpp"
#include "ddfi/rng.hpp"

namespace ddfi {

enum class Similarity : std::uint8_t { constant_one, cosine };

struct CllConfig {
  std::size_t k = 20;            // links sampled per source node
  double tau = 1.0;              // softmax temperature
  std::size_t candidate_size = 0; // M; 0 means "all other train nodes"
  Similarity similarity = Similarity::constant_one;
  std::uint64_t seed = 0;

  void validate(std::size_t num_nodes) const {
    if (k < 1) throw InputError("cll config: k must be >= 1");
    if (!(tau > 0.0)) throw InputError("cll config: tau must be > 0");
    if (candidate_size != 0) {
      if (k > candidate_size) throw InputError("cll config: k must be <= M");
      if (num_nodes > 0 && candidate_size > num_nodes - 1)
        throw InputError("cll config: M must be <= num_nodes - 1");
    }
  }
};

struct CllResult {
  SparseGraph graph;
  std::size_t edges_added = 0;    // undirected edges new to the graph
  bool degenerate_train_set = false; // < 2 train nodes; input returned as-is
};

/// a.b / (|a||b|); 0 if either norm is 0.
inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw InputError("cosine_similarity: vectors differ in length");
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

/// p_j = exp(w_j / tau) / Z, computed with the usual max-shift.
inline std::vector<double> softmax_weights(std::span<const double> weights, double tau) {
  std::vector<double> p(weights.size());
  if (weights.empty()) return p;
  double top = weights[0];
  for (double w : weights) top = std::max(top, w);
  double z = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    p[i] = std::exp((weights[i] - top) / tau);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

namespace detail {

/// Weighted sampling of k distinct indices by the Efraimidis-Spirakis key
/// method: key_j = log(u_j) / p_j, take the k largest. For uniform p this
/// reduces to a uniform k-subset.
inline std::vector<std::size_t> sample_without_replacement(std::span<const double> probs,
                                                           std::size_t k, Rng& rng) {
  std::vector<std::pair<double, std::size_t>> keys;
  keys.reserve(probs.size());
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double u = 1.0 - rng.uniform(); // (0, 1]
    const double key = probs[j] > 0.0 ? std::log(u) / probs[j]
                                      : -std::numeric_limits<double>::infinity();
    keys.emplace_back(key, j);
  }
  k = std::min(k, keys.size());
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k), keys.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = keys[i].second;
  return out;
}

} // namespace detail

/// Adds undirected edges between train-split nodes that share a label. For
/// each train node: draw a candidate set of min(M, |train|-1) other train
/// nodes, softmax the similarity weights, sample k candidates without
/// replacement, keep the co-labeled ones. Duplicate and pre-existing edges
/// are absorbed silently. Deterministic given cfg.seed (per-node sub-seeds,
/// so the outcome is independent of traversal order).
///
/// `sim_features` provides the rows sim() is computed over; it is only read
/// when cfg.similarity == cosine and may be empty otherwise.
inline CllResult co_label_link(const SparseGraph& g, const Matrix& sim_features,
                               const LabelSet& labels, const CllConfig& cfg) {
  cfg.validate(g.num_nodes);
  if (labels.labels.size() != g.num_nodes)
    throw InputError("co_label_link: label count does not match node count");

  const std::vector<NodeId> train_nodes = labels.nodes_in(Split::train);
  if (train_nodes.size() < 2) {
    return {g, 0, true};
  }
  if (cfg.similarity == Similarity::cosine &&
      (sim_features.rows != g.num_nodes || sim_features.cols == 0))
    throw InputError("co_label_link: cosine similarity needs one feature row per node");

  const std::size_t m_eff = cfg.candidate_size == 0
                                ? train_nodes.size() - 1
                                : std::min(cfg.candidate_size, train_nodes.size() - 1);

  std::vector<EdgePair> new_edges;
  std::vector<NodeId> pool(train_nodes);
  for (const NodeId src : train_nodes) {
    if (labels.labels[src] == kUnknownLabel) continue;
    Rng rng(derive_seed(cfg.seed, seed_stream::kCllNode, src));

    // Candidate set: uniform m_eff-subset of the other train nodes
    // (partial Fisher-Yates over a scratch pool with src swapped out).
    pool.assign(train_nodes.begin(), train_nodes.end());
    auto self = std::find(pool.begin(), pool.end(), src);
    std::swap(*self, pool.back());
    pool.pop_back();
    for (std::size_t i = 0; i < m_eff; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    const std::span<const NodeId> candidates(pool.data(), m_eff);

    std::vector<double> weights(candidates.size(), 1.0);
    if (cfg.similarity == Similarity::cosine)
      for (std::size_t j = 0; j < candidates.size(); ++j)
        weights[j] = cosine_similarity(sim_features.row(src), sim_features.row(candidates[j]));
    const std::vector<double> probs = softmax_weights(weights, cfg.tau);

    const auto sampled = detail::sample_without_replacement(probs, cfg.k, rng);
    for (std::size_t idx : sampled) {
      const NodeId dst = candidates[idx];
      if (labels.labels[dst] == labels.labels[src]) new_edges.emplace_back(src, dst);
    }
  }

  std::vector<EdgePair> combined = g.undirected_edges();
  combined.insert(combined.end(), new_edges.begin(), new_edges.end());
  CllResult res;
  res.graph = build_graph(combined, g.num_nodes);
  res.edges_added = res.graph.num_edges() - g.num_edges();
  return res;
}

} // namespace ddfi
