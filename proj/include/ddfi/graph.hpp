#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ddfi/matrix.hpp"

namespace ddfi {

using NodeId = std::uint32_t;
using EdgePair = std::pair<NodeId, NodeId>;

/// Simple undirected graph in CSR form. Invariants established by
/// build_graph(): no self-loops, no duplicate edges, neighbor lists sorted
/// ascending, and (u,v) stored iff (v,u) is. Immutable after construction.
struct SparseGraph {
  std::size_t num_nodes = 0;
  std::vector<std::size_t> offsets;  // size num_nodes + 1
  std::vector<NodeId> neighbors;     // size = 2 * undirected edge count

  std::size_t num_edges() const { return neighbors.size() / 2; }

  std::size_t degree(std::size_t u) const { return offsets[u + 1] - offsets[u]; }

  std::span<const NodeId> row(std::size_t u) const {
    return {neighbors.data() + offsets[u], degree(u)};
  }

  bool has_edge(NodeId u, NodeId v) const {
    const auto r = row(u);
    return std::binary_search(r.begin(), r.end(), v);
  }

  /// All undirected edges as (u, v) with u < v, lexicographically sorted.
  std::vector<EdgePair> undirected_edges() const {
    std::vector<EdgePair> edges;
    edges.reserve(num_edges());
    for (std::size_t u = 0; u < num_nodes; ++u)
      for (NodeId v : row(u))
        if (static_cast<NodeId>(u) < v) edges.emplace_back(static_cast<NodeId>(u), v);
    return edges;
  }
};

/// Deduplicates, drops self-loops, and symmetrizes the input pair list.
inline SparseGraph build_graph(std::span<const std::pair<std::int64_t, std::int64_t>> pairs,
                               std::size_t num_nodes) {
  std::vector<EdgePair> directed;
  directed.reserve(pairs.size() * 2);
  for (const auto& [a, b] : pairs) {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= num_nodes ||
        static_cast<std::size_t>(b) >= num_nodes)
      throw InputError("build_graph: node id out of range: (" +
                       std::to_string(a) + ", " + std::to_string(b) + ")");
    if (a == b) continue;
    directed.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
    directed.emplace_back(static_cast<NodeId>(b), static_cast<NodeId>(a));
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  SparseGraph g;
  g.num_nodes = num_nodes;
  g.offsets.assign(num_nodes + 1, 0);
  for (const auto& [u, v] : directed) ++g.offsets[u + 1];
  for (std::size_t i = 0; i < num_nodes; ++i) g.offsets[i + 1] += g.offsets[i];
  g.neighbors.reserve(directed.size());
  for (const auto& [u, v] : directed) g.neighbors.push_back(v);
  return g;
}

inline SparseGraph build_graph(const std::vector<EdgePair>& pairs, std::size_t num_nodes) {
  std::vector<std::pair<std::int64_t, std::int64_t>> wide;
  wide.reserve(pairs.size());
  for (const auto& [u, v] : pairs) wide.emplace_back(u, v);
  return build_graph(std::span<const std::pair<std::int64_t, std::int64_t>>(wide), num_nodes);
}

/// Symmetric-normalized adjacency: same sparsity pattern as the source graph,
/// entry (u,v) weighted 1/sqrt(d_u * d_v). Rows of isolated nodes are empty.
struct NormalizedAdjacency {
  std::size_t num_nodes = 0;
  std::vector<std::size_t> offsets;
  std::vector<NodeId> neighbors;
  std::vector<double> weights;

  std::size_t degree(std::size_t u) const { return offsets[u + 1] - offsets[u]; }

  std::span<const NodeId> row(std::size_t u) const {
    return {neighbors.data() + offsets[u], degree(u)};
  }
  std::span<const double> row_weights(std::size_t u) const {
    return {weights.data() + offsets[u], degree(u)};
  }
};

inline NormalizedAdjacency normalized_adjacency(const SparseGraph& g) {
  NormalizedAdjacency adj;
  adj.num_nodes = g.num_nodes;
  adj.offsets = g.offsets;
  adj.neighbors = g.neighbors;
  adj.weights.resize(g.neighbors.size());
  std::vector<double> inv_sqrt_deg(g.num_nodes, 0.0);
  for (std::size_t u = 0; u < g.num_nodes; ++u)
    if (g.degree(u) > 0)
      inv_sqrt_deg[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(u)));
  for (std::size_t u = 0; u < g.num_nodes; ++u) {
    for (std::size_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e)
      adj.weights[e] = inv_sqrt_deg[u] * inv_sqrt_deg[g.neighbors[e]];
  }
  return adj;
}

/// Sparse-dense product: out[i] = sum_{j in N(i)} w_ij * x[j].
/// Fixed per-row summation order (neighbors ascending), so the result is
/// deterministic; isolated nodes produce zero rows.
inline Matrix spmm(const NormalizedAdjacency& adj, const Matrix& x) {
  if (x.rows != adj.num_nodes)
    throw InputError("spmm: matrix row count does not match node count");
  Matrix out(x.rows, x.cols);
  for (std::size_t u = 0; u < adj.num_nodes; ++u) {
    double* orow = out.data.data() + u * out.cols;
    for (std::size_t e = adj.offsets[u]; e < adj.offsets[u + 1]; ++e) {
      const double w = adj.weights[e];
      const double* xrow = x.data.data() + adj.neighbors[e] * x.cols;
      for (std::size_t c = 0; c < x.cols; ++c) orow[c] += w * xrow[c];
    }
  }
  return out;
}

/// BFS labeling; component ids are dense from 0 in order of first discovery.
inline std::vector<NodeId> connected_components(const SparseGraph& g) {
  constexpr NodeId kUnvisited = static_cast<NodeId>(-1);
  std::vector<NodeId> component(g.num_nodes, kUnvisited);
  NodeId next_id = 0;
  std::queue<NodeId> frontier;
  for (std::size_t start = 0; start < g.num_nodes; ++start) {
    if (component[start] != kUnvisited) continue;
    component[start] = next_id;
    frontier.push(static_cast<NodeId>(start));
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop();
      for (NodeId v : g.row(u)) {
        if (component[v] == kUnvisited) {
          component[v] = next_id;
          frontier.push(v);
        }
      }
    }
    ++next_id;
  }
  return component;
}

inline std::size_t count_components(const SparseGraph& g) {
  const auto comp = connected_components(g);
  NodeId max_id = 0;
  for (NodeId c : comp) max_id = std::max(max_id, c);
  return g.num_nodes == 0 ? 0 : static_cast<std::size_t>(max_id) + 1;
}

enum class Split : std::uint8_t { train, val, test };

constexpr int kUnknownLabel = -1;

/// Per-node integer class labels plus a train/val/test partition.
struct LabelSet {
  std::vector<int> labels;   // kUnknownLabel where unknown
  std::vector<Split> split;

  std::size_t num_nodes() const { return labels.size(); }

  bool is_known(std::size_t u) const { return labels[u] != kUnknownLabel; }

  std::vector<NodeId> nodes_in(Split s) const {
    std::vector<NodeId> out;
    for (std::size_t u = 0; u < split.size(); ++u)
      if (split[u] == s) out.push_back(static_cast<NodeId>(u));
    return out;
  }

  int num_classes() const {
    int top = -1;
    for (int l : labels) top = std::max(top, l);
    return top + 1;
  }
};

/// Edge homophily: fraction of edges whose endpoints share a label. Edges
/// incident to unknown-label nodes are excluded from both counts; if nothing
/// remains the index is vacuously 1.
inline double homophily_index(const SparseGraph& g, const LabelSet& labels) {
  if (labels.labels.size() != g.num_nodes)
    throw InputError("homophily_index: label count does not match node count");
  std::size_t countable = 0;
  std::size_t same = 0;
  for (std::size_t u = 0; u < g.num_nodes; ++u) {
    if (!labels.is_known(u)) continue;
    for (NodeId v : g.row(u)) {
      if (v <= u || !labels.is_known(v)) continue;
      ++countable;
      if (labels.labels[u] == labels.labels[v]) ++same;
    }
  }
  if (countable == 0) return 1.0;
  return static_cast<double>(same) / static_cast<double>(countable);
}

} // namespace ddfi
