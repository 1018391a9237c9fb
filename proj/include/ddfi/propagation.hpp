#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include "ddfi/features.hpp"
#include "ddfi/graph.hpp"
#include "ddfi/matrix.hpp"

namespace ddfi {

struct FpConfig {
  int max_iters = 40;
  double tolerance = 1e-6; // max-abs change; 0 disables early stop

  void validate() const {
    if (max_iters < 1) throw InputError("fp config: max_iters must be >= 1");
    if (tolerance < 0.0) throw InputError("fp config: tolerance must be >= 0");
  }
};

struct PropagationResult {
  Matrix values;
  int iterations = 0;
  std::vector<double> max_abs_delta; // one entry per iteration
};

/// Iterative feature diffusion: unknown entries start at 0, each step applies
/// the normalized adjacency and then resets known entries to their original
/// values. Known entries of the output equal the input bit-exactly; unknown
/// entries of isolated nodes stay 0.
inline PropagationResult propagate(const FeatureTable& x, const NormalizedAdjacency& adj,
                                   const FpConfig& cfg) {
  cfg.validate();
  if (x.num_nodes() != adj.num_nodes)
    throw InputError("propagate: feature rows do not match node count");

  PropagationResult res;
  res.values = x.values; // unknown entries already hold the 0 sentinel
  res.max_abs_delta.reserve(static_cast<std::size_t>(cfg.max_iters));

  for (int it = 0; it < cfg.max_iters; ++it) {
    Matrix next = spmm(adj, res.values);
    // Reset known features.
    double delta = 0.0;
    for (std::size_t i = 0; i < next.data.size(); ++i) {
      if (x.known[i]) next.data[i] = x.values.data[i];
      delta = std::max(delta, std::abs(next.data[i] - res.values.data[i]));
    }
    res.values = std::move(next);
    res.max_abs_delta.push_back(delta);
    res.iterations = it + 1;
    if (cfg.tolerance > 0.0 && delta < cfg.tolerance) break;
  }
  return res;
}

/// Normalized-Laplacian quadratic form:
///   1/2 * sum over undirected edges (u,v) of ||x_u/sqrt(d_u) - x_v/sqrt(d_v)||^2.
/// Degrees come from the adjacency's sparsity pattern, so edge endpoints
/// always have d >= 1.
inline double dirichlet_energy(const Matrix& x, const NormalizedAdjacency& adj) {
  if (x.rows != adj.num_nodes)
    throw InputError("dirichlet_energy: matrix rows do not match node count");
  std::vector<double> inv_sqrt_deg(adj.num_nodes, 0.0);
  for (std::size_t u = 0; u < adj.num_nodes; ++u)
    if (adj.degree(u) > 0)
      inv_sqrt_deg[u] = 1.0 / std::sqrt(static_cast<double>(adj.degree(u)));

  double energy = 0.0;
  for (std::size_t u = 0; u < adj.num_nodes; ++u) {
    for (NodeId v : adj.row(u)) {
      if (v <= u) continue;
      double edge_term = 0.0;
      for (std::size_t c = 0; c < x.cols; ++c) {
        const double d = x(u, c) * inv_sqrt_deg[u] - x(v, c) * inv_sqrt_deg[v];
        edge_term += d * d;
      }
      energy += edge_term;
    }
  }
  return 0.5 * energy;
}

} // namespace ddfi
