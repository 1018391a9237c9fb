#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ddfi/cll.hpp"
#include "ddfi/features.hpp"
#include "ddfi/graph.hpp"
#include "ddfi/matrix.hpp"
#include "ddfi/propagation.hpp"
#include "ddfi/rng.hpp"

namespace ddfi {

enum class Activation : std::uint8_t { relu, linear };

struct GcnLayer {
  Matrix weight; // in_dim x out_dim
  std::vector<double> bias;
  Activation activation = Activation::linear;

  std::size_t in_dim() const { return weight.rows; }
  std::size_t out_dim() const { return weight.cols; }
};

/// Encoder (2 layers: relu, linear) and decoder (1 linear layer). The
/// encoder maps feature_dim -> hidden -> latent; the decoder maps latent
/// back to feature_dim.
struct AutoencoderParams {
  std::vector<GcnLayer> encoder;
  std::vector<GcnLayer> decoder;
  std::size_t hidden_dim = 0;
  std::size_t latent_dim = 0;

  std::size_t feature_dim() const {
    return encoder.empty() ? 0 : encoder.front().in_dim();
  }
};

struct TrainConfig {
  int epochs = 300;
  double learning_rate = 1e-3;
  double mask_rate = 0.5;      // in (0, 1)
  double edge_drop_rate = 0.1; // in [0, 1)
  double sce_gamma = 2.0;      // >= 1
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 1e-5;
  std::size_t hidden_dim = 64;
  std::size_t latent_dim = 32;
  bool soft_mask = false; // multiplicative sigmoid mask instead of Bernoulli
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 0) throw InputError("train config: epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw InputError("train config: learning_rate must be > 0");
    if (!(mask_rate > 0.0 && mask_rate < 1.0))
      throw InputError("train config: mask_rate must be in (0, 1)");
    if (!(edge_drop_rate >= 0.0 && edge_drop_rate < 1.0))
      throw InputError("train config: edge_drop_rate must be in [0, 1)");
    if (!(sce_gamma >= 1.0)) throw InputError("train config: sce_gamma must be >= 1");
    if (hidden_dim == 0 || latent_dim == 0)
      throw InputError("train config: hidden_dim and latent_dim must be > 0");
    if (weight_decay < 0.0) throw InputError("train config: weight_decay must be >= 0");
  }
};

/// GCN renormalization: D_hat^{-1/2} (A + I) D_hat^{-1/2}, built once per
/// graph. Keeps isolated nodes representable (self-loop weight 1).
inline NormalizedAdjacency self_loop_adjacency(const SparseGraph& g) {
  NormalizedAdjacency adj;
  adj.num_nodes = g.num_nodes;
  adj.offsets.assign(g.num_nodes + 1, 0);
  std::vector<double> inv_sqrt_deg(g.num_nodes);
  for (std::size_t u = 0; u < g.num_nodes; ++u)
    inv_sqrt_deg[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(u) + 1));
  for (std::size_t u = 0; u < g.num_nodes; ++u)
    adj.offsets[u + 1] = adj.offsets[u] + g.degree(u) + 1;
  adj.neighbors.reserve(adj.offsets.back());
  adj.weights.reserve(adj.offsets.back());
  for (std::size_t u = 0; u < g.num_nodes; ++u) {
    bool self_inserted = false;
    for (NodeId v : g.row(u)) {
      if (!self_inserted && v > static_cast<NodeId>(u)) {
        adj.neighbors.push_back(static_cast<NodeId>(u));
        adj.weights.push_back(inv_sqrt_deg[u] * inv_sqrt_deg[u]);
        self_inserted = true;
      }
      adj.neighbors.push_back(v);
      adj.weights.push_back(inv_sqrt_deg[u] * inv_sqrt_deg[v]);
    }
    if (!self_inserted) {
      adj.neighbors.push_back(static_cast<NodeId>(u));
      adj.weights.push_back(inv_sqrt_deg[u] * inv_sqrt_deg[u]);
    }
  }
  return adj;
}

/// act(adj_sl * h * W + b). When `cache` is given, stores the aggregated
/// input and the layer output for the backward pass.
struct LayerCache {
  Matrix aggregated; // adj_sl * h
  Matrix output;     // post-activation
};

inline Matrix gcn_layer_forward(const GcnLayer& layer, const NormalizedAdjacency& adj_sl,
                                const Matrix& h, LayerCache* cache = nullptr) {
  if (h.cols != layer.in_dim())
    throw InputError("gcn_layer_forward: input width does not match layer");
  if (!all_finite(h))
    throw NumericError("gcn_layer_forward: non-finite values in layer input");
  Matrix agg = spmm(adj_sl, h);
  Matrix z = matmul(agg, layer.weight);
  for (std::size_t i = 0; i < z.rows; ++i)
    for (std::size_t j = 0; j < z.cols; ++j) z(i, j) += layer.bias[j];
  if (layer.activation == Activation::relu)
    for (double& v : z.data) v = v > 0.0 ? v : 0.0;
  if (cache) {
    cache->aggregated = std::move(agg);
    cache->output = z;
  }
  return z;
}

struct ForwardCache {
  Matrix input;
  std::vector<LayerCache> layers; // encoder layers then decoder layers
};

/// Full encoder->decoder pass on one adjacency.
inline Matrix autoencoder_forward(const AutoencoderParams& params,
                                  const NormalizedAdjacency& adj_sl, const Matrix& x,
                                  ForwardCache* cache = nullptr) {
  if (cache) {
    cache->input = x;
    cache->layers.clear();
  }
  Matrix h = x;
  for (const auto& layer : params.encoder) {
    LayerCache lc;
    h = gcn_layer_forward(layer, adj_sl, h, cache ? &lc : nullptr);
    if (cache) cache->layers.push_back(std::move(lc));
  }
  for (const auto& layer : params.decoder) {
    LayerCache lc;
    h = gcn_layer_forward(layer, adj_sl, h, cache ? &lc : nullptr);
    if (cache) cache->layers.push_back(std::move(lc));
  }
  return h;
}

/// Encoder-only pass (step 2 of inference, and the one-step ablation).
inline Matrix encoder_forward(const AutoencoderParams& params,
                              const NormalizedAdjacency& adj_sl, const Matrix& x) {
  Matrix h = x;
  for (const auto& layer : params.encoder) h = gcn_layer_forward(layer, adj_sl, h);
  return h;
}

/// Each undirected edge is removed independently with probability `rate`;
/// both directions go together.
inline SparseGraph drop_edges(const SparseGraph& g, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw InputError("drop_edges: rate must be in [0, 1)");
  if (rate == 0.0) return g;
  Rng rng(seed);
  std::vector<EdgePair> kept;
  for (const auto& e : g.undirected_edges())
    if (!rng.bernoulli(rate)) kept.push_back(e);
  return build_graph(kept, g.num_nodes);
}

struct MaskResult {
  Matrix values;
  std::vector<std::uint8_t> masked; // 1 where the entry was zeroed
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Gaussian-offset masking: per entry draw w ~ N(0,1), form the keep/mask
/// probability sigmoid(w + offset) with offset = log(rate / (1 - rate)), and
/// zero the entry where a Bernoulli draw at that probability fires. The
/// expected masked fraction equals `rate` at rate = 0.5 and tracks it closely
/// elsewhere. With `soft` the sigmoid is applied multiplicatively instead
/// (no entry is zeroed; `masked` stays all 0).
inline MaskResult gaussian_mask(const Matrix& x, double rate, std::uint64_t seed,
                                bool soft = false) {
  if (!(rate > 0.0 && rate < 1.0))
    throw InputError("gaussian_mask: rate must be strictly inside (0, 1)");
  const double offset = std::log(rate / (1.0 - rate));
  MaskResult res;
  res.values = x;
  res.masked.assign(x.data.size(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < res.values.data.size(); ++i) {
    const double p = sigmoid(rng.normal() + offset);
    if (soft) {
      res.values.data[i] *= p;
    } else if (rng.bernoulli(p)) {
      res.values.data[i] = 0.0;
      res.masked[i] = 1;
    }
  }
  return res;
}

namespace detail {

struct RowCosine {
  double cos = 0.0;
  double pred_norm = 0.0;
  double target_norm = 0.0;
  bool degenerate = false; // either row has zero norm
};

inline RowCosine row_cosine(std::span<const double> pred, std::span<const double> target) {
  RowCosine rc;
  rc.pred_norm = norm2(pred);
  rc.target_norm = norm2(target);
  if (rc.pred_norm == 0.0 || rc.target_norm == 0.0) {
    rc.degenerate = true; // treat cos as 0: contributes 1^gamma, zero gradient
    return rc;
  }
  rc.cos = dot(pred, target) / (rc.pred_norm * rc.target_norm);
  return rc;
}

} // namespace detail

/// Scaled cosine error: mean over rows of (1 - cos(pred_i, target_i))^gamma.
/// Zero-norm rows contribute (1 - 0)^gamma.
inline double sce_loss(const Matrix& pred, const Matrix& target, double gamma) {
  if (!pred.same_shape(target)) throw InputError("sce_loss: shape mismatch");
  if (pred.rows == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < pred.rows; ++i) {
    const auto rc = detail::row_cosine(pred.row(i), target.row(i));
    total += std::pow(1.0 - rc.cos, gamma);
  }
  return total / static_cast<double>(pred.rows);
}

/// Analytic gradient of sce_loss w.r.t. pred. Derivation per row:
///   d cos / d pred = target/(|p||t|) - cos * pred/|p|^2
///   d loss / d pred = -(gamma/n) (1 - cos)^(gamma-1) * d cos / d pred
/// Zero-norm rows get zero gradient (removable singularity).
inline Matrix sce_loss_grad(const Matrix& pred, const Matrix& target, double gamma) {
  if (!pred.same_shape(target)) throw InputError("sce_loss_grad: shape mismatch");
  Matrix grad(pred.rows, pred.cols);
  const double inv_n = pred.rows > 0 ? 1.0 / static_cast<double>(pred.rows) : 0.0;
  for (std::size_t i = 0; i < pred.rows; ++i) {
    const auto rc = detail::row_cosine(pred.row(i), target.row(i));
    if (rc.degenerate) continue;
    const double scale = -gamma * std::pow(1.0 - rc.cos, gamma - 1.0) * inv_n;
    const double pn2 = rc.pred_norm * rc.pred_norm;
    const double pt = rc.pred_norm * rc.target_norm;
    for (std::size_t c = 0; c < pred.cols; ++c)
      grad(i, c) = scale * (target(i, c) / pt - rc.cos * pred(i, c) / pn2);
  }
  return grad;
}

/// Parameter gradients, laid out as encoder layers then decoder layers.
struct Gradients {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;
};

/// Reverse-mode pass through the cached forward. `dout` is the loss gradient
/// w.r.t. the final output. Uses the symmetry of adj_sl for the input-side
/// chain.
inline Gradients backward(const AutoencoderParams& params, const NormalizedAdjacency& adj_sl,
                          const ForwardCache& cache, const Matrix& dout) {
  std::vector<const GcnLayer*> stack;
  for (const auto& l : params.encoder) stack.push_back(&l);
  for (const auto& l : params.decoder) stack.push_back(&l);
  if (cache.layers.size() != stack.size())
    throw InputError("backward: cache does not match parameter stack");

  Gradients grads;
  grads.weight.resize(stack.size());
  grads.bias.resize(stack.size());

  Matrix delta = dout; // gradient w.r.t. the current layer's output
  for (std::size_t li = stack.size(); li-- > 0;) {
    const GcnLayer& layer = *stack[li];
    const LayerCache& lc = cache.layers[li];

    if (layer.activation == Activation::relu)
      for (std::size_t i = 0; i < delta.data.size(); ++i)
        if (lc.output.data[i] <= 0.0) delta.data[i] = 0.0;

    grads.weight[li] = matmul_at_b(lc.aggregated, delta);
    grads.bias[li].assign(layer.out_dim(), 0.0);
    for (std::size_t i = 0; i < delta.rows; ++i)
      for (std::size_t j = 0; j < delta.cols; ++j) grads.bias[li][j] += delta(i, j);

    if (li > 0) {
      Matrix d_agg = matmul_a_bt(delta, layer.weight);
      delta = spmm(adj_sl, d_agg); // adj_sl is symmetric
    }
  }
  return grads;
}

/// Glorot-uniform initialization: U(-a, a) with a = sqrt(6/(fan_in+fan_out));
/// biases start at zero.
inline AutoencoderParams init_params(std::size_t feature_dim, const TrainConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, seed_stream::kParamInit));
  auto make_layer = [&rng](std::size_t in, std::size_t out, Activation act) {
    GcnLayer layer;
    layer.weight = Matrix(in, out);
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& v : layer.weight.data) v = (rng.uniform() * 2.0 - 1.0) * a;
    layer.bias.assign(out, 0.0);
    layer.activation = act;
    return layer;
  };
  AutoencoderParams params;
  params.hidden_dim = cfg.hidden_dim;
  params.latent_dim = cfg.latent_dim;
  params.encoder.push_back(make_layer(feature_dim, cfg.hidden_dim, Activation::relu));
  params.encoder.push_back(make_layer(cfg.hidden_dim, cfg.latent_dim, Activation::linear));
  params.decoder.push_back(make_layer(cfg.latent_dim, feature_dim, Activation::linear));
  return params;
}

/// Adam with decoupled-from-nothing classic L2: g += wd * theta before the
/// moment updates.
struct AdamState {
  std::vector<Matrix> m_w, v_w;
  std::vector<std::vector<double>> m_b, v_b;
  long step = 0;

  static AdamState like(const AutoencoderParams& params) {
    AdamState s;
    auto add = [&s](const GcnLayer& l) {
      s.m_w.emplace_back(l.weight.rows, l.weight.cols);
      s.v_w.emplace_back(l.weight.rows, l.weight.cols);
      s.m_b.emplace_back(l.bias.size(), 0.0);
      s.v_b.emplace_back(l.bias.size(), 0.0);
    };
    for (const auto& l : params.encoder) add(l);
    for (const auto& l : params.decoder) add(l);
    return s;
  }
};

inline void adam_update(AutoencoderParams& params, const Gradients& grads, AdamState& state,
                        const TrainConfig& cfg) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  std::vector<GcnLayer*> stack;
  for (auto& l : params.encoder) stack.push_back(&l);
  for (auto& l : params.decoder) stack.push_back(&l);
  for (std::size_t li = 0; li < stack.size(); ++li) {
    GcnLayer& layer = *stack[li];
    for (std::size_t i = 0; i < layer.weight.data.size(); ++i) {
      const double g = grads.weight[li].data[i] + cfg.weight_decay * layer.weight.data[i];
      double& m = state.m_w[li].data[i];
      double& v = state.v_w[li].data[i];
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
      layer.weight.data[i] -= cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + cfg.adam_eps);
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      const double g = grads.bias[li][i]; // no decay on biases
      double& m = state.m_b[li][i];
      double& v = state.v_b[li][i];
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
      layer.bias[i] -= cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + cfg.adam_eps);
    }
  }
}

struct TrainResult {
  AutoencoderParams params;
  std::vector<double> loss_trace;        // one entry per epoch
  Matrix reconstruction_target;          // X_r, fixed before the first epoch
  std::size_t cll_edges_added = 0;
};

/// Full training loop. Once, up front: the reconstruction target X_r is the
/// feature propagation of x_train over the (optionally CLL-augmented) train
/// graph. Then per epoch: drop edges, re-propagate on the dropped graph,
/// Gaussian-mask the result, run the autoencoder on the dropped graph's
/// self-loop adjacency, and take an Adam step on the scaled cosine error
/// against X_r. Serial and bit-deterministic for a fixed seed.
inline TrainResult train(const SparseGraph& g_train, const FeatureTable& x_train,
                         const LabelSet& labels, const std::optional<CllConfig>& cll_cfg,
                         const FpConfig& fp_cfg, const TrainConfig& cfg) {
  cfg.validate();
  fp_cfg.validate();
  if (x_train.num_nodes() != g_train.num_nodes)
    throw InputError("train: features do not match graph");

  TrainResult result;

  SparseGraph target_graph = g_train;
  if (cll_cfg) {
    CllResult cll = co_label_link(g_train, x_train.values, labels, *cll_cfg);
    target_graph = std::move(cll.graph);
    result.cll_edges_added = cll.edges_added;
  }
  result.reconstruction_target =
      propagate(x_train, normalized_adjacency(target_graph), fp_cfg).values;

  AutoencoderParams params = init_params(x_train.dim(), cfg);
  AdamState adam = AdamState::like(params);
  result.loss_trace.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const SparseGraph dropped =
        drop_edges(g_train, cfg.edge_drop_rate,
                   derive_seed(cfg.seed, seed_stream::kEdgeDrop, static_cast<std::uint64_t>(epoch)));
    const NormalizedAdjacency adj = normalized_adjacency(dropped);
    const Matrix diffused = propagate(x_train, adj, fp_cfg).values;
    const MaskResult masked =
        gaussian_mask(diffused, cfg.mask_rate,
                      derive_seed(cfg.seed, seed_stream::kGaussianMask,
                                  static_cast<std::uint64_t>(epoch)),
                      cfg.soft_mask);

    const NormalizedAdjacency adj_sl = self_loop_adjacency(dropped);
    ForwardCache cache;
    Matrix out;
    try {
      out = autoencoder_forward(params, adj_sl, masked.values, &cache);
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
    }

    const double loss = sce_loss(out, result.reconstruction_target, cfg.sce_gamma);
    if (!std::isfinite(loss))
      throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                         ": loss is not finite");
    result.loss_trace.push_back(loss);

    const Matrix dout = sce_loss_grad(out, result.reconstruction_target, cfg.sce_gamma);
    const Gradients grads = backward(params, adj_sl, cache, dout);
    adam_update(params, grads, adam, cfg);
  }

  result.params = std::move(params);
  return result;
}

} // namespace ddfi
