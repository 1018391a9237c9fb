#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ddfi/features.hpp"
#include "ddfi/graph.hpp"
#include "ddfi/mae.hpp"
#include "ddfi/matrix.hpp"
#include "ddfi/propagation.hpp"
#include "ddfi/rng.hpp"

namespace ddfi {

struct Embedding {
  Matrix matrix;
  std::string provenance;
};

struct TwoStepResult {
  Matrix reconstructed; // step 1: Decoder(Encoder(FP(X, A)))
  Embedding embedding;  // step 2: Encoder(reconstructed)
};

/// Two-step inference on the full graph: reconstruct the FP-imputed features
/// through the whole encoder-decoder, then re-encode the reconstruction with
/// the same encoder to get the final embedding. No CLL, no edge drop, no
/// masking at inference time.
inline TwoStepResult two_step_infer(const AutoencoderParams& params, const SparseGraph& g,
                                    const FeatureTable& x, const FpConfig& fp_cfg) {
  if (x.dim() != params.feature_dim())
    throw InputError("two_step_infer: feature dim does not match checkpoint");
  if (x.num_nodes() != g.num_nodes)
    throw InputError("two_step_infer: features do not match graph");
  const Matrix imputed = propagate(x, normalized_adjacency(g), fp_cfg).values;
  const NormalizedAdjacency adj_sl = self_loop_adjacency(g);
  TwoStepResult res;
  res.reconstructed = autoencoder_forward(params, adj_sl, imputed);
  res.embedding.matrix = encoder_forward(params, adj_sl, res.reconstructed);
  res.embedding.provenance = "two_step";
  return res;
}

/// Encoder(FP(X, A)) without the reconstruction pass; the ablation baseline.
inline Embedding one_step_infer(const AutoencoderParams& params, const SparseGraph& g,
                                const FeatureTable& x, const FpConfig& fp_cfg) {
  if (x.dim() != params.feature_dim())
    throw InputError("one_step_infer: feature dim does not match checkpoint");
  const Matrix imputed = propagate(x, normalized_adjacency(g), fp_cfg).values;
  Embedding emb;
  emb.matrix = encoder_forward(params, self_loop_adjacency(g), imputed);
  emb.provenance = "one_step";
  return emb;
}

/// Mean average cosine distance over all ordered pairs of distinct rows.
/// Zero-norm rows are excluded from both roles; all-zero input is an error.
/// Range [0, 2]; smaller means the representation has collapsed.
inline double mad(const Matrix& rep) {
  if (rep.rows < 2) throw InputError("mad: need at least 2 rows");
  std::vector<std::size_t> live;
  std::vector<double> inv_norm(rep.rows, 0.0);
  for (std::size_t i = 0; i < rep.rows; ++i) {
    const double n = norm2(rep.row(i));
    if (n > 0.0) {
      live.push_back(i);
      inv_norm[i] = 1.0 / n;
    }
  }
  if (live.size() < 2) throw NumericError("mad: fewer than 2 nonzero-norm rows");
  double total = 0.0;
  for (std::size_t a = 0; a < live.size(); ++a) {
    const std::size_t i = live[a];
    double row_sum = 0.0;
    for (std::size_t b = 0; b < live.size(); ++b) {
      if (a == b) continue;
      const std::size_t j = live[b];
      const double cos = dot(rep.row(i), rep.row(j)) * inv_norm[i] * inv_norm[j];
      row_sum += 1.0 - cos;
    }
    total += row_sum / static_cast<double>(live.size() - 1);
  }
  return total / static_cast<double>(live.size());
}

struct ShiftReport {
  double delta = 0.0;
  int bins = 0;
  std::string method = "binned_kl";
};

/// Per-dimension binned KL divergence KL(P_full || P_train), averaged over
/// dimensions. Both columns are histogrammed over their combined min/max
/// range; every bin gets +1e-8 smoothing before normalization. A dimension
/// whose combined range is a single point contributes 0.
inline ShiftReport distribution_shift(const Matrix& rep_train, const Matrix& rep_full, int bins) {
  if (rep_train.cols != rep_full.cols)
    throw InputError("distribution_shift: representations differ in width");
  if (bins < 1) throw InputError("distribution_shift: bins must be >= 1");
  if (rep_train.rows == 0 || rep_full.rows == 0)
    throw InputError("distribution_shift: empty representation");

  constexpr double kSmoothing = 1e-8;
  double total = 0.0;
  std::vector<double> h_train(static_cast<std::size_t>(bins));
  std::vector<double> h_full(static_cast<std::size_t>(bins));
  for (std::size_t d = 0; d < rep_train.cols; ++d) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rep_train.rows; ++r) {
      lo = std::min(lo, rep_train(r, d));
      hi = std::max(hi, rep_train(r, d));
    }
    for (std::size_t r = 0; r < rep_full.rows; ++r) {
      lo = std::min(lo, rep_full(r, d));
      hi = std::max(hi, rep_full(r, d));
    }
    if (!(hi > lo)) continue; // degenerate constant column

    const double width = (hi - lo) / bins;
    auto bin_of = [&](double v) {
      auto b = static_cast<std::ptrdiff_t>((v - lo) / width);
      return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(b, 0, bins - 1));
    };
    std::fill(h_train.begin(), h_train.end(), kSmoothing);
    std::fill(h_full.begin(), h_full.end(), kSmoothing);
    for (std::size_t r = 0; r < rep_train.rows; ++r) h_train[bin_of(rep_train(r, d))] += 1.0;
    for (std::size_t r = 0; r < rep_full.rows; ++r) h_full[bin_of(rep_full(r, d))] += 1.0;
    double z_train = 0.0, z_full = 0.0;
    for (int b = 0; b < bins; ++b) {
      z_train += h_train[static_cast<std::size_t>(b)];
      z_full += h_full[static_cast<std::size_t>(b)];
    }
    double kl = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double p = h_full[static_cast<std::size_t>(b)] / z_full;
      const double q = h_train[static_cast<std::size_t>(b)] / z_train;
      kl += p * std::log(p / q);
    }
    total += kl;
  }
  ShiftReport report;
  report.delta = total / static_cast<double>(rep_train.cols);
  report.bins = bins;
  return report;
}

struct ProbeConfig {
  int iterations = 500;
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::uint64_t seed = 0; // kept for interface uniformity; zero init makes
                          // the probe deterministic regardless

  void validate() const {
    if (iterations < 1) throw InputError("probe config: iterations must be >= 1");
    if (!(learning_rate > 0.0)) throw InputError("probe config: learning_rate must be > 0");
    if (l2 < 0.0) throw InputError("probe config: l2 must be >= 0");
  }
};

/// Multinomial logistic regression on frozen rows: full-batch gradient
/// descent from zero init on the train split, accuracy on the test split.
inline double linear_probe(const Matrix& z, const LabelSet& labels, const ProbeConfig& cfg) {
  cfg.validate();
  if (labels.num_nodes() != z.rows)
    throw InputError("linear_probe: label count does not match rows");

  std::vector<std::size_t> train_rows;
  std::set<int> train_classes;
  for (std::size_t i = 0; i < z.rows; ++i) {
    if (labels.split[i] == Split::train) {
      if (!labels.is_known(i)) throw InputError("linear_probe: train node without label");
      train_rows.push_back(i);
      train_classes.insert(labels.labels[i]);
    }
  }
  if (train_rows.empty()) throw InputError("linear_probe: empty train split");
  if (train_classes.size() < 2)
    throw InputError("linear_probe: train split has a single class");
  const int num_classes = labels.num_classes();

  const std::size_t dim = z.cols;
  Matrix w(dim, static_cast<std::size_t>(num_classes));
  std::vector<double> b(static_cast<std::size_t>(num_classes), 0.0);
  const double inv_n = 1.0 / static_cast<double>(train_rows.size());

  std::vector<double> logits(static_cast<std::size_t>(num_classes));
  Matrix dw(dim, static_cast<std::size_t>(num_classes));
  std::vector<double> db(static_cast<std::size_t>(num_classes));
  for (int it = 0; it < cfg.iterations; ++it) {
    std::fill(dw.data.begin(), dw.data.end(), 0.0);
    std::fill(db.begin(), db.end(), 0.0);
    for (const std::size_t r : train_rows) {
      const auto row = z.row(r);
      double top = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < num_classes; ++c) {
        double acc = b[static_cast<std::size_t>(c)];
        for (std::size_t d = 0; d < dim; ++d) acc += row[d] * w(d, static_cast<std::size_t>(c));
        logits[static_cast<std::size_t>(c)] = acc;
        top = std::max(top, acc);
      }
      double zsum = 0.0;
      for (int c = 0; c < num_classes; ++c) {
        logits[static_cast<std::size_t>(c)] = std::exp(logits[static_cast<std::size_t>(c)] - top);
        zsum += logits[static_cast<std::size_t>(c)];
      }
      for (int c = 0; c < num_classes; ++c) {
        const double p = logits[static_cast<std::size_t>(c)] / zsum;
        const double err = (p - (labels.labels[r] == c ? 1.0 : 0.0)) * inv_n;
        db[static_cast<std::size_t>(c)] += err;
        for (std::size_t d = 0; d < dim; ++d) dw(d, static_cast<std::size_t>(c)) += err * row[d];
      }
    }
    for (std::size_t i = 0; i < w.data.size(); ++i)
      w.data[i] -= cfg.learning_rate * (dw.data[i] + cfg.l2 * w.data[i]);
    for (int c = 0; c < num_classes; ++c)
      b[static_cast<std::size_t>(c)] -= cfg.learning_rate * db[static_cast<std::size_t>(c)];
  }

  std::size_t correct = 0;
  std::size_t counted = 0;
  for (std::size_t r = 0; r < z.rows; ++r) {
    if (labels.split[r] != Split::test || !labels.is_known(r)) continue;
    const auto row = z.row(r);
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < num_classes; ++c) {
      double acc = b[static_cast<std::size_t>(c)];
      for (std::size_t d = 0; d < dim; ++d) acc += row[d] * w(d, static_cast<std::size_t>(c));
      if (acc > best_score) {
        best_score = acc;
        best = c;
      }
    }
    ++counted;
    if (best == labels.labels[r]) ++correct;
  }
  if (counted == 0) throw InputError("linear_probe: empty test split");
  return static_cast<double>(correct) / static_cast<double>(counted);
}

struct LinkEvalResult {
  double auc = 0.0;
  double ap = 0.0;
};

namespace detail {

/// AUC by the Mann-Whitney rank statistic with tie-averaged ranks.
inline double rank_auc(const std::vector<double>& scores, const std::vector<int>& is_pos) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = avg;
    i = j + 1;
  }
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (is_pos[t]) {
      pos_rank_sum += rank[t];
      ++n_pos;
    }
  }
  const std::size_t n_neg = n - n_pos;
  return (pos_rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// Average precision by precision-recall summation over distinct score
/// thresholds (ties grouped).
inline double average_precision(const std::vector<double>& scores, const std::vector<int>& is_pos) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t n_pos = 0;
  for (int p : is_pos) n_pos += static_cast<std::size_t>(p);
  double ap = 0.0;
  std::size_t tp = 0, fp = 0, prev_tp = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) {
      if (is_pos[order[t]]) ++tp;
      else ++fp;
    }
    if (tp > prev_tp) {
      const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      const double delta_recall =
          static_cast<double>(tp - prev_tp) / static_cast<double>(n_pos);
      ap += precision * delta_recall;
      prev_tp = tp;
    }
    i = j + 1;
  }
  return ap;
}

} // namespace detail

/// Scores pairs by sigmoid(z_u . z_v) and reports ranking metrics on the
/// positive-vs-negative separation.
inline LinkEvalResult link_pred_eval(const Matrix& z, std::span<const EdgePair> pos,
                                     std::span<const EdgePair> neg) {
  if (pos.empty() || neg.empty())
    throw InputError("link_pred_eval: positive and negative sets must be nonempty");
  std::vector<double> scores;
  std::vector<int> is_pos;
  scores.reserve(pos.size() + neg.size());
  is_pos.reserve(pos.size() + neg.size());
  auto score = [&z](const EdgePair& e) {
    return sigmoid(dot(z.row(e.first), z.row(e.second)));
  };
  for (const auto& e : pos) {
    if (e.first >= z.rows || e.second >= z.rows)
      throw InputError("link_pred_eval: edge endpoint out of range");
    scores.push_back(score(e));
    is_pos.push_back(1);
  }
  for (const auto& e : neg) {
    if (e.first >= z.rows || e.second >= z.rows)
      throw InputError("link_pred_eval: edge endpoint out of range");
    scores.push_back(score(e));
    is_pos.push_back(0);
  }
  return {detail::rank_auc(scores, is_pos), detail::average_precision(scores, is_pos)};
}

struct LinkSplit {
  SparseGraph train_graph;
  std::vector<EdgePair> val_pos, val_neg;
  std::vector<EdgePair> test_pos, test_neg;
};

/// Removes val_frac + test_frac of the undirected edges as held-out
/// positives and samples the same number of negatives from the complement of
/// the original graph (no duplicates, no self-loops). Deterministic.
inline LinkSplit holdout_link_split(const SparseGraph& g, double val_frac, double test_frac,
                                    std::uint64_t seed) {
  if (val_frac < 0.0 || test_frac < 0.0 || val_frac + test_frac >= 1.0)
    throw InputError("holdout_link_split: fractions must be >= 0 and sum below 1");
  std::vector<EdgePair> edges = g.undirected_edges();
  const auto n_val = static_cast<std::size_t>(std::floor(val_frac * static_cast<double>(edges.size())));
  const auto n_test = static_cast<std::size_t>(std::floor(test_frac * static_cast<double>(edges.size())));
  if ((val_frac > 0.0 && n_val == 0) || (test_frac > 0.0 && n_test == 0))
    throw InputError("holdout_link_split: graph too small for requested fractions");

  Rng rng(derive_seed(seed, seed_stream::kLinkHoldout));
  // Fisher-Yates prefix: first n_val + n_test edges become the holdout.
  for (std::size_t i = 0; i < n_val + n_test && i + 1 < edges.size(); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(edges.size() - i));
    std::swap(edges[i], edges[j]);
  }

  LinkSplit split;
  split.val_pos.assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.test_pos.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_val),
                        edges.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
  split.train_graph = build_graph(
      std::vector<EdgePair>(edges.begin() + static_cast<std::ptrdiff_t>(n_val + n_test), edges.end()),
      g.num_nodes);

  // Negatives: distinct non-edges of the original graph.
  const double max_pairs = static_cast<double>(g.num_nodes) *
                           (static_cast<double>(g.num_nodes) - 1.0) / 2.0;
  if (static_cast<double>(g.num_edges() + n_val + n_test) > max_pairs)
    throw InputError("holdout_link_split: not enough non-edges for negatives");
  std::set<EdgePair> taken;
  auto sample_negatives = [&](std::size_t count, std::vector<EdgePair>& out) {
    while (out.size() < count) {
      auto u = static_cast<NodeId>(rng.below(g.num_nodes));
      auto v = static_cast<NodeId>(rng.below(g.num_nodes));
      if (u == v) continue;
      if (u > v) std::swap(u, v);
      if (g.has_edge(u, v)) continue;
      if (!taken.insert({u, v}).second) continue;
      out.emplace_back(u, v);
    }
  };
  sample_negatives(n_val, split.val_neg);
  sample_negatives(n_test, split.test_neg);
  return split;
}

} // namespace ddfi
