#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddfi/cll.hpp"
#include "ddfi/eval.hpp"
#include "ddfi/features.hpp"
#include "ddfi/mae.hpp"
#include "ddfi/matrix.hpp"
#include "ddfi/propagation.hpp"

namespace ddfi {

inline const char* kVersion = "0.1.0";

/// Every tunable of the pipeline in one flat record. Unknown keys in a config
/// file are rejected and all per-module invariants are checked up front,
/// before any computation or file write.
struct RunConfig {
  // feature propagation
  int fp_max_iters = 40;
  double fp_tol = 1e-6;
  // co-label linking
  bool cll_enabled = true;
  std::size_t cll_k = 20;
  double cll_tau = 1.0;
  std::size_t cll_m = 0; // 0 = all other train nodes
  std::string cll_sim = "one";       // one | cosine
  std::string cll_sim_input = "fp";  // raw | fp (features fed to sim())
  // autoencoder
  int epochs = 300;
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  std::size_t hidden_dim = 64;
  std::size_t latent_dim = 32;
  double sce_gamma = 2.0;
  double mask_rate = 0.5;
  double drop_rate = 0.1;
  bool soft_mask = false;
  // inference
  bool two_step = true; // false = one-step ablation (encoder on FP features)
  // evaluation
  int eval_bins = 64;
  int probe_iters = 500;
  double probe_lr = 0.5;
  double probe_l2 = 1e-4;
  // benchmark
  std::string mode = "transductive"; // transductive | inductive
  std::string missing_type = "uniform"; // uniform | structural
  double missing_rate = 0.9;
  int num_seeds = 5;
  bool link_pred = true;
  double link_val_frac = 0.05;
  double link_test_frac = 0.1;
  // synthetic dataset
  std::size_t synth_nodes = 1500;
  int synth_classes = 3;
  double synth_p_in = 0.02;
  double synth_p_out = 0.002;
  std::size_t synth_dim = 64;
  double synth_class_mean_scale = 1.0;
  double synth_noise_sigma = 0.5;
  // master seed
  std::uint64_t seed = 1;

  FpConfig fp_config() const { return {fp_max_iters, fp_tol}; }

  CllConfig cll_config(std::uint64_t run_seed) const {
    CllConfig c;
    c.k = cll_k;
    c.tau = cll_tau;
    c.candidate_size = cll_m;
    c.similarity = cll_sim == "cosine" ? Similarity::cosine : Similarity::constant_one;
    c.seed = run_seed;
    return c;
  }

  TrainConfig train_config(std::uint64_t run_seed) const {
    TrainConfig t;
    t.epochs = epochs;
    t.learning_rate = learning_rate;
    t.mask_rate = mask_rate;
    t.edge_drop_rate = drop_rate;
    t.sce_gamma = sce_gamma;
    t.weight_decay = weight_decay;
    t.hidden_dim = hidden_dim;
    t.latent_dim = latent_dim;
    t.soft_mask = soft_mask;
    t.seed = run_seed;
    return t;
  }

  ProbeConfig probe_config() const { return {probe_iters, probe_lr, probe_l2, seed}; }

  SyntheticSpec synthetic_spec(std::uint64_t run_seed) const {
    SyntheticSpec s;
    s.num_nodes = synth_nodes;
    s.num_classes = synth_classes;
    s.p_in = synth_p_in;
    s.p_out = synth_p_out;
    s.feature_dim = synth_dim;
    s.class_mean_scale = synth_class_mean_scale;
    s.noise_sigma = synth_noise_sigma;
    s.seed = run_seed;
    return s;
  }

  void validate() const {
    fp_config().validate();
    CllConfig cc = cll_config(0);
    cc.validate(synth_nodes);
    train_config(0).validate();
    probe_config().validate();
    synthetic_spec(0).validate();
    if (cll_sim != "one" && cll_sim != "cosine")
      throw InputError("config: cll_sim must be 'one' or 'cosine'");
    if (cll_sim_input != "raw" && cll_sim_input != "fp")
      throw InputError("config: cll_sim_input must be 'raw' or 'fp'");
    if (mode != "transductive" && mode != "inductive")
      throw InputError("config: mode must be 'transductive' or 'inductive'");
    if (missing_type != "uniform" && missing_type != "structural")
      throw InputError("config: missing_type must be 'uniform' or 'structural'");
    if (!(missing_rate >= 0.0 && missing_rate < 1.0))
      throw InputError("config: missing_rate must be in [0, 1)");
    if (num_seeds < 1) throw InputError("config: num_seeds must be >= 1");
    if (eval_bins < 1) throw InputError("config: eval_bins must be >= 1");
    if (link_val_frac < 0.0 || link_test_frac < 0.0 ||
        link_val_frac + link_test_frac >= 1.0)
      throw InputError("config: link fractions must be >= 0 and sum below 1");
  }
};

namespace detail {

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace detail

inline nlohmann::json to_json(const RunConfig& c) {
  return nlohmann::json{
      {"fp_max_iters", c.fp_max_iters},
      {"fp_tol", c.fp_tol},
      {"cll_enabled", c.cll_enabled},
      {"cll_k", c.cll_k},
      {"cll_tau", c.cll_tau},
      {"cll_m", c.cll_m},
      {"cll_sim", c.cll_sim},
      {"cll_sim_input", c.cll_sim_input},
      {"epochs", c.epochs},
      {"learning_rate", c.learning_rate},
      {"weight_decay", c.weight_decay},
      {"hidden_dim", c.hidden_dim},
      {"latent_dim", c.latent_dim},
      {"sce_gamma", c.sce_gamma},
      {"mask_rate", c.mask_rate},
      {"drop_rate", c.drop_rate},
      {"soft_mask", c.soft_mask},
      {"two_step", c.two_step},
      {"eval_bins", c.eval_bins},
      {"probe_iters", c.probe_iters},
      {"probe_lr", c.probe_lr},
      {"probe_l2", c.probe_l2},
      {"mode", c.mode},
      {"missing_type", c.missing_type},
      {"missing_rate", c.missing_rate},
      {"num_seeds", c.num_seeds},
      {"link_pred", c.link_pred},
      {"link_val_frac", c.link_val_frac},
      {"link_test_frac", c.link_test_frac},
      {"synth_nodes", c.synth_nodes},
      {"synth_classes", c.synth_classes},
      {"synth_p_in", c.synth_p_in},
      {"synth_p_out", c.synth_p_out},
      {"synth_dim", c.synth_dim},
      {"synth_class_mean_scale", c.synth_class_mean_scale},
      {"synth_noise_sigma", c.synth_noise_sigma},
      {"seed", c.seed},
  };
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  const nlohmann::json known = to_json(RunConfig{});
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.contains(key)) throw InputError("config: unknown key '" + key + "'");
  }
  RunConfig c;
  detail::read_key(j, "fp_max_iters", c.fp_max_iters);
  detail::read_key(j, "fp_tol", c.fp_tol);
  detail::read_key(j, "cll_enabled", c.cll_enabled);
  detail::read_key(j, "cll_k", c.cll_k);
  detail::read_key(j, "cll_tau", c.cll_tau);
  detail::read_key(j, "cll_m", c.cll_m);
  detail::read_key(j, "cll_sim", c.cll_sim);
  detail::read_key(j, "cll_sim_input", c.cll_sim_input);
  detail::read_key(j, "epochs", c.epochs);
  detail::read_key(j, "learning_rate", c.learning_rate);
  detail::read_key(j, "weight_decay", c.weight_decay);
  detail::read_key(j, "hidden_dim", c.hidden_dim);
  detail::read_key(j, "latent_dim", c.latent_dim);
  detail::read_key(j, "sce_gamma", c.sce_gamma);
  detail::read_key(j, "mask_rate", c.mask_rate);
  detail::read_key(j, "drop_rate", c.drop_rate);
  detail::read_key(j, "soft_mask", c.soft_mask);
  detail::read_key(j, "two_step", c.two_step);
  detail::read_key(j, "eval_bins", c.eval_bins);
  detail::read_key(j, "probe_iters", c.probe_iters);
  detail::read_key(j, "probe_lr", c.probe_lr);
  detail::read_key(j, "probe_l2", c.probe_l2);
  detail::read_key(j, "mode", c.mode);
  detail::read_key(j, "missing_type", c.missing_type);
  detail::read_key(j, "missing_rate", c.missing_rate);
  detail::read_key(j, "num_seeds", c.num_seeds);
  detail::read_key(j, "link_pred", c.link_pred);
  detail::read_key(j, "link_val_frac", c.link_val_frac);
  detail::read_key(j, "link_test_frac", c.link_test_frac);
  detail::read_key(j, "synth_nodes", c.synth_nodes);
  detail::read_key(j, "synth_classes", c.synth_classes);
  detail::read_key(j, "synth_p_in", c.synth_p_in);
  detail::read_key(j, "synth_p_out", c.synth_p_out);
  detail::read_key(j, "synth_dim", c.synth_dim);
  detail::read_key(j, "synth_class_mean_scale", c.synth_class_mean_scale);
  detail::read_key(j, "synth_noise_sigma", c.synth_noise_sigma);
  detail::read_key(j, "seed", c.seed);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

/// FNV-1a over the canonical (key-sorted) JSON dump; stable across runs.
inline std::string config_hash(const RunConfig& c) {
  const std::string dump = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

} // namespace ddfi
