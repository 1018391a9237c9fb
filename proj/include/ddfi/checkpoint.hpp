#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "ddfi/config.hpp"
#include "ddfi/mae.hpp"

namespace ddfi {

// Model checkpoints are versioned JSON: dims, the layer list with row-major
// weight payloads, and the full run config for provenance.

constexpr int kCheckpointVersion = 1;

namespace detail {

inline nlohmann::json layer_to_json(const GcnLayer& layer) {
  return nlohmann::json{
      {"in_dim", layer.in_dim()},
      {"out_dim", layer.out_dim()},
      {"activation", layer.activation == Activation::relu ? "relu" : "linear"},
      {"weight", layer.weight.data},
      {"bias", layer.bias},
  };
}

inline GcnLayer layer_from_json(const nlohmann::json& j) {
  GcnLayer layer;
  const auto in_dim = j.at("in_dim").get<std::size_t>();
  const auto out_dim = j.at("out_dim").get<std::size_t>();
  layer.weight = Matrix(in_dim, out_dim);
  layer.weight.data = j.at("weight").get<std::vector<double>>();
  if (layer.weight.data.size() != in_dim * out_dim)
    throw InputError("checkpoint: weight payload does not match dims");
  layer.bias = j.at("bias").get<std::vector<double>>();
  if (layer.bias.size() != out_dim)
    throw InputError("checkpoint: bias payload does not match dims");
  const auto act = j.at("activation").get<std::string>();
  if (act == "relu") layer.activation = Activation::relu;
  else if (act == "linear") layer.activation = Activation::linear;
  else throw InputError("checkpoint: unknown activation '" + act + "'");
  return layer;
}

} // namespace detail

inline void save_checkpoint(const std::string& path, const AutoencoderParams& params,
                            const RunConfig& config) {
  nlohmann::json j{
      {"format", "ddfi-checkpoint"},
      {"version", kCheckpointVersion},
      {"feature_dim", params.feature_dim()},
      {"hidden_dim", params.hidden_dim},
      {"latent_dim", params.latent_dim},
      {"config", to_json(config)},
  };
  for (const auto& l : params.encoder) j["encoder"].push_back(detail::layer_to_json(l));
  for (const auto& l : params.decoder) j["decoder"].push_back(detail::layer_to_json(l));
  auto out = detail::open_output(path);
  out << j.dump(2) << '\n';
}

struct Checkpoint {
  AutoencoderParams params;
  RunConfig config;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("checkpoint '" + path + "': " + e.what());
  }
  if (j.value("format", "") != "ddfi-checkpoint")
    throw InputError("checkpoint '" + path + "': not a ddfi checkpoint");
  if (j.value("version", -1) != kCheckpointVersion)
    throw InputError("checkpoint '" + path + "': unsupported version");
  Checkpoint cp;
  cp.params.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  cp.params.latent_dim = j.at("latent_dim").get<std::size_t>();
  for (const auto& lj : j.at("encoder")) cp.params.encoder.push_back(detail::layer_from_json(lj));
  for (const auto& lj : j.at("decoder")) cp.params.decoder.push_back(detail::layer_from_json(lj));
  if (cp.params.encoder.empty() || cp.params.decoder.empty())
    throw InputError("checkpoint '" + path + "': empty layer stack");
  cp.config = config_from_json(j.at("config"));
  return cp;
}

} // namespace ddfi
