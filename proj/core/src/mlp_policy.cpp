#include "swarm/mlp_policy.hpp"

#include <string>

namespace swarm {

void MlpConfig::validate() const {
  for (int h : hidden) {
    if (h < 1) throw ConfigError("MLP hidden sizes must be >= 1");
  }
}

MlpPolicy::MlpPolicy(MlpConfig config) : config_(std::move(config)) { config_.validate(); }

ad::ParamStore MlpPolicy::init_params(std::uint64_t seed) const {
  ad::ParamStore p;
  std::uint64_t s = seed * 1000003ULL + 17;
  int fan_in = kFeatureDim;
  for (std::size_t i = 0; i < config_.hidden.size(); ++i) {
    p.add_glorot("mlp.w" + std::to_string(i), fan_in, config_.hidden[i], ++s);
    p.add_zeros("mlp.b" + std::to_string(i), 1, config_.hidden[i]);
    fan_in = config_.hidden[i];
  }
  p.add_glorot("mlp.out.w", fan_in, kActionCount, ++s);
  p.add_zeros("mlp.out.b", 1, kActionCount);
  return p;
}

ad::Var MlpPolicy::forward(ad::Tape& tape, const ad::ParamStore& params,
                           const GraphBatch& batch) const {
  auto P = [&](const std::string& name) { return tape.param(params, params.index(name)); };
  ad::Var x = ad::gather_rows(tape, tape.constant(batch.features), batch.observer_rows);
  for (std::size_t i = 0; i < config_.hidden.size(); ++i) {
    const auto idx = std::to_string(i);
    x = ad::relu(tape, ad::affine(tape, x, P("mlp.w" + idx), P("mlp.b" + idx)));
  }
  return ad::affine(tape, x, P("mlp.out.w"), P("mlp.out.b"));
}

std::map<std::string, std::string> MlpPolicy::describe() const {
  std::string sizes;
  for (std::size_t i = 0; i < config_.hidden.size(); ++i) {
    sizes += (i == 0 ? "" : ",") + std::to_string(config_.hidden[i]);
  }
  return {{"policy", "mlp"}, {"mlp_hidden", sizes}};
}

std::unique_ptr<QNetwork> MlpPolicy::clone() const { return std::make_unique<MlpPolicy>(*this); }

}  // namespace swarm
