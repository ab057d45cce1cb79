#pragma once

#include <vector>

#include "swarm/q_network.hpp"

namespace swarm {

struct MlpConfig {
  std::vector<int> hidden = {64, 64};

  void validate() const;
};

/// Graph-free ablation: the observer's own normalized feature row through a
/// ReLU MLP. No other node, edge, or attention term is read.
class MlpPolicy final : public QNetwork {
 public:
  explicit MlpPolicy(MlpConfig config = {});

  std::string kind() const override { return "mlp"; }
  ad::ParamStore init_params(std::uint64_t seed) const override;
  ad::Var forward(ad::Tape& tape, const ad::ParamStore& params,
                  const GraphBatch& batch) const override;
  std::map<std::string, std::string> describe() const override;
  std::unique_ptr<QNetwork> clone() const override;

  const MlpConfig& config() const { return config_; }

 private:
  MlpConfig config_;
};

}  // namespace swarm
