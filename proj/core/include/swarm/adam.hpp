#pragma once

#include <cstdint>
#include <vector>

#include "swarm/param_store.hpp"

namespace swarm::ad {

struct AdamConfig {
  double lr = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moments are shaped like the parameters they
/// were created for.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const ParamStore& params, AdamConfig config);

  /// Applies one update from params' gradients, then zeroes them.
  void step(ParamStore& params);

  const AdamConfig& config() const { return config_; }
  std::int64_t step_count() const { return steps_; }

 private:
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t steps_ = 0;
};

}  // namespace swarm::ad
