#include "swarm/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace swarm::ad {

AdamState::AdamState(const ParamStore& params, AdamConfig config) : config_(config) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_.emplace_back(params.value(i).rows(), params.value(i).cols());
    v_.emplace_back(params.value(i).rows(), params.value(i).cols());
  }
}

void AdamState::step(ParamStore& params) {
  if (params.size() != m_.size()) throw std::invalid_argument("adam: parameter count changed");
  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params.value(i).values();
    auto g = params.grad(i).values();
    auto m = m_[i].values();
    auto v = v_[i].values();
    if (g.size() != w.size() || m.size() != w.size()) {
      throw std::invalid_argument("adam: missing or misshapen gradient for " + params.name(i));
    }
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
      v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      w[j] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
      g[j] = 0.0;
    }
  }
}

}  // namespace swarm::ad
