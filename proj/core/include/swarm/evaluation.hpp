#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "swarm/ego_graph.hpp"
#include "swarm/grid_world.hpp"
#include "swarm/param_store.hpp"
#include "swarm/q_network.hpp"

namespace swarm {

/// Chooses one action per agent from the shared environment state.
class JointPolicy {
 public:
  virtual ~JointPolicy() = default;
  virtual std::string name() const = 0;
  virtual std::vector<Action> act(const EnvState& env, std::mt19937_64& rng) = 0;
  virtual std::unique_ptr<JointPolicy> clone() const = 0;
};

using GraphProbe = std::function<void(const EgoGraph&)>;

/// Greedy (or epsilon-greedy) action selection from a Q network over each
/// agent's ego graph. Holds its own copy of the parameters.
class LearnedPolicy final : public JointPolicy {
 public:
  LearnedPolicy(std::shared_ptr<const QNetwork> net, ad::ParamStore params, GraphConfig gcfg,
                double epsilon = 0.0);

  std::string name() const override { return net_->kind(); }
  std::vector<Action> act(const EnvState& env, std::mt19937_64& rng) override;
  std::unique_ptr<JointPolicy> clone() const override;

  void set_probe(GraphProbe probe) { probe_ = std::move(probe); }

 private:
  std::shared_ptr<const QNetwork> net_;
  ad::ParamStore params_;
  GraphConfig gcfg_;
  double epsilon_;
  GraphProbe probe_;
};

struct EpisodeStats {
  double collection = 0.0;
  double coverage = 0.0;
  int steps = 0;
  bool all_collected = false;
  double episode_return = 0.0;
};

struct Summary {
  int episodes = 0;
  double collection_mean = 0.0;
  double collection_std = 0.0;
  double coverage_mean = 0.0;
  double coverage_std = 0.0;
  double steps_mean = 0.0;
  double steps_std = 0.0;
};

/// Deterministic per-episode seed stream.
std::uint64_t episode_seed(std::uint64_t base, std::uint64_t index);

EpisodeStats run_episode(JointPolicy& policy, const EnvConfig& config, std::mt19937_64& rng);

/// Runs `episodes` episodes with seeds episode_seed(base_seed, i). Results are
/// ordered by episode index regardless of `threads`.
std::vector<EpisodeStats> evaluate_policy(const JointPolicy& policy, EnvConfig config,
                                          int episodes, std::uint64_t base_seed, int threads = 1);

Summary summarize(const std::vector<EpisodeStats>& stats);

/// Worker count from SWARM_THREADS, else hardware concurrency (at least 1).
int default_threads();

}  // namespace swarm
