#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "swarm/adam.hpp"
#include "swarm/ego_graph.hpp"
#include "swarm/evaluation.hpp"
#include "swarm/grid_world.hpp"
#include "swarm/q_network.hpp"
#include "swarm/replay.hpp"

namespace swarm {

struct TrainConfig {
  std::int64_t total_steps = 250000;  // environment steps
  double gamma = 0.99;
  double lr = 0.0005;
  int batch = 64;
  int update_every = 4;
  double tau = 0.001;
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  /// Share of total_steps over which epsilon decays linearly.
  double epsilon_decay_fraction = 1.0;
  /// Transitions stored before the first update.
  std::int64_t warmup = 1000;
  std::int64_t eval_interval = 25000;
  int eval_episodes = 10;
  std::uint64_t seed = 1;
  ReplayConfig replay;
  double per_beta_start = 0.4;
  double per_beta_end = 1.0;

  void validate() const;
};

double epsilon_at(std::int64_t step, const TrainConfig& cfg);

/// Uniform random action with probability epsilon, else greedy_action(q).
Action select_action(std::span<const double> q, double epsilon, std::mt19937_64& rng);

/// y_i = r_i + gamma * Qtarget(s'_i, argmax_a Qonline(s'_i, a)), or r_i when terminal.
std::vector<double> double_dqn_targets(std::span<const double> rewards,
                                       std::span<const std::uint8_t> terminal,
                                       const ad::Matrix& next_online, const ad::Matrix& next_target,
                                       double gamma);

/// Evaluates both networks on the batch's next states and forms the targets.
std::vector<double> td_target(const QNetwork& net, const ad::ParamStore& online,
                              const ad::ParamStore& target,
                              std::span<const Transition* const> batch, double gamma);

struct LossResult {
  double loss = 0.0;
  std::vector<double> td_errors;  // y_i - Q(s_i, a_i)
};

/// mean_i w_i (y_i - Q(s_i, a_i; online))^2. Gradients are accumulated into
/// online's gradient buffers.
LossResult loss_and_grads(const QNetwork& net, ad::ParamStore& online,
                          std::span<const Transition* const> batch,
                          std::span<const double> targets, std::span<const double> weights);

struct MetricsRow {
  std::int64_t step = 0;
  std::int64_t episode = 0;
  double collection_fraction = 0.0;
  double coverage_fraction = 0.0;
  double steps_used = 0.0;
  double epsilon = 0.0;
  double loss_ma = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "step,episode,collection_fraction,coverage_fraction,steps_used,epsilon,loss_ma";
std::string format_metrics_row(const MetricsRow& row);

struct TrainHooks {
  /// Called on every ego graph the trainer builds.
  GraphProbe graph_probe;
  /// Called after each periodic evaluation with the current online params.
  std::function<void(const MetricsRow&, const ad::ParamStore&)> on_eval;
};

struct TrainResult {
  ad::ParamStore params;
  std::vector<MetricsRow> log;
  std::int64_t updates = 0;
  std::int64_t episodes = 0;
};

/// Double DQN with prioritized replay over per-agent ego-graph transitions.
/// One parameter set is shared by all agents.
class DqnTrainer {
 public:
  DqnTrainer(std::shared_ptr<const QNetwork> net, EnvConfig env, GraphConfig gcfg,
             TrainConfig cfg, TrainHooks hooks = {});

  /// Runs the full configured number of environment steps.
  TrainResult run();

  /// One environment step for all agents; performs a learning update when due.
  void env_step();
  /// One sample / target / loss / Adam / priority / soft-update cycle.
  double learn();

  const ad::ParamStore& online() const { return online_; }
  const ad::ParamStore& target() const { return target_; }
  const ReplayBuffer& replay() const { return replay_; }
  std::int64_t steps() const { return steps_; }
  std::int64_t updates() const { return updates_; }

 private:
  MetricsRow evaluate_now();
  void reset_episode();
  std::shared_ptr<const EgoGraph> graph_for(int agent);

  std::shared_ptr<const QNetwork> net_;
  EnvConfig env_cfg_;
  GraphConfig gcfg_;
  TrainConfig cfg_;
  TrainHooks hooks_;

  ad::ParamStore online_;
  ad::ParamStore target_;
  ad::AdamState adam_;
  ReplayBuffer replay_;
  std::mt19937_64 rng_;

  EnvState env_;
  std::vector<std::shared_ptr<const EgoGraph>> current_;
  std::int64_t steps_ = 0;
  std::int64_t episodes_ = 0;
  std::int64_t updates_ = 0;
  double loss_ma_ = 0.0;
  std::vector<MetricsRow> log_;
};

}  // namespace swarm
