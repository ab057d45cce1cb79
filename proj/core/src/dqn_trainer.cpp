#include "swarm/dqn_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace swarm {

namespace {

constexpr std::uint64_t kEvalSeedSalt = 0xE7A15EEDULL;
constexpr std::uint64_t kActSeedSalt = 0xAC7105EEULL;

}  // namespace

void TrainConfig::validate() const {
  if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must be in (0, 1]");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (static_cast<std::size_t>(batch) > replay.capacity) {
    throw ConfigError("batch exceeds replay capacity");
  }
  if (update_every < 1) throw ConfigError("update_every must be >= 1");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 &&
        epsilon_end <= 1.0)) {
    throw ConfigError("epsilon bounds must lie in [0, 1]");
  }
  if (!(epsilon_decay_fraction > 0.0)) throw ConfigError("epsilon_decay_fraction must be > 0");
  if (warmup < 0) throw ConfigError("warmup must be >= 0");
  if (eval_episodes < 0) throw ConfigError("eval_episodes must be >= 0");
}

double epsilon_at(std::int64_t step, const TrainConfig& cfg) {
  const double horizon = cfg.epsilon_decay_fraction * static_cast<double>(cfg.total_steps);
  if (horizon <= 0.0 || static_cast<double>(step) >= horizon) return cfg.epsilon_end;
  const double frac = static_cast<double>(step) / horizon;
  return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start);
}

Action select_action(std::span<const double> q, double epsilon, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (epsilon > 0.0 && coin(rng) < epsilon) {
    std::uniform_int_distribution<int> any(0, kActionCount - 1);
    return static_cast<Action>(any(rng));
  }
  return greedy_action(q);
}

std::vector<double> double_dqn_targets(std::span<const double> rewards,
                                       std::span<const std::uint8_t> terminal,
                                       const ad::Matrix& next_online, const ad::Matrix& next_target,
                                       double gamma) {
  const std::size_t n = rewards.size();
  if (terminal.size() != n || static_cast<std::size_t>(next_online.rows()) != n ||
      !next_online.same_shape(next_target)) {
    throw std::invalid_argument("double_dqn_targets: batch shape mismatch");
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (terminal[i] != 0) {
      y[i] = rewards[i];
      continue;
    }
    const int a = static_cast<int>(greedy_action(next_online.row(static_cast<int>(i))));
    y[i] = rewards[i] + gamma * next_target(static_cast<int>(i), a);
  }
  return y;
}

std::vector<double> td_target(const QNetwork& net, const ad::ParamStore& online,
                              const ad::ParamStore& target,
                              std::span<const Transition* const> batch, double gamma) {
  std::vector<const EgoGraph*> next;
  std::vector<double> rewards;
  std::vector<std::uint8_t> term;
  next.reserve(batch.size());
  for (const Transition* t : batch) {
    next.push_back(t->next_state.get());
    rewards.push_back(t->reward);
    term.push_back(t->terminal ? 1 : 0);
  }
  const ad::Matrix q_online = q_values(net, online, next);
  const ad::Matrix q_target = q_values(net, target, next);
  return double_dqn_targets(rewards, term, q_online, q_target, gamma);
}

LossResult loss_and_grads(const QNetwork& net, ad::ParamStore& online,
                          std::span<const Transition* const> batch,
                          std::span<const double> targets, std::span<const double> weights) {
  std::vector<const EgoGraph*> states;
  std::vector<int> actions;
  states.reserve(batch.size());
  for (const Transition* t : batch) {
    states.push_back(t->state.get());
    actions.push_back(t->action);
  }
  const GraphBatch gb = encode_batch(states);
  ad::Tape tape;
  const ad::Var q = net.forward(tape, online, gb);
  const ad::Var chosen = ad::pick_cols(tape, q, actions);
  LossResult out;
  const ad::Matrix& qa = tape.value(chosen);
  out.td_errors.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.td_errors[i] = targets[i] - qa(static_cast<int>(i), 0);
  }
  const ad::Var loss = ad::weighted_mse(tape, chosen, targets, weights);
  out.loss = tape.value(loss)(0, 0);
  tape.backward(loss, online);
  return out;
}

std::string format_metrics_row(const MetricsRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%lld,%lld,%.6f,%.6f,%.3f,%.6f,%.6f",
                static_cast<long long>(r.step), static_cast<long long>(r.episode),
                r.collection_fraction, r.coverage_fraction, r.steps_used, r.epsilon, r.loss_ma);
  return buf;
}

DqnTrainer::DqnTrainer(std::shared_ptr<const QNetwork> net, EnvConfig env, GraphConfig gcfg,
                       TrainConfig cfg, TrainHooks hooks)
    : net_(std::move(net)),
      env_cfg_(env),
      gcfg_(gcfg),
      cfg_(cfg),
      hooks_(std::move(hooks)),
      replay_((cfg.validate(), cfg.replay)),
      rng_(cfg.seed ^ kActSeedSalt),
      env_([&] {
        env.validate();
        gcfg.validate();
        env.seed = episode_seed(cfg.seed, 0);
        return EnvState::create(env);
      }()) {
  online_ = net_->init_params(cfg_.seed);
  target_ = online_;
  adam_ = ad::AdamState(online_, ad::AdamConfig{cfg_.lr, 0.9, 0.999, 1e-8});
  current_.clear();
  for (int i = 0; i < env_cfg_.n_agents; ++i) current_.push_back(graph_for(i));
}

std::shared_ptr<const EgoGraph> DqnTrainer::graph_for(int agent) {
  auto g = std::make_shared<EgoGraph>(build_ego_graph(env_, agent, gcfg_));
  if (hooks_.graph_probe) hooks_.graph_probe(*g);
  return g;
}

void DqnTrainer::reset_episode() {
  EnvConfig cfg = env_cfg_;
  cfg.seed = episode_seed(cfg_.seed, static_cast<std::uint64_t>(episodes_));
  env_ = EnvState::create(cfg);
  current_.clear();
  for (int i = 0; i < env_cfg_.n_agents; ++i) current_.push_back(graph_for(i));
}

void DqnTrainer::env_step() {
  const int n = env_cfg_.n_agents;
  const double eps = epsilon_at(steps_, cfg_);
  std::vector<Action> actions(static_cast<std::size_t>(n), Action::Up);
  std::vector<const EgoGraph*> greedy_graphs;
  std::vector<int> greedy_agents;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> any(0, kActionCount - 1);
  for (int i = 0; i < n; ++i) {
    if (eps > 0.0 && coin(rng_) < eps) {
      actions[static_cast<std::size_t>(i)] = static_cast<Action>(any(rng_));
    } else {
      greedy_graphs.push_back(current_[static_cast<std::size_t>(i)].get());
      greedy_agents.push_back(i);
    }
  }
  if (!greedy_graphs.empty()) {
    const ad::Matrix q = q_values(*net_, online_, greedy_graphs);
    for (std::size_t r = 0; r < greedy_agents.size(); ++r) {
      actions[static_cast<std::size_t>(greedy_agents[r])] =
          greedy_action(q.row(static_cast<int>(r)));
    }
  }

  const StepResult result = env_.step(actions);
  const bool terminal = env_.collected_count() == env_cfg_.n_goals;
  std::vector<std::shared_ptr<const EgoGraph>> next;
  next.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) next.push_back(graph_for(i));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    replay_.push({current_[ui], static_cast<int>(actions[ui]), result.rewards[ui], next[ui],
                  terminal, i});
  }
  ++steps_;

  if (result.done) {
    ++episodes_;
    reset_episode();
  } else {
    current_ = std::move(next);
  }

  const auto ready = static_cast<std::size_t>(std::max<std::int64_t>(cfg_.warmup, cfg_.batch));
  if (steps_ % cfg_.update_every == 0 && replay_.size() >= ready) learn();

  if (cfg_.eval_interval > 0 && steps_ % cfg_.eval_interval == 0) {
    log_.push_back(evaluate_now());
  }
}

double DqnTrainer::learn() {
  const double progress =
      cfg_.total_steps > 0
          ? std::min(1.0, static_cast<double>(steps_) / static_cast<double>(cfg_.total_steps))
          : 1.0;
  const double beta = cfg_.per_beta_start + progress * (cfg_.per_beta_end - cfg_.per_beta_start);
  const SampleBatch batch = replay_.sample(static_cast<std::size_t>(cfg_.batch), beta, rng_);
  const auto targets = td_target(*net_, online_, target_, batch.items, cfg_.gamma);
  const LossResult lr = loss_and_grads(*net_, online_, batch.items, targets, batch.weights);
  adam_.step(online_);
  replay_.update_priorities(batch.refs, lr.td_errors);
  ad::soft_update(target_, online_, cfg_.tau);
  ++updates_;
  loss_ma_ = updates_ == 1 ? lr.loss : 0.99 * loss_ma_ + 0.01 * lr.loss;
  return lr.loss;
}

MetricsRow DqnTrainer::evaluate_now() {
  MetricsRow row;
  row.step = steps_;
  row.episode = episodes_;
  row.epsilon = epsilon_at(steps_, cfg_);
  row.loss_ma = loss_ma_;
  if (cfg_.eval_episodes > 0) {
    LearnedPolicy policy(net_, online_, gcfg_);
    const auto stats =
        evaluate_policy(policy, env_cfg_, cfg_.eval_episodes, cfg_.seed ^ kEvalSeedSalt, 1);
    const Summary s = summarize(stats);
    row.collection_fraction = s.collection_mean;
    row.coverage_fraction = s.coverage_mean;
    row.steps_used = s.steps_mean;
  }
  if (hooks_.on_eval) hooks_.on_eval(row, online_);
  return row;
}

TrainResult DqnTrainer::run() {
  while (steps_ < cfg_.total_steps) env_step();
  if (cfg_.eval_interval <= 0 || steps_ % cfg_.eval_interval != 0 || steps_ == 0) {
    log_.push_back(evaluate_now());
  }
  TrainResult out;
  out.params = online_;
  out.log = log_;
  out.updates = updates_;
  out.episodes = episodes_;
  return out;
}

}  // namespace swarm
