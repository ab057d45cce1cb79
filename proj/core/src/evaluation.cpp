#include "swarm/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace swarm {

LearnedPolicy::LearnedPolicy(std::shared_ptr<const QNetwork> net, ad::ParamStore params,
                             GraphConfig gcfg, double epsilon)
    : net_(std::move(net)), params_(std::move(params)), gcfg_(gcfg), epsilon_(epsilon) {}

std::vector<Action> LearnedPolicy::act(const EnvState& env, std::mt19937_64& rng) {
  const int n = static_cast<int>(env.agents().size());
  std::vector<Action> actions(static_cast<std::size_t>(n), Action::Up);
  std::vector<EgoGraph> graphs;
  std::vector<int> greedy_agents;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> any(0, kActionCount - 1);
  for (int i = 0; i < n; ++i) {
    if (epsilon_ > 0.0 && coin(rng) < epsilon_) {
      actions[static_cast<std::size_t>(i)] = static_cast<Action>(any(rng));
      continue;
    }
    graphs.push_back(build_ego_graph(env, i, gcfg_));
    if (probe_) probe_(graphs.back());
    greedy_agents.push_back(i);
  }
  if (graphs.empty()) return actions;
  std::vector<const EgoGraph*> ptrs;
  for (const auto& g : graphs) ptrs.push_back(&g);
  const ad::Matrix q = q_values(*net_, params_, ptrs);
  for (std::size_t r = 0; r < greedy_agents.size(); ++r) {
    actions[static_cast<std::size_t>(greedy_agents[r])] =
        greedy_action(q.row(static_cast<int>(r)));
  }
  return actions;
}

std::unique_ptr<JointPolicy> LearnedPolicy::clone() const {
  return std::make_unique<LearnedPolicy>(*this);
}

std::uint64_t episode_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

EpisodeStats run_episode(JointPolicy& policy, const EnvConfig& config, std::mt19937_64& rng) {
  EnvState env = EnvState::create(config);
  EpisodeStats stats;
  while (!env.done()) {
    const auto actions = policy.act(env, rng);
    const auto result = env.step(actions);
    for (double r : result.rewards) stats.episode_return += r;
  }
  stats.collection = env.collection_fraction();
  stats.coverage = env.coverage_fraction();
  stats.steps = env.t();
  stats.all_collected = env.collected_count() == config.n_goals;
  return stats;
}

std::vector<EpisodeStats> evaluate_policy(const JointPolicy& policy, EnvConfig config,
                                          int episodes, std::uint64_t base_seed, int threads) {
  std::vector<EpisodeStats> out(static_cast<std::size_t>(std::max(episodes, 0)));
  auto work = [&](JointPolicy& local, int i) {
    EnvConfig cfg = config;
    cfg.seed = episode_seed(base_seed, static_cast<std::uint64_t>(i));
    std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66DULL);
    out[static_cast<std::size_t>(i)] = run_episode(local, cfg, rng);
  };
  threads = std::clamp(threads, 1, std::max(episodes, 1));
  if (threads == 1) {
    auto local = policy.clone();
    for (int i = 0; i < episodes; ++i) work(*local, i);
    return out;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      auto local = policy.clone();
      for (int i = next++; i < episodes; i = next++) work(*local, i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

Summary summarize(const std::vector<EpisodeStats>& stats) {
  Summary s;
  s.episodes = static_cast<int>(stats.size());
  if (stats.empty()) return s;
  auto moments = [&](auto field, double& mean, double& sd) {
    double sum = 0.0;
    for (const auto& e : stats) sum += field(e);
    mean = sum / static_cast<double>(stats.size());
    double var = 0.0;
    for (const auto& e : stats) var += (field(e) - mean) * (field(e) - mean);
    sd = std::sqrt(var / static_cast<double>(stats.size()));
  };
  moments([](const EpisodeStats& e) { return e.collection; }, s.collection_mean, s.collection_std);
  moments([](const EpisodeStats& e) { return e.coverage; }, s.coverage_mean, s.coverage_std);
  moments([](const EpisodeStats& e) { return static_cast<double>(e.steps); }, s.steps_mean,
          s.steps_std);
  return s;
}

int default_threads() {
  if (const char* env = std::getenv("SWARM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

}  // namespace swarm
