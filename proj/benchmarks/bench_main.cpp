#include <benchmark/benchmark.h>

#include <random>

#include "swarm/baselines.hpp"
#include "swarm/ego_graph.hpp"
#include "swarm/gnn_policy.hpp"
#include "swarm/presets.hpp"
#include "swarm/replay.hpp"

using namespace swarm;

namespace {

EnvState advanced(const std::string& name, int steps, std::uint64_t seed) {
  EnvConfig cfg = preset(name);
  cfg.seed = seed;
  EnvState env = EnvState::create(cfg);
  std::mt19937_64 rng(seed);
  for (int t = 0; t < steps && !env.done(); ++t) {
    std::vector<Action> a;
    for (int i = 0; i < cfg.n_agents; ++i) a.push_back(random_policy(rng));
    env.step(a);
  }
  return env;
}

std::vector<EgoGraph> graphs_for(const std::string& name, int count) {
  std::vector<EgoGraph> out;
  for (int i = 0; out.size() < static_cast<std::size_t>(count); ++i) {
    const EnvState env = advanced(name, 40, static_cast<std::uint64_t>(i));
    for (int a = 0; a < env.config().n_agents && out.size() < static_cast<std::size_t>(count); ++a) {
      out.push_back(build_ego_graph(env, a, GraphConfig{}));
    }
  }
  return out;
}

const char* kPresets[] = {"cfg-10", "cfg-40", "cfg-bench"};

}  // namespace

static void BM_EnvStep(benchmark::State& state) {
  EnvConfig cfg = preset(kPresets[state.range(0)]);
  EnvState env = EnvState::create(cfg);
  std::mt19937_64 rng(1);
  std::vector<Action> a(static_cast<std::size_t>(cfg.n_agents));
  std::uint64_t episode = 0;
  for (auto _ : state) {
    for (auto& x : a) x = random_policy(rng);
    benchmark::DoNotOptimize(env.step(a));
    if (env.done()) {
      state.PauseTiming();
      cfg.seed = ++episode;
      env = EnvState::create(cfg);
      state.ResumeTiming();
    }
  }
  state.SetLabel(kPresets[state.range(0)]);
}
BENCHMARK(BM_EnvStep)->DenseRange(0, 2);

static void BM_BuildEgoGraph(benchmark::State& state) {
  const EnvState env = advanced(kPresets[state.range(0)], 50, 3);
  int agent = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_ego_graph(env, agent, GraphConfig{}));
    agent = (agent + 1) % env.config().n_agents;
  }
  state.SetLabel(kPresets[state.range(0)]);
}
BENCHMARK(BM_BuildEgoGraph)->DenseRange(0, 2);

static void BM_GnnForward(benchmark::State& state) {
  const GnnPolicy net;
  const ad::ParamStore params = net.init_params(1);
  const auto graphs = graphs_for("cfg-10", static_cast<int>(state.range(0)));
  std::vector<const EgoGraph*> ptrs;
  for (const auto& g : graphs) ptrs.push_back(&g);
  for (auto _ : state) benchmark::DoNotOptimize(q_values(net, params, ptrs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GnnForward)->Arg(1)->Arg(64);

static void BM_GnnForwardBackward(benchmark::State& state) {
  const GnnPolicy net;
  ad::ParamStore params = net.init_params(1);
  const auto graphs = graphs_for("cfg-10", 64);
  std::vector<const EgoGraph*> ptrs;
  for (const auto& g : graphs) ptrs.push_back(&g);
  const GraphBatch batch = encode_batch(ptrs);
  const std::vector<int> actions(64, 1);
  const std::vector<double> targets(64, 1.0);
  const std::vector<double> weights(64, 1.0);
  for (auto _ : state) {
    ad::Tape tape;
    const ad::Var q = net.forward(tape, params, batch);
    const ad::Var loss = ad::weighted_mse(tape, ad::pick_cols(tape, q, actions), targets, weights);
    tape.backward(loss, params);
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_GnnForwardBackward);

static void BM_ReplaySample(benchmark::State& state) {
  ReplayBuffer buf(ReplayConfig{100000, 0.6, 0.01, WeightRule::Proportional});
  for (int i = 0; i < 100000; ++i) buf.push(Transition{});
  std::mt19937_64 rng(7);
  std::vector<SampleRef> refs;
  std::vector<double> td;
  for (std::size_t i = 0; i < 100000; ++i) {
    refs.push_back({i, buf.stamp(i)});
    td.push_back(static_cast<double>(i % 97) * 0.1);
  }
  buf.update_priorities(refs, td);
  for (auto _ : state) {
    const SampleBatch b = buf.sample(64, 0.5, rng);
    buf.update_priorities(b.refs, std::vector<double>(64, 0.3));
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_ReplaySample);

static void BM_PsoAssign(benchmark::State& state) {
  const EnvState env = advanced("cfg-bench", 100, 5);
  std::vector<Cell> agents;
  std::vector<Cell> goals;
  for (const auto& a : env.agents()) agents.push_back(a.pos);
  for (const auto& g : env.goals()) goals.push_back(g.pos);
  std::mt19937_64 rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(pso_assign(agents, goals, PsoParams{}, 100.0, rng));
}
BENCHMARK(BM_PsoAssign);
BENCHMARK_MAIN();
