#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "swarm/ego_graph.hpp"
#include "swarm/grid_world.hpp"
#include "swarm/param_store.hpp"
#include "swarm/q_network.hpp"
#include "swarm/tape.hpp"

namespace swarm::testing {

inline EnvConfig small_config(int grid, int agents, int goals, int max_steps = 150,
                              std::uint64_t seed = 1) {
  EnvConfig cfg;
  cfg.grid_size = grid;
  cfg.n_agents = agents;
  cfg.n_goals = goals;
  cfg.max_steps = max_steps;
  cfg.seed = seed;
  return cfg;
}

/// Environment advanced by `steps` uniform random joint actions (stops early
/// if the episode ends).
inline EnvState random_env(const EnvConfig& cfg, int steps, std::uint64_t seed) {
  EnvState env = EnvState::create(cfg);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> any(0, kActionCount - 1);
  for (int t = 0; t < steps && !env.done(); ++t) {
    std::vector<Action> a;
    for (int i = 0; i < cfg.n_agents; ++i) a.push_back(static_cast<Action>(any(rng)));
    env.step(a);
  }
  return env;
}

/// k nearest other agents by full sort of (squared distance, id).
inline std::vector<int> knn_oracle(const std::vector<Cell>& agents, int self, int k) {
  std::vector<std::pair<long, int>> all;
  for (int j = 0; j < static_cast<int>(agents.size()); ++j) {
    if (j == self) continue;
    const long dx = agents[static_cast<std::size_t>(j)].x - agents[static_cast<std::size_t>(self)].x;
    const long dy = agents[static_cast<std::size_t>(j)].y - agents[static_cast<std::size_t>(self)].y;
    all.emplace_back(dx * dx + dy * dy, j);
  }
  std::sort(all.begin(), all.end());
  std::vector<int> out;
  for (int i = 0; i < k && i < static_cast<int>(all.size()); ++i) {
    out.push_back(all[static_cast<std::size_t>(i)].second);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Entity ids of the agent-agent out-neighbors of graph node `node`.
inline std::vector<int> agent_neighbors(const EgoGraph& g, int node) {
  std::vector<int> out;
  for (const auto& e : g.edges) {
    if (e.kind == EdgeKind::AgentAgent && e.src == node) {
      out.push_back(g.nodes[static_cast<std::size_t>(e.dst)].entity_id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct GradCheckReport {
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  double max_rel = 0.0;
  std::string worst;
};

using LossFn = std::function<ad::Var(ad::Tape&, const ad::ParamStore&)>;

/// Central finite differences against the tape gradient. Entries whose ReLU
/// activation pattern changes within +-h are skipped (the function has a kink
/// there). rel = |a - n| / max(|a|, |n|, floor).
inline GradCheckReport gradient_check(ad::ParamStore& params, const LossFn& loss,
                                      const std::function<bool(std::size_t, std::size_t)>& pick,
                                      double h = 1e-5, double tol = 1e-4,
                                      double floor = 1e-6) {
  ad::Tape tape;
  tape.set_track_relu(true);
  const ad::Var l = loss(tape, params);
  const auto base_pattern = tape.relu_log();
  params.zero_grad();
  tape.backward(l, params);
  std::vector<ad::Matrix> analytic;
  for (std::size_t p = 0; p < params.size(); ++p) analytic.push_back(params.grad(p));
  params.zero_grad();

  auto eval = [&](std::vector<std::uint8_t>& pattern) {
    ad::Tape t(false);
    t.set_track_relu(true);
    const double v = t.value(loss(t, params))(0, 0);
    pattern = t.relu_log();
    return v;
  };

  GradCheckReport rep;
  std::vector<std::uint8_t> pat_plus;
  std::vector<std::uint8_t> pat_minus;
  for (std::size_t p = 0; p < params.size(); ++p) {
    ad::Matrix& value = params.value(p);
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!pick(p, i)) continue;
      const double orig = value[i];
      value[i] = orig + h;
      const double lp = eval(pat_plus);
      value[i] = orig - h;
      const double lm = eval(pat_minus);
      value[i] = orig;
      if (pat_plus != base_pattern || pat_minus != base_pattern) {
        ++rep.skipped;
        continue;
      }
      const double numeric = (lp - lm) / (2.0 * h);
      const double a = analytic[p][i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++rep.checked;
      if (rel > rep.max_rel) {
        rep.max_rel = rel;
        rep.worst = params.name(p) + "[" + std::to_string(i) + "] analytic " +
                    std::to_string(a) + " numeric " + std::to_string(numeric);
      }
      if (rel > tol) ++rep.failed;
    }
  }
  return rep;
}

inline std::function<bool(std::size_t, std::size_t)> all_entries() {
  return [](std::size_t, std::size_t) { return true; };
}

/// Adds N(0, sd) noise to every parameter so biases are not all zero.
inline void jitter(ad::ParamStore& params, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sd);
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params.value(p).size(); ++i) params.value(p)[i] += noise(rng);
  }
}

/// Training-style loss on a batch: weighted squared error of Q(s, a) against
/// fixed targets.
inline LossFn q_loss(const QNetwork& net, const GraphBatch& batch, std::vector<int> actions,
                     std::vector<double> targets, std::vector<double> weights) {
  return [&net, &batch, actions, targets, weights](ad::Tape& t, const ad::ParamStore& p) {
    const ad::Var q = net.forward(t, p, batch);
    const ad::Var chosen = ad::pick_cols(t, q, actions);
    return ad::weighted_mse(t, chosen, targets, weights);
  };
}

/// Undirected hop distance from node 0 over the graph's edges (-1 if unreachable).
inline std::vector<int> hop_distance(const EgoGraph& g) {
  std::vector<int> dist(static_cast<std::size_t>(g.node_count()), -1);
  dist[0] = 0;
  std::vector<int> frontier = {0};
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int u : frontier) {
      for (const auto& e : g.edges) {
        int v = -1;
        if (e.src == u) v = e.dst;
        if (e.dst == u) v = e.src;
        if (v >= 0 && dist[static_cast<std::size_t>(v)] < 0) {
          dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
          next.push_back(v);
        }
      }
    }
    frontier = std::move(next);
  }
  return dist;
}

/// Subgraph on the nodes with keep[i] true, preserving order and the edges
/// between kept nodes.
inline EgoGraph induced_subgraph(const EgoGraph& g, const std::vector<bool>& keep) {
  EgoGraph out;
  out.observer = g.observer;
  out.grid_size = g.grid_size;
  std::vector<int> remap(static_cast<std::size_t>(g.node_count()), -1);
  for (int i = 0; i < g.node_count(); ++i) {
    if (!keep[static_cast<std::size_t>(i)]) continue;
    remap[static_cast<std::size_t>(i)] = out.node_count();
    out.nodes.push_back(g.nodes[static_cast<std::size_t>(i)]);
    out.features.push_back(g.features[static_cast<std::size_t>(i)]);
  }
  for (const auto& e : g.edges) {
    const int s = remap[static_cast<std::size_t>(e.src)];
    const int d = remap[static_cast<std::size_t>(e.dst)];
    if (s >= 0 && d >= 0) out.edges.push_back({s, d, e.weight, e.kind});
  }
  return out;
}

/// Reorders nodes 1..n-1 by `perm` (perm[new] = old), remapping edges.
inline EgoGraph permute_nodes(const EgoGraph& g, const std::vector<int>& perm) {
  EgoGraph out = g;
  std::vector<int> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    inverse[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
    out.nodes[i] = g.nodes[static_cast<std::size_t>(perm[i])];
    out.features[i] = g.features[static_cast<std::size_t>(perm[i])];
  }
  for (auto& e : out.edges) {
    e.src = inverse[static_cast<std::size_t>(e.src)];
    e.dst = inverse[static_cast<std::size_t>(e.dst)];
  }
  return out;
}

constexpr int kStubStates = 8;

/// Tabular Q: graph with n nodes reads row n-1 of a kStubStates x 4 table.
class StubNetwork final : public QNetwork {
 public:
  std::string kind() const override { return "stub"; }
  ad::ParamStore init_params(std::uint64_t seed) const override {
    ad::ParamStore p;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    ad::Matrix table(kStubStates, kActionCount);
    for (int r = 0; r < kStubStates; ++r) {
      for (int c = 0; c < kActionCount; ++c) table(r, c) = n(rng);
    }
    p.add("table", table);
    return p;
  }
  ad::Var forward(ad::Tape& tape, const ad::ParamStore& params,
                  const GraphBatch& batch) const override {
    std::vector<int> rows;
    for (int c : batch.node_counts) rows.push_back(c - 1);
    return ad::gather_rows(tape, tape.param(params, 0), rows);
  }
  std::map<std::string, std::string> describe() const override { return {{"policy", "stub"}}; }
  std::unique_ptr<QNetwork> clone() const override { return std::make_unique<StubNetwork>(); }
};

/// Graph whose node count encodes the state index.
inline std::shared_ptr<const EgoGraph> state_graph(int index) {
  auto g = std::make_shared<EgoGraph>();
  g->grid_size = 10;
  for (int i = 0; i <= index; ++i) {
    GraphNode node;
    node.kind = i == 0 ? NodeKind::Agent : NodeKind::Goal;
    node.entity_id = i == 0 ? 0 : i - 1;
    node.pos = {i, 0};
    g->nodes.push_back(node);
    NodeFeature f{};
    f[0] = i;
    f[11] = i == 0 ? 0.0 : 1.0;
    g->features.push_back(f);
  }
  return g;
}

}  // namespace swarm::testing
