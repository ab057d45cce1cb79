#pragma once

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "swarm/evaluation.hpp"
#include "swarm/grid_world.hpp"

namespace swarm {

/// Goals a scripted policy may use: discovered and uncollected, or every
/// uncollected goal when omniscient.
std::vector<GoalState> known_goals(const EnvState& env, bool omniscient = false);

/// True when the move stays on the grid and the target cell is free.
bool move_is_valid(const EnvState& env, int agent_id, Action a);

/// Serpentine sweep over the grid. Column 0 is the return lane: row 0 runs
/// right, rows below alternate left (down to x=1) and right, and the last
/// row exits left into column 0, which leads back up to the origin. Blocked
/// moves are replaced by the first valid action.
Action sweep_action(const EnvState& env, int agent_id);

/// Valid move that brings the agent closest to `target`, among moves that
/// strictly reduce the distance. Ties prefer x-axis moves, then lower codes.
/// Falls back to the sweep when no such move exists.
Action move_toward(const EnvState& env, int agent_id, Cell target);

/// Heads for the nearest known goal, else sweeps.
Action greedy_policy(const EnvState& env, int agent_id, bool omniscient = false);

Action random_policy(std::mt19937_64& rng);

struct PsoParams {
  double inertia = 0.7;
  double cognitive = 1.5;
  double social = 1.5;
  int particles = 30;
  int iterations = 50;
};

struct PsoResult {
  /// Goal index (into the candidate list) for every agent.
  std::vector<int> assignment;
  double best_cost = 0.0;
  /// Global best cost after initialization and after every iteration.
  std::vector<double> history;
};

/// Summed agent-to-goal distance plus `duplicate_penalty` for every agent
/// sharing a goal with a lower-indexed agent.
double assignment_cost(std::span<const Cell> agents, std::span<const Cell> goals,
                       std::span<const int> assignment, double duplicate_penalty);

/// Global-best PSO over continuous positions in [0, goals) per agent, decoded
/// by truncation. Particle 0 starts at the nearest-goal assignment.
PsoResult pso_assign(std::span<const Cell> agents, std::span<const Cell> goals,
                     const PsoParams& params, double duplicate_penalty, std::mt19937_64& rng);

/// DBSCAN with Euclidean distance (neighbors within eps inclusive, the point
/// itself counts toward min_pts). Noise points become singleton clusters.
/// Points are visited in (x, y) order, so the result does not depend on the
/// input order. Clusters are sorted internally and by first cell.
std::vector<std::vector<Cell>> dbscan_clusters(std::span<const Cell> points, double eps,
                                               int min_pts);

/// Cluster index per agent: repeatedly matches the closest free
/// (agent, centroid) pair; agents left over once every cluster is taken get
/// their nearest centroid.
std::vector<int> dbscan_assign(std::span<const Cell> agents,
                               const std::vector<std::vector<Cell>>& clusters);

struct BaselineOptions {
  bool omniscient = false;
  PsoParams pso;
  double dbscan_eps = 5.0;
  int dbscan_min_pts = 2;
};

class RandomPolicy final : public JointPolicy {
 public:
  std::string name() const override { return "random"; }
  std::vector<Action> act(const EnvState& env, std::mt19937_64& rng) override;
  std::unique_ptr<JointPolicy> clone() const override;
};

class GreedyPolicy final : public JointPolicy {
 public:
  explicit GreedyPolicy(BaselineOptions options = {}) : options_(options) {}
  std::string name() const override { return "greedy"; }
  std::vector<Action> act(const EnvState& env, std::mt19937_64& rng) override;
  std::unique_ptr<JointPolicy> clone() const override;

 private:
  BaselineOptions options_;
};

class PsoPolicy final : public JointPolicy {
 public:
  explicit PsoPolicy(BaselineOptions options = {}) : options_(options) {}
  std::string name() const override { return "pso"; }
  std::vector<Action> act(const EnvState& env, std::mt19937_64& rng) override;
  std::unique_ptr<JointPolicy> clone() const override;

 private:
  BaselineOptions options_;
};

class DbscanPolicy final : public JointPolicy {
 public:
  explicit DbscanPolicy(BaselineOptions options = {}) : options_(options) {}
  std::string name() const override { return "dbscan"; }
  std::vector<Action> act(const EnvState& env, std::mt19937_64& rng) override;
  std::unique_ptr<JointPolicy> clone() const override;

 private:
  BaselineOptions options_;
};

}  // namespace swarm
