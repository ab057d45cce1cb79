#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace swarm {

/// Raised for invalid environment, graph, or training configurations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an API is used out of order (e.g. stepping a finished episode).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

inline double squared_distance(Cell a, Cell b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double distance(Cell a, Cell b);

/// Movement actions. x grows rightward, y grows downward, so Up is -y.
enum class Action : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3 };

inline constexpr int kActionCount = 4;

Cell apply_action(Cell c, Action a);
const char* action_name(Action a);

struct EnvConfig {
  int grid_size = 10;
  int n_agents = 2;
  int n_goals = 10;
  double vision_radius = 4.5;
  int max_steps = 150;
  std::uint64_t seed = 0;

  /// Throws ConfigError when a field or a capacity bound is violated.
  void validate() const;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

struct AgentState {
  int id = 0;
  Cell pos;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct GoalState {
  int id = 0;
  Cell pos;
  bool discovered = false;
  bool collected = false;

  friend bool operator==(const GoalState&, const GoalState&) = default;
};

struct StepResult {
  std::vector<double> rewards;
  std::vector<bool> invalid;
  std::vector<int> collected_goals;
  std::vector<int> discovered_goals;
  bool done = false;
};

inline constexpr double kGoalReward = 10.0;
inline constexpr double kInvalidMovePenalty = -5.0;

/// Mutable simulation state of one episode.
///
/// Agents move one cell per step, resolved sequentially in ascending id
/// order against the positions already committed by earlier agents. A move
/// off the grid or onto an occupied cell leaves the agent in place and costs
/// kInvalidMovePenalty. Entering an uncollected goal cell collects it.
/// Discovery is shared: a goal inside any agent's vision disk is discovered
/// for everyone.
class EnvState {
 public:
  /// Samples agents on the border and goals in the interior.
  static EnvState create(const EnvConfig& config);

  /// Builds a scripted scene. Positions must satisfy the same placement
  /// rules as create(), except that agents may sit anywhere on the grid.
  static EnvState from_layout(const EnvConfig& config, std::span<const Cell> agents,
                              std::span<const Cell> goals);

  StepResult step(std::span<const Action> actions);

  /// Discovered, uncollected goals within the vision radius of the agent,
  /// nearest first (ties by goal id).
  std::vector<GoalState> visible_goals(int agent_id) const;

  double coverage_fraction() const;
  double collection_fraction() const;

  const EnvConfig& config() const { return config_; }
  const std::vector<AgentState>& agents() const { return agents_; }
  const std::vector<GoalState>& goals() const { return goals_; }
  int t() const { return t_; }
  bool done() const { return done_; }
  int collected_count() const { return collected_count_; }
  int covered_count() const { return covered_count_; }
  bool covered(Cell c) const;
  bool in_bounds(Cell c) const;
  /// Agent id occupying the cell, or -1.
  int agent_at(Cell c) const;

  friend bool operator==(const EnvState&, const EnvState&) = default;

 private:
  explicit EnvState(const EnvConfig& config);
  int cell_index(Cell c) const { return c.y * config_.grid_size + c.x; }
  std::vector<int> visibility_pass();
  int goal_at(Cell c) const;

  EnvConfig config_;
  std::vector<AgentState> agents_;
  std::vector<GoalState> goals_;
  std::vector<int> agent_grid_;
  std::vector<int> goal_grid_;
  std::vector<std::uint8_t> covered_;
  int covered_count_ = 0;
  int collected_count_ = 0;
  int t_ = 0;
  bool done_ = false;
};

}  // namespace swarm
