#include "swarm/grid_world.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace swarm {

double distance(Cell a, Cell b) { return std::sqrt(squared_distance(a, b)); }

Cell apply_action(Cell c, Action a) {
  switch (a) {
    case Action::Up:
      return {c.x, c.y - 1};
    case Action::Down:
      return {c.x, c.y + 1};
    case Action::Left:
      return {c.x - 1, c.y};
    case Action::Right:
      return {c.x + 1, c.y};
  }
  return c;
}

const char* action_name(Action a) {
  switch (a) {
    case Action::Up:
      return "up";
    case Action::Down:
      return "down";
    case Action::Left:
      return "left";
    case Action::Right:
      return "right";
  }
  return "?";
}

void EnvConfig::validate() const {
  if (grid_size < 2) throw ConfigError("grid_size must be >= 2");
  if (n_agents < 1) throw ConfigError("n_agents must be >= 1");
  if (n_goals < 1) throw ConfigError("n_goals must be >= 1");
  if (!(vision_radius > 0.0)) throw ConfigError("vision_radius must be > 0");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  const long border = 4L * (grid_size - 1);
  const long interior = static_cast<long>(grid_size - 2) * (grid_size - 2);
  if (n_agents > border) {
    throw ConfigError("n_agents=" + std::to_string(n_agents) + " exceeds border capacity " +
                      std::to_string(border));
  }
  if (n_goals > interior) {
    throw ConfigError("n_goals=" + std::to_string(n_goals) + " exceeds interior capacity " +
                      std::to_string(interior));
  }
}

namespace {

// Partial Fisher-Yates: the first `count` entries become a uniform sample
// without replacement.
std::vector<Cell> sample_cells(std::vector<Cell> pool, int count, std::mt19937_64& rng) {
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), pool.size() - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[pick(rng)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

}  // namespace

EnvState::EnvState(const EnvConfig& config) : config_(config) {
  const auto cells = static_cast<std::size_t>(config.grid_size) * config.grid_size;
  agent_grid_.assign(cells, -1);
  goal_grid_.assign(cells, -1);
  covered_.assign(cells, 0);
}

EnvState EnvState::create(const EnvConfig& config) {
  config.validate();
  const int L = config.grid_size;
  std::vector<Cell> border;
  std::vector<Cell> interior;
  for (int y = 0; y < L; ++y) {
    for (int x = 0; x < L; ++x) {
      if (x == 0 || y == 0 || x == L - 1 || y == L - 1) {
        border.push_back({x, y});
      } else {
        interior.push_back({x, y});
      }
    }
  }
  std::mt19937_64 rng(config.seed);
  const auto agents = sample_cells(std::move(border), config.n_agents, rng);
  const auto goals = sample_cells(std::move(interior), config.n_goals, rng);
  return from_layout(config, agents, goals);
}

EnvState EnvState::from_layout(const EnvConfig& config, std::span<const Cell> agents,
                               std::span<const Cell> goals) {
  EnvConfig cfg = config;
  cfg.n_agents = static_cast<int>(agents.size());
  cfg.n_goals = static_cast<int>(goals.size());
  cfg.validate();
  EnvState env(cfg);
  const int L = cfg.grid_size;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const Cell c = agents[i];
    if (!env.in_bounds(c)) throw ConfigError("agent placed outside the grid");
    if (env.agent_at(c) >= 0) throw ConfigError("two agents placed on one cell");
    env.agents_.push_back({static_cast<int>(i), c});
    env.agent_grid_[static_cast<std::size_t>(env.cell_index(c))] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const Cell c = goals[i];
    if (c.x < 1 || c.y < 1 || c.x > L - 2 || c.y > L - 2) {
      throw ConfigError("goal placed outside the interior");
    }
    if (env.goal_at(c) >= 0) throw ConfigError("two goals placed on one cell");
    if (env.agent_at(c) >= 0) throw ConfigError("goal placed under an agent");
    env.goals_.push_back({static_cast<int>(i), c, false, false});
    env.goal_grid_[static_cast<std::size_t>(env.cell_index(c))] = static_cast<int>(i);
  }
  env.visibility_pass();
  return env;
}

bool EnvState::in_bounds(Cell c) const {
  return c.x >= 0 && c.y >= 0 && c.x < config_.grid_size && c.y < config_.grid_size;
}

int EnvState::agent_at(Cell c) const {
  return in_bounds(c) ? agent_grid_[static_cast<std::size_t>(cell_index(c))] : -1;
}

int EnvState::goal_at(Cell c) const {
  return in_bounds(c) ? goal_grid_[static_cast<std::size_t>(cell_index(c))] : -1;
}

bool EnvState::covered(Cell c) const {
  return in_bounds(c) && covered_[static_cast<std::size_t>(cell_index(c))] != 0;
}

// Marks every cell and goal inside some agent's vision disk. Returns the ids
// of goals discovered by this pass.
std::vector<int> EnvState::visibility_pass() {
  const int L = config_.grid_size;
  const double r2 = config_.vision_radius * config_.vision_radius;
  const int reach = static_cast<int>(std::floor(config_.vision_radius));
  std::vector<int> fresh;
  for (const auto& agent : agents_) {
    const int x0 = std::max(0, agent.pos.x - reach);
    const int x1 = std::min(L - 1, agent.pos.x + reach);
    const int y0 = std::max(0, agent.pos.y - reach);
    const int y1 = std::min(L - 1, agent.pos.y + reach);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Cell c{x, y};
        if (squared_distance(c, agent.pos) > r2) continue;
        auto& mark = covered_[static_cast<std::size_t>(cell_index(c))];
        if (mark == 0) {
          mark = 1;
          ++covered_count_;
        }
        const int g = goal_at(c);
        if (g >= 0 && !goals_[static_cast<std::size_t>(g)].discovered) {
          goals_[static_cast<std::size_t>(g)].discovered = true;
          fresh.push_back(g);
        }
      }
    }
  }
  std::sort(fresh.begin(), fresh.end());
  return fresh;
}

StepResult EnvState::step(std::span<const Action> actions) {
  if (done_) throw UsageError("step() called on a finished episode");
  if (actions.size() != agents_.size()) {
    throw UsageError("expected " + std::to_string(agents_.size()) + " actions, got " +
                     std::to_string(actions.size()));
  }
  StepResult result;
  result.rewards.assign(agents_.size(), 0.0);
  result.invalid.assign(agents_.size(), false);

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    auto& agent = agents_[i];
    const Cell target = apply_action(agent.pos, actions[i]);
    if (!in_bounds(target) || agent_at(target) >= 0) {
      result.invalid[i] = true;
      result.rewards[i] += kInvalidMovePenalty;
      continue;
    }
    agent_grid_[static_cast<std::size_t>(cell_index(agent.pos))] = -1;
    agent.pos = target;
    agent_grid_[static_cast<std::size_t>(cell_index(target))] = agent.id;
    const int g = goal_at(target);
    if (g >= 0 && !goals_[static_cast<std::size_t>(g)].collected) {
      auto& goal = goals_[static_cast<std::size_t>(g)];
      goal.collected = true;
      if (!goal.discovered) {
        goal.discovered = true;
        result.discovered_goals.push_back(g);
      }
      ++collected_count_;
      result.rewards[i] += kGoalReward;
      result.collected_goals.push_back(g);
    }
  }

  auto fresh = visibility_pass();
  result.discovered_goals.insert(result.discovered_goals.end(), fresh.begin(), fresh.end());
  std::sort(result.discovered_goals.begin(), result.discovered_goals.end());
  ++t_;
  done_ = collected_count_ == config_.n_goals || t_ >= config_.max_steps;
  result.done = done_;
  return result;
}

std::vector<GoalState> EnvState::visible_goals(int agent_id) const {
  if (agent_id < 0 || agent_id >= static_cast<int>(agents_.size())) {
    throw UsageError("invalid agent id " + std::to_string(agent_id));
  }
  const Cell origin = agents_[static_cast<std::size_t>(agent_id)].pos;
  const double r2 = config_.vision_radius * config_.vision_radius;
  std::vector<GoalState> out;
  for (const auto& g : goals_) {
    if (g.discovered && !g.collected && squared_distance(g.pos, origin) <= r2) out.push_back(g);
  }
  std::sort(out.begin(), out.end(), [origin](const GoalState& a, const GoalState& b) {
    const double da = squared_distance(a.pos, origin);
    const double db = squared_distance(b.pos, origin);
    return da != db ? da < db : a.id < b.id;
  });
  return out;
}

double EnvState::coverage_fraction() const {
  const double cells = static_cast<double>(config_.grid_size) * config_.grid_size;
  return covered_count_ / cells;
}

double EnvState::collection_fraction() const {
  return static_cast<double>(collected_count_) / config_.n_goals;
}

}  // namespace swarm
