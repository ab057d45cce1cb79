#include "swarm/presets.hpp"

#include <array>

namespace swarm {

namespace {

struct Row {
  const char* name;
  int agents;
  int goals;
  int grid;
  int steps;
};

constexpr std::array<Row, 7> kRows = {{
    {"cfg-10", 2, 10, 10, 150},
    {"cfg-20", 4, 20, 20, 150},
    {"cfg-30", 8, 43, 30, 175},
    {"cfg-40", 15, 76, 40, 200},
    {"cfg-50", 23, 118, 50, 250},
    {"cfg-60", 33, 169, 60, 300},
    {"cfg-bench", 5, 76, 100, 600},
}};

}  // namespace

EnvConfig preset(const std::string& name) {
  for (const Row& r : kRows) {
    if (name == r.name) {
      EnvConfig cfg;
      cfg.n_agents = r.agents;
      cfg.n_goals = r.goals;
      cfg.grid_size = r.grid;
      cfg.max_steps = r.steps;
      return cfg;
    }
  }
  throw ConfigError("unknown preset: " + name);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const Row& r : kRows) out.emplace_back(r.name);
  return out;
}

}  // namespace swarm
