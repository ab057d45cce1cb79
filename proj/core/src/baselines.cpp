#include "swarm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace swarm {

namespace {

bool cell_less(Cell a, Cell b) { return std::tie(a.x, a.y) < std::tie(b.x, b.y); }

Action first_valid(const EnvState& env, int agent_id, Action preferred) {
  if (move_is_valid(env, agent_id, preferred)) return preferred;
  for (int a = 0; a < kActionCount; ++a) {
    if (move_is_valid(env, agent_id, static_cast<Action>(a))) return static_cast<Action>(a);
  }
  return preferred;
}

Action sweep_direction(Cell c, int size) {
  const int last = size - 1;
  if (c.x == 0) return c.y > 0 ? Action::Up : Action::Right;
  if (c.y == 0) return c.x < last ? Action::Right : Action::Down;
  if (c.y == last) return Action::Left;
  if (c.y % 2 == 1) return c.x > 1 ? Action::Left : Action::Down;
  return c.x < last ? Action::Right : Action::Down;
}

std::vector<Cell> positions(const std::vector<GoalState>& goals) {
  std::vector<Cell> out;
  out.reserve(goals.size());
  for (const auto& g : goals) out.push_back(g.pos);
  return out;
}

std::vector<Cell> agent_cells(const EnvState& env) {
  std::vector<Cell> out;
  for (const auto& a : env.agents()) out.push_back(a.pos);
  return out;
}

}  // namespace

std::vector<GoalState> known_goals(const EnvState& env, bool omniscient) {
  std::vector<GoalState> out;
  for (const auto& g : env.goals()) {
    if (!g.collected && (omniscient || g.discovered)) out.push_back(g);
  }
  return out;
}

bool move_is_valid(const EnvState& env, int agent_id, Action a) {
  const Cell next = apply_action(env.agents()[static_cast<std::size_t>(agent_id)].pos, a);
  return env.in_bounds(next) && env.agent_at(next) < 0;
}

Action sweep_action(const EnvState& env, int agent_id) {
  const Cell c = env.agents()[static_cast<std::size_t>(agent_id)].pos;
  return first_valid(env, agent_id, sweep_direction(c, env.config().grid_size));
}

Action move_toward(const EnvState& env, int agent_id, Cell target) {
  const Cell here = env.agents()[static_cast<std::size_t>(agent_id)].pos;
  const double current = squared_distance(here, target);
  bool found = false;
  std::tuple<double, int, int> best{};
  for (int code = 0; code < kActionCount; ++code) {
    const auto a = static_cast<Action>(code);
    if (!move_is_valid(env, agent_id, a)) continue;
    const double d = squared_distance(apply_action(here, a), target);
    if (d >= current) continue;
    const int axis = (a == Action::Left || a == Action::Right) ? 0 : 1;
    const std::tuple<double, int, int> key{d, axis, code};
    if (!found || key < best) {
      best = key;
      found = true;
    }
  }
  if (!found) return sweep_action(env, agent_id);
  return static_cast<Action>(std::get<2>(best));
}

Action greedy_policy(const EnvState& env, int agent_id, bool omniscient) {
  const auto goals = known_goals(env, omniscient);
  if (goals.empty()) return sweep_action(env, agent_id);
  const Cell here = env.agents()[static_cast<std::size_t>(agent_id)].pos;
  const GoalState* nearest = &goals.front();
  for (const auto& g : goals) {
    const double d = squared_distance(here, g.pos);
    const double best = squared_distance(here, nearest->pos);
    if (d < best || (d == best && g.id < nearest->id)) nearest = &g;
  }
  return move_toward(env, agent_id, nearest->pos);
}

Action random_policy(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> any(0, kActionCount - 1);
  return static_cast<Action>(any(rng));
}

double assignment_cost(std::span<const Cell> agents, std::span<const Cell> goals,
                       std::span<const int> assignment, double duplicate_penalty) {
  double cost = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const int g = assignment[i];
    cost += distance(agents[i], goals[static_cast<std::size_t>(g)]);
    for (std::size_t j = 0; j < i; ++j) {
      if (assignment[j] == g) {
        cost += duplicate_penalty;
        break;
      }
    }
  }
  return cost;
}

PsoResult pso_assign(std::span<const Cell> agents, std::span<const Cell> goals,
                     const PsoParams& params, double duplicate_penalty, std::mt19937_64& rng) {
  if (goals.empty()) throw UsageError("pso_assign needs at least one goal");
  if (params.particles < 1 || params.iterations < 0) {
    throw ConfigError("pso needs >= 1 particle and >= 0 iterations");
  }
  const std::size_t dims = agents.size();
  const double span_hi = static_cast<double>(goals.size());
  const double upper = std::nextafter(span_hi, 0.0);
  const double vmax = std::max(1.0, 0.5 * span_hi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto decode = [&](const std::vector<double>& x) {
    std::vector<int> out(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      out[d] = std::min(static_cast<int>(x[d]), static_cast<int>(goals.size()) - 1);
    }
    return out;
  };
  auto cost_of = [&](const std::vector<double>& x) {
    const auto a = decode(x);
    return assignment_cost(agents, goals, a, duplicate_penalty);
  };

  const auto n = static_cast<std::size_t>(params.particles);
  std::vector<std::vector<double>> pos(n, std::vector<double>(dims));
  std::vector<std::vector<double>> vel(n, std::vector<double>(dims));
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t d = 0; d < dims; ++d) {
      pos[p][d] = unit(rng) * upper;
      vel[p][d] = (2.0 * unit(rng) - 1.0) * vmax;
    }
  }
  for (std::size_t d = 0; d < dims; ++d) {
    std::size_t best = 0;
    for (std::size_t g = 1; g < goals.size(); ++g) {
      if (squared_distance(agents[d], goals[g]) < squared_distance(agents[d], goals[best])) {
        best = g;
      }
    }
    pos[0][d] = static_cast<double>(best) + 0.5;
  }

  std::vector<std::vector<double>> pbest = pos;
  std::vector<double> pbest_cost(n);
  std::size_t gbest = 0;
  for (std::size_t p = 0; p < n; ++p) {
    pbest_cost[p] = cost_of(pos[p]);
    if (pbest_cost[p] < pbest_cost[gbest]) gbest = p;
  }
  std::vector<double> g_pos = pbest[gbest];
  double g_cost = pbest_cost[gbest];

  PsoResult out;
  out.history.push_back(g_cost);
  for (int it = 0; it < params.iterations; ++it) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        double v = params.inertia * vel[p][d] +
                   params.cognitive * r1 * (pbest[p][d] - pos[p][d]) +
                   params.social * r2 * (g_pos[d] - pos[p][d]);
        v = std::clamp(v, -vmax, vmax);
        vel[p][d] = v;
        pos[p][d] = std::clamp(pos[p][d] + v, 0.0, upper);
      }
      const double c = cost_of(pos[p]);
      if (c < pbest_cost[p]) {
        pbest_cost[p] = c;
        pbest[p] = pos[p];
      }
      if (c < g_cost) {
        g_cost = c;
        g_pos = pos[p];
      }
    }
    out.history.push_back(g_cost);
  }
  out.assignment = decode(g_pos);
  out.best_cost = g_cost;
  return out;
}

std::vector<std::vector<Cell>> dbscan_clusters(std::span<const Cell> points, double eps,
                                               int min_pts) {
  std::vector<Cell> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), cell_less);
  const std::size_t n = pts.size();
  const double eps2 = eps * eps;
  auto neighbors = [&](std::size_t i) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n; ++j) {
      if (squared_distance(pts[i], pts[j]) <= eps2) out.push_back(j);
    }
    return out;
  };

  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(n, kUnvisited);
  int clusters = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    auto seeds = neighbors(i);
    if (static_cast<int>(seeds.size()) < min_pts) {
      label[i] = kNoise;
      continue;
    }
    const int c = clusters++;
    label[i] = c;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const std::size_t q = seeds[s];
      if (label[q] == kNoise) label[q] = c;
      if (label[q] != kUnvisited) continue;
      label[q] = c;
      const auto more = neighbors(q);
      if (static_cast<int>(more.size()) >= min_pts) {
        seeds.insert(seeds.end(), more.begin(), more.end());
      }
    }
  }

  std::vector<std::vector<Cell>> out(static_cast<std::size_t>(clusters));
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] == kNoise) {
      out.push_back({pts[i]});
    } else {
      out[static_cast<std::size_t>(label[i])].push_back(pts[i]);
    }
  }
  for (auto& c : out) std::sort(c.begin(), c.end(), cell_less);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return cell_less(a.front(), b.front()); });
  return out;
}

std::vector<int> dbscan_assign(std::span<const Cell> agents,
                               const std::vector<std::vector<Cell>>& clusters) {
  std::vector<int> out(agents.size(), -1);
  if (clusters.empty()) return out;
  std::vector<std::pair<double, double>> centers;
  for (const auto& c : clusters) {
    double sx = 0.0;
    double sy = 0.0;
    for (Cell p : c) {
      sx += p.x;
      sy += p.y;
    }
    centers.emplace_back(sx / static_cast<double>(c.size()), sy / static_cast<double>(c.size()));
  }
  auto dist2 = [&](std::size_t a, std::size_t c) {
    const double dx = agents[a].x - centers[c].first;
    const double dy = agents[a].y - centers[c].second;
    return dx * dx + dy * dy;
  };

  std::vector<bool> taken(clusters.size(), false);
  std::size_t matched = 0;
  while (matched < std::min(agents.size(), clusters.size())) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0;
    std::size_t bc = 0;
    for (std::size_t a = 0; a < agents.size(); ++a) {
      if (out[a] >= 0) continue;
      for (std::size_t c = 0; c < clusters.size(); ++c) {
        if (taken[c]) continue;
        const double d = dist2(a, c);
        if (d < best) {
          best = d;
          ba = a;
          bc = c;
        }
      }
    }
    out[ba] = static_cast<int>(bc);
    taken[bc] = true;
    ++matched;
  }
  for (std::size_t a = 0; a < agents.size(); ++a) {
    if (out[a] >= 0) continue;
    std::size_t best = 0;
    for (std::size_t c = 1; c < clusters.size(); ++c) {
      if (dist2(a, c) < dist2(a, best)) best = c;
    }
    out[a] = static_cast<int>(best);
  }
  return out;
}

std::vector<Action> RandomPolicy::act(const EnvState& env, std::mt19937_64& rng) {
  std::vector<Action> out;
  for (std::size_t i = 0; i < env.agents().size(); ++i) out.push_back(random_policy(rng));
  return out;
}

std::unique_ptr<JointPolicy> RandomPolicy::clone() const {
  return std::make_unique<RandomPolicy>(*this);
}

std::vector<Action> GreedyPolicy::act(const EnvState& env, std::mt19937_64&) {
  std::vector<Action> out;
  const int n = static_cast<int>(env.agents().size());
  for (int i = 0; i < n; ++i) out.push_back(greedy_policy(env, i, options_.omniscient));
  return out;
}

std::unique_ptr<JointPolicy> GreedyPolicy::clone() const {
  return std::make_unique<GreedyPolicy>(*this);
}

std::vector<Action> PsoPolicy::act(const EnvState& env, std::mt19937_64& rng) {
  const int n = static_cast<int>(env.agents().size());
  std::vector<Action> out;
  const auto goals = positions(known_goals(env, options_.omniscient));
  if (goals.empty()) {
    for (int i = 0; i < n; ++i) out.push_back(sweep_action(env, i));
    return out;
  }
  const auto agents = agent_cells(env);
  const auto result = pso_assign(agents, goals, options_.pso,
                                 static_cast<double>(env.config().grid_size), rng);
  for (int i = 0; i < n; ++i) {
    const Cell target = goals[static_cast<std::size_t>(result.assignment[static_cast<std::size_t>(i)])];
    out.push_back(move_toward(env, i, target));
  }
  return out;
}

std::unique_ptr<JointPolicy> PsoPolicy::clone() const {
  return std::make_unique<PsoPolicy>(*this);
}

std::vector<Action> DbscanPolicy::act(const EnvState& env, std::mt19937_64&) {
  const int n = static_cast<int>(env.agents().size());
  std::vector<Action> out;
  const auto goals = positions(known_goals(env, options_.omniscient));
  if (goals.empty()) {
    for (int i = 0; i < n; ++i) out.push_back(sweep_action(env, i));
    return out;
  }
  const auto agents = agent_cells(env);
  const auto clusters = dbscan_clusters(goals, options_.dbscan_eps, options_.dbscan_min_pts);
  const auto assign = dbscan_assign(agents, clusters);
  for (int i = 0; i < n; ++i) {
    const auto& members = clusters[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    const Cell here = agents[static_cast<std::size_t>(i)];
    Cell target = members.front();
    for (Cell c : members) {
      if (squared_distance(here, c) < squared_distance(here, target)) target = c;
    }
    out.push_back(move_toward(env, i, target));
  }
  return out;
}

std::unique_ptr<JointPolicy> DbscanPolicy::clone() const {
  return std::make_unique<DbscanPolicy>(*this);
}

}  // namespace swarm
