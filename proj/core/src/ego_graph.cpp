#include "swarm/ego_graph.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace swarm {

void GraphConfig::validate() const {
  if (k < 0) throw ConfigError("k must be >= 0");
  if (!(vision_radius > 0.0)) throw ConfigError("graph vision_radius must be > 0");
}

int EgoGraph::agent_count() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const GraphNode& n) {
    return n.kind == NodeKind::Agent;
  }));
}

int EgoGraph::goal_count() const { return node_count() - agent_count(); }

int EgoGraph::max_agent_out_degree() const {
  std::vector<int> degree(nodes.size(), 0);
  for (const auto& e : edges) {
    if (e.kind == EdgeKind::AgentAgent) ++degree[static_cast<std::size_t>(e.src)];
  }
  return degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());
}

std::vector<int> nearest_agents(const EnvState& env, int agent_id, int k) {
  const auto& agents = env.agents();
  const Cell origin = agents[static_cast<std::size_t>(agent_id)].pos;
  std::vector<int> others;
  others.reserve(agents.size());
  for (const auto& a : agents) {
    if (a.id != agent_id) others.push_back(a.id);
  }
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), others.size());
  auto closer = [&](int a, int b) {
    const double da = squared_distance(agents[static_cast<std::size_t>(a)].pos, origin);
    const double db = squared_distance(agents[static_cast<std::size_t>(b)].pos, origin);
    return da != db ? da < db : a < b;
  };
  std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(take),
                    others.end(), closer);
  others.resize(take);
  return others;
}

NodeFeature node_features(const EnvState& env, int observer, const GraphNode& node,
                          const std::vector<GoalState>& candidates) {
  const Cell origin = env.agents()[static_cast<std::size_t>(observer)].pos;
  NodeFeature f{};
  f[0] = node.pos.x - origin.x;
  f[1] = node.pos.y - origin.y;

  std::vector<const GoalState*> slots;
  slots.reserve(candidates.size());
  for (const auto& g : candidates) {
    if (node.kind == NodeKind::Goal && g.id == node.entity_id) continue;
    slots.push_back(&g);
  }
  const auto take = std::min<std::size_t>(kGoalSlots, slots.size());
  std::partial_sort(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(take), slots.end(),
                    [&](const GoalState* a, const GoalState* b) {
                      const double da = squared_distance(a->pos, node.pos);
                      const double db = squared_distance(b->pos, node.pos);
                      return da != db ? da < db : a->id < b->id;
                    });
  for (std::size_t s = 0; s < take; ++s) {
    f[2 + 3 * s] = slots[s]->pos.x - origin.x;
    f[3 + 3 * s] = slots[s]->pos.y - origin.y;
    f[4 + 3 * s] = slots[s]->collected ? 1.0 : 0.0;
  }
  f[11] = node.kind == NodeKind::Goal ? 1.0 : 0.0;
  return f;
}

NodeFeature normalize_features(const NodeFeature& f, int grid_size) {
  NodeFeature out = f;
  const double scale = 1.0 / grid_size;
  out[0] *= scale;
  out[1] *= scale;
  for (int s = 0; s < kGoalSlots; ++s) {
    out[2 + 3 * s] *= scale;
    out[3 + 3 * s] *= scale;
  }
  return out;
}

EgoGraph build_ego_graph(const EnvState& env, int agent_id, const GraphConfig& gcfg) {
  const auto& agents = env.agents();
  if (agent_id < 0 || agent_id >= static_cast<int>(agents.size())) {
    throw UsageError("invalid agent id " + std::to_string(agent_id));
  }
  const double r2 = gcfg.vision_radius * gcfg.vision_radius;

  EgoGraph g;
  g.observer = agent_id;
  g.grid_size = env.config().grid_size;
  g.nodes.push_back({NodeKind::Agent, agent_id, agents[static_cast<std::size_t>(agent_id)].pos});
  for (const auto& a : agents) {
    if (a.id != agent_id) g.nodes.push_back({NodeKind::Agent, a.id, a.pos});
  }
  const int n_agents = static_cast<int>(agents.size());

  // Goal slot candidates are every known goal; nodes only for goals some
  // agent currently sees.
  std::vector<GoalState> candidates;
  for (const auto& goal : env.goals()) {
    if (!goal.discovered) continue;
    if (goal.collected && !gcfg.include_collected_goals) continue;
    candidates.push_back(goal);
    const bool seen = std::any_of(agents.begin(), agents.end(), [&](const AgentState& a) {
      return squared_distance(a.pos, goal.pos) <= r2;
    });
    if (seen) g.nodes.push_back({NodeKind::Goal, goal.id, goal.pos});
  }

  // Node index lookup for agents by id.
  std::vector<int> agent_node(static_cast<std::size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) {
    agent_node[static_cast<std::size_t>(g.nodes[static_cast<std::size_t>(i)].entity_id)] = i;
  }

  for (int i = 0; i < n_agents; ++i) {
    const auto& src = g.nodes[static_cast<std::size_t>(i)];
    for (int other : nearest_agents(env, src.entity_id, gcfg.k)) {
      const int j = agent_node[static_cast<std::size_t>(other)];
      g.edges.push_back({i, j, distance(src.pos, g.nodes[static_cast<std::size_t>(j)].pos),
                         EdgeKind::AgentAgent});
    }
  }
  for (int i = 0; i < n_agents; ++i) {
    const auto& a = g.nodes[static_cast<std::size_t>(i)];
    for (int j = n_agents; j < g.node_count(); ++j) {
      const auto& goal = g.nodes[static_cast<std::size_t>(j)];
      const double d2 = squared_distance(a.pos, goal.pos);
      if (d2 > r2 || d2 == 0.0) continue;
      const double d = distance(a.pos, goal.pos);
      g.edges.push_back({i, j, d, EdgeKind::AgentGoal});
      g.edges.push_back({j, i, d, EdgeKind::AgentGoal});
    }
  }

  g.features.reserve(g.nodes.size());
  for (const auto& node : g.nodes) {
    g.features.push_back(node_features(env, agent_id, node, candidates));
  }
  return g;
}

std::string dump_graph(const EgoGraph& graph) {
  std::string out;
  char line[128];
  for (int i = 0; i < graph.node_count(); ++i) {
    const auto& n = graph.nodes[static_cast<std::size_t>(i)];
    std::snprintf(line, sizeof(line), "node %d %s %d %d\n", i,
                  n.kind == NodeKind::Agent ? "agent" : "goal", n.pos.x, n.pos.y);
    out += line;
  }
  for (const auto& e : graph.edges) {
    std::snprintf(line, sizeof(line), "edge %d %d %.6f\n", e.src, e.dst, e.weight);
    out += line;
  }
  return out;
}

}  // namespace swarm
