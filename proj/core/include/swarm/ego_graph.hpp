#pragma once

#include <array>
#include <string>
#include <vector>

#include "swarm/grid_world.hpp"

namespace swarm {

/// Per-node feature layout:
///   [0,1]   position relative to the observing agent
///   [2..10] three nearest goal slots (dx, dy, collected) relative to the observer
///   [11]    entity type (0 agent, 1 goal)
inline constexpr int kFeatureDim = 12;
inline constexpr int kGoalSlots = 3;
using NodeFeature = std::array<double, kFeatureDim>;

enum class NodeKind : std::uint8_t { Agent = 0, Goal = 1 };
enum class EdgeKind : std::uint8_t { AgentAgent = 0, AgentGoal = 1 };

struct GraphNode {
  NodeKind kind = NodeKind::Agent;
  int entity_id = 0;
  Cell pos;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

/// Directed edge src -> dst. The message flows from src into dst, so dst
/// attends over its in-neighbors.
struct Edge {
  int src = 0;
  int dst = 0;
  double weight = 0.0;
  EdgeKind kind = EdgeKind::AgentAgent;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct GraphConfig {
  int k = 3;
  double vision_radius = 4.5;
  bool include_collected_goals = false;

  void validate() const;
};

/// Graph seen by one observing agent. Node 0 is the observer, followed by the
/// remaining agents in id order and then the goal nodes in id order. Features
/// are raw (cell units); normalize_features() maps them to network scale.
struct EgoGraph {
  int observer = 0;
  int grid_size = 0;
  std::vector<GraphNode> nodes;
  std::vector<NodeFeature> features;
  std::vector<Edge> edges;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int agent_count() const;
  int goal_count() const;
  /// Largest number of agent-agent edges leaving any agent node.
  int max_agent_out_degree() const;

  friend bool operator==(const EgoGraph&, const EgoGraph&) = default;
};

EgoGraph build_ego_graph(const EnvState& env, int agent_id, const GraphConfig& gcfg);

/// Feature vector for `node` as seen by `observer`. Goal slots are filled with
/// the three goals from `candidates` nearest to the node (the node's own goal
/// excluded), ascending distance, ties by goal id, zero padded.
NodeFeature node_features(const EnvState& env, int observer, const GraphNode& node,
                          const std::vector<GoalState>& candidates);

/// Divides every position component by the grid size.
NodeFeature normalize_features(const NodeFeature& f, int grid_size);

/// Indices of the k nearest other agents (ties by lower id).
std::vector<int> nearest_agents(const EnvState& env, int agent_id, int k);

/// Text dump: `node <idx> <type> <x> <y>` then `edge <src> <dst> <weight>`.
std::string dump_graph(const EgoGraph& graph);

}  // namespace swarm
