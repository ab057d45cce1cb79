#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "swarm/ego_graph.hpp"
#include "swarm/matrix.hpp"
#include "swarm/param_store.hpp"
#include "swarm/tape.hpp"

namespace swarm {

/// A batch of ego graphs padded to a common node count `n`. Row g*n + i holds
/// node i of graph g. Pad rows have zero features and are masked out.
struct GraphBatch {
  int blocks = 0;
  int n = 0;
  ad::Matrix features;       // (blocks*n) x kFeatureDim, normalized
  std::vector<int> types;    // per row: 0 agent, 1 goal (pads use 0)
  ad::Matrix edge_mean;      // (blocks*n) x 1, mean incident edge weight / L
  ad::Matrix mask;           // (blocks*n) x n, 1 where row node attends column node
  ad::Matrix edge_weight;    // (blocks*n) x n, weight of edge col -> row, / L
  std::vector<int> observer_rows;
  std::vector<int> node_counts;
};

GraphBatch encode_batch(std::span<const EgoGraph* const> graphs);

/// Maps a batch of ego graphs to per-graph action values (blocks x kActionCount).
class QNetwork {
 public:
  virtual ~QNetwork() = default;

  virtual std::string kind() const = 0;
  virtual ad::ParamStore init_params(std::uint64_t seed) const = 0;
  virtual ad::Var forward(ad::Tape& tape, const ad::ParamStore& params,
                          const GraphBatch& batch) const = 0;
  /// Architecture description stored in checkpoints.
  virtual std::map<std::string, std::string> describe() const = 0;
  virtual std::unique_ptr<QNetwork> clone() const = 0;
};

/// Inference-only forward: blocks x kActionCount values.
ad::Matrix q_values(const QNetwork& net, const ad::ParamStore& params,
                    std::span<const EgoGraph* const> graphs);

/// Argmax with ties to the lowest action code.
Action greedy_action(std::span<const double> q);

/// Rebuilds a network from checkpoint metadata ("policy" key selects the kind).
std::unique_ptr<QNetwork> network_from_meta(const std::map<std::string, std::string>& meta);

}  // namespace swarm
