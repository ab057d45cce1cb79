#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "swarm/ego_graph.hpp"

namespace swarm {

struct Transition {
  std::shared_ptr<const EgoGraph> state;
  int action = 0;
  double reward = 0.0;
  std::shared_ptr<const EgoGraph> next_state;
  bool terminal = false;
  int agent_id = 0;
};

/// Binary segment tree over leaf priorities keeping subtree sums and maxima.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);

  void set(std::size_t leaf, double priority);
  double get(std::size_t leaf) const { return sums_[base_ + leaf]; }
  double total() const { return sums_[1]; }
  double max() const { return maxes_[1]; }
  std::size_t capacity() const { return capacity_; }
  /// Leaf whose cumulative interval contains `mass` in [0, total()).
  std::size_t find(double mass) const;

 private:
  std::size_t capacity_;
  std::size_t base_;
  std::vector<double> sums_;
  std::vector<double> maxes_;
};

enum class WeightRule {
  /// w_i = (N * P(i))^-beta with P(i) = p_i / sum p.
  Proportional,
  /// w_i = (1/N * 1/p_i)^beta with N the batch size.
  Literal,
};

struct ReplayConfig {
  std::size_t capacity = 100000;
  double alpha = 0.6;
  double epsilon = 0.01;
  WeightRule weight_rule = WeightRule::Proportional;
};

/// Slot index plus the push sequence number that wrote it, so priority
/// updates for evicted entries can be recognized.
struct SampleRef {
  std::size_t slot = 0;
  std::uint64_t stamp = 0;
};

struct SampleBatch {
  std::vector<const Transition*> items;
  std::vector<SampleRef> refs;
  std::vector<double> weights;
};

/// Proportional prioritized replay over a ring of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(ReplayConfig config = {});

  /// Stores t with the current maximum priority (1.0 when empty), evicting the
  /// oldest entry when full.
  void push(Transition t);

  /// Draws `batch` indices i.i.d. with P(i) = p_i / sum p. Weights are
  /// max-normalized so the largest is exactly 1. Throws UsageError when fewer
  /// than `batch` transitions are stored.
  SampleBatch sample(std::size_t batch, double beta, std::mt19937_64& rng) const;

  /// Sets p = (|delta| + epsilon)^alpha for each reference. References whose
  /// slot was overwritten since sampling are skipped and counted.
  void update_priorities(std::span<const SampleRef> refs, std::span<const double> td_errors);

  double priority_of(double td_error) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return config_.capacity; }
  double priority(std::size_t slot) const { return tree_.get(slot); }
  double total_priority() const { return tree_.total(); }
  std::uint64_t stale_updates() const { return stale_updates_; }
  const Transition& at(std::size_t slot) const { return items_[slot]; }
  std::uint64_t stamp(std::size_t slot) const { return stamps_[slot]; }
  const ReplayConfig& config() const { return config_; }

  /// `index,priority` lines with a header, for debugging.
  std::string dump_priorities() const;

 private:
  ReplayConfig config_;
  SumTree tree_;
  std::vector<Transition> items_;
  std::vector<std::uint64_t> stamps_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  std::uint64_t pushes_ = 0;
  std::uint64_t stale_updates_ = 0;
};

}  // namespace swarm
