#include "swarm/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace swarm {

SumTree::SumTree(std::size_t capacity) : capacity_(capacity), base_(1) {
  if (capacity == 0) throw ConfigError("replay capacity must be >= 1");
  while (base_ < capacity) base_ <<= 1;
  sums_.assign(2 * base_, 0.0);
  maxes_.assign(2 * base_, 0.0);
}

void SumTree::set(std::size_t leaf, double priority) {
  std::size_t i = base_ + leaf;
  sums_[i] = priority;
  maxes_[i] = priority;
  for (i >>= 1; i >= 1; i >>= 1) {
    sums_[i] = sums_[2 * i] + sums_[2 * i + 1];
    maxes_[i] = std::max(maxes_[2 * i], maxes_[2 * i + 1]);
  }
}

std::size_t SumTree::find(double mass) const {
  std::size_t i = 1;
  while (i < base_) {
    const std::size_t left = 2 * i;
    if (mass < sums_[left] || sums_[left + 1] <= 0.0) {
      mass = std::min(mass, std::nextafter(sums_[left], 0.0));
      i = left;
    } else {
      mass -= sums_[left];
      i = left + 1;
    }
  }
  return i - base_;
}

ReplayBuffer::ReplayBuffer(ReplayConfig config)
    : config_(config),
      tree_(config.capacity),
      items_(config.capacity),
      stamps_(config.capacity, 0) {
  if (!(config.alpha >= 0.0)) throw ConfigError("PER alpha must be >= 0");
  if (!(config.epsilon > 0.0)) throw ConfigError("PER epsilon must be > 0");
}

void ReplayBuffer::push(Transition t) {
  const double p = size_ == 0 ? 1.0 : tree_.max();
  items_[cursor_] = std::move(t);
  stamps_[cursor_] = ++pushes_;
  tree_.set(cursor_, p);
  cursor_ = (cursor_ + 1) % config_.capacity;
  size_ = std::min(size_ + 1, config_.capacity);
}

double ReplayBuffer::priority_of(double td_error) const {
  return std::pow(std::abs(td_error) + config_.epsilon, config_.alpha);
}

SampleBatch ReplayBuffer::sample(std::size_t batch, double beta, std::mt19937_64& rng) const {
  if (batch == 0 || size_ < batch) {
    throw UsageError("replay holds " + std::to_string(size_) + " transitions, batch needs " +
                     std::to_string(batch));
  }
  const double total = tree_.total();
  std::uniform_real_distribution<double> draw(0.0, total);
  SampleBatch out;
  out.items.reserve(batch);
  out.refs.reserve(batch);
  out.weights.reserve(batch);
  double max_w = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t slot = tree_.find(draw(rng));
    const double p = tree_.get(slot);
    double w = 0.0;
    if (config_.weight_rule == WeightRule::Proportional) {
      w = std::pow(static_cast<double>(size_) * p / total, -beta);
    } else {
      w = std::pow(1.0 / (static_cast<double>(batch) * p), beta);
    }
    out.items.push_back(&items_[slot]);
    out.refs.push_back({slot, stamps_[slot]});
    out.weights.push_back(w);
    max_w = std::max(max_w, w);
  }
  for (double& w : out.weights) w /= max_w;
  return out;
}

void ReplayBuffer::update_priorities(std::span<const SampleRef> refs,
                                     std::span<const double> td_errors) {
  if (refs.size() != td_errors.size()) {
    throw UsageError("update_priorities: index and error counts differ");
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& r = refs[i];
    if (r.slot >= size_ || stamps_[r.slot] != r.stamp) {
      ++stale_updates_;
      continue;
    }
    tree_.set(r.slot, priority_of(td_errors[i]));
  }
}

std::string ReplayBuffer::dump_priorities() const {
  std::string out = "index,priority\n";
  char buf[64];
  for (std::size_t i = 0; i < size_; ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", i, tree_.get(i));
    out += buf;
  }
  return out;
}

}  // namespace swarm
