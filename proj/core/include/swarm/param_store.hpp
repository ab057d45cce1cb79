#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "swarm/matrix.hpp"

namespace swarm::ad {

/// Named trainable matrices with gradient accumulators of matching shape.
class ParamStore {
 public:
  /// Adds a parameter; throws std::invalid_argument on a duplicate name.
  std::size_t add(std::string name, Matrix value);
  /// Glorot-uniform initialized weight.
  std::size_t add_glorot(std::string name, int rows, int cols, std::uint64_t seed);
  std::size_t add_zeros(std::string name, int rows, int cols);

  std::size_t size() const { return entries_.size(); }
  std::size_t index(const std::string& name) const;
  bool contains(const std::string& name) const { return by_name_.count(name) != 0; }
  const std::string& name(std::size_t i) const { return entries_[i].name; }

  Matrix& value(std::size_t i) { return entries_[i].value; }
  const Matrix& value(std::size_t i) const { return entries_[i].value; }
  Matrix& value(const std::string& n) { return value(index(n)); }
  const Matrix& value(const std::string& n) const { return value(index(n)); }
  Matrix& grad(std::size_t i) { return entries_[i].grad; }
  const Matrix& grad(std::size_t i) const { return entries_[i].grad; }
  Matrix& grad(const std::string& n) { return grad(index(n)); }

  void zero_grad();
  std::size_t scalar_count() const;
  bool same_layout(const ParamStore& other) const;

  friend bool operator==(const ParamStore& a, const ParamStore& b);

 private:
  struct Entry {
    std::string name;
    Matrix value;
    Matrix grad;
  };
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> by_name_;
};

/// target <- tau * online + (1 - tau) * target, entrywise.
void soft_update(ParamStore& target, const ParamStore& online, double tau);

/// Checkpoint container. Text format, one record per parameter:
///
///   swarm-params 1
///   meta <key> <value>          (zero or more)
///   params <count>
///   param <name> <rows> <cols>
///   <rows*cols values, row-major, %.17g, space separated>
///
/// Values round-trip exactly; the format carries no byte-order dependence.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  ParamStore params;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace swarm::ad
