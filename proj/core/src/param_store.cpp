#include "swarm/param_store.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace swarm::ad {

std::size_t ParamStore::add(std::string name, Matrix value) {
  if (by_name_.count(name) != 0) throw std::invalid_argument("duplicate parameter " + name);
  const std::size_t i = entries_.size();
  Matrix grad(value.rows(), value.cols());
  by_name_.emplace(name, i);
  entries_.push_back({std::move(name), std::move(value), std::move(grad)});
  return i;
}

std::size_t ParamStore::add_glorot(std::string name, int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (auto& v : m.values()) v = dist(rng);
  return add(std::move(name), std::move(m));
}

std::size_t ParamStore::add_zeros(std::string name, int rows, int cols) {
  return add(std::move(name), Matrix(rows, cols));
}

std::size_t ParamStore::index(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw std::out_of_range("unknown parameter " + name);
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) e.grad.set_zero();
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

bool ParamStore::same_layout(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name ||
        !entries_[i].value.same_shape(other.entries_[i].value)) {
      return false;
    }
  }
  return true;
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  if (!a.same_layout(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a.value(i) == b.value(i))) return false;
  }
  return true;
}

void soft_update(ParamStore& target, const ParamStore& online, double tau) {
  if (!target.same_layout(online)) throw std::invalid_argument("soft_update: layout mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto dst = target.value(i).values();
    auto src = online.value(i).values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = tau * src[j] + (1.0 - tau) * dst[j];
  }
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << "swarm-params 1\n";
  for (const auto& [k, v] : ckpt.meta) out << "meta " << k << ' ' << v << '\n';
  out << "params " << ckpt.params.size() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const auto& m = ckpt.params.value(i);
    out << "param " << ckpt.params.name(i) << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t j = 0; j < m.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m[j]);
      out << (j == 0 ? "" : " ") << buf;
    }
    out << '\n';
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "swarm-params") {
    throw std::runtime_error("not a swarm parameter checkpoint");
  }
  if (version != 1) throw std::runtime_error("unsupported checkpoint version");
  Checkpoint ckpt;
  std::string tag;
  while (in >> tag && tag == "meta") {
    std::string key;
    std::string value;
    in >> key;
    std::getline(in >> std::ws, value);
    ckpt.meta[key] = value;
  }
  std::size_t count = 0;
  if (tag != "params" || !(in >> count)) throw std::runtime_error("malformed checkpoint header");
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    int rows = 0;
    int cols = 0;
    if (!(in >> tag >> name >> rows >> cols) || tag != "param" || rows < 0 || cols < 0) {
      throw std::runtime_error("malformed checkpoint record");
    }
    std::vector<double> values(static_cast<std::size_t>(rows) * cols);
    std::string token;
    for (auto& v : values) {
      if (!(in >> token)) throw std::runtime_error("truncated checkpoint values for " + name);
      char* end = nullptr;
      v = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0') {
        throw std::runtime_error("bad checkpoint value '" + token + "' in " + name);
      }
    }
    ckpt.params.add(name, Matrix(rows, cols, std::move(values)));
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  write_checkpoint(out, ckpt);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  return read_checkpoint(in);
}

}  // namespace swarm::ad
