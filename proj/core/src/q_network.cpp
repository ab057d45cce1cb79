#include "swarm/q_network.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "swarm/gnn_policy.hpp"
#include "swarm/mlp_policy.hpp"

namespace swarm {

GraphBatch encode_batch(std::span<const EgoGraph* const> graphs) {
  if (graphs.empty()) throw std::invalid_argument("encode_batch: empty batch");
  GraphBatch b;
  b.blocks = static_cast<int>(graphs.size());
  for (const EgoGraph* g : graphs) b.n = std::max(b.n, g->node_count());
  if (b.n == 0) throw std::invalid_argument("encode_batch: graph without nodes");
  const int rows = b.blocks * b.n;
  b.features = ad::Matrix(rows, kFeatureDim);
  b.types.assign(static_cast<std::size_t>(rows), 0);
  b.edge_mean = ad::Matrix(rows, 1);
  b.mask = ad::Matrix(rows, b.n);
  b.edge_weight = ad::Matrix(rows, b.n);
  b.observer_rows.reserve(graphs.size());
  b.node_counts.reserve(graphs.size());

  std::vector<int> incident;
  for (int gi = 0; gi < b.blocks; ++gi) {
    const EgoGraph& g = *graphs[static_cast<std::size_t>(gi)];
    const int base = gi * b.n;
    const double inv_l = 1.0 / g.grid_size;
    b.observer_rows.push_back(base);
    b.node_counts.push_back(g.node_count());
    for (int i = 0; i < g.node_count(); ++i) {
      const auto f = normalize_features(g.features[static_cast<std::size_t>(i)], g.grid_size);
      std::copy(f.begin(), f.end(), b.features.row(base + i).begin());
      b.types[static_cast<std::size_t>(base + i)] =
          g.nodes[static_cast<std::size_t>(i)].kind == NodeKind::Goal ? 1 : 0;
      b.mask(base + i, i) = 1.0;
    }
    incident.assign(static_cast<std::size_t>(g.node_count()), 0);
    for (const auto& e : g.edges) {
      const double w = e.weight * inv_l;
      b.mask(base + e.dst, e.src) = 1.0;
      b.edge_weight(base + e.dst, e.src) = w;
      b.edge_mean(base + e.src, 0) += w;
      b.edge_mean(base + e.dst, 0) += w;
      ++incident[static_cast<std::size_t>(e.src)];
      ++incident[static_cast<std::size_t>(e.dst)];
    }
    for (int i = 0; i < g.node_count(); ++i) {
      const int c = incident[static_cast<std::size_t>(i)];
      if (c > 0) b.edge_mean(base + i, 0) /= c;
    }
  }
  return b;
}

ad::Matrix q_values(const QNetwork& net, const ad::ParamStore& params,
                    std::span<const EgoGraph* const> graphs) {
  ad::Tape tape(false);
  const GraphBatch batch = encode_batch(graphs);
  return tape.value(net.forward(tape, params, batch));
}

Action greedy_action(std::span<const double> q) {
  if (q.size() != kActionCount) throw std::invalid_argument("greedy_action: expected 4 values");
  std::size_t best = 0;
  for (std::size_t a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = a;
  }
  return static_cast<Action>(best);
}

namespace {

int meta_int(const std::map<std::string, std::string>& meta, const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw ConfigError("checkpoint metadata lacks '" + key + "'");
  return std::stoi(it->second);
}

}  // namespace

std::unique_ptr<QNetwork> network_from_meta(const std::map<std::string, std::string>& meta) {
  auto it = meta.find("policy");
  if (it == meta.end()) throw ConfigError("checkpoint metadata lacks 'policy'");
  if (it->second == "gnn") {
    PolicyConfig cfg;
    cfg.hidden = meta_int(meta, "hidden");
    cfg.heads = meta_int(meta, "heads");
    cfg.layers = meta_int(meta, "layers");
    cfg.type_embed = meta_int(meta, "type_embed");
    return std::make_unique<GnnPolicy>(cfg);
  }
  if (it->second == "mlp") {
    MlpConfig cfg;
    cfg.hidden.clear();
    std::istringstream in(meta.at("mlp_hidden"));
    std::string part;
    while (std::getline(in, part, ',')) cfg.hidden.push_back(std::stoi(part));
    return std::make_unique<MlpPolicy>(cfg);
  }
  throw ConfigError("unknown policy kind in checkpoint: " + it->second);
}

}  // namespace swarm
