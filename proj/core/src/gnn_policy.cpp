#include "swarm/gnn_policy.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace swarm {

void PolicyConfig::validate() const {
  if (heads < 1) throw ConfigError("heads must be >= 1");
  if (hidden < heads) throw ConfigError("hidden must be >= heads");
  if (layers < 1) throw ConfigError("layers must be >= 1");
  if (type_embed < 1) throw ConfigError("type_embed must be >= 1");
  if (input_dim != kFeatureDim) throw ConfigError("input_dim must equal the node feature size");
}

GnnPolicy::GnnPolicy(PolicyConfig config) : config_(config) { config_.validate(); }

namespace {

std::string layer_name(int l, const char* what) {
  return "layer" + std::to_string(l) + "." + what;
}

}  // namespace

ad::ParamStore GnnPolicy::init_params(std::uint64_t seed) const {
  const int d = config_.hidden;
  const int h = config_.heads;
  const int dk = config_.key_dim();
  ad::ParamStore p;
  std::uint64_t s = seed * 1000003ULL;
  p.add_glorot("embed.type", 2, config_.type_embed, ++s);
  p.add_glorot("embed.w", config_.input_dim + config_.type_embed + 1, d, ++s);
  p.add_zeros("embed.b", 1, d);
  for (int l = 0; l < config_.layers; ++l) {
    p.add_glorot(layer_name(l, "wq"), d, h * dk, ++s);
    p.add_glorot(layer_name(l, "wk"), d, h * dk, ++s);
    p.add_glorot(layer_name(l, "wv"), d, h * d, ++s);
    p.add_glorot(layer_name(l, "we"), 1, h, ++s);
  }
  p.add_glorot("head.w", d, kActionCount, ++s);
  p.add_zeros("head.b", 1, kActionCount);
  return p;
}

ad::Var GnnPolicy::forward(ad::Tape& tape, const ad::ParamStore& params,
                           const GraphBatch& batch) const {
  return forward_traced(tape, params, batch, nullptr);
}

ad::Var GnnPolicy::forward_traced(ad::Tape& tape, const ad::ParamStore& params,
                                  const GraphBatch& batch,
                                  std::vector<ad::Matrix>* alphas) const {
  const int d = config_.hidden;
  const int dk = config_.key_dim();
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
  auto P = [&](const std::string& name) { return tape.param(params, params.index(name)); };

  const ad::Var feats = tape.constant(batch.features);
  const ad::Var types = ad::gather_rows(tape, P("embed.type"), batch.types);
  const ad::Var ebar = tape.constant(batch.edge_mean);
  const ad::Var parts[] = {feats, types, ebar};
  ad::Var z = ad::affine(tape, ad::concat_cols(tape, parts), P("embed.w"), P("embed.b"));

  for (int l = 0; l < config_.layers; ++l) {
    const ad::Var q = ad::matmul(tape, z, P(layer_name(l, "wq")));
    const ad::Var k = ad::matmul(tape, z, P(layer_name(l, "wk")));
    const ad::Var v = ad::matmul(tape, z, P(layer_name(l, "wv")));
    const ad::Var we = P(layer_name(l, "we"));
    ad::Var next{};
    for (int h = 0; h < config_.heads; ++h) {
      ad::Var logits =
          ad::block_scores(tape, q, k, batch.blocks, batch.n, h * dk, dk, inv_sqrt_dk);
      logits = ad::add_scaled_const(tape, logits, we, h, batch.edge_weight);
      const ad::Var alpha = ad::softmax_rows(tape, logits, batch.mask);
      if (alphas != nullptr) alphas->push_back(tape.value(alpha));
      const ad::Var msg = ad::relu(
          tape, ad::block_attend(tape, alpha, v, batch.blocks, batch.n, h * d, d));
      next = h == 0 ? msg : ad::add(tape, next, msg);
    }
    z = next;
  }
  const ad::Var obs = ad::gather_rows(tape, z, batch.observer_rows);
  return ad::affine(tape, obs, P("head.w"), P("head.b"));
}

QOutput GnnPolicy::evaluate(const EgoGraph& graph, const ad::ParamStore& params) const {
  const EgoGraph* one[] = {&graph};
  const GraphBatch batch = encode_batch(one);
  ad::Tape tape(false);
  std::vector<ad::Matrix> alphas;
  const ad::Var q = forward_traced(tape, params, batch, &alphas);
  QOutput out;
  for (int a = 0; a < kActionCount; ++a) out.q[static_cast<std::size_t>(a)] = tape.value(q)(0, a);
  out.trace.layers = config_.layers;
  out.trace.heads = config_.heads;
  out.trace.alpha = std::move(alphas);
  return out;
}

std::map<std::string, std::string> GnnPolicy::describe() const {
  return {{"policy", "gnn"},
          {"hidden", std::to_string(config_.hidden)},
          {"heads", std::to_string(config_.heads)},
          {"layers", std::to_string(config_.layers)},
          {"type_embed", std::to_string(config_.type_embed)}};
}

std::unique_ptr<QNetwork> GnnPolicy::clone() const { return std::make_unique<GnnPolicy>(*this); }

std::tuple<int, int, double> AttentionTable::strongest() const {
  std::tuple<int, int, double> best{-1, -1, 0.0};
  for (std::size_t r = 0; r < values.size(); ++r) {
    for (std::size_t c = 0; c < values[r].size(); ++c) {
      if (std::get<0>(best) < 0 || values[r][c] > std::get<2>(best)) {
        best = {static_cast<int>(r), static_cast<int>(c), values[r][c]};
      }
    }
  }
  return best;
}

std::string AttentionTable::to_csv() const {
  std::string out = "source";
  for (int g : goal_ids) out += ",goal_" + std::to_string(g);
  out += '\n';
  char buf[32];
  for (std::size_t r = 0; r < agent_ids.size(); ++r) {
    out += "agent_" + std::to_string(agent_ids[r]);
    for (double v : values[r]) {
      std::snprintf(buf, sizeof(buf), ",%.4f", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

AttentionTable export_attention(const AttentionTrace& trace, const EgoGraph& graph,
                                const AttentionExportOptions& options) {
  if (trace.alpha.empty()) throw UsageError("export_attention: empty trace");
  const int n = graph.node_count();
  ad::Matrix avg(n, n);
  const int first = options.average_layers ? 0 : trace.layers - 1;
  int count = 0;
  for (int l = first; l < trace.layers; ++l) {
    for (int h = 0; h < trace.heads; ++h) {
      const ad::Matrix& a = trace.at(l, h);
      if (a.rows() != n || a.cols() != n) {
        throw UsageError("export_attention: trace does not match graph size");
      }
      for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += a[i];
      ++count;
    }
  }
  for (std::size_t i = 0; i < avg.size(); ++i) avg[i] /= count;

  AttentionTable table;
  std::vector<int> agent_rows;
  std::vector<int> goal_cols;
  for (int i = 0; i < n; ++i) {
    const auto& node = graph.nodes[static_cast<std::size_t>(i)];
    if (node.kind == NodeKind::Agent) {
      agent_rows.push_back(i);
      table.agent_ids.push_back(node.entity_id);
    } else {
      goal_cols.push_back(i);
      table.goal_ids.push_back(node.entity_id);
    }
  }
  for (int r : agent_rows) {
    std::vector<double> row;
    double total = 0.0;
    for (int c : goal_cols) {
      row.push_back(avg(r, c));
      total += avg(r, c);
    }
    if (options.renormalize_goals && total > 0.0) {
      for (double& v : row) v /= total;
    }
    table.values.push_back(std::move(row));
  }
  return table;
}

}  // namespace swarm
