#pragma once

#include <array>
#include <string>
#include <tuple>
#include <vector>

#include "swarm/q_network.hpp"

namespace swarm {

struct PolicyConfig {
  int input_dim = kFeatureDim;
  int hidden = 64;
  int heads = 3;
  int layers = 2;
  int type_embed = 4;

  int key_dim() const { return hidden / heads; }
  void validate() const;
};

/// Attention coefficients of one forward pass on a single graph:
/// alpha[l * heads + h] is |V| x |V|, row i = weights node i puts on node j.
struct AttentionTrace {
  int layers = 0;
  int heads = 0;
  std::vector<ad::Matrix> alpha;

  const ad::Matrix& at(int layer, int head) const {
    return alpha[static_cast<std::size_t>(layer * heads + head)];
  }
};

struct QOutput {
  std::array<double, kActionCount> q{};
  AttentionTrace trace;
};

/// Entity embedding followed by stacked multi-head, edge-biased attention
/// message passing and a linear Q readout on the observer node.
///
///   z0_i      = [f_i, phi(type_i), mean_edge_i] W_in + b_in
///   a^h_ij    = softmax_j( (z_i Wq^h)(z_j Wk^h)^T / sqrt(dk) + we^h e_ji )
///   z^{l+1}_i = sum_h relu( sum_j a^h_ij z_j Wv^h )
///   Q         = z^L_0 W_out + b_out
///
/// j ranges over in-neighbors of i plus i itself (self weight 0).
class GnnPolicy final : public QNetwork {
 public:
  explicit GnnPolicy(PolicyConfig config = {});

  std::string kind() const override { return "gnn"; }
  ad::ParamStore init_params(std::uint64_t seed) const override;
  ad::Var forward(ad::Tape& tape, const ad::ParamStore& params,
                  const GraphBatch& batch) const override;
  std::map<std::string, std::string> describe() const override;
  std::unique_ptr<QNetwork> clone() const override;

  /// Same as forward() but also returns every attention matrix (batch rows).
  ad::Var forward_traced(ad::Tape& tape, const ad::ParamStore& params, const GraphBatch& batch,
                         std::vector<ad::Matrix>* alphas) const;

  /// Single-graph evaluation with the attention trace.
  QOutput evaluate(const EgoGraph& graph, const ad::ParamStore& params) const;

  const PolicyConfig& config() const { return config_; }

 private:
  PolicyConfig config_;
};

/// Agent rows x goal columns of final-layer attention.
struct AttentionTable {
  std::vector<int> agent_ids;
  std::vector<int> goal_ids;
  std::vector<std::vector<double>> values;

  /// Largest cell as (row, col, value); (-1, -1, 0) when empty.
  std::tuple<int, int, double> strongest() const;
  std::string to_csv() const;
};

struct AttentionExportOptions {
  /// Average all layers instead of using only the last one.
  bool average_layers = false;
  /// Rescale each agent row so its goal columns sum to 1 (rows without goal
  /// neighbors stay zero). When false, raw coefficients are reported.
  bool renormalize_goals = true;
};

AttentionTable export_attention(const AttentionTrace& trace, const EgoGraph& graph,
                                const AttentionExportOptions& options = {});

}  // namespace swarm
