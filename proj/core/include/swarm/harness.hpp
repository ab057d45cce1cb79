#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "swarm/baselines.hpp"
#include "swarm/dqn_trainer.hpp"
#include "swarm/ego_graph.hpp"
#include "swarm/gnn_policy.hpp"
#include "swarm/grid_world.hpp"
#include "swarm/mlp_policy.hpp"

namespace swarm {

/// Fully resolved description of one CLI invocation. Every field has a
/// manifest key (see to_manifest), so a manifest reproduces the run.
struct RunSpec {
  std::string command = "train";
  std::string preset = "cfg-10";
  EnvConfig env;
  GraphConfig graph;
  std::string policy = "gnn";
  PolicyConfig gnn;
  MlpConfig mlp;
  TrainConfig train;
  BaselineOptions baseline;
  std::vector<std::uint64_t> seeds = {1};
  int eval_episodes = 100;
  /// Step at which export-attention captures weights; -1 means mid-episode.
  int at_step = -1;
  /// Observer whose ego graph export-attention reads.
  int observer = 0;
  std::vector<int> k_values = {2, 3, 4, 5, 6, 7};
  std::filesystem::path out_dir = "runs";
  std::filesystem::path checkpoint;
  std::filesystem::path checkpoint_mlp;
  int threads = 1;

  /// Throws ConfigError on any inconsistent field.
  void validate() const;
};

/// Preset then defaults appropriate for the command.
RunSpec default_spec(const std::string& command);

std::map<std::string, std::string> to_manifest(const RunSpec& spec);
std::string format_manifest(const std::map<std::string, std::string>& manifest);
std::map<std::string, std::string> parse_manifest(const std::string& text);
std::map<std::string, std::string> read_manifest(const std::filesystem::path& path);

/// Applies key=value overrides. "preset" is applied first so explicit
/// environment keys win; preset "custom" only relabels. Unknown keys and malformed values throw ConfigError.
void apply_overrides(RunSpec& spec, const std::map<std::string, std::string>& kv);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

struct ReportRow {
  std::string policy;
  std::string preset;
  std::string seed;
  Summary summary;
  double wall_seconds = 0.0;
};

inline constexpr const char* kReportHeader =
    "policy,preset,seed,episodes,collection_fraction,collection_std,coverage_fraction,"
    "coverage_std,steps_mean,steps_std,wall_seconds";
std::string format_report_row(const ReportRow& row);

std::shared_ptr<QNetwork> make_network(const RunSpec& spec);

/// Baseline or learned policy by name. Learned kinds load `checkpoint`.
std::unique_ptr<JointPolicy> make_policy(const std::string& kind, const RunSpec& spec,
                                         const std::filesystem::path& checkpoint);

struct TrainOutcome {
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  TrainResult result;
};

/// Trains one model per seed into out_dir/seed_<s>/ (checkpoint.txt,
/// metrics.csv, manifest.txt).
std::vector<TrainOutcome> run_train(const RunSpec& spec, std::ostream& log);

/// E greedy episodes per seed; writes out_dir/eval.csv.
std::vector<ReportRow> run_eval(const RunSpec& spec, std::ostream& log);

/// Six policies over shared seeds; writes out_dir/compare.csv with one row
/// per policy and seed plus one aggregate row per policy.
std::vector<ReportRow> run_compare(const RunSpec& spec, std::ostream& log);

struct AblationRow {
  int k = 0;
  std::uint64_t seed = 0;
  Summary summary;
  int max_out_degree = 0;
  std::int64_t graphs_checked = 0;
  double wall_seconds = 0.0;
};

inline constexpr const char* kAblationHeader =
    "k,seed,episodes,collection_fraction,coverage_fraction,steps_mean,max_out_degree,"
    "graphs_checked,wall_seconds";
std::string format_ablation_row(const AblationRow& row);

/// Trains and evaluates a GNN for every k and seed; writes
/// out_dir/ablate_k.csv. Throws std::runtime_error if any ego graph has an
/// agent with more than k agent neighbors.
std::vector<AblationRow> run_ablate_k(const RunSpec& spec, std::ostream& log);

struct AttentionExport {
  int step = 0;
  EgoGraph graph;
  AttentionTable table;
};

/// Plays one greedy episode and captures the observer's attention at
/// at_step; writes out_dir/attention.csv and out_dir/graph.txt.
AttentionExport run_export_attention(const RunSpec& spec, std::ostream& log);

}  // namespace swarm
