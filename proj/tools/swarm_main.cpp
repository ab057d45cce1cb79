// swarm: train, evaluate, compare, ablate, and export attention from the
// command line. Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "swarm/harness.hpp"
#include "swarm/presets.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Flags {
  std::string preset;
  std::optional<int> agents;
  std::optional<int> goals;
  std::optional<int> grid;
  std::optional<int> max_steps;
  std::string policy;
  std::optional<long long> steps;
  std::string seeds;
  std::optional<int> k;
  std::string k_values;
  std::string out;
  std::optional<int> at_step;
  std::optional<int> episodes;
  std::optional<int> observer;
  std::string checkpoint;
  std::string checkpoint_mlp;
  std::string config;
  bool omniscient = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--preset", f.preset, "environment preset (" + [] {
    std::string names;
    for (const auto& n : swarm::preset_names()) names += (names.empty() ? "" : ", ") + n;
    return names;
  }() + ")");
  cmd->add_option("--agents", f.agents, "number of agents");
  cmd->add_option("--goals", f.goals, "number of goals");
  cmd->add_option("--grid", f.grid, "grid side length");
  cmd->add_option("--max-steps", f.max_steps, "steps per episode");
  cmd->add_option("--policy", f.policy, "gnn, mlp, greedy, random, pso, dbscan (comma list or all for compare)");
  cmd->add_option("--steps", f.steps, "training environment steps");
  cmd->add_option("--seed", f.seeds, "comma-separated seed list");
  cmd->add_option("--k", f.k, "agent neighbors per ego graph");
  cmd->add_option("--k-values", f.k_values, "comma-separated k list for ablate-k");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--at-step", f.at_step, "capture step for export-attention");
  cmd->add_option("--episodes", f.episodes, "evaluation episodes per seed");
  cmd->add_option("--observer", f.observer, "observer agent for export-attention");
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint file (gnn, or the learned policy)");
  cmd->add_option("--checkpoint-mlp", f.checkpoint_mlp, "mlp checkpoint for compare");
  cmd->add_option("--config", f.config, "key=value override file (a run manifest works)");
  cmd->add_flag("--omniscient", f.omniscient, "baselines see undiscovered goals");
}

swarm::RunSpec resolve(const std::string& command, const Flags& f) {
  swarm::RunSpec spec = swarm::default_spec(command);
  if (!f.config.empty()) swarm::apply_overrides(spec, swarm::read_manifest(f.config));

  std::map<std::string, std::string> kv;
  if (!f.preset.empty()) kv["preset"] = f.preset;
  if (f.agents) kv["n_agents"] = std::to_string(*f.agents);
  if (f.goals) kv["n_goals"] = std::to_string(*f.goals);
  if (f.grid) kv["grid_size"] = std::to_string(*f.grid);
  if (f.max_steps) kv["max_steps"] = std::to_string(*f.max_steps);
  if (!f.policy.empty()) kv["policy"] = f.policy;
  if (f.steps) kv["total_steps"] = std::to_string(*f.steps);
  if (!f.seeds.empty()) kv["seeds"] = f.seeds;
  if (f.k) kv["k"] = std::to_string(*f.k);
  if (!f.k_values.empty()) kv["k_values"] = f.k_values;
  if (f.at_step) kv["at_step"] = std::to_string(*f.at_step);
  if (f.episodes) kv["eval_episodes"] = std::to_string(*f.episodes);
  if (f.observer) kv["observer"] = std::to_string(*f.observer);
  if (f.omniscient) kv["omniscient"] = "true";
  swarm::apply_overrides(spec, kv);

  if (f.agents || f.goals || f.grid || f.max_steps) spec.preset = "custom";
  if (!f.out.empty()) spec.out_dir = f.out;
  if (!f.checkpoint.empty()) spec.checkpoint = f.checkpoint;
  if (!f.checkpoint_mlp.empty()) spec.checkpoint_mlp = f.checkpoint_mlp;
  spec.validate();
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent gridworld training and benchmark harness"};
  app.require_subcommand(1);
  Flags flags;
  const char* commands[] = {"train", "eval", "compare", "ablate-k", "export-attention"};
  const char* help[] = {
      "train a gnn or mlp Q network per seed",
      "evaluate a checkpoint or baseline over E episodes per seed",
      "evaluate all six policies on shared seeds",
      "train and evaluate the gnn for each k",
      "dump agent x goal attention from one episode",
  };
  for (int i = 0; i < 5; ++i) add_common(app.add_subcommand(commands[i], help[i]), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const swarm::RunSpec spec = resolve(command, flags);
    if (command == "train") {
      swarm::run_train(spec, std::cout);
    } else if (command == "eval") {
      std::cout << swarm::kReportHeader << "\n";
      swarm::run_eval(spec, std::cout);
    } else if (command == "compare") {
      swarm::run_compare(spec, std::cout);
    } else if (command == "ablate-k") {
      std::cout << swarm::kAblationHeader << "\n";
      swarm::run_ablate_k(spec, std::cout);
    } else {
      swarm::run_export_attention(spec, std::cout);
    }
  } catch (const swarm::ConfigError& e) {
    std::cerr << "swarm: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "swarm: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
