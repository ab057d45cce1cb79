#include <gtest/gtest.h>

#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unistd.h>

#include "swarm/csv.hpp"
#include "swarm/harness.hpp"
#include "swarm/presets.hpp"

using namespace swarm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  static std::atomic<int> counter{0};
  const fs::path p = fs::temp_directory_path() /
                     ("swarm_test_" + name + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunSpec tiny(const std::string& command, const std::string& policy, const fs::path& out) {
  RunSpec s = default_spec(command);
  apply_overrides(s, {{"preset", "cfg-10"},
                      {"policy", policy},
                      {"total_steps", "240"},
                      {"warmup", "64"},
                      {"batch", "16"},
                      {"eval_interval", "120"},
                      {"train_eval_episodes", "2"},
                      {"replay_capacity", "1000"},
                      {"eval_episodes", "3"},
                      {"seeds", "1,2"}});
  s.threads = 1;
  s.out_dir = out;
  return s;
}

}  // namespace

TEST(Presets, MatchConfigurationTable) {
  struct Row {
    const char* name;
    int agents, goals, grid, steps;
  };
  const Row table[] = {{"cfg-10", 2, 10, 10, 150},  {"cfg-20", 4, 20, 20, 150},
                       {"cfg-30", 8, 43, 30, 175},  {"cfg-40", 15, 76, 40, 200},
                       {"cfg-50", 23, 118, 50, 250}, {"cfg-60", 33, 169, 60, 300},
                       {"cfg-bench", 5, 76, 100, 600}};
  for (const auto& r : table) {
    const EnvConfig c = preset(r.name);
    EXPECT_EQ(c.n_agents, r.agents) << r.name;
    EXPECT_EQ(c.n_goals, r.goals) << r.name;
    EXPECT_EQ(c.grid_size, r.grid) << r.name;
    EXPECT_EQ(c.max_steps, r.steps) << r.name;
    EXPECT_EQ(c.vision_radius, 4.5);
    EXPECT_NO_THROW(c.validate());
  }
  EXPECT_EQ(preset_names().size(), 7u);
  EXPECT_THROW((void)preset("cfg-70"), ConfigError);
}

TEST(Manifest, FormatDoubleShortestRoundTrip) {
  EXPECT_EQ(format_double(0.0005), "0.0005");
  EXPECT_EQ(format_double(0.99), "0.99");
  EXPECT_EQ(format_double(4.5), "4.5");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    const std::string s = format_double(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, v) << s;
  }
}

TEST(Manifest, RoundTripReproducesSpec) {
  RunSpec s = default_spec("train");
  apply_overrides(s, {{"preset", "cfg-30"},
                      {"lr", "0.00025"},
                      {"k", "5"},
                      {"seeds", "3,4,9"},
                      {"per_weight_rule", "literal"},
                      {"omniscient", "true"},
                      {"mlp_hidden", "32,16"}});
  const auto m = to_manifest(s);
  EXPECT_EQ(m.at("lr"), "0.00025");
  EXPECT_EQ(m.at("preset"), "cfg-30");
  const auto parsed = parse_manifest("# comment\n" + format_manifest(m));
  EXPECT_EQ(parsed, m);
  RunSpec back = default_spec("train");
  apply_overrides(back, parsed);
  EXPECT_EQ(to_manifest(back), m);
  EXPECT_EQ(back.env, s.env);
  EXPECT_EQ(back.seeds, (std::vector<std::uint64_t>{3, 4, 9}));
  EXPECT_EQ(back.graph.k, 5);
  EXPECT_EQ(back.train.replay.weight_rule, WeightRule::Literal);
  EXPECT_TRUE(back.baseline.omniscient);
  EXPECT_EQ(back.mlp.hidden, (std::vector<int>{32, 16}));
}

TEST(Manifest, DefaultLearningRateAppearsVerbatim) {
  const std::string text = format_manifest(to_manifest(default_spec("train")));
  EXPECT_NE(text.find("lr=0.0005\n"), std::string::npos);
  EXPECT_NE(text.find("total_steps=250000\n"), std::string::npos);
}

TEST(Manifest, ExplicitEnvironmentKeysBeatPreset) {
  RunSpec s = default_spec("train");
  apply_overrides(s, {{"grid_size", "25"}, {"preset", "cfg-20"}});
  EXPECT_EQ(s.env.grid_size, 25);
  EXPECT_EQ(s.env.n_agents, 4);
}

TEST(Manifest, RejectsBadInput) {
  RunSpec s = default_spec("train");
  EXPECT_THROW(apply_overrides(s, {{"bogus", "1"}}), ConfigError);
  EXPECT_THROW(apply_overrides(s, {{"lr", "fast"}}), ConfigError);
  EXPECT_THROW(apply_overrides(s, {{"preset", "cfg-99"}}), ConfigError);
  EXPECT_THROW(apply_overrides(s, {{"command", "eval"}}), ConfigError);
  EXPECT_THROW(apply_overrides(s, {{"per_weight_rule", "other"}}), ConfigError);
  EXPECT_THROW((void)default_spec("dance"), ConfigError);
  RunSpec bad = default_spec("train");
  bad.env.n_goals = 1000;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = default_spec("train");
  bad.seeds.clear();
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Manifest, CommandDefaults) {
  EXPECT_EQ(default_spec("compare").preset, "cfg-bench");
  EXPECT_EQ(default_spec("compare").policy, "all");
  EXPECT_EQ(default_spec("ablate-k").preset, "cfg-40");
  EXPECT_EQ(default_spec("ablate-k").k_values, (std::vector<int>{2, 3, 4, 5, 6, 7}));
  EXPECT_EQ(default_spec("train").train.total_steps, 250000);
  EXPECT_EQ(default_spec("eval").eval_episodes, 100);
}

TEST(Csv, ParseAndJoin) {
  const CsvTable t = parse_csv_string("a,b,c\n1,2,3\n4,,6\n");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.column("b"), 1);
  EXPECT_EQ(t.column("z"), -1);
  EXPECT_EQ(t.at(1, "b"), "");
  EXPECT_EQ(t.at(1, "c"), "6");
  EXPECT_EQ(join_csv(t.rows[0]), "1,2,3");
  EXPECT_THROW((void)parse_csv_string(""), std::runtime_error);
  EXPECT_THROW((void)parse_csv_string("a,b\n1\n"), std::runtime_error);
}

TEST(Report, RowFormat) {
  ReportRow r;
  r.policy = "greedy";
  r.preset = "cfg-10";
  r.seed = "all";
  r.summary = {4, 0.5, 0.1, 0.75, 0.05, 120.0, 3.5};
  r.wall_seconds = 1.25;
  const std::string line = format_report_row(r);
  const CsvTable t = parse_csv_string(std::string(kReportHeader) + "\n" + line + "\n");
  EXPECT_EQ(t.at(0, "policy"), "greedy");
  EXPECT_EQ(t.at(0, "episodes"), "4");
  EXPECT_DOUBLE_EQ(std::stod(t.at(0, "collection_fraction")), 0.5);
  EXPECT_DOUBLE_EQ(std::stod(t.at(0, "coverage_fraction")), 0.75);
  EXPECT_DOUBLE_EQ(std::stod(t.at(0, "steps_mean")), 120.0);
}

TEST(Harness, TrainIsByteReproducibleAndRerunsFromManifest) {
  const fs::path a = scratch("train_a");
  const fs::path b = scratch("train_b");
  const fs::path c = scratch("train_c");
  std::ostringstream log;
  const auto oa = run_train(tiny("train", "mlp", a), log);
  const auto ob = run_train(tiny("train", "mlp", b), log);
  ASSERT_EQ(oa.size(), 2u);
  for (const char* seed : {"seed_1", "seed_2"}) {
    for (const char* file : {"metrics.csv", "checkpoint.txt", "manifest.txt"}) {
      ASSERT_TRUE(fs::exists(a / seed / file)) << file;
      EXPECT_EQ(slurp(a / seed / file), slurp(b / seed / file)) << file;
    }
  }
  const CsvTable metrics = read_csv_file((a / "seed_1" / "metrics.csv").string());
  ASSERT_EQ(metrics.rows.size(), 2u);
  EXPECT_EQ(metrics.at(0, "step"), "120");
  EXPECT_EQ(metrics.at(1, "step"), "240");
  EXPECT_NE(slurp(a / "seed_1" / "metrics.csv"), slurp(a / "seed_2" / "metrics.csv"));

  RunSpec again = default_spec("train");
  apply_overrides(again, read_manifest(a / "seed_2" / "manifest.txt"));
  again.out_dir = c;
  again.threads = 1;
  run_train(again, log);
  EXPECT_EQ(slurp(a / "seed_2" / "metrics.csv"), slurp(c / "seed_2" / "metrics.csv"));
  EXPECT_EQ(slurp(a / "seed_2" / "checkpoint.txt"), slurp(c / "seed_2" / "checkpoint.txt"));
  for (const auto& p : {a, b, c}) fs::remove_all(p);
}

TEST(Harness, ThreadCountDoesNotChangeResults) {
  const fs::path a = scratch("threads_a");
  const fs::path b = scratch("threads_b");
  std::ostringstream log;
  RunSpec one = tiny("train", "mlp", a);
  RunSpec many = tiny("train", "mlp", b);
  many.threads = 3;
  run_train(one, log);
  run_train(many, log);
  EXPECT_EQ(slurp(a / "seed_2" / "metrics.csv"), slurp(b / "seed_2" / "metrics.csv"));
  for (const auto& p : {a, b}) fs::remove_all(p);
}

TEST(Harness, EvalAndCompareOverTrainedCheckpoints) {
  const fs::path gnn_dir = scratch("cmp_gnn");
  const fs::path mlp_dir = scratch("cmp_mlp");
  std::ostringstream log;
  RunSpec g = tiny("train", "gnn", gnn_dir);
  apply_overrides(g, {{"hidden", "12"}, {"seeds", "1"}});
  run_train(g, log);
  RunSpec m = tiny("train", "mlp", mlp_dir);
  apply_overrides(m, {{"seeds", "1"}});
  run_train(m, log);

  RunSpec ev = tiny("eval", "gnn", gnn_dir);
  apply_overrides(ev, {{"hidden", "12"}, {"seeds", "1"}});
  const auto eval_rows = run_eval(ev, log);
  ASSERT_EQ(eval_rows.size(), 2u);
  EXPECT_EQ(eval_rows.back().seed, "all");
  EXPECT_EQ(eval_rows.back().summary.episodes, 3);
  EXPECT_TRUE(fs::exists(gnn_dir / "eval.csv"));

  RunSpec cmp = tiny("compare", "all", gnn_dir / "compare");
  apply_overrides(cmp, {{"hidden", "12"}, {"seeds", "1"}});
  cmp.checkpoint = gnn_dir / "seed_1" / "checkpoint.txt";
  cmp.checkpoint_mlp = mlp_dir / "seed_1" / "checkpoint.txt";
  std::ostringstream clog;
  const auto rows = run_compare(cmp, clog);
  ASSERT_EQ(rows.size(), 12u);
  std::set<std::string> policies;
  for (std::size_t i = 6; i < 12; ++i) {
    EXPECT_EQ(rows[i].seed, "all");
    policies.insert(rows[i].policy);
    EXPECT_GE(rows[i].summary.collection_mean, 0.0);
    EXPECT_LE(rows[i].summary.collection_mean, 1.0);
  }
  EXPECT_EQ(policies, (std::set<std::string>{"gnn", "mlp", "greedy", "random", "pso", "dbscan"}));
  EXPECT_NE(clog.str().find("reconstructed baselines"), std::string::npos);
  const CsvTable t = read_csv_file((gnn_dir / "compare" / "compare.csv").string());
  EXPECT_EQ(t.header.size(), 11u);
  EXPECT_EQ(t.rows.size(), 12u);
  EXPECT_TRUE(fs::exists(gnn_dir / "compare" / "compare_manifest.txt"));
  for (const auto& p : {gnn_dir, mlp_dir}) fs::remove_all(p);
}

TEST(Harness, MissingCheckpointIsConfigError) {
  const fs::path out = scratch("missing");
  std::ostringstream log;
  RunSpec ev = tiny("eval", "gnn", out);
  EXPECT_THROW(run_eval(ev, log), ConfigError);
  RunSpec cmp = tiny("compare", "all", out);
  EXPECT_THROW(run_compare(cmp, log), ConfigError);
  EXPECT_FALSE(fs::exists(out / "compare.csv"));
  fs::remove_all(out);
}

TEST(Harness, CheckpointArchitectureMismatchIsConfigError) {
  const fs::path out = scratch("mismatch");
  std::ostringstream log;
  RunSpec g = tiny("train", "gnn", out);
  apply_overrides(g, {{"hidden", "12"}, {"seeds", "1"}, {"total_steps", "10"}});
  run_train(g, log);
  RunSpec ev = tiny("eval", "mlp", out);
  apply_overrides(ev, {{"seeds", "1"}});
  EXPECT_THROW(run_eval(ev, log), ConfigError);
  fs::remove_all(out);
}

TEST(Harness, AblateKRespectsNeighborBound) {
  const fs::path out = scratch("ablate");
  RunSpec s = default_spec("ablate-k");
  apply_overrides(s, {{"total_steps", "20"},
                      {"warmup", "1000"},
                      {"max_steps", "15"},
                      {"eval_episodes", "1"},
                      {"hidden", "6"},
                      {"seeds", "1,2"}});
  s.out_dir = out;
  s.threads = 1;
  std::ostringstream log;
  const auto rows = run_ablate_k(s, log);
  ASSERT_EQ(rows.size(), 12u);
  for (const auto& r : rows) {
    EXPECT_LE(r.max_out_degree, r.k);
    EXPECT_GT(r.graphs_checked, 0);
  }
  const CsvTable t = read_csv_file((out / "ablate_k.csv").string());
  EXPECT_EQ(t.rows.size(), 12u);
  EXPECT_EQ(join_csv(t.header), kAblationHeader);
  fs::remove_all(out);
}

TEST(Harness, ExportAttentionWritesTableAndGraph) {
  const fs::path out = scratch("export");
  std::ostringstream log;
  RunSpec g = tiny("train", "gnn", out);
  apply_overrides(g, {{"hidden", "12"}, {"seeds", "1"}});
  run_train(g, log);
  RunSpec ex = tiny("export-attention", "gnn", out);
  apply_overrides(ex, {{"hidden", "12"}, {"seeds", "1"}, {"at_step", "3"}});
  const AttentionExport e = run_export_attention(ex, log);
  EXPECT_EQ(e.step, 3);
  EXPECT_EQ(static_cast<int>(e.table.agent_ids.size()), e.graph.agent_count());
  const CsvTable t = read_csv_file((out / "attention.csv").string());
  EXPECT_EQ(t.header[0], "source");
  EXPECT_EQ(t.rows.size(), e.table.agent_ids.size());
  for (const auto& row : t.rows) {
    for (std::size_t c = 1; c < row.size(); ++c) {
      const double v = std::stod(row[c]);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_EQ(slurp(out / "graph.txt").rfind("node 0 agent", 0), 0u);

  apply_overrides(ex, {{"at_step", "100000"}});
  EXPECT_THROW(run_export_attention(ex, log), ConfigError);
  fs::remove_all(out);
}
