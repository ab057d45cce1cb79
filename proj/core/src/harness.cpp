#include "swarm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "swarm/csv.hpp"
#include "swarm/presets.hpp"

namespace swarm {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kEvalSalt = 0x5EED0E7A1ULL;
constexpr std::uint64_t kExportSalt = 0xA77E0710ULL;

const std::vector<std::string> kComparePolicies = {"gnn", "mlp", "greedy", "random", "pso",
                                                   "dbscan"};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Writes to a sibling temp file first so readers never see partial output.
void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create directory " + dir.string());
  }
}

/// Runs fn(0..n-1) on up to `threads` workers. The first exception is
/// rethrown after all workers stop.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, std::max(n, 1));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

template <typename T>
T parse_int(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid integer for " + key + ": '" + text + "'");
  }
  return v;
}

double parse_double(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ConfigError("invalid number for " + key + ": '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + text + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) out.push_back(parse_int<T>(key, part));
  if (out.empty()) throw ConfigError("empty list for " + key);
  return out;
}

template <typename T>
std::string join_list(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

fs::path seed_dir(const RunSpec& spec, std::uint64_t seed) {
  return spec.out_dir / ("seed_" + std::to_string(seed));
}

fs::path checkpoint_for(const RunSpec& spec, const std::string& kind, std::uint64_t seed) {
  const fs::path& given = kind == "mlp" && !spec.checkpoint_mlp.empty() ? spec.checkpoint_mlp
                                                                         : spec.checkpoint;
  if (!given.empty()) return given;
  return seed_dir(spec, seed) / "checkpoint.txt";
}

bool is_learned(const std::string& kind) { return kind == "gnn" || kind == "mlp"; }

std::vector<std::string> policy_list(const RunSpec& spec) {
  if (spec.policy == "all") return kComparePolicies;
  std::vector<std::string> out;
  std::istringstream in(spec.policy);
  std::string part;
  while (std::getline(in, part, ',')) out.push_back(part);
  return out;
}

ReportRow make_row(const std::string& policy, const RunSpec& spec, const std::string& seed,
                   const std::vector<EpisodeStats>& stats, double seconds) {
  ReportRow row;
  row.policy = policy;
  row.preset = spec.preset;
  row.seed = seed;
  row.summary = summarize(stats);
  row.wall_seconds = seconds;
  return row;
}

std::string baseline_header(const RunSpec& spec) {
  const auto& b = spec.baseline;
  std::ostringstream out;
  out << "reconstructed baselines: greedy(nearest known goal, sweep fallback)"
      << " pso(inertia=" << format_double(b.pso.inertia)
      << " cognitive=" << format_double(b.pso.cognitive)
      << " social=" << format_double(b.pso.social) << " particles=" << b.pso.particles
      << " iterations=" << b.pso.iterations << ")"
      << " dbscan(eps=" << format_double(b.dbscan_eps) << " min_pts=" << b.dbscan_min_pts
      << ")" << " omniscient=" << (b.omniscient ? "true" : "false");
  return out.str();
}

}  // namespace

std::string format_double(double v) {
  char buf[400];
  auto fixed = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
  if (fixed.ec == std::errc() && fixed.ptr - buf <= 16) return std::string(buf, fixed.ptr);
  auto general = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, general.ptr);
}

void RunSpec::validate() const {
  env.validate();
  graph.validate();
  train.validate();
  if (seeds.empty()) throw ConfigError("seed list must be nonempty");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (graph.vision_radius != env.vision_radius) {
    throw ConfigError("graph and environment vision radii differ");
  }
  if (at_step < -1 || at_step > env.max_steps) {
    throw ConfigError("at_step must lie in [0, max_steps]");
  }
  if (observer < 0 || observer >= env.n_agents) throw ConfigError("observer out of range");
  if (k_values.empty()) throw ConfigError("k list must be nonempty");
  for (int k : k_values) {
    if (k < 1) throw ConfigError("k values must be >= 1");
  }
  if (baseline.pso.particles < 1 || baseline.pso.iterations < 0) {
    throw ConfigError("pso needs >= 1 particle and >= 0 iterations");
  }
  if (!(baseline.dbscan_eps > 0.0) || baseline.dbscan_min_pts < 1) {
    throw ConfigError("dbscan needs eps > 0 and min_pts >= 1");
  }
  gnn.validate();
  mlp.validate();
  for (const auto& p : policy_list(*this)) {
    if (p != "gnn" && p != "mlp" && p != "greedy" && p != "random" && p != "pso" &&
        p != "dbscan") {
      throw ConfigError("unknown policy: " + p);
    }
  }
}

RunSpec default_spec(const std::string& command) {
  RunSpec spec;
  spec.command = command;
  if (command == "compare") {
    spec.preset = "cfg-bench";
    spec.policy = "all";
  } else if (command == "ablate-k") {
    spec.preset = "cfg-40";
    spec.train.total_steps = 20000;
    spec.train.eval_interval = 0;
    spec.eval_episodes = 20;
  } else if (command != "train" && command != "eval" && command != "export-attention") {
    throw ConfigError("unknown command: " + command);
  }
  spec.env = preset(spec.preset);
  spec.graph.vision_radius = spec.env.vision_radius;
  spec.threads = default_threads();
  return spec;
}

std::map<std::string, std::string> to_manifest(const RunSpec& s) {
  std::map<std::string, std::string> m;
  auto d = [](double v) { return format_double(v); };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  m["command"] = s.command;
  m["preset"] = s.preset;
  m["grid_size"] = std::to_string(s.env.grid_size);
  m["n_agents"] = std::to_string(s.env.n_agents);
  m["n_goals"] = std::to_string(s.env.n_goals);
  m["vision_radius"] = d(s.env.vision_radius);
  m["max_steps"] = std::to_string(s.env.max_steps);
  m["k"] = std::to_string(s.graph.k);
  m["include_collected_goals"] = b(s.graph.include_collected_goals);
  m["policy"] = s.policy;
  m["hidden"] = std::to_string(s.gnn.hidden);
  m["heads"] = std::to_string(s.gnn.heads);
  m["layers"] = std::to_string(s.gnn.layers);
  m["type_embed"] = std::to_string(s.gnn.type_embed);
  m["mlp_hidden"] = join_list(s.mlp.hidden);
  m["total_steps"] = std::to_string(s.train.total_steps);
  m["gamma"] = d(s.train.gamma);
  m["lr"] = d(s.train.lr);
  m["batch"] = std::to_string(s.train.batch);
  m["update_every"] = std::to_string(s.train.update_every);
  m["tau"] = d(s.train.tau);
  m["epsilon_start"] = d(s.train.epsilon_start);
  m["epsilon_end"] = d(s.train.epsilon_end);
  m["epsilon_decay_fraction"] = d(s.train.epsilon_decay_fraction);
  m["warmup"] = std::to_string(s.train.warmup);
  m["eval_interval"] = std::to_string(s.train.eval_interval);
  m["train_eval_episodes"] = std::to_string(s.train.eval_episodes);
  m["replay_capacity"] = std::to_string(s.train.replay.capacity);
  m["per_alpha"] = d(s.train.replay.alpha);
  m["per_epsilon"] = d(s.train.replay.epsilon);
  m["per_weight_rule"] =
      s.train.replay.weight_rule == WeightRule::Proportional ? "proportional" : "literal";
  m["per_beta_start"] = d(s.train.per_beta_start);
  m["per_beta_end"] = d(s.train.per_beta_end);
  m["seeds"] = join_list(s.seeds);
  m["eval_episodes"] = std::to_string(s.eval_episodes);
  m["at_step"] = std::to_string(s.at_step);
  m["observer"] = std::to_string(s.observer);
  m["k_values"] = join_list(s.k_values);
  m["omniscient"] = b(s.baseline.omniscient);
  m["pso_inertia"] = d(s.baseline.pso.inertia);
  m["pso_cognitive"] = d(s.baseline.pso.cognitive);
  m["pso_social"] = d(s.baseline.pso.social);
  m["pso_particles"] = std::to_string(s.baseline.pso.particles);
  m["pso_iterations"] = std::to_string(s.baseline.pso.iterations);
  m["dbscan_eps"] = d(s.baseline.dbscan_eps);
  m["dbscan_min_pts"] = std::to_string(s.baseline.dbscan_min_pts);
  return m;
}

std::string format_manifest(const std::map<std::string, std::string>& manifest) {
  std::string out;
  for (const auto& [k, v] : manifest) out += k + "=" + v + "\n";
  return out;
}

std::map<std::string, std::string> parse_manifest(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto z = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, z - a + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_manifest(text.str());
}

void apply_overrides(RunSpec& s, const std::map<std::string, std::string>& kv) {
  if (auto it = kv.find("preset"); it != kv.end() && it->second == "custom") {
    s.preset = it->second;
  } else if (it != kv.end()) {
    const EnvConfig base = preset(it->second);
    s.preset = it->second;
    s.env.grid_size = base.grid_size;
    s.env.n_agents = base.n_agents;
    s.env.n_goals = base.n_goals;
    s.env.max_steps = base.max_steps;
  }
  for (const auto& [key, v] : kv) {
    if (key == "preset") continue;
    if (key == "command") {
      if (v != s.command) throw ConfigError("config file is for command '" + v + "'");
    } else if (key == "grid_size") {
      s.env.grid_size = parse_int<int>(key, v);
    } else if (key == "n_agents") {
      s.env.n_agents = parse_int<int>(key, v);
    } else if (key == "n_goals") {
      s.env.n_goals = parse_int<int>(key, v);
    } else if (key == "vision_radius") {
      s.env.vision_radius = parse_double(key, v);
      s.graph.vision_radius = s.env.vision_radius;
    } else if (key == "max_steps") {
      s.env.max_steps = parse_int<int>(key, v);
    } else if (key == "k") {
      s.graph.k = parse_int<int>(key, v);
    } else if (key == "include_collected_goals") {
      s.graph.include_collected_goals = parse_bool(key, v);
    } else if (key == "policy") {
      s.policy = v;
    } else if (key == "hidden") {
      s.gnn.hidden = parse_int<int>(key, v);
    } else if (key == "heads") {
      s.gnn.heads = parse_int<int>(key, v);
    } else if (key == "layers") {
      s.gnn.layers = parse_int<int>(key, v);
    } else if (key == "type_embed") {
      s.gnn.type_embed = parse_int<int>(key, v);
    } else if (key == "mlp_hidden") {
      s.mlp.hidden = parse_list<int>(key, v);
    } else if (key == "total_steps") {
      s.train.total_steps = parse_int<std::int64_t>(key, v);
    } else if (key == "gamma") {
      s.train.gamma = parse_double(key, v);
    } else if (key == "lr") {
      s.train.lr = parse_double(key, v);
    } else if (key == "batch") {
      s.train.batch = parse_int<int>(key, v);
    } else if (key == "update_every") {
      s.train.update_every = parse_int<int>(key, v);
    } else if (key == "tau") {
      s.train.tau = parse_double(key, v);
    } else if (key == "epsilon_start") {
      s.train.epsilon_start = parse_double(key, v);
    } else if (key == "epsilon_end") {
      s.train.epsilon_end = parse_double(key, v);
    } else if (key == "epsilon_decay_fraction") {
      s.train.epsilon_decay_fraction = parse_double(key, v);
    } else if (key == "warmup") {
      s.train.warmup = parse_int<std::int64_t>(key, v);
    } else if (key == "eval_interval") {
      s.train.eval_interval = parse_int<std::int64_t>(key, v);
    } else if (key == "train_eval_episodes") {
      s.train.eval_episodes = parse_int<int>(key, v);
    } else if (key == "replay_capacity") {
      s.train.replay.capacity = parse_int<std::size_t>(key, v);
    } else if (key == "per_alpha") {
      s.train.replay.alpha = parse_double(key, v);
    } else if (key == "per_epsilon") {
      s.train.replay.epsilon = parse_double(key, v);
    } else if (key == "per_weight_rule") {
      if (v == "proportional") {
        s.train.replay.weight_rule = WeightRule::Proportional;
      } else if (v == "literal") {
        s.train.replay.weight_rule = WeightRule::Literal;
      } else {
        throw ConfigError("per_weight_rule must be proportional or literal");
      }
    } else if (key == "per_beta_start") {
      s.train.per_beta_start = parse_double(key, v);
    } else if (key == "per_beta_end") {
      s.train.per_beta_end = parse_double(key, v);
    } else if (key == "seeds" || key == "seed") {
      s.seeds = parse_list<std::uint64_t>(key, v);
    } else if (key == "eval_episodes") {
      s.eval_episodes = parse_int<int>(key, v);
    } else if (key == "at_step") {
      s.at_step = parse_int<int>(key, v);
    } else if (key == "observer") {
      s.observer = parse_int<int>(key, v);
    } else if (key == "k_values") {
      s.k_values = parse_list<int>(key, v);
    } else if (key == "omniscient") {
      s.baseline.omniscient = parse_bool(key, v);
    } else if (key == "pso_inertia") {
      s.baseline.pso.inertia = parse_double(key, v);
    } else if (key == "pso_cognitive") {
      s.baseline.pso.cognitive = parse_double(key, v);
    } else if (key == "pso_social") {
      s.baseline.pso.social = parse_double(key, v);
    } else if (key == "pso_particles") {
      s.baseline.pso.particles = parse_int<int>(key, v);
    } else if (key == "pso_iterations") {
      s.baseline.pso.iterations = parse_int<int>(key, v);
    } else if (key == "dbscan_eps") {
      s.baseline.dbscan_eps = parse_double(key, v);
    } else if (key == "dbscan_min_pts") {
      s.baseline.dbscan_min_pts = parse_int<int>(key, v);
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
}

std::string format_report_row(const ReportRow& r) {
  const Summary& s = r.summary;
  return join_csv({r.policy, r.preset, r.seed, std::to_string(s.episodes),
                   fmt("%.6f", s.collection_mean), fmt("%.6f", s.collection_std),
                   fmt("%.6f", s.coverage_mean), fmt("%.6f", s.coverage_std),
                   fmt("%.3f", s.steps_mean), fmt("%.3f", s.steps_std),
                   fmt("%.3f", r.wall_seconds)});
}

std::string format_ablation_row(const AblationRow& r) {
  const Summary& s = r.summary;
  return join_csv({std::to_string(r.k), std::to_string(r.seed), std::to_string(s.episodes),
                   fmt("%.6f", s.collection_mean), fmt("%.6f", s.coverage_mean),
                   fmt("%.3f", s.steps_mean), std::to_string(r.max_out_degree),
                   std::to_string(r.graphs_checked), fmt("%.3f", r.wall_seconds)});
}

std::shared_ptr<QNetwork> make_network(const RunSpec& spec) {
  if (spec.policy == "gnn") return std::make_shared<GnnPolicy>(spec.gnn);
  if (spec.policy == "mlp") return std::make_shared<MlpPolicy>(spec.mlp);
  throw ConfigError("policy '" + spec.policy + "' is not trainable (use gnn or mlp)");
}

std::unique_ptr<JointPolicy> make_policy(const std::string& kind, const RunSpec& spec,
                                         const fs::path& checkpoint) {
  if (kind == "random") return std::make_unique<RandomPolicy>();
  if (kind == "greedy") return std::make_unique<GreedyPolicy>(spec.baseline);
  if (kind == "pso") return std::make_unique<PsoPolicy>(spec.baseline);
  if (kind == "dbscan") return std::make_unique<DbscanPolicy>(spec.baseline);
  if (!is_learned(kind)) throw ConfigError("unknown policy: " + kind);
  if (checkpoint.empty() || !fs::is_regular_file(checkpoint)) {
    throw ConfigError("missing checkpoint for " + kind + ": " + checkpoint.string());
  }
  ad::Checkpoint ckpt;
  try {
    ckpt = ad::load_checkpoint(checkpoint.string());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("unreadable checkpoint " + checkpoint.string() + ": " + e.what());
  }
  std::shared_ptr<const QNetwork> net = network_from_meta(ckpt.meta);
  if (net->kind() != kind) {
    throw ConfigError("checkpoint " + checkpoint.string() + " holds a " + net->kind() +
                      " network, expected " + kind);
  }
  if (!net->init_params(0).same_layout(ckpt.params)) {
    throw ConfigError("checkpoint parameter shapes do not match its architecture");
  }
  return std::make_unique<LearnedPolicy>(net, std::move(ckpt.params), spec.graph);
}

std::vector<TrainOutcome> run_train(const RunSpec& spec, std::ostream& log) {
  spec.validate();
  const auto net = make_network(spec);
  std::vector<TrainOutcome> out(spec.seeds.size());
  std::mutex log_mutex;
  parallel_for(static_cast<int>(spec.seeds.size()), spec.threads, [&](int i) {
    const std::uint64_t seed = spec.seeds[static_cast<std::size_t>(i)];
    RunSpec one = spec;
    one.seeds = {seed};
    TrainConfig tc = spec.train;
    tc.seed = seed;
    const fs::path dir = seed_dir(spec, seed);
    make_dir(dir);
    const std::string manifest = format_manifest(to_manifest(one));
    auto save = [&](const ad::ParamStore& params, std::int64_t steps,
                    const std::vector<MetricsRow>& rows) {
      ad::Checkpoint ckpt;
      ckpt.meta = net->describe();
      ckpt.meta["policy"] = net->kind();
      ckpt.meta["preset"] = spec.preset;
      ckpt.meta["seed"] = std::to_string(seed);
      ckpt.meta["trained_steps"] = std::to_string(steps);
      ckpt.params = params;
      std::ostringstream ck;
      ad::write_checkpoint(ck, ckpt);
      write_file(dir / "checkpoint.txt", ck.str());
      std::string metrics = std::string(kMetricsHeader) + "\n";
      for (const auto& row : rows) metrics += format_metrics_row(row) + "\n";
      write_file(dir / "metrics.csv", metrics);
      write_file(dir / "manifest.txt", manifest);
    };

    std::vector<MetricsRow> seen;
    TrainHooks hooks;
    hooks.on_eval = [&](const MetricsRow& row, const ad::ParamStore& params) {
      seen.push_back(row);
      save(params, row.step, seen);
      std::lock_guard<std::mutex> lock(log_mutex);
      log << spec.policy << " seed " << seed << " step " << row.step << " collection "
          << fmt("%.3f", row.collection_fraction) << " coverage "
          << fmt("%.3f", row.coverage_fraction) << " epsilon " << fmt("%.3f", row.epsilon)
          << " loss " << fmt("%.4f", row.loss_ma) << "\n";
      log.flush();
    };
    DqnTrainer trainer(net, spec.env, spec.graph, tc, hooks);
    TrainResult result = trainer.run();
    save(result.params, spec.train.total_steps, result.log);

    TrainOutcome& o = out[static_cast<std::size_t>(i)];
    o.seed = seed;
    o.dir = dir;
    o.result = std::move(result);
  });
  return out;
}

std::vector<ReportRow> run_eval(const RunSpec& spec, std::ostream& log) {
  spec.validate();
  std::vector<ReportRow> rows;
  std::vector<EpisodeStats> pooled;
  double total_seconds = 0.0;
  for (std::uint64_t seed : spec.seeds) {
    auto policy = make_policy(spec.policy, spec, checkpoint_for(spec, spec.policy, seed));
    const auto start = std::chrono::steady_clock::now();
    const auto stats =
        evaluate_policy(*policy, spec.env, spec.eval_episodes, seed ^ kEvalSalt, spec.threads);
    const double secs = seconds_since(start);
    total_seconds += secs;
    pooled.insert(pooled.end(), stats.begin(), stats.end());
    rows.push_back(make_row(spec.policy, spec, std::to_string(seed), stats, secs));
    log << format_report_row(rows.back()) << "\n";
  }
  rows.push_back(make_row(spec.policy, spec, "all", pooled, total_seconds));
  make_dir(spec.out_dir);
  std::string csv = std::string(kReportHeader) + "\n";
  for (const auto& r : rows) csv += format_report_row(r) + "\n";
  write_file(spec.out_dir / "eval.csv", csv);
  return rows;
}

std::vector<ReportRow> run_compare(const RunSpec& spec, std::ostream& log) {
  spec.validate();
  const auto policies = policy_list(spec);
  // Resolve every policy up front so a missing checkpoint fails before any work.
  std::vector<std::vector<std::unique_ptr<JointPolicy>>> instances;
  for (const auto& kind : policies) {
    auto& per_seed = instances.emplace_back();
    for (std::uint64_t seed : spec.seeds) {
      per_seed.push_back(make_policy(kind, spec, checkpoint_for(spec, kind, seed)));
    }
  }
  log << baseline_header(spec) << "\n";

  std::vector<ReportRow> rows;
  std::vector<ReportRow> aggregates;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    std::vector<EpisodeStats> pooled;
    double total = 0.0;
    for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
      const auto start = std::chrono::steady_clock::now();
      const auto stats = evaluate_policy(*instances[p][s], spec.env, spec.eval_episodes,
                                         spec.seeds[s] ^ kEvalSalt, spec.threads);
      const double secs = seconds_since(start);
      total += secs;
      pooled.insert(pooled.end(), stats.begin(), stats.end());
      rows.push_back(make_row(policies[p], spec, std::to_string(spec.seeds[s]), stats, secs));
      log << format_report_row(rows.back()) << "\n";
      log.flush();
    }
    aggregates.push_back(make_row(policies[p], spec, "all", pooled, total));
  }
  rows.insert(rows.end(), aggregates.begin(), aggregates.end());

  const ReportRow* greedy = nullptr;
  const ReportRow* random = nullptr;
  for (const auto& a : aggregates) {
    if (a.policy == "greedy") greedy = &a;
    if (a.policy == "random") random = &a;
  }
  if (greedy && random && greedy->summary.collection_mean < random->summary.collection_mean) {
    log << "warning: greedy collection " << fmt("%.4f", greedy->summary.collection_mean)
        << " is below random " << fmt("%.4f", random->summary.collection_mean) << "\n";
  }

  make_dir(spec.out_dir);
  std::string csv = std::string(kReportHeader) + "\n";
  for (const auto& r : rows) csv += format_report_row(r) + "\n";
  write_file(spec.out_dir / "compare.csv", csv);
  write_file(spec.out_dir / "compare_manifest.txt",
             "# " + baseline_header(spec) + "\n" + format_manifest(to_manifest(spec)));
  return rows;
}

std::vector<AblationRow> run_ablate_k(const RunSpec& spec, std::ostream& log) {
  spec.validate();
  RunSpec gnn_spec = spec;
  gnn_spec.policy = "gnn";
  const auto net = make_network(gnn_spec);
  const int jobs = static_cast<int>(spec.k_values.size() * spec.seeds.size());
  std::vector<AblationRow> rows(static_cast<std::size_t>(jobs));
  std::mutex log_mutex;
  parallel_for(jobs, spec.threads, [&](int j) {
    const auto ki = static_cast<std::size_t>(j) / spec.seeds.size();
    const auto si = static_cast<std::size_t>(j) % spec.seeds.size();
    const int k = spec.k_values[ki];
    const std::uint64_t seed = spec.seeds[si];
    GraphConfig gcfg = spec.graph;
    gcfg.k = k;
    TrainConfig tc = spec.train;
    tc.seed = seed;

    int max_degree = 0;
    std::int64_t checked = 0;
    std::int64_t violations = 0;
    GraphProbe probe = [&](const EgoGraph& g) {
      const int d = g.max_agent_out_degree();
      max_degree = std::max(max_degree, d);
      ++checked;
      if (d > k) ++violations;
    };
    const auto start = std::chrono::steady_clock::now();
    TrainHooks hooks;
    hooks.graph_probe = probe;
    DqnTrainer trainer(net, spec.env, gcfg, tc, hooks);
    const TrainResult result = trainer.run();
    LearnedPolicy policy(net, result.params, gcfg);
    policy.set_probe(probe);
    const auto stats =
        evaluate_policy(policy, spec.env, spec.eval_episodes, seed ^ kEvalSalt, 1);
    if (violations > 0) {
      throw std::runtime_error("k=" + std::to_string(k) + ": " + std::to_string(violations) +
                               " ego graphs exceed the agent out-degree bound");
    }
    AblationRow& row = rows[static_cast<std::size_t>(j)];
    row.k = k;
    row.seed = seed;
    row.summary = summarize(stats);
    row.max_out_degree = max_degree;
    row.graphs_checked = checked;
    row.wall_seconds = seconds_since(start);
    std::lock_guard<std::mutex> lock(log_mutex);
    log << format_ablation_row(row) << "\n";
    log.flush();
  });

  make_dir(spec.out_dir);
  std::string csv = std::string(kAblationHeader) + "\n";
  for (const auto& r : rows) csv += format_ablation_row(r) + "\n";
  write_file(spec.out_dir / "ablate_k.csv", csv);
  write_file(spec.out_dir / "manifest.txt", format_manifest(to_manifest(spec)));
  return rows;
}

AttentionExport run_export_attention(const RunSpec& spec, std::ostream& log) {
  spec.validate();
  const std::uint64_t seed = spec.seeds.front();
  const fs::path path = checkpoint_for(spec, "gnn", seed);
  if (path.empty() || !fs::is_regular_file(path)) {
    throw ConfigError("missing checkpoint for gnn: " + path.string());
  }
  const ad::Checkpoint ckpt = ad::load_checkpoint(path.string());
  const auto net = std::shared_ptr<const QNetwork>(network_from_meta(ckpt.meta));
  const auto* gnn = dynamic_cast<const GnnPolicy*>(net.get());
  if (gnn == nullptr) throw ConfigError("export-attention needs a gnn checkpoint");
  if (!net->init_params(0).same_layout(ckpt.params)) {
    throw ConfigError("checkpoint parameter shapes do not match its architecture");
  }

  const int at = spec.at_step >= 0 ? spec.at_step : spec.env.max_steps / 2;
  EnvConfig cfg = spec.env;
  cfg.seed = episode_seed(seed ^ kExportSalt, 0);
  EnvState env = EnvState::create(cfg);
  LearnedPolicy policy(net, ckpt.params, spec.graph);
  std::mt19937_64 rng(cfg.seed);
  while (env.t() < at) {
    if (env.done()) {
      throw ConfigError("episode ended at step " + std::to_string(env.t()) +
                        " before --at-step " + std::to_string(at));
    }
    env.step(policy.act(env, rng));
  }

  AttentionExport out;
  out.step = at;
  out.graph = build_ego_graph(env, spec.observer, spec.graph);
  const QOutput q = gnn->evaluate(out.graph, ckpt.params);
  out.table = export_attention(q.trace, out.graph);

  make_dir(spec.out_dir);
  write_file(spec.out_dir / "attention.csv", out.table.to_csv());
  write_file(spec.out_dir / "graph.txt", dump_graph(out.graph));
  const auto [r, c, v] = out.table.strongest();
  log << "step " << at << ": " << out.table.agent_ids.size() << " agents x "
      << out.table.goal_ids.size() << " goals";
  if (r >= 0) {
    log << ", strongest agent_" << out.table.agent_ids[static_cast<std::size_t>(r)]
        << " -> goal_" << out.table.goal_ids[static_cast<std::size_t>(c)] << " = "
        << fmt("%.4f", v);
  }
  log << "\n";
  return out;
}

}  // namespace swarm
