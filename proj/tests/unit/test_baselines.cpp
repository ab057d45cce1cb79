#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "swarm/baselines.hpp"
#include "test_support.hpp"

using namespace swarm;
using namespace swarm::testing;

namespace {

EnvState scene(int grid, std::vector<Cell> agents, std::vector<Cell> goals) {
  EnvConfig cfg = small_config(grid, static_cast<int>(agents.size()),
                               static_cast<int>(goals.size()));
  return EnvState::from_layout(cfg, agents, goals);
}

Action direction(Cell from, Cell to) {
  if (to.x > from.x) return Action::Right;
  if (to.x < from.x) return Action::Left;
  if (to.y > from.y) return Action::Down;
  return Action::Up;
}

/// Serpentine tour for even L listed cell by cell.
std::vector<Cell> serpentine_tour(int L) {
  std::vector<Cell> tour;
  for (int x = 0; x < L; ++x) tour.push_back({x, 0});
  for (int y = 1; y < L - 1; ++y) {
    if (y % 2 == 1) {
      for (int x = L - 1; x >= 1; --x) tour.push_back({x, y});
    } else {
      for (int x = 1; x < L; ++x) tour.push_back({x, y});
    }
  }
  for (int x = L - 1; x >= 0; --x) tour.push_back({x, L - 1});
  for (int y = L - 2; y >= 1; --y) tour.push_back({0, y});
  return tour;
}

double dist(Cell a, Cell b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Connected components of the eps-graph, noise as singletons.
std::set<std::set<std::pair<int, int>>> component_oracle(const std::vector<Cell>& pts, double eps) {
  std::vector<int> parent(pts.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[static_cast<std::size_t>(i)] != i) i = parent[static_cast<std::size_t>(i)];
    return i;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (dist(pts[i], pts[j]) <= eps) parent[static_cast<std::size_t>(find(static_cast<int>(i)))] = find(static_cast<int>(j));
    }
  }
  std::map<int, std::set<std::pair<int, int>>> groups;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    groups[find(static_cast<int>(i))].insert({pts[i].x, pts[i].y});
  }
  std::set<std::set<std::pair<int, int>>> out;
  for (auto& [root, g] : groups) out.insert(g);
  return out;
}

std::set<std::set<std::pair<int, int>>> as_sets(const std::vector<std::vector<Cell>>& clusters) {
  std::set<std::set<std::pair<int, int>>> out;
  for (const auto& c : clusters) {
    std::set<std::pair<int, int>> s;
    for (const auto& p : c) s.insert({p.x, p.y});
    out.insert(s);
  }
  return out;
}

std::vector<std::unique_ptr<JointPolicy>> all_baselines(bool omniscient = false) {
  BaselineOptions opt;
  opt.omniscient = omniscient;
  std::vector<std::unique_ptr<JointPolicy>> out;
  out.push_back(std::make_unique<RandomPolicy>());
  out.push_back(std::make_unique<GreedyPolicy>(opt));
  out.push_back(std::make_unique<PsoPolicy>(opt));
  out.push_back(std::make_unique<DbscanPolicy>(opt));
  return out;
}

}  // namespace

TEST(Greedy, AxisMoveExamples) {
  EXPECT_EQ(greedy_policy(scene(10, {{1, 1}}, {{4, 1}}), 0), Action::Right);
  EXPECT_EQ(greedy_policy(scene(10, {{2, 2}}, {{2, 5}}), 0), Action::Down);
  EXPECT_EQ(greedy_policy(scene(10, {{5, 5}}, {{5, 2}}), 0), Action::Up);
  EXPECT_EQ(greedy_policy(scene(10, {{5, 5}}, {{2, 5}}), 0), Action::Left);
}

TEST(Greedy, DiagonalPrefersXAxis) {
  EXPECT_EQ(greedy_policy(scene(10, {{2, 2}}, {{4, 4}}), 0), Action::Right);
  EXPECT_EQ(greedy_policy(scene(10, {{6, 6}}, {{4, 4}}), 0), Action::Left);
}

TEST(Greedy, BlockedMoveFallsToOtherAxis) {
  const EnvState env = scene(10, {{2, 2}, {3, 2}}, {{4, 4}});
  EXPECT_EQ(greedy_policy(env, 0), Action::Down);
}

TEST(Greedy, NearestGoalTiesByLowerId) {
  const EnvState env = scene(10, {{4, 4}}, {{4, 6}, {4, 2}});
  EXPECT_EQ(greedy_policy(env, 0), Action::Down);
}

TEST(Sweep, MatchesSerpentineTourOnEvenGrid) {
  for (int L : {4, 6, 10}) {
    const auto tour = serpentine_tour(L);
    ASSERT_EQ(static_cast<int>(tour.size()), L * L);
    std::set<std::pair<int, int>> unique;
    for (const auto& c : tour) unique.insert({c.x, c.y});
    ASSERT_EQ(static_cast<int>(unique.size()), L * L);
    const Cell goal{1, 1};
    for (std::size_t i = 0; i < tour.size(); ++i) {
      if (tour[i] == goal) continue;
      const EnvState env = scene(L, {tour[i]}, {goal});
      const Cell next = tour[(i + 1) % tour.size()];
      EXPECT_EQ(sweep_action(env, 0), direction(tour[i], next)) << L << ": " << tour[i].x << "," << tour[i].y;
    }
  }
}

TEST(Sweep, OddGridStaysOnGridAndCycles) {
  for (int L : {5, 9}) {
    for (int x = 0; x < L; ++x) {
      for (int y = 0; y < L; ++y) {
        EnvConfig cfg = small_config(L, 1, 1, 10 * L * L);
        const Cell goal{L / 2, L / 2};
        if (Cell{x, y} == goal) continue;
        const std::vector<Cell> a = {{x, y}};
        const std::vector<Cell> g = {goal};
        EnvState env = EnvState::from_layout(cfg, a, g);
        bool returned = false;
        for (int t = 0; t < 2 * L * L && !env.done(); ++t) {
          const Action act = sweep_action(env, 0);
          ASSERT_TRUE(move_is_valid(env, 0, act));
          const std::vector<Action> acts = {act};
          env.step(acts);
          if (env.agents()[0].pos == Cell{0, 0}) {
            returned = true;
            break;
          }
        }
        EXPECT_TRUE(returned || env.done()) << x << "," << y;
      }
    }
  }
}

TEST(Sweep, NoDiscoveredGoalsFollowsSweep) {
  const EnvState env = scene(20, {{0, 0}}, {{15, 15}});
  ASSERT_TRUE(known_goals(env).empty());
  EXPECT_EQ(greedy_policy(env, 0), sweep_action(env, 0));
  EXPECT_EQ(greedy_policy(env, 0, true), Action::Right);
}

TEST(Random, UniformFrequencies) {
  std::mt19937_64 rng(42);
  std::array<int, kActionCount> counts{};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(random_policy(rng))];
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / draws, 0.25, 0.01);
  std::mt19937_64 a(7);
  std::mt19937_64 b(7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(random_policy(a), random_policy(b));
}

TEST(Pso, SingletonAssignment) {
  std::mt19937_64 rng(1);
  const std::vector<Cell> agents = {{0, 0}};
  const std::vector<Cell> goals = {{5, 5}};
  const PsoResult r = pso_assign(agents, goals, PsoParams{}, 10.0, rng);
  EXPECT_EQ(r.assignment, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(r.best_cost, std::hypot(5.0, 5.0));
}

TEST(Pso, ContestedGoalMatchesBruteForce) {
  const std::vector<Cell> agents = {{0, 5}, {9, 5}};
  const std::vector<Cell> goals = {{5, 5}, {9, 0}};
  double best = 1e18;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const std::vector<int> asg = {a, b};
      double cost = dist(agents[0], goals[static_cast<std::size_t>(a)]) +
                    dist(agents[1], goals[static_cast<std::size_t>(b)]) + (a == b ? 10.0 : 0.0);
      EXPECT_DOUBLE_EQ(assignment_cost(agents, goals, asg, 10.0), cost);
      best = std::min(best, cost);
    }
  }
  // Nearest-goal assignment sends both agents to goal 0.
  const double nearest = assignment_cost(agents, goals, std::vector<int>{0, 0}, 10.0);
  std::mt19937_64 rng(3);
  const PsoResult r = pso_assign(agents, goals, PsoParams{}, 10.0, rng);
  EXPECT_DOUBLE_EQ(r.best_cost, best);
  EXPECT_LE(r.best_cost, nearest);
  EXPECT_EQ(r.assignment, (std::vector<int>{0, 1}));
}

TEST(Pso, HistoryNonIncreasingAndReproducible) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> c(0, 19);
    std::vector<Cell> agents;
    std::vector<Cell> goals;
    for (int i = 0; i < 5; ++i) agents.push_back({c(gen), c(gen)});
    for (int i = 0; i < 9; ++i) goals.push_back({c(gen), c(gen)});
    std::mt19937_64 a(static_cast<std::uint64_t>(trial));
    std::mt19937_64 b(static_cast<std::uint64_t>(trial));
    const PsoResult ra = pso_assign(agents, goals, PsoParams{}, 20.0, a);
    const PsoResult rb = pso_assign(agents, goals, PsoParams{}, 20.0, b);
    ASSERT_EQ(ra.history.size(), 51u);
    for (std::size_t i = 1; i < ra.history.size(); ++i) EXPECT_LE(ra.history[i], ra.history[i - 1]);
    EXPECT_EQ(ra.assignment, rb.assignment);
    EXPECT_EQ(ra.history, rb.history);
    EXPECT_DOUBLE_EQ(ra.best_cost, assignment_cost(agents, goals, ra.assignment, 20.0));
    for (int g : ra.assignment) {
      EXPECT_GE(g, 0);
      EXPECT_LT(g, 9);
    }
  }
}

TEST(Pso, NoGoalsIsUsageError) {
  std::mt19937_64 rng(1);
  const std::vector<Cell> agents = {{0, 0}};
  EXPECT_THROW((void)pso_assign(agents, std::vector<Cell>{}, PsoParams{}, 1.0, rng), UsageError);
}

TEST(Dbscan, Examples) {
  const std::vector<Cell> pair = {{1, 1}, {1, 2}};
  auto c = dbscan_clusters(pair, 5.0, 2);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].size(), 2u);

  std::vector<Cell> groups = {{1, 1}, {2, 1}, {1, 2}, {21, 1}, {22, 2}};
  c = dbscan_clusters(groups, 5.0, 2);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].size(), 3u);
  EXPECT_EQ(c[1].size(), 2u);

  const std::vector<Cell> single = {{4, 4}};
  c = dbscan_clusters(single, 5.0, 2);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0], single);

  // Boundary distance is inclusive.
  const std::vector<Cell> edge = {{0, 0}, {3, 4}};
  EXPECT_EQ(dbscan_clusters(edge, 5.0, 2).size(), 1u);
  EXPECT_EQ(dbscan_clusters(edge, 4.99, 2).size(), 2u);
}

TEST(Dbscan, MinPtsTwoEqualsConnectedComponents) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> c(0, 29);
    std::set<std::pair<int, int>> cells;
    const int n = 1 + static_cast<int>(rng() % 25);
    while (static_cast<int>(cells.size()) < n) cells.insert({c(rng), c(rng)});
    std::vector<Cell> pts;
    for (auto [x, y] : cells) pts.push_back({x, y});
    const double eps = 2.0 + static_cast<double>(rng() % 5);
    EXPECT_EQ(as_sets(dbscan_clusters(pts, eps, 2)), component_oracle(pts, eps));
  }
}

TEST(Dbscan, InvariantToInputOrder) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<int> c(0, 19);
    std::set<std::pair<int, int>> cells;
    while (cells.size() < 15) cells.insert({c(rng), c(rng)});
    std::vector<Cell> pts;
    for (auto [x, y] : cells) pts.push_back({x, y});
    const int min_pts = 2 + static_cast<int>(rng() % 3);
    const auto base = dbscan_clusters(pts, 3.0, min_pts);
    std::shuffle(pts.begin(), pts.end(), rng);
    EXPECT_EQ(dbscan_clusters(pts, 3.0, min_pts), base);
    std::size_t total = 0;
    for (const auto& cl : base) total += cl.size();
    EXPECT_EQ(total, pts.size());
  }
}

TEST(Dbscan, AssignmentPrefersClosestPairs) {
  const std::vector<std::vector<Cell>> clusters = {{{1, 1}, {1, 3}}, {{18, 18}}};
  const std::vector<Cell> agents = {{19, 19}, {0, 0}, {10, 10}};
  const auto asg = dbscan_assign(agents, clusters);
  EXPECT_EQ(asg, (std::vector<int>{1, 0, 1}));
}

TEST(Baselines, OnlyDiscoveredGoalsInfluenceActions) {
  // Same discovered goal, different undiscovered goal.
  const EnvState a = scene(20, {{0, 0}, {0, 10}}, {{2, 2}, {15, 15}});
  const EnvState b = scene(20, {{0, 0}, {0, 10}}, {{2, 2}, {12, 5}});
  ASSERT_EQ(known_goals(a).size(), 1u);
  ASSERT_EQ(known_goals(b).size(), 1u);
  for (auto& p : all_baselines()) {
    std::mt19937_64 ra(1);
    std::mt19937_64 rb(1);
    EXPECT_EQ(p->act(a, ra), p->act(b, rb)) << p->name();
  }
  EXPECT_EQ(known_goals(a, true).size(), 2u);
}

TEST(Baselines, LegalActionsOverRollouts) {
  for (bool omni : {false, true}) {
    for (auto& p : all_baselines(omni)) {
      const EnvConfig cfg = small_config(12, 4, 10, 120, 3);
      EnvState env = EnvState::create(cfg);
      std::mt19937_64 rng(4);
      while (!env.done()) {
        const auto acts = p->act(env, rng);
        ASSERT_EQ(acts.size(), 4u);
        for (Action x : acts) ASSERT_LT(static_cast<int>(x), kActionCount);
        env.step(acts);
      }
    }
  }
}

TEST(Baselines, ScriptedPoliciesCollectOnSmallGrid) {
  for (auto& p : all_baselines()) {
    if (p->name() == "random") continue;
    const auto stats = evaluate_policy(*p, small_config(10, 2, 10, 150), 10, 77);
    EXPECT_GT(summarize(stats).collection_mean, 0.9) << p->name();
  }
}

TEST(Baselines, ClonesActIdentically) {
  const EnvState env = random_env(small_config(15, 4, 12), 10, 3);
  for (auto& p : all_baselines()) {
    auto c = p->clone();
    EXPECT_EQ(c->name(), p->name());
    std::mt19937_64 ra(2);
    std::mt19937_64 rb(2);
    EXPECT_EQ(p->act(env, ra), c->act(env, rb));
  }
}
