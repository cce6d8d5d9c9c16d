#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "pdmdp/dp.hpp"
#include "pdmdp/mcts.hpp"
#include "pdmdp/qlearning.hpp"

using namespace pdmdp;

namespace {

/// States 0..3 on a line, 3 is the absorbing goal. Action 0 steps left, 1 steps right, each at cost 1.
FiniteMdp goal_chain() {
  FiniteMdp mdp(4, 2, std::nullopt);
  for (int s = 0; s < 3; ++s)
    for (int a = 0; a < 2; ++a) {
      std::vector<double> p(4, 0.0);
      p[static_cast<std::size_t>(a == 0 ? std::max(s - 1, 0) : s + 1)] = 1.0;
      mdp.set_row(s, a, p, 1.0);
    }
  mdp.set_allowed(3, {0});
  mdp.set_row(3, 0, {0.0, 0.0, 0.0, 1.0}, 0.0);
  return mdp;
}

double q_error(const FiniteMdp& mdp, const QTable<int, int>& q, const std::vector<std::vector<double>>& q_star) {
  double err = 0.0;
  for (int s = 0; s < 3; ++s)
    for (int a : mdp.allowed(s)) {
      if (!q.contains(s, a)) return kInf;
      err = std::max(err, std::abs(q.get(s, a) - q_star[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]));
    }
  return err;
}

QTable<int, int> learn_chain(const FiniteMdp& mdp, double epsilon, std::size_t steps, std::uint64_t seed) {
  GenerativeModel<int, int> gen = generative_from_mdp(mdp, 0.9);
  gen.is_terminal = [](const int& s) { return s == 3; };
  Rng rng = derive_rng(seed, 0);
  auto start = [](Rng& r) { return std::uniform_int_distribution<int>(0, 2)(r); };
  // episodes stop at the goal, so the step budget is an upper bound
  return q_learning(gen, start, 0.9, 0.5, epsilon, steps / 10, 10, rng);
}

/// One decision: action 0 costs 0, action 1 costs 1, then the episode ends.
GenerativeModel<int, int> two_action_problem(double noise_sd) {
  GenerativeModel<int, int> gen;
  gen.step = [noise_sd](const int&, const int& a, Rng& rng) {
    double c = a == 0 ? 0.0 : 1.0;
    if (noise_sd > 0.0) c += std::normal_distribution<double>(0.0, noise_sd)(rng);
    return std::make_pair(1, c);
  };
  gen.admissible = [](const int&) { return std::vector<int>{0, 1}; };
  gen.horizon = 1;
  return gen;
}

}  // namespace

TEST_CASE("Q-learning update rule") {
  // 0 -> 1 at cost 5, then 1 -> 1 at cost 1
  GenerativeModel<int, int> gen;
  gen.step = [](const int& s, const int&, Rng&) { return std::make_pair(1, s == 0 ? 5.0 : 1.0); };
  gen.admissible = [](const int&) { return std::vector<int>{0}; };
  Rng rng = derive_rng(1, 0);
  auto start = [](Rng&) { return 0; };

  QTable<int, int> q = q_learning(gen, start, 0.9, 0.5, 0.0, 1, 1, rng);
  CHECK(q.get(0, 0) == 2.5);

  q = q_learning(gen, start, 0.9, 0.5, 0.0, 1, 2, rng);
  CHECK(q.get(0, 0) == 2.5);
  CHECK(q.get(1, 0) == 0.5);
  q = q_learning(gen, start, 0.9, 0.5, 0.0, 1, 2, rng, q);
  CHECK(q.get(0, 0) == doctest::Approx(2.5 + 0.5 * (5.0 + 0.9 * 0.5 - 2.5)).epsilon(1e-15));
  CHECK(q.get(1, 0) == doctest::Approx(0.5 + 0.5 * (1.0 + 0.9 * 0.5 - 0.5)).epsilon(1e-15));

  CHECK_THROWS_AS(q_learning(gen, start, 1.0, 0.5, 0.1, 1, 1, rng), Error);
  CHECK_THROWS_AS(q_learning(gen, start, 0.9, 0.0, 0.1, 1, 1, rng), Error);
}

TEST_CASE("Q-learning only stores admissible pairs") {
  FiniteMdp mdp = goal_chain();
  QTable<int, int> q = learn_chain(mdp, 0.3, 2000, 2);
  for (const auto& [key, value] : q.entries()) CHECK(mdp.admissible(key.first, key.second));
}

TEST_CASE("Q-learning converges on the goal chain") {
  FiniteMdp mdp = goal_chain();
  SolveResult vi = value_iteration(mdp, 0.9, 1e-12);
  auto q_star = q_from_v(mdp, vi.values[0], 0.9);
  CHECK(q_star[2][1] == doctest::Approx(1.0));
  CHECK(q_star[0][1] == doctest::Approx(2.71));

  SUBCASE("epsilon-greedy within 5e4 steps") { CHECK(q_error(mdp, learn_chain(mdp, 0.2, 50'000, 3), q_star) <= 0.05); }
  SUBCASE("pure exploration within 2e5 steps") { CHECK(q_error(mdp, learn_chain(mdp, 1.0, 200'000, 4), q_star) <= 0.05); }
}

TEST_CASE("uct_score") {
  CHECK(uct_score(11.0, 0.5, 1.0, 1.4) < uct_score(11.0, 0.5, 10.0, 1.4));
  CHECK(uct_score(11.0, 0.5, 1.0, 0.0) == 0.5);
  CHECK(uct_score(11.0, 0.25, 3.0, 0.0) < uct_score(11.0, 0.5, 1.0, 0.0));
}

TEST_CASE("MCTS picks the cheaper of two actions") {
  GenerativeModel<int, int> gen = two_action_problem(0.0);
  int correct = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng = derive_rng(seed, 0);
    MctsOptions opt;
    opt.budget = 1000;
    correct += mcts_plan(gen, 0, opt, rng) == 0 ? 1 : 0;
  }
  CHECK(correct >= 95);

  Rng rng = derive_rng(0, 0);
  MctsOptions tiny;
  tiny.budget = 1;
  CHECK_THROWS_AS(mcts_plan(gen, 0, tiny, rng), Error);
}

TEST_CASE("MCTS on a noisy bandit improves with budget") {
  GenerativeModel<int, int> gen = two_action_problem(2.0);
  std::vector<double> fraction;
  for (std::size_t budget : {10u, 100u, 1000u, 100000u}) {
    int correct = 0;
    const int runs = budget >= 100000 ? 10 : 40;
    for (int seed = 0; seed < runs; ++seed) {
      Rng rng = derive_rng(static_cast<std::uint64_t>(seed), budget);
      MctsOptions opt;
      opt.budget = budget;
      correct += mcts_plan(gen, 0, opt, rng) == 0 ? 1 : 0;
    }
    fraction.push_back(static_cast<double>(correct) / runs);
  }
  for (std::size_t i = 1; i < fraction.size(); ++i) CHECK(fraction[i] >= fraction[i - 1] - 0.05);
  CHECK(fraction.back() == 1.0);
}

TEST_CASE("MCTS tree invariants") {
  Rng gen_rng = derive_rng(30, 0);
  for (int k = 0; k < 10; ++k) {
    FiniteMdp mdp = oracle::random_mdp(gen_rng, 4, 3, 4);
    GenerativeModel<int, int> gen = generative_from_mdp(mdp);
    for (Backup backup : {Backup::kBellmanMin, Backup::kRolloutAverage}) {
      Rng rng = derive_rng(31, static_cast<std::uint64_t>(k));
      MctsOptions opt;
      opt.budget = 500;
      opt.backup = backup;
      auto res = mcts_search(gen, 0, opt, rng);
      const auto& tree = res.tree;
      CHECK(res.iterations == 500);

      std::size_t root_children = 0;
      for (int c : tree[0].children) root_children += tree[static_cast<std::size_t>(c)].visits;
      CHECK(root_children == res.iterations);

      std::vector<int> parents(tree.size(), 0);
      for (std::size_t v = 0; v < tree.size(); ++v)
        for (int c : tree[v].children) {
          ++parents[static_cast<std::size_t>(c)];
          CHECK(tree[static_cast<std::size_t>(c)].parent == static_cast<int>(v));
          CHECK(static_cast<std::size_t>(c) > v);
        }
      CHECK(parents[0] == 0);
      for (std::size_t v = 1; v < tree.size(); ++v) CHECK(parents[v] == 1);

      for (std::size_t v = 0; v < tree.size(); ++v) {
        const auto& n = tree[v];
        CHECK(n.visits >= 1);
        if (n.return_count == 0) continue;
        CHECK(std::isfinite(n.rho));
        CHECK(n.rho >= n.return_min - 1e-9);
        CHECK(n.rho <= n.return_max + 1e-9);
      }
    }
  }
}

TEST_CASE("MCTS matches backward induction on small MDPs") {
  Rng gen_rng = derive_rng(32, 0);
  int runs = 0, matches = 0;
  for (int k = 0; k < 10; ++k) {
    FiniteMdp mdp = oracle::random_mdp(gen_rng, oracle::pick(gen_rng, 2, 4), 2, 3, false);
    SolveResult bi = backward_induction(mdp);
    auto q = q_from_v(mdp, bi.values[1], 1.0, 0)[0];
    GenerativeModel<int, int> gen = generative_from_mdp(mdp);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng = derive_rng(33 + static_cast<std::uint64_t>(k), seed);
      MctsOptions opt;
      opt.budget = 10000;
      int a = mcts_plan(gen, 0, opt, rng);
      ++runs;
      // any optimal action counts when several tie
      matches += q[static_cast<std::size_t>(a)] <= bi.values[0][0] + 1e-9 ? 1 : 0;
    }
  }
  CHECK(matches >= 0.95 * runs);
}

TEST_CASE("discounted search depth") {
  TreeSearch<int, int, int> search;
  search.discount = 0.5;
  MctsOptions opt;
  CHECK(search.depth_limit(opt) == 20);
  opt.max_depth = 7;
  CHECK(search.depth_limit(opt) == 7);
  search.discount = 1.0;
  opt.max_depth = 0;
  CHECK_THROWS_AS(search.depth_limit(opt), Error);
}
