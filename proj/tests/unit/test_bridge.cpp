#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "pdmdp/bridge.hpp"
#include "pdmdp/dp.hpp"
#include "pdmdp/impulse.hpp"
#include "pdmdp/medical.hpp"
#include "pdmdp/pomdp.hpp"

using namespace pdmdp;
namespace med = pdmdp::medical;
using M = ModeAugmentedPdmp;

namespace {

const med::MedicalConfig cfg;

/// Mode × unit marker bins over [0, 40].
Partition marker_bins() {
  Partition p;
  p.n_cells = 4 * 41;
  p.cell = [](const HybridState& x) {
    int bin = static_cast<int>(std::floor(std::clamp(x.euclid.at(0), 0.0, 40.0)));
    return x.mode * 41 + bin;
  };
  return p;
}

BridgeAction act(int regime, int delay) { return {false, regime, delay}; }

/// Grid index of a twin natural state.
int grid_index(const HybridState& x) {
  return med::mdp_state(x.mode, static_cast<int>(std::lround(x.euclid.at(0))));
}

BridgeObservation observation_of(int w) {
  BridgeObservation o;
  o.z = w / 45;
  o.y = w % 45 - 2;
  return o;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return 0.5 * d;
}

}  // namespace

TEST_CASE("cemetery and death") {
  med::BridgeVariant v = med::make_bridge_full(cfg);
  const Bridge& b = *v.bridge;
  Rng rng = derive_rng(70, 0);

  BridgeState dead_end = BridgeState::dead_end();
  REQUIRE(b.admissible(dead_end).size() == 1);
  CHECK(b.admissible(dead_end)[0].stop);
  auto [next, cost] = b.step(dead_end, BridgeAction::dummy(), rng);
  CHECK(next.cemetery);
  CHECK(cost == 0.0);
  CHECK_THROWS_AS(b.step(dead_end, act(0, 1), rng), Error);

  BridgeState dying{false, HybridState{med::kDeath, {cfg.death_level}, 3.0}, 10};
  REQUIRE(b.admissible(dying).size() == 1);
  CHECK(b.admissible(dying)[0].stop);
  CHECK(b.step(dying, BridgeAction::dummy(), rng).first.cemetery);

  // the sub-dynamics of death are absorbing as well
  for (int regime : b.model().regimes) {
    Trajectory traj = simulate_ssa(b.model().pdmp, b.lift(dying.x, regime), 900.0, rng);
    HybridState end = b.drop(state_at(b.model().pdmp, traj, 900.0));
    CHECK(end.mode == med::kDeath);
    CHECK(end.euclid[0] == cfg.death_level);
  }
}

TEST_CASE("admissible delays near the horizon") {
  med::BridgeVariant v = med::make_bridge_full(cfg);
  const Bridge& b = *v.bridge;
  const int h = b.config().horizon;
  REQUIRE(b.config().delays == std::vector<int>{1, 2, 4});

  BridgeState s{false, HybridState{med::kRelapse, {12.0}, 0.0}, h - 1};
  auto k = b.admissible(s);
  REQUIRE(k.size() == 2);
  for (const BridgeAction& a : k) CHECK(a.delay == 1);

  s.clock = h - 2;
  CHECK(b.admissible(s).size() == 4);
  s.clock = h - 4;
  CHECK(b.admissible(s).size() == 6);
  s.clock = h;
  REQUIRE(b.admissible(s).size() == 1);
  CHECK(b.admissible(s)[0].stop);

  Rng rng = derive_rng(71, 0);
  s.clock = h - 1;
  CHECK_THROWS_AS(b.step(s, act(0, 2), rng), Error);
}

TEST_CASE("estimate_kernel") {
  Partition bins = marker_bins();
  SUBCASE("deterministic treated relapse is a Dirac") {
    med::MedicalConfig c = cfg;
    c.relapse_to_escape_treated = 0.0;
    ModeAugmentedPdmp model = med::make_controlled_pdmp(c);
    Rng rng = derive_rng(72, 0);
    HybridState x{med::kRelapse, {20.0}, 0.0};
    std::vector<double> freq = estimate_kernel(model, x, 1, 15.0, 500, bins, rng);
    HybridState flowed{med::kRelapse, {20.0 * std::exp(-c.v_relapse_treated * 15.0)}, 15.0};
    CHECK(freq[static_cast<std::size_t>(bins.cell(flowed))] == 1.0);
  }
  SUBCASE("death row is a Dirac") {
    ModeAugmentedPdmp model = med::make_controlled_pdmp(cfg);
    Rng rng = derive_rng(73, 0);
    for (int regime : {0, 1}) {
      std::vector<double> freq = estimate_kernel(model, HybridState{med::kDeath, {40.0}, 0.0}, regime, 60.0, 200, bins, rng);
      CHECK(freq[static_cast<std::size_t>(bins.cell(HybridState{med::kDeath, {40.0}, 0.0}))] == 1.0);
    }
  }
  SUBCASE("frequencies agree with a ten times larger run") {
    ModeAugmentedPdmp model = med::make_controlled_pdmp(cfg);
    HybridState x{med::kRelapse, {8.0}, 0.0};
    Rng r1 = derive_rng(74, 0), r2 = derive_rng(74, 1);
    const std::size_t n = 4000;
    std::vector<double> small = estimate_kernel(model, x, 0, 60.0, n, bins, r1);
    std::vector<double> large = estimate_kernel(model, x, 0, 60.0, 10 * n, bins, r2);
    double s1 = 0.0, s2 = 0.0;
    int occupied = 0, beyond_3se = 0;
    for (std::size_t c = 0; c < small.size(); ++c) {
      s1 += small[c];
      s2 += large[c];
      double p = large[c];
      if (p == 0.0 && small[c] == 0.0) continue;
      ++occupied;
      double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / (10.0 * n)) * (1.0 / n + 1.0 / (10.0 * n)));
      double dev = std::abs(small[c] - large[c]) / se;
      CAPTURE(c);
      CHECK(dev <= 4.0);
      beyond_3se += dev > 3.0 ? 1 : 0;
    }
    // a couple of dozen bins are compared, so one 3 SE excursion is expected now and then
    CHECK(beyond_3se <= 1);
    CHECK(occupied >= 2);
    CHECK(std::abs(s1 - 1.0) <= 1e-12);
    CHECK(std::abs(s2 - 1.0) <= 1e-12);
  }
  SUBCASE("partition must cover the arrival") {
    ModeAugmentedPdmp model = med::make_controlled_pdmp(cfg);
    Partition narrow;
    narrow.n_cells = 1;
    narrow.cell = [](const HybridState& x) { return x.mode == med::kRemission ? 0 : 5; };
    Rng rng = derive_rng(75, 0);
    CHECK_THROWS_AS(estimate_kernel(model, HybridState{med::kRelapse, {8.0}, 0.0}, 0, 15.0, 10, narrow, rng), Error);
  }
}

TEST_CASE("constraint soundness and cemetery absorption on random rollouts") {
  med::BridgeVariant v = med::make_bridge_full(cfg);
  const Bridge& b = *v.bridge;
  GenerativeModel<BridgeState, BridgeAction> gen = wrap_as_mdp(b);
  const int h = b.config().horizon;
  REQUIRE(gen.horizon == h + 1);
  Rng rng = derive_rng(76, 0);
  int violations = 0;
  for (int ep = 0; ep < 10000; ++ep) {
    BridgeState s = v.s0;
    bool stopped = false;
    int slots = 0;
    for (int k = 0; k < *gen.horizon; ++k, ++slots) {
      std::vector<BridgeAction> acts = gen.admissible(s);
      BridgeAction a = acts[std::uniform_int_distribution<std::size_t>(0, acts.size() - 1)(rng)];
      if (a.stop != (acts.size() == 1 && acts[0].stop)) ++violations;
      if (stopped && !(s.cemetery && a.stop)) ++violations;
      if (!a.stop && s.clock + a.delay > h) ++violations;
      auto [next, cost] = gen.step(s, a, rng);
      if (stopped && (cost != 0.0 || !next.cemetery)) ++violations;
      if (!a.stop && next.clock != s.clock + a.delay) ++violations;
      if (!next.cemetery && next.clock > h) ++violations;
      stopped = stopped || a.stop;
      s = next;
    }
    if (slots != h + 1 || !s.cemetery) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("all (0, δ) decisions cost the same as a periodic impulse strategy") {
  med::MedicalConfig c = cfg;
  c.bridge_horizon = 16;
  ModeAugmentedPdmp model = med::make_controlled_pdmp(c);
  const PdmpModel pdmp = model.pdmp;
  const double delta = c.delta, z0 = c.zeta0, visit = c.visit_cost + c.treatment_cost[0], death = c.death_cost;
  auto alive = [](const HybridState& x) { return M::natural_of(x.mode) != med::kDeath; };

  CostSpec running;
  running.running = [alive, z0](const HybridState& x) { return alive(x) ? x.euclid.at(0) - z0 : 0.0; };

  BridgeCosts costs;
  costs.path = [&, alive](const BridgeState& s, const BridgeAction&, const Trajectory& traj, const BridgeState& next) {
    double cost = trajectory_cost(pdmp, traj, running) + visit;
    if (!alive(next.x) && alive(s.x)) cost += death;
    return cost;
  };
  // alive at the horizon: the last visit is charged by ď
  costs.terminal = [alive, visit](const BridgeState& s) { return alive(s.x) ? visit : 0.0; };
  Bridge bridge(model, BridgeConfig{delta, c.bridge_horizon, {1}}, costs);
  BridgeState s0{false, HybridState{med::kRemission, {z0}, 0.0}, 0};

  const std::size_t n = 4000;
  Rng rng = derive_rng(77, 0);
  MeanAccumulator bridge_cost;
  for (std::size_t i = 0; i < n; ++i) {
    BridgeState s = s0;
    double total = 0.0;
    while (!s.cemetery) {
      BridgeAction a = bridge.admissible(s).size() == 1 ? BridgeAction::dummy() : act(0, 1);
      auto [next, cost] = bridge.step(s, a, rng);
      total += cost;
      s = next;
    }
    bridge_cost.add(total);
  }

  CostSpec impulse_costs = running;
  impulse_costs.impulse = [alive, visit](const HybridState& pre, const HybridState&) { return alive(pre) ? visit : 0.0; };
  impulse_costs.terminal = [alive, death](const HybridState& x) { return alive(x) ? 0.0 : death; };
  impulse_costs.horizon = delta * c.bridge_horizon;
  ImpulseStrategy visits = periodic_strategy(0.0, delta, [](const HybridState& x) { return x; });
  MeanAccumulator impulse_cost;
  Rng rng2 = derive_rng(77, 1);
  for (std::size_t i = 0; i < n; ++i) {
    Trajectory traj = simulate_controlled(pdmp, visits, HybridState{M::code(0, med::kRemission), {z0}, 0.0}, 1'000'000,
                                          rng2, impulse_costs.horizon);
    impulse_cost.add(trajectory_cost(pdmp, traj, impulse_costs));
  }
  Estimate e1 = bridge_cost.estimate(), e2 = impulse_cost.estimate();
  CAPTURE(e1.mean);
  CAPTURE(e2.mean);
  CHECK(std::abs(e1.mean - e2.mean) <= 3.0 * std::hypot(e1.se, e2.se));
  CHECK(e1.mean > visit * c.bridge_horizon);
}

TEST_CASE("discrete twin equals the finite MDP") {
  med::BridgeVariant v = med::make_bridge_twin(cfg);
  BridgeTable table = tabulate_bridge(*v.bridge, v.s0);
  CHECK(validate(table.mdp).ok());
  double twin = backward_induction(table.mdp).values[0][static_cast<std::size_t>(table.root)];
  double direct = backward_induction(med::make_mdp(cfg)).values[0][0];
  CHECK(std::abs(twin - direct) <= 1e-10);

  SUBCASE("successor laws match row by row") {
    FiniteMdp mdp = med::make_mdp(cfg);
    for (int s = 0; s < mdp.n_states(); ++s) {
      BridgeState bs{false, med::twin_state(s), 3};
      for (int a : mdp.allowed(s)) {
        if (s == med::mdp_state(3, 40)) continue;
        std::vector<double> law(82, 0.0);
        for (auto& [p, next] : v.bridge->exact_successors(bs, act(a, 1))) {
          law[static_cast<std::size_t>(grid_index(next.x))] += p;
          CHECK(next.clock == 4);
        }
        CHECK(oracle::max_abs_diff(law, mdp.dense_probs(0, s, a)) <= 1e-15);
      }
    }
  }
}

TEST_CASE("grid filter equals exact Bayes on the discrete twin") {
  med::BridgeVariant v = med::make_bridge_twin(cfg);
  FinitePomdp pomdp = med::make_pomdp_discrete(cfg);
  GridKernel kernel = exact_grid_kernel(*v.bridge, v.grid);
  Rng rng = derive_rng(78, 0);
  BeliefPolicy policy = [&pomdp](int t, const Belief& b) {
    std::vector<int> acts = belief_admissible(pomdp.base, b);
    return t % 3 == 0 ? acts.back() : acts.front();
  };
  double worst = 0.0;
  for (int ep = 0; ep < 20; ++ep) {
    PomdpEpisode run = pomdp_simulate(pomdp, policy, 40, rng);
    GridFilter grid{v.grid, pomdp.b0};
    for (std::size_t t = 0; t < run.actions.size(); ++t) {
      grid = filter_update(*v.obs, grid, act(run.actions[t], 1), observation_of(run.observations[t]), kernel);
      worst = std::max(worst, oracle::max_abs_diff(grid.weights, run.beliefs[t + 1]));
      CHECK(std::abs(std::accumulate(grid.weights.begin(), grid.weights.end(), 0.0) - 1.0) <= 1e-12);
    }
  }
  CHECK(worst <= 1e-12);

  BridgeObservation impossible;
  impossible.y = 30.0;
  GridFilter start{v.grid, pomdp.b0};
  CHECK_THROWS_AS(filter_update(*v.obs, start, act(0, 1), impossible, kernel), Error);
}

TEST_CASE("particle filter tracks the grid filter") {
  med::BridgeVariant v = med::make_bridge_twin(cfg);
  FinitePomdp pomdp = med::make_pomdp_discrete(cfg);
  GridKernel kernel = exact_grid_kernel(*v.bridge, v.grid);
  BeliefPolicy untreated = [](int, const Belief&) { return 0; };
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng = derive_rng(79, seed);
    PomdpEpisode run = pomdp_simulate(pomdp, untreated, 5, rng);
    GridFilter grid{v.grid, pomdp.b0};
    ParticleFilter particles{std::vector<HybridState>(10000, med::twin_state(0)), std::vector<double>(10000, 1e-4)};
    for (std::size_t t = 0; t < 5; ++t) {
      BridgeObservation y = observation_of(run.observations[t]);
      grid = filter_update(*v.obs, grid, act(0, 1), y, kernel);
      particles = filter_update(*v.bridge, *v.obs, particles, act(0, 1), y, rng);
      double total = std::accumulate(particles.weights.begin(), particles.weights.end(), 0.0);
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
    std::vector<double> hist(82, 0.0);
    for (std::size_t i = 0; i < particles.particles.size(); ++i)
      hist[static_cast<std::size_t>(grid_index(particles.particles[i]))] += particles.weights[i];
    CHECK(total_variation(hist, grid.weights) <= 0.05);
  }
}

TEST_CASE("particle filter on the continuous model") {
  med::BridgeVariant v = med::make_bridge_pomdp(cfg);
  Rng rng = derive_rng(80, 0);
  ParticleFilter theta{std::vector<HybridState>(500, v.s0.x), std::vector<double>(500, 1.0 / 500)};
  BridgeObservation y;
  y.y = cfg.zeta0 + 0.3;
  ParticleFilter next = filter_update(*v.bridge, *v.obs, theta, act(0, 1), y, rng);
  CHECK(next.particles.size() == 500);
  CHECK(std::abs(std::accumulate(next.weights.begin(), next.weights.end(), 0.0) - 1.0) <= 1e-12);
  y.z = 1;
  CHECK_THROWS_AS(filter_update(*v.bridge, *v.obs, theta, act(0, 1), y, rng), Error);
  CHECK_THROWS_AS(filter_update(*v.bridge, *v.obs, theta, BridgeAction::dummy(), y, rng), Error);
}

TEST_CASE("observation wrapper") {
  med::BridgeVariant v = med::make_bridge_twin(cfg);
  Rng rng = derive_rng(81, 0);
  SUBCASE("zero noise reports the link exactly") {
    ObservationModel exact = *v.obs;
    exact.noise = {Noise::Kind::kNone, 0.0};
    BridgePomdp p = wrap_as_pomdp(*v.bridge, exact);
    BridgeState s{false, med::twin_state(med::mdp_state(1, 17)), 5};
    BridgeObservation o = p.observe(s, rng);
    CHECK(o.y == 17.0);
    CHECK(o.clock == 5);
  }
  SUBCASE("discrete noise is uniform on the five-point window") {
    BridgePomdp p = wrap_as_pomdp(*v.bridge, *v.obs);
    BridgeState s{false, med::twin_state(med::mdp_state(2, 20)), 0};
    std::map<int, int> counts;
    for (int i = 0; i < 50000; ++i) {
      auto [next, cost, o] = p.step(s, act(0, 1), rng);
      CHECK(o.clock == next.clock);
      ++counts[static_cast<int>(o.y)];
    }
    REQUIRE(counts.size() == 5);
    for (auto [y, k] : counts) {
      CHECK(y >= 20);
      CHECK(y <= 24);
      CHECK(std::abs(k / 50000.0 - 0.2) <= 3.0 * std::sqrt(0.16 / 50000.0));
    }
  }
  SUBCASE("death is flagged exactly") {
    BridgePomdp p = wrap_as_pomdp(*v.bridge, *v.obs);
    BridgeState s{false, med::twin_state(med::mdp_state(1, 39)), 0};
    auto [next, cost, o] = p.step(s, act(0, 1), rng);
    CHECK(next.x.mode == med::kDeath);
    CHECK(o.z == 1);
  }
}

TEST_CASE("degenerate-noise planner matches the fully observed planner") {
  med::BridgeVariant v = med::make_bridge_twin(cfg);
  ObservationModel full = *v.obs;
  full.full_state = true;
  BridgePomdp pomdp = wrap_as_pomdp(*v.bridge, full);
  GenerativeModel<BridgeState, BridgeAction> gen = wrap_as_mdp(*v.bridge);
  const Bridge& b = *v.bridge;
  std::function<bool(const BridgeState&, const BridgeState&)> same = [&b](const BridgeState& x, const BridgeState& y) {
    return b.same_state(x, y);
  };

  for (int start : {med::mdp_state(1, 30), med::mdp_state(0, 0)}) {
    BridgeState s0{false, med::twin_state(start), 152};
    MctsOptions opt;
    opt.budget = 2000;
    opt.max_depth = static_cast<std::size_t>(b.config().horizon - s0.clock + 1);
    std::map<int, int> observed, hidden;
    const int runs = 40;
    for (int seed = 0; seed < runs; ++seed) {
      Rng r1 = derive_rng(82, static_cast<std::uint64_t>(seed)), r2 = derive_rng(83, static_cast<std::uint64_t>(seed));
      auto fo = mcts_search(gen, s0, opt, r1, same);
      ParticleFilter dirac{{s0.x}, {1.0}};
      auto po = plan_pomdp_mcts(pomdp, dirac, s0.clock, opt, r2);
      CHECK(fo.iterations == po.iterations);
      ++observed[fo.action.regime];
      ++hidden[po.action.regime];
    }
    CAPTURE(start);
    CHECK(std::abs(observed[1] - hidden[1]) <= runs / 5);
  }
}

TEST_CASE("belief-space planner on the discrete twin is close to the POMDP optimum") {
  const int depth = 5;
  med::BridgeVariant v = med::make_bridge_twin(cfg);
  Bridge bridge(v.bridge->model(), BridgeConfig{1.0, depth, {1}}, v.bridge->costs());
  BridgePomdp pomdp = wrap_as_pomdp(bridge, *v.obs);
  GridKernel kernel = exact_grid_kernel(bridge, v.grid);

  FinitePomdp finite = med::make_pomdp_discrete(cfg);
  Belief b0(82, 0.0);
  b0[static_cast<std::size_t>(med::mdp_state(1, 34))] = 0.5;
  b0[static_cast<std::size_t>(med::mdp_state(2, 34))] = 0.5;
  finite.b0 = b0;
  const double optimum = solve_pomdp(finite, depth).value;

  MctsOptions opt;
  opt.budget = 400;
  MeanAccumulator achieved;
  for (std::uint64_t ep = 0; ep < 200; ++ep) {
    Rng rng = derive_rng(84, ep);
    GridFilter theta{v.grid, b0};
    BridgeState s{false, sample_filter(theta, rng), 0};
    double total = 0.0;
    while (!s.cemetery) {
      BridgeAction a = BridgeAction::dummy();
      if (!(bridge.admissible(s).size() == 1 && bridge.admissible(s)[0].stop))
        a = plan_pomdp_mcts(pomdp, theta, s.clock, opt, rng).action;
      auto [next, cost, y] = pomdp.step(s, a, rng);
      total += cost;
      if (!a.stop && !next.cemetery) theta = filter_update(*v.obs, theta, a, y, kernel);
      s = next;
    }
    achieved.add(total);
  }
  CAPTURE(optimum);
  CAPTURE(achieved.mean());
  CHECK(std::abs(achieved.mean() - optimum) <= 0.1 * optimum);
}

TEST_CASE("episode CSV") {
  std::ostringstream out;
  EpisodeRow row;
  row.action = act(1, 2);
  write_episode_csv(out, {row});
  CHECK(out.str() == "n,t,mode,marker,elapsed,action,y,cost\n0,0,0,0,0,l1_r2,0,0\n");
}
