#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "pdmdp/impulse.hpp"
#include "pdmdp/medical.hpp"
#include "pdmdp/pdmp.hpp"
#include "pdmdp/pdmp_io.hpp"
#include "pdmdp/stats.hpp"

using namespace pdmdp;
namespace med = pdmdp::medical;

namespace {

med::MedicalConfig cfg;

PdmpModel basic() { return med::make_pdmp_basic(cfg).model; }

/// Two modes flipping into each other at constant rate; no flow.
PdmpModel flip_model(double rate, std::optional<double> bound) {
  PdmpModel m;
  for (int mode : {0, 1}) {
    ModeSpec s;
    s.flow = families::linear_flow({0.0});
    s.constant_intensity = rate;
    families::set_switch_kernel(s, {1 - mode, std::nullopt});
    m.modes[mode] = s;
  }
  m.intensity_bound = bound;
  return m;
}

std::vector<double> inter_jump_times(const Trajectory& t) {
  std::vector<double> out;
  double prev = 0.0;
  for (const Jump& j : t.jumps) {
    out.push_back(j.time - prev);
    prev = j.time;
  }
  return out;
}

}  // namespace

TEST_CASE("flow_at on the medical modes") {
  PdmpModel m = basic();
  HybridState x{-1, {2.0}, std::nullopt};
  CHECK(flow_at(m, x, 0.0).euclid[0] == 2.0);
  CHECK(flow_at(m, x, 10.0).euclid[0] == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-14));
  HybridState rem{0, {cfg.zeta0}, std::nullopt};
  CHECK(flow_at(m, rem, 123.0).euclid[0] == cfg.zeta0);
  CHECK(flow_at(m, rem, 123.0).mode == 0);

  SUBCASE("elapsed advances at unit speed") {
    PdmpModel semi = med::make_pdmp_semi_markov(cfg).model;
    HybridState y{0, {cfg.zeta0}, 3.0};
    CHECK(*flow_at(semi, y, 4.5).elapsed == doctest::Approx(7.5));
  }
  SUBCASE("past the boundary is an error") {
    try {
      flow_at(m, x, 100.0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBoundaryOverrun);
    }
  }
}

TEST_CASE("boundary_time on the medical modes") {
  PdmpModel m = basic();
  CHECK(boundary_time(m, {-1, {2.0 * cfg.zeta0}, std::nullopt}) ==
        doctest::Approx(std::log(cfg.zeta0 / (2.0 * cfg.zeta0)) / cfg.v_treat).epsilon(1e-14));
  CHECK(boundary_time(m, {-1, {2.0 * cfg.zeta0}, std::nullopt}) == doctest::Approx(20.0 * std::log(2.0)));
  CHECK(std::isinf(boundary_time(m, {0, {cfg.zeta0}, std::nullopt})));
  CHECK(boundary_time(m, {-1, {cfg.zeta0}, std::nullopt}) == 0.0);
}

TEST_CASE("cumulative_hazard") {
  PdmpModel m = basic();
  CHECK(cumulative_hazard(m, {0, {cfg.zeta0}, std::nullopt}, 3.0) == doctest::Approx(3.0 * cfg.remission.beta));
  CHECK(cumulative_hazard(m, {1, {2.0}, std::nullopt}, 50.0) == 0.0);

  const double alpha = 1.5, beta = 0.002;
  PdmpModel w;
  w.time_augmented = true;
  ModeSpec s;
  s.flow = families::linear_flow({0.0});
  families::set_weibull(s, alpha, beta);
  families::set_switch_kernel(s, {1, std::nullopt});
  w.modes[0] = s;
  w.modes[1] = ModeSpec{};
  w.modes[1].flow = families::linear_flow({0.0});
  for (double t : {0.5, 3.0, 17.0}) {
    CHECK(cumulative_hazard(w, {0, {0.0}, 0.0}, t) == doctest::Approx(beta * std::pow(t, alpha + 1) / (alpha + 1)));
  }

  SUBCASE("pointwise intensity goes through quadrature") {
    PdmpModel q = w;
    q.modes[0].hazard = nullptr;
    q.modes[0].inverse_hazard = nullptr;
    HybridState x{0, {0.0}, 2.0};
    double want = oracle::simpson([&](double u) { return beta * std::pow(2.0 + u, alpha); }, 0.0, 9.0);
    CHECK(cumulative_hazard(q, x, 9.0) == doctest::Approx(want).epsilon(1e-9));
    // inversion by bisection lands on the same time as the closed form
    double e = 0.37;
    CHECK(invert_hazard(q, x, e, kInf) == doctest::Approx(invert_hazard(w, x, e, kInf)).epsilon(1e-9));
  }
}

TEST_CASE("semigroup property of analytic flows") {
  PdmpModel m = basic();
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    double z = oracle::unif(rng, 0.5, 30.0), t = oracle::unif(rng, 0, 20), s = oracle::unif(rng, 0, 20);
    HybridState x{1, {z}, std::nullopt};
    double a = flow_at(m, flow_at(m, x, t), s).euclid[0];
    double b = flow_at(m, x, t + s).euclid[0];
    CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)));
  }
}

TEST_CASE("event pattern: boundary to remission, then relapse") {
  PdmpModel m = basic();
  HybridState x0{-1, {2.0 * cfg.zeta0}, std::nullopt};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = derive_rng(seed, 0);
    Trajectory t = simulate_iterative(m, x0, 2, rng);
    REQUIRE(t.jumps.size() == 2);
    CHECK(t.jumps[0].kind == JumpKind::kBoundary);
    CHECK(t.jumps[0].time == doctest::Approx(boundary_time(m, x0)).epsilon(1e-15));
    CHECK(t.jumps[0].post.mode == 0);
    CHECK(t.jumps[1].kind == JumpKind::kRandom);
    CHECK(t.jumps[1].post.mode == 1);
    CHECK(t.jumps[1].time > t.jumps[0].time);
  }
}

TEST_CASE("no jump mechanism is reported") {
  PdmpModel m;
  m.modes[0].flow = families::linear_flow({1.0});
  Rng rng(1);
  try {
    simulate_iterative(m, {0, {0.0}, std::nullopt}, 1, rng);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoJumpReachable);
  }
}

TEST_CASE("remission sojourn has mean 1/lambda") {
  PdmpModel m = basic();
  HybridState x0{-1, {2.0 * cfg.zeta0}, std::nullopt};
  MeanAccumulator acc;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    Rng rng = derive_rng(5, i);
    Trajectory t = simulate_iterative(m, x0, 2, rng);
    acc.add(t.jumps[1].time - t.jumps[0].time);
  }
  Estimate e = acc.estimate();
  CHECK(std::abs(e.mean - 1.0 / cfg.remission.beta) <= 3.0 * e.se);
}

TEST_CASE("SSA inter-jump law is exponential, with and without thinning") {
  const double rate = 0.8;
  auto cdf = [rate](double s) { return 1.0 - std::exp(-rate * s); };
  // A 1% test rejects about once per hundred runs; over 20 runs, 3 or more rejections has
  // probability about 1e-3 under the null.
  for (double bound : {rate, 2.0 * rate}) {
    PdmpModel m = flip_model(rate, bound);
    int rejected = 0;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
      Rng rng = derive_rng(100 + rep, static_cast<std::uint64_t>(bound * 10));
      Trajectory t = simulate_ssa(m, {0, {0.0}, std::nullopt}, 13000.0, rng);
      std::vector<double> s = inter_jump_times(t);
      REQUIRE(s.size() >= 10000);
      s.resize(10000);
      rejected += ks_pvalue(ks_statistic(s, cdf), s.size()) < 0.01;
    }
    CHECK(rejected <= 2);
  }
}

TEST_CASE("thinning rejects an invalid bound") {
  PdmpModel m = flip_model(1.0, 0.5);
  Rng rng(3);
  try {
    simulate_ssa(m, {0, {0.0}, std::nullopt}, 100.0, rng);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidBound);
  }
}

TEST_CASE("competing risks") {
  const double l1 = 0.3, l2 = 0.9;
  PdmpModel m;
  ModeSpec s;
  s.flow = families::linear_flow({0.0});
  ModeSpec r1, r2;
  r1.constant_intensity = l1;
  r2.constant_intensity = l2;
  families::set_competing(s, {{r1, {1, std::nullopt}}, {r2, {2, std::nullopt}}});
  m.modes[0] = s;
  for (int k : {1, 2}) {
    m.modes[k].flow = families::linear_flow({0.0});
    families::set_switch_kernel(m.modes[k], {0, std::nullopt});
    m.modes[k].constant_intensity = 1.0;
  }
  m.intensity_bound = l1 + l2;

  SUBCASE("winner frequency and merged law under SSA") {
    const int n = 10000;
    int wins = 0;
    std::vector<double> first;
    for (int i = 0; i < n; ++i) {
      Rng rng = derive_rng(17, static_cast<std::uint64_t>(i));
      Trajectory t = simulate_ssa(m, {0, {0.0}, std::nullopt}, 50.0, rng);
      wins += t.jumps.at(0).post.mode == 1;
      first.push_back(t.jumps.at(0).time);
      if (i == 0) CHECK(t.jumps.size() > 0);
    }
    double p = l1 / (l1 + l2);
    double freq = static_cast<double>(wins) / n;
    CHECK(std::abs(freq - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
    auto cdf = [&](double t) { return 1.0 - std::exp(-(l1 + l2) * t); };
    CHECK(ks_pvalue(ks_statistic(first, cdf), first.size()) > 0.01);
  }

  SUBCASE("time-varying intensities: min of independent samplers") {
    // λ1(u) = b1 u, λ2(u) = b2 u^2; the winner law integrates λ1 e^{-Λ1-Λ2}.
    const double b1 = 0.02, b2 = 0.003;
    PdmpModel w;
    w.time_augmented = true;
    ModeSpec c;
    c.flow = families::linear_flow({0.0});
    ModeSpec w1, w2;
    families::set_weibull(w1, 1.0, b1);
    families::set_weibull(w2, 2.0, b2);
    families::set_competing(c, {{w1, {1, std::nullopt}}, {w2, {2, std::nullopt}}});
    w.modes[0] = c;
    for (int k : {1, 2}) w.modes[k].flow = families::linear_flow({0.0});
    auto big_lambda = [&](double t) { return b1 * t * t / 2 + b2 * t * t * t / 3; };
    double p1 = oracle::simpson([&](double t) { return b1 * t * std::exp(-big_lambda(t)); }, 0.0, 200.0, 20000);

    const int n = 10000;
    int wins = 0;
    std::vector<double> merged, separate;
    for (int i = 0; i < n; ++i) {
      Rng rng = derive_rng(23, static_cast<std::uint64_t>(i));
      Trajectory t = simulate_iterative(w, {0, {0.0}, 0.0}, 1, rng);
      wins += t.jumps[0].post.mode == 1;
      merged.push_back(t.jumps[0].time);
      double e1 = exponential(rng, 1.0), e2 = exponential(rng, 1.0);
      double s1 = std::sqrt(2 * e1 / b1), s2 = std::cbrt(3 * e2 / b2);
      separate.push_back(std::min(s1, s2));
    }
    double freq = static_cast<double>(wins) / n;
    CHECK(std::abs(freq - p1) <= 3.0 * std::sqrt(p1 * (1 - p1) / n));
    auto cdf = [&](double t) { return 1.0 - std::exp(-big_lambda(t)); };
    CHECK(ks_pvalue(ks_statistic(merged, cdf), merged.size()) > 0.01);
    CHECK(ks_pvalue(ks_statistic(separate, cdf), separate.size()) > 0.01);
  }
}

TEST_CASE("boundary jumps are deterministic when the intensity vanishes") {
  PdmpModel m = basic();
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    HybridState x{-1, {oracle::unif(rng, 1.01, 39.0)}, std::nullopt};
    Trajectory t = simulate_iterative(m, x, 1, rng);
    CHECK(t.jumps[0].time == boundary_time(m, x));
    CHECK(t.jumps[0].kind == JumpKind::kBoundary);
  }
}

TEST_CASE("canonical chain and reconstruction") {
  PdmpModel m = med::make_pdmp_surgery(cfg).model;
  HybridState x0 = med::make_pdmp_surgery(cfg).x0;
  Rng rng(31);
  Trajectory t = simulate_iterative(m, x0, 3, rng);
  std::vector<ChainEntry> chain = canonical_chain(t);
  REQUIRE(chain.size() == 4);
  CHECK(chain[0].z == x0);
  CHECK(chain[0].s == 0.0);
  for (std::size_t n = 1; n < chain.size(); ++n) {
    CHECK(chain[n].s > 0.0);
    CHECK(chain[n].z == t.jumps[n - 1].post);
  }
  CHECK(reconstruct_trajectory(m, chain, t.jumps[0].time, t.end_time) == t.jumps[0].post);
  double inside = 0.5 * t.jumps[0].time;
  CHECK(reconstruct_trajectory(m, chain, inside, t.end_time) == flow_at(m, x0, inside));
  for (int i = 0; i < 100; ++i) {
    double when = oracle::unif(rng, 0.0, t.end_time);
    HybridState a = reconstruct_trajectory(m, chain, when, t.end_time);
    HybridState b = state_at(m, t, when);
    CHECK(a.mode == b.mode);
    CHECK(std::abs(a.euclid[0] - b.euclid[0]) <= 1e-9);
    CHECK(std::abs(*a.elapsed - *b.elapsed) <= 1e-9);
  }
  CHECK_THROWS_AS(reconstruct_trajectory(m, chain, t.end_time + 1.0, t.end_time), Error);
}

TEST_CASE("segments are consistent with the flow") {
  PdmpModel m = med::make_pdmp_semi_markov(cfg).model;
  Rng rng(4);
  Trajectory t = simulate_iterative(m, med::make_pdmp_semi_markov(cfg).x0, 2, rng);
  for (std::size_t i = 0; i < t.segments.size(); ++i) {
    const Segment& s = t.segments[i];
    HybridState end = flow_at(m, s.start, s.duration);
    CHECK(std::abs(end.euclid[0] - t.jumps[i].pre.euclid[0]) <= 1e-9);
    CHECK(!(t.jumps[i].post == t.jumps[i].pre));
    CHECK(*t.jumps[i].post.elapsed == 0.0);
  }
}

TEST_CASE("skeleton sampling") {
  med::PdmpVariant v = med::make_pdmp_surgery(cfg);
  v.model.intensity_bound = cfg.remission.beta;
  Rng rng(2);
  std::vector<HybridState> one = skeleton_sample(v.model, v.x0, {0.0}, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == v.x0);

  SUBCASE("death absorbs") {
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(40.0 * i);
    int dead_runs = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      Rng r = derive_rng(seed, 7);
      std::vector<HybridState> xs = skeleton_sample(v.model, v.x0, grid, r);
      bool dead = false;
      for (const HybridState& x : xs) {
        if (x.mode == 2) dead = true;
        if (dead) {
          CHECK(x.mode == 2);
          CHECK(x.euclid[0] == cfg.death_level);
        }
      }
      dead_runs += dead;
    }
    CHECK(dead_runs > 0);
  }

  SUBCASE("iterative and SSA pipelines agree on mode marginals") {
    PdmpModel m = basic();
    m.intensity_bound = cfg.remission.beta;
    HybridState x0{-1, {2.0 * cfg.zeta0}, std::nullopt};
    const double when = 150.0;
    const int n = 10000;
    int in_remission_iter = 0, in_remission_ssa = 0;
    for (int i = 0; i < n; ++i) {
      Rng a = derive_rng(41, static_cast<std::uint64_t>(i));
      Trajectory t = simulate_iterative(m, x0, 2, a);
      int mode = when < t.end_time ? state_at(m, t, when).mode : t.jumps.back().post.mode;
      in_remission_iter += mode == 0;
      Rng b = derive_rng(43, static_cast<std::uint64_t>(i));
      in_remission_ssa += skeleton_sample(m, x0, {when}, b)[0].mode == 0;
    }
    double p1 = static_cast<double>(in_remission_iter) / n, p2 = static_cast<double>(in_remission_ssa) / n;
    double se = std::sqrt(p1 * (1 - p1) / n + p2 * (1 - p2) / n);
    CHECK(std::abs(p1 - p2) <= 3.0 * se);
    // closed form: P(remission at t) = exp(-λ (t - t*))
    double exact = std::exp(-cfg.remission.beta * (when - boundary_time(m, x0)));
    CHECK(std::abs(p1 - exact) <= 3.0 * std::sqrt(exact * (1 - exact) / n));
  }
}

TEST_CASE("impulse control") {
  med::PdmpVariant v = med::make_pdmp_surgery(cfg);
  ImpulseStrategy strategy = med::make_surgery_strategy(v.model, cfg);

  SUBCASE("threshold surgery restarts in remission") {
    int impulses = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng = derive_rng(seed, 1);
      Trajectory t = simulate_controlled(v.model, strategy, v.x0, 1000, rng, cfg.surgery_horizon);
      for (std::size_t i = 0; i < t.jumps.size(); ++i) {
        const Jump& j = t.jumps[i];
        if (j.kind != JumpKind::kImpulse) continue;
        ++impulses;
        CHECK(j.pre.mode == 1);
        CHECK(std::abs(j.pre.euclid[0] - cfg.surgery_threshold) <= 1e-9);
        CHECK(j.post == HybridState{0, {cfg.zeta0}, 0.0});
        REQUIRE(i + 1 < t.segments.size());
        CHECK(t.segments[i + 1].start == j.post);
        CHECK(t.segments[i + 1].start_time == j.time);
      }
      for (const Jump& j : t.jumps) CHECK(j.post.mode != 2);  // surgery always precedes death
    }
    CHECK(impulses > 0);
  }

  SUBCASE("no-impulse strategy reproduces the uncontrolled path") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng a = derive_rng(seed, 2), b = derive_rng(seed, 2);
      Trajectory c = simulate_controlled(v.model, no_impulse_strategy(), v.x0, 1, a, cfg.surgery_horizon);
      Trajectory u = simulate_iterative(v.model, v.x0, c.jumps.size(), b);
      REQUIRE(c.jumps.size() == u.jumps.size());
      for (std::size_t i = 0; i < c.jumps.size(); ++i) {
        CHECK(c.jumps[i].time == u.jumps[i].time);
        CHECK(c.jumps[i].post == u.jumps[i].post);
      }
    }
  }

  SUBCASE("decreasing intervention times are rejected") {
    ImpulseStrategy bad;
    bad.schedule = [](const Trajectory&, const HybridState& x, double now) -> std::optional<Intervention> {
      return Intervention{now - 1.0, [x](const HybridState&) { return x; }};
    };
    Rng rng(1);
    CHECK_THROWS_AS(simulate_controlled(v.model, bad, v.x0, 3, rng, 100.0), Error);
  }
}

TEST_CASE("strategy costs") {
  med::PdmpVariant v = med::make_pdmp_surgery(cfg);
  CostSpec zero;
  zero.running = [](const HybridState&) { return 0.0; };
  zero.impulse = [](const HybridState&, const HybridState&) { return 7.0; };
  zero.horizon = 10.0;
  Rng rng(5);

  auto once = periodic_strategy(4.0, 1e9, [](const HybridState& x) { return x; });
  Estimate e = evaluate_strategy_cost(v.model, once, zero, v.x0, 200, rng);
  CHECK(e.mean == doctest::Approx(7.0));
  CHECK(e.se == 0.0);

  CostSpec unit = zero;
  unit.running = [](const HybridState&) { return 1.0; };
  CHECK(evaluate_no_impulse_cost(v.model, unit, v.x0, 50, rng).mean == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(evaluate_no_impulse_cost(v.model, zero, v.x0, 50, rng).mean == 0.0);

  Rng a(77), b(77);
  Estimate n1 = evaluate_no_impulse_cost(v.model, *v.costs, v.x0, 300, a);
  Estimate n2 = evaluate_strategy_cost(v.model, no_impulse_strategy(), *v.costs, v.x0, 300, b);
  CHECK(n1.mean == n2.mean);
  CHECK(n1.se == n2.se);

  Rng c(8);
  Estimate relapsed = evaluate_no_impulse_cost(v.model, *v.costs, HybridState{1, {5.0}, 0.0}, 200, c);
  CHECK(relapsed.mean > 0.0);

  ImpulseStrategy strategy = med::make_surgery_strategy(v.model, cfg);
  Rng s1 = derive_rng(1, 0), s2 = derive_rng(2, 0);
  Estimate e1 = evaluate_strategy_cost(v.model, strategy, *v.costs, v.x0, 2000, s1);
  Estimate e2 = evaluate_strategy_cost(v.model, strategy, *v.costs, v.x0, 2000, s2);
  CHECK(std::abs(e1.mean - e2.mean) <= 3.0 * std::hypot(e1.se, e2.se));

  CostSpec invalid = unit;
  invalid.horizon = kInf;
  CHECK_THROWS_AS(invalid.validate(), Error);
}

TEST_CASE("JSON model loading and CSV export") {
  nlohmann::json doc = nlohmann::json::parse(R"({
    "modes": [
      {"id": -1, "flow": {"type": "exponential", "rate": -0.05}, "boundary": {"lower": 1.0},
       "kernel": {"on_boundary": {"to": 0, "set": 1.0}}},
      {"id": 0, "intensity": {"type": "constant", "rate": 0.005}, "kernel": {"to": 1}},
      {"id": 1, "flow": {"type": "exponential", "rate": 0.02}}
    ]
  })");
  PdmpModel m = pdmp_from_json(doc);
  PdmpModel ref = basic();
  HybridState x0{-1, {10.0}, std::nullopt};
  CHECK(boundary_time(m, x0) == doctest::Approx(boundary_time(ref, x0)));
  Rng a(3), b(3);
  Trajectory t1 = simulate_iterative(m, x0, 2, a), t2 = simulate_iterative(ref, x0, 2, b);
  CHECK(t1.jumps[1].time == doctest::Approx(t2.jumps[1].time));
  CHECK(t1.jumps[1].post.mode == 1);

  std::ostringstream out;
  write_trajectory_csv(out, m, t1);
  std::string csv = out.str();
  CHECK(csv.rfind("t,mode,euclid_0,elapsed,event_flag", 0) == 0);
  CHECK(csv.find("boundary") != std::string::npos);
  CHECK(csv.find("random") != std::string::npos);

  CHECK_THROWS_AS(pdmp_from_json(nlohmann::json::parse(R"({"modes": [{"id": 0, "flow": {"type": "spiral"}}]})")),
                  Error);
}

TEST_CASE("state validation") {
  PdmpModel semi = med::make_pdmp_semi_markov(cfg).model;
  CHECK_THROWS_AS(semi.check_state({0, {1.0}, std::nullopt}), Error);
  CHECK_THROWS_AS(semi.check_state({0, {1.0}, -1.0}), Error);
  CHECK_THROWS_AS(semi.check_state({7, {1.0}, 0.0}), Error);
  CHECK_NOTHROW(semi.check_state({0, {1.0}, 0.0}));
}
