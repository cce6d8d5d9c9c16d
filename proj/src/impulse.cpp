#include "pdmdp/impulse.hpp"

#include <cmath>
#include <limits>

#include "pdmdp/quadrature.hpp"

namespace pdmdp {

void CostSpec::validate() const {
  if (!(discount >= 0.0 && discount < 1.0))
    throw Error(ErrorCode::kValidation, "discount must lie in [0,1)");
  if (!(horizon > 0.0)) throw Error(ErrorCode::kValidation, "horizon must be positive");
  if (std::isinf(horizon) && discount == 0.0)
    throw Error(ErrorCode::kValidation, "infinite horizon requires a positive discount");
}

double CostSpec::effective_horizon() const {
  if (std::isfinite(horizon)) return horizon;
  return std::log(1e10) / discount;
}

ImpulseStrategy no_impulse_strategy() {
  return {[](const Trajectory&, const HybridState&, double) { return std::nullopt; }, {}};
}

ImpulseStrategy threshold_strategy(const PdmpModel& model, std::size_t coord, double threshold,
                                   std::set<int> modes, HybridState restart) {
  ImpulseStrategy s;
  s.control_set = {restart};
  s.schedule = [&model, coord, threshold, modes = std::move(modes), restart](
                   const Trajectory&, const HybridState& x,
                   double now) -> std::optional<Intervention> {
    if (!modes.count(x.mode)) return std::nullopt;
    auto fixed = [restart](const HybridState&) { return restart; };
    if (x.euclid.at(coord) >= threshold) return Intervention{now, fixed};
    double tstar = boundary_time(model, x);
    double window = std::isfinite(tstar) ? tstar : model.mode(x.mode).ode_lookahead;
    auto above = [&](double t) { return flow_at(model, x, t).euclid[coord] >= threshold; };
    // scan the current flow segment, then bisect the first crossing
    const int steps = 1000;
    double prev = 0.0;
    for (int k = 1; k <= steps; ++k) {
      double t = window * k / steps;
      if (above(t)) {
        double lo = prev, hi = t;
        // bisect to adjacent doubles
        for (double mid = 0.5 * (lo + hi); mid > lo && mid < hi; mid = 0.5 * (lo + hi)) (above(mid) ? hi : lo) = mid;
        return Intervention{now + hi, fixed};
      }
      prev = t;
    }
    return std::nullopt;
  };
  return s;
}

ImpulseStrategy periodic_strategy(double first, double period,
                                  std::function<HybridState(const HybridState&)> restart) {
  ImpulseStrategy s;
  s.schedule = [first, period, restart = std::move(restart)](
                   const Trajectory& traj, const HybridState&,
                   double) -> std::optional<Intervention> {
    std::size_t done = 0;
    for (const Jump& j : traj.jumps)
      if (j.kind == JumpKind::kImpulse) ++done;
    return Intervention{first + period * static_cast<double>(done), restart};
  };
  return s;
}

Trajectory simulate_controlled(const PdmpModel& model, const ImpulseStrategy& strategy,
                               const HybridState& x0, std::size_t n_impulses, Rng& rng,
                               double horizon) {
  model.check_state(x0);
  Trajectory traj;
  traj.initial = x0;
  HybridState x = x0;
  double now = 0.0;
  double last_impulse = -kInf;
  std::size_t impulses = 0;
  while (impulses < n_impulses && now < horizon) {
    std::optional<Intervention> next = strategy.schedule(traj, x, now);
    double tau = next ? next->time : kInf;
    if (tau < now || (std::isfinite(tau) && tau <= last_impulse))
      throw Error(ErrorCode::kStrategy, "intervention times must be strictly increasing");

    double tstar = boundary_time(model, x);
    double e = exponential(rng, 1.0);
    double s = invert_hazard(model, x, e, tstar);
    JumpKind kind = JumpKind::kRandom;
    if (s >= tstar) {
      s = tstar;
      kind = JumpKind::kBoundary;
    }
    double stop = std::min(tau, horizon);
    if (now + s < stop) {
      HybridState pre = flow_at(model, x, s);
      HybridState post = apply_kernel(model, pre, kind, rng);
      traj.segments.push_back({now, x, s});
      now += s;
      traj.jumps.push_back({now, pre, post, kind});
      x = std::move(post);
    } else if (!std::isfinite(stop)) {
      throw Error(ErrorCode::kNoJumpReachable, "no jump, no impulse and no horizon");
    } else if (tau <= horizon) {
      HybridState pre = flow_at(model, x, tau - now);
      HybridState post = next->restart(pre);
      if (!strategy.control_set.empty()) {
        bool member = false;
        for (const HybridState& u : strategy.control_set) member = member || u == post;
        if (!member) throw Error(ErrorCode::kStrategy, "restart state outside the control set");
      }
      model.check_state(post);
      traj.segments.push_back({now, x, tau - now});
      now = tau;
      traj.jumps.push_back({now, pre, post, JumpKind::kImpulse});
      x = std::move(post);
      last_impulse = tau;
      ++impulses;
    } else {
      traj.segments.push_back({now, x, horizon - now});
      now = horizon;
    }
    if (traj.jumps.size() > model.max_jumps)
      throw Error(ErrorCode::kExplosion, "jump cap exceeded");
  }
  traj.end_time = now;
  return traj;
}

double trajectory_cost(const PdmpModel& model, const Trajectory& traj, const CostSpec& costs) {
  const double g = costs.discount;
  double total = 0.0;
  if (costs.running) {
    for (const Segment& seg : traj.segments) {
      if (seg.duration <= 0.0) continue;
      total += integrate(
          [&](double s) {
            return std::exp(-g * (seg.start_time + s)) * costs.running(flow_at(model, seg.start, s));
          },
          0.0, seg.duration, 1e-10);
    }
  }
  if (costs.impulse) {
    for (const Jump& j : traj.jumps)
      if (j.kind == JumpKind::kImpulse) total += std::exp(-g * j.time) * costs.impulse(j.pre, j.post);
  }
  if (costs.terminal && std::isfinite(costs.horizon))
    total += std::exp(-g * costs.horizon) * costs.terminal(state_at(model, traj, costs.horizon));
  return total;
}

Estimate evaluate_strategy_cost(const PdmpModel& model, const ImpulseStrategy& strategy,
                                const CostSpec& costs, const HybridState& x0, std::size_t n_sims,
                                Rng& rng) {
  costs.validate();
  if (n_sims < 1) throw Error(ErrorCode::kValidation, "n_sims must be positive");
  const double end = costs.effective_horizon();
  MeanAccumulator acc;
  for (std::size_t i = 0; i < n_sims; ++i) {
    Trajectory traj = simulate_controlled(model, strategy, x0,
                                          std::numeric_limits<std::size_t>::max(), rng, end);
    acc.add(trajectory_cost(model, traj, costs));
  }
  return acc.estimate();
}

Estimate evaluate_no_impulse_cost(const PdmpModel& model, const CostSpec& costs,
                                  const HybridState& x0, std::size_t n_sims, Rng& rng) {
  return evaluate_strategy_cost(model, no_impulse_strategy(), costs, x0, n_sims, rng);
}

}  // namespace pdmdp
