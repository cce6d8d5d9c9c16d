#include "pdmdp/pdmp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdmdp/quadrature.hpp"

namespace pdmdp {

const char* to_string(JumpKind kind) {
  switch (kind) {
    case JumpKind::kBoundary: return "boundary";
    case JumpKind::kRandom: return "random";
    case JumpKind::kImpulse: return "impulse";
  }
  return "?";
}

const ModeSpec& PdmpModel::mode(int m) const {
  auto it = modes.find(m);
  if (it == modes.end()) throw Error(ErrorCode::kValidation, "unknown mode " + std::to_string(m));
  return it->second;
}

void PdmpModel::check_state(const HybridState& x) const {
  const ModeSpec& spec = mode(x.mode);
  if (time_augmented != x.elapsed.has_value())
    throw Error(ErrorCode::kValidation, "elapsed coordinate must be present iff time-augmented");
  if (x.elapsed && !(*x.elapsed >= 0.0))
    throw Error(ErrorCode::kValidation, "negative elapsed coordinate");
  if (spec.region && !spec.region(x.euclid))
    throw Error(ErrorCode::kValidation, "state outside region of mode " + std::to_string(x.mode));
}

namespace {

Vec axpy(const Vec& x, double a, const Vec& k) {
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * k[i];
  return out;
}

Vec rk4(const std::function<Vec(const Vec&)>& f, Vec x, double t, double max_step) {
  if (t <= 0.0) return x;
  auto n = static_cast<long>(std::ceil(t / max_step));
  double h = t / static_cast<double>(n);
  for (long i = 0; i < n; ++i) {
    Vec k1 = f(x);
    Vec k2 = f(axpy(x, 0.5 * h, k1));
    Vec k3 = f(axpy(x, 0.5 * h, k2));
    Vec k4 = f(axpy(x, h, k3));
    for (std::size_t j = 0; j < x.size(); ++j)
      x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return x;
}

constexpr double kOdeStep = 0.01;

double ode_boundary_time(const ModeSpec& spec, const Vec& x) {
  if (!spec.ode_boundary) return kInf;
  if (spec.ode_boundary(x) <= 0.0) return 0.0;
  Vec cur = x;
  double t = 0.0;
  while (t < spec.ode_lookahead) {
    Vec next = rk4(spec.ode_rhs, cur, kOdeStep, kOdeStep);
    if (spec.ode_boundary(next) <= 0.0) {
      double lo = 0.0, hi = kOdeStep;
      while (hi - lo > 1e-9) {
        double mid = 0.5 * (lo + hi);
        if (spec.ode_boundary(rk4(spec.ode_rhs, cur, mid, kOdeStep)) <= 0.0)
          hi = mid;
        else
          lo = mid;
      }
      return t + hi;
    }
    cur = std::move(next);
    t += kOdeStep;
  }
  return kInf;
}

}  // namespace

double boundary_time(const PdmpModel& model, const HybridState& x) {
  const ModeSpec& spec = model.mode(x.mode);
  if (spec.boundary_time) return std::max(0.0, spec.boundary_time(x));
  if (spec.ode_rhs) return ode_boundary_time(spec, x.euclid);
  return kInf;
}

HybridState flow_at(const PdmpModel& model, const HybridState& x, double t) {
  if (t < 0.0) throw Error(ErrorCode::kRange, "negative flow time");
  const ModeSpec& spec = model.mode(x.mode);
  double tstar = boundary_time(model, x);
  if (t > tstar + 1e-9 * std::max(1.0, tstar))
    throw Error(ErrorCode::kBoundaryOverrun,
                "flow time " + std::to_string(t) + " exceeds t* = " + std::to_string(tstar));
  HybridState out = x;
  if (t > 0.0) {
    if (spec.flow) {
      out.euclid = spec.flow(x.euclid, t);
    } else if (spec.ode_rhs) {
      double step = std::isfinite(tstar) ? std::min(kOdeStep, tstar / 100.0) : kOdeStep;
      out.euclid = rk4(spec.ode_rhs, x.euclid, t, std::max(step, 1e-12));
    }
  }
  if (out.elapsed) *out.elapsed += t;
  return out;
}

double intensity_at(const PdmpModel& model, const HybridState& x) {
  const ModeSpec& spec = model.mode(x.mode);
  if (spec.constant_intensity) return *spec.constant_intensity;
  if (spec.intensity) return spec.intensity(x);
  return 0.0;
}

double cumulative_hazard(const PdmpModel& model, const HybridState& x, double t) {
  const ModeSpec& spec = model.mode(x.mode);
  if (t <= 0.0) return 0.0;
  if (spec.constant_intensity) return *spec.constant_intensity * t;
  if (spec.hazard) return spec.hazard(x, t);
  if (!spec.intensity) return 0.0;
  return integrate([&](double s) { return spec.intensity(flow_at(model, x, s)); }, 0.0, t, 1e-11);
}

double invert_hazard(const PdmpModel& model, const HybridState& x, double e, double tstar) {
  const ModeSpec& spec = model.mode(x.mode);
  if (spec.zero_intensity()) return kInf;
  if (spec.constant_intensity) return e / *spec.constant_intensity;
  if (spec.inverse_hazard) return spec.inverse_hazard(x, e);
  double hi;
  if (std::isfinite(tstar)) {
    if (cumulative_hazard(model, x, tstar) < e) return kInf;
    hi = tstar;
  } else {
    hi = 1.0;
    while (cumulative_hazard(model, x, hi) < e) {
      hi *= 2.0;
      if (hi > model.max_time) return kInf;
    }
  }
  double lo = 0.0;
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    if (cumulative_hazard(model, x, mid) < e)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

HybridState apply_kernel(const PdmpModel& model, const HybridState& pre, JumpKind kind, Rng& rng) {
  const ModeSpec& spec = model.mode(pre.mode);
  if (!spec.kernel)
    throw Error(ErrorCode::kValidation, "mode " + std::to_string(pre.mode) + " has no kernel");
  HybridState post = spec.kernel(pre, kind, rng);
  if (model.time_augmented) post.elapsed = 0.0;
  return post;
}

Trajectory simulate_iterative(const PdmpModel& model, const HybridState& x0, std::size_t n_jumps,
                              Rng& rng) {
  model.check_state(x0);
  if (n_jumps > model.max_jumps)
    throw Error(ErrorCode::kExplosion, "requested jumps exceed the per-trajectory cap");
  Trajectory traj;
  traj.initial = x0;
  HybridState x = x0;
  double now = 0.0;
  for (std::size_t n = 0; n < n_jumps; ++n) {
    double tstar = boundary_time(model, x);
    double e = exponential(rng, 1.0);
    double s = invert_hazard(model, x, e, tstar);
    JumpKind kind = JumpKind::kRandom;
    if (s >= tstar) {
      s = tstar;
      kind = JumpKind::kBoundary;
    }
    if (!std::isfinite(s))
      throw Error(ErrorCode::kNoJumpReachable,
                  "no jump reachable after " + std::to_string(n) + " jumps");
    HybridState pre = flow_at(model, x, s);
    HybridState post = apply_kernel(model, pre, kind, rng);
    traj.segments.push_back({now, x, s});
    now += s;
    traj.jumps.push_back({now, pre, post, kind});
    x = std::move(post);
  }
  traj.end_time = now;
  return traj;
}

Trajectory simulate_ssa(const PdmpModel& model, const HybridState& x0, double horizon, Rng& rng) {
  model.check_state(x0);
  if (!model.intensity_bound)
    throw Error(ErrorCode::kInvalidBound, "simulate_ssa requires an intensity bound");
  const double bound = *model.intensity_bound;
  Trajectory traj;
  traj.initial = x0;
  HybridState seg_start = x0, x = x0;
  double seg_time = 0.0, now = 0.0;

  auto close_segment = [&](double end) { traj.segments.push_back({seg_time, seg_start, end - seg_time}); };

  while (true) {
    double tstar = boundary_time(model, x);
    double s = bound > 0.0 ? exponential(rng, bound) : kInf;
    double remaining = horizon - now;
    if (s > tstar) {
      if (tstar > remaining) break;
      HybridState pre = flow_at(model, x, tstar);
      now += tstar;
      HybridState post = apply_kernel(model, pre, JumpKind::kBoundary, rng);
      close_segment(now);
      traj.jumps.push_back({now, pre, post, JumpKind::kBoundary});
      seg_start = x = post;
      seg_time = now;
    } else {
      if (s > remaining) break;
      HybridState y = flow_at(model, x, s);
      double lam = intensity_at(model, y);
      if (lam > bound * (1.0 + 1e-12))
        throw Error(ErrorCode::kInvalidBound, "intensity " + std::to_string(lam) +
                                                  " exceeds bound " + std::to_string(bound));
      double u = uniform01(rng);
      now += s;
      if (u * bound <= lam && lam > 0.0) {
        HybridState post = apply_kernel(model, y, JumpKind::kRandom, rng);
        close_segment(now);
        traj.jumps.push_back({now, y, post, JumpKind::kRandom});
        seg_start = x = post;
        seg_time = now;
      } else {
        x = std::move(y);
      }
    }
    if (traj.jumps.size() > model.max_jumps)
      throw Error(ErrorCode::kExplosion, "jump cap exceeded before horizon");
  }
  if (horizon > seg_time || traj.segments.empty()) close_segment(std::max(horizon, seg_time));
  traj.end_time = std::max(horizon, seg_time);
  return traj;
}

std::vector<ChainEntry> canonical_chain(const Trajectory& traj) {
  std::vector<ChainEntry> chain;
  chain.push_back({traj.initial, 0.0, 0.0});
  double prev = 0.0;
  for (const Jump& j : traj.jumps) {
    chain.push_back({j.post, j.time - prev, j.time});
    prev = j.time;
  }
  return chain;
}

HybridState reconstruct_trajectory(const PdmpModel& model, const std::vector<ChainEntry>& chain,
                                   double t, double end_time) {
  if (chain.empty()) throw Error(ErrorCode::kRange, "empty chain");
  if (t < 0.0 || t > end_time)
    throw Error(ErrorCode::kRange, "time " + std::to_string(t) + " outside simulated range");
  auto it = std::upper_bound(chain.begin(), chain.end(), t,
                             [](double v, const ChainEntry& e) { return v < e.t; });
  const ChainEntry& e = *std::prev(it);
  return flow_at(model, e.z, t - e.t);
}

HybridState state_at(const PdmpModel& model, const Trajectory& traj, double t) {
  std::vector<ChainEntry> chain = canonical_chain(traj);
  return reconstruct_trajectory(model, chain, t, traj.end_time);
}

std::vector<HybridState> skeleton_sample(const PdmpModel& model, const HybridState& x0,
                                         const std::vector<double>& grid, Rng& rng) {
  if (grid.empty()) return {};
  if (grid.front() < 0.0 || !std::is_sorted(grid.begin(), grid.end()))
    throw Error(ErrorCode::kValidation, "grid must be increasing and non-negative");
  Trajectory traj = simulate_ssa(model, x0, grid.back(), rng);
  std::vector<ChainEntry> chain = canonical_chain(traj);
  std::vector<HybridState> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back(reconstruct_trajectory(model, chain, t, traj.end_time));
  return out;
}

}  // namespace pdmdp
