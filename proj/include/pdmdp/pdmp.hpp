#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "pdmdp/common.hpp"

namespace pdmdp {

using Vec = std::vector<double>;

/// Hybrid state (mode, euclidean part, optional time since last jump).
struct HybridState {
  int mode = 0;
  Vec euclid;
  std::optional<double> elapsed;

  bool operator==(const HybridState& o) const {
    return mode == o.mode && euclid == o.euclid && elapsed == o.elapsed;
  }
};

enum class JumpKind { kBoundary, kRandom, kImpulse };

const char* to_string(JumpKind kind);

/**
 * Local characteristics of one mode.
 *
 * The flow is either closed form (`flow`) or an ODE right-hand side (`ode_rhs`), in which case
 * `ode_boundary` signals the boundary by becoming non-positive. Intensity may be declared
 * constant, given pointwise, or left empty for zero. Closed-form hazard and its inverse are
 * optional shortcuts; without them the simulator integrates and bisects.
 */
struct ModeSpec {
  std::function<Vec(const Vec&, double)> flow;
  std::function<Vec(const Vec&)> ode_rhs;
  std::function<double(const Vec&)> ode_boundary;
  double ode_lookahead = 1e3;

  std::optional<double> constant_intensity;
  std::function<double(const HybridState&)> intensity;
  std::function<double(const HybridState&, double)> hazard;
  std::function<double(const HybridState&, double)> inverse_hazard;

  std::function<double(const HybridState&)> boundary_time;

  std::function<HybridState(const HybridState&, JumpKind, Rng&)> kernel;
  /// Optional exact finite-support description of the kernel.
  std::function<std::vector<std::pair<double, HybridState>>(const HybridState&, JumpKind)>
      kernel_outcomes;

  std::function<bool(const Vec&)> region;

  bool zero_intensity() const {
    return (constant_intensity && *constant_intensity == 0.0) ||
           (!constant_intensity && !intensity && !hazard);
  }
};

struct PdmpModel {
  std::map<int, ModeSpec> modes;
  bool time_augmented = false;
  std::optional<double> intensity_bound;
  std::size_t max_jumps = 1'000'000;
  /// Search window for hazard inversion when t* is infinite.
  double max_time = 1e7;

  const ModeSpec& mode(int m) const;
  /// Throws kValidation when x is not a valid state of this model.
  void check_state(const HybridState& x) const;
};

struct Segment {
  double start_time = 0.0;
  HybridState start;
  double duration = 0.0;
};

struct Jump {
  double time = 0.0;
  HybridState pre;
  HybridState post;
  JumpKind kind = JumpKind::kRandom;
};

struct Trajectory {
  HybridState initial;
  std::vector<Segment> segments;
  std::vector<Jump> jumps;
  double end_time = 0.0;
};

struct ChainEntry {
  HybridState z;
  double s = 0.0;  ///< inter-jump time
  double t = 0.0;  ///< absolute jump time
};

HybridState flow_at(const PdmpModel& model, const HybridState& x, double t);
double boundary_time(const PdmpModel& model, const HybridState& x);
double intensity_at(const PdmpModel& model, const HybridState& x);
double cumulative_hazard(const PdmpModel& model, const HybridState& x, double t);

/// Time S with Λ(x,S) = e, or +inf if the hazard never reaches e before t*.
double invert_hazard(const PdmpModel& model, const HybridState& x, double e, double tstar);

/// Apply the jump kernel, resetting the elapsed coordinate for time-augmented models.
HybridState apply_kernel(const PdmpModel& model, const HybridState& pre, JumpKind kind, Rng& rng);

Trajectory simulate_iterative(const PdmpModel& model, const HybridState& x0, std::size_t n_jumps,
                              Rng& rng);
Trajectory simulate_ssa(const PdmpModel& model, const HybridState& x0, double horizon, Rng& rng);

std::vector<ChainEntry> canonical_chain(const Trajectory& traj);
HybridState reconstruct_trajectory(const PdmpModel& model, const std::vector<ChainEntry>& chain,
                                   double t, double end_time);
/// State of a stored trajectory at time t (right-continuous at jumps).
HybridState state_at(const PdmpModel& model, const Trajectory& traj, double t);

std::vector<HybridState> skeleton_sample(const PdmpModel& model, const HybridState& x0,
                                         const std::vector<double>& grid, Rng& rng);

}  // namespace pdmdp
