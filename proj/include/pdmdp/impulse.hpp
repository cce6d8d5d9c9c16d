#pragma once

#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "pdmdp/pdmp.hpp"
#include "pdmdp/stats.hpp"

namespace pdmdp {

/// Next intervention: absolute time and the restart rule applied to the pre-impulse state.
struct Intervention {
  double time = kInf;
  std::function<HybridState(const HybridState&)> restart;
};

/// Non-anticipative impulse strategy. The schedule is re-queried after every event with the
/// trajectory so far, the current state and the current time.
struct ImpulseStrategy {
  std::function<std::optional<Intervention>(const Trajectory&, const HybridState&, double)> schedule;
  std::vector<HybridState> control_set;  ///< empty means unrestricted
};

struct CostSpec {
  std::function<double(const HybridState&)> running;
  std::function<double(const HybridState&, const HybridState&)> impulse;
  std::function<double(const HybridState&)> terminal;
  double discount = 0.0;
  double horizon = kInf;

  void validate() const;
  /// Simulation end time: the horizon, or a tail cut where e^{-γT} ≤ 1e-10.
  double effective_horizon() const;
};

ImpulseStrategy no_impulse_strategy();

/// Intervene as soon as euclid[coord] ≥ threshold while in one of `modes`.
ImpulseStrategy threshold_strategy(const PdmpModel& model, std::size_t coord, double threshold,
                                   std::set<int> modes, HybridState restart);

/// Interventions at first, first + period, ... with a state-dependent restart rule.
ImpulseStrategy periodic_strategy(double first, double period,
                                  std::function<HybridState(const HybridState&)> restart);

Trajectory simulate_controlled(const PdmpModel& model, const ImpulseStrategy& strategy,
                               const HybridState& x0, std::size_t n_impulses, Rng& rng,
                               double horizon = kInf);

/// Discounted running + impulse + terminal cost of one trajectory.
double trajectory_cost(const PdmpModel& model, const Trajectory& traj, const CostSpec& costs);

Estimate evaluate_strategy_cost(const PdmpModel& model, const ImpulseStrategy& strategy,
                                const CostSpec& costs, const HybridState& x0, std::size_t n_sims,
                                Rng& rng);
Estimate evaluate_no_impulse_cost(const PdmpModel& model, const CostSpec& costs,
                                  const HybridState& x0, std::size_t n_sims, Rng& rng);

}  // namespace pdmdp
