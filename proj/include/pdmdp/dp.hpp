#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "pdmdp/mdp.hpp"

namespace pdmdp {

struct SolveResult {
  /// Finite horizon: V_0..V_H. Infinite horizon: a single vector.
  std::vector<std::vector<double>> values;
  /// Finite horizon: π_0..π_{H-1}. Infinite horizon: a single stationary rule.
  std::vector<std::vector<int>> policy;
  std::size_t iterations = 0;
  double residual = 0.0;
  std::vector<double> deltas;                     ///< value iteration sup-norm changes
  std::vector<std::vector<double>> evaluations;   ///< policy iteration values per round

  Policy as_policy() const;
};

/// Lowest-index argmin over K(s) of a Q row.
int greedy_action(const FiniteMdp& mdp, int s, const std::vector<double>& q_row);

SolveResult backward_induction(const FiniteMdp& mdp);
SolveResult value_iteration(const FiniteMdp& mdp, double discount, double epsilon,
                            const std::optional<std::vector<double>>& warm_start = std::nullopt,
                            std::size_t max_iterations = 10'000'000);
SolveResult policy_iteration(const FiniteMdp& mdp, double discount,
                             const std::optional<std::vector<int>>& initial = std::nullopt,
                             std::size_t max_iterations = 1000);

/// sup_t,s |V_t(s) - min_a Q_t(s,a)| for finite horizon, ‖TV - V‖ otherwise.
double bellman_residual(const FiniteMdp& mdp, const SolveResult& result, double discount = 1.0);

/// Exact optimum over Markov deterministic policies by enumeration of the decisions that
/// matter from s0 (reachable stage/state pairs). Throws kCapExceeded past `limit` policies.
double brute_force_optimal(const FiniteMdp& mdp, int s0, double limit = 1e7);
/// Number of policies brute_force_optimal would enumerate.
double brute_force_count(const FiniteMdp& mdp, int s0);

nlohmann::json to_json(const SolveResult& result);

}  // namespace pdmdp
