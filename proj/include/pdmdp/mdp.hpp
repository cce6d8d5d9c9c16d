#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdmdp/common.hpp"
#include "pdmdp/stats.hpp"

namespace pdmdp {

/// One successor of a transition row with its transition cost c(s,a,s').
struct Outcome {
  int next = 0;
  double prob = 0.0;
  double cost = 0.0;
};

using Row = std::vector<Outcome>;

/**
 * Finite MDP ⟨S, A, H, K, P, c, C⟩ with sparse rows.
 *
 * Rows are stored per stage block; a single block means stationary dynamics. Inadmissible
 * (s, a) pairs keep empty rows.
 */
class FiniteMdp {
 public:
  FiniteMdp() = default;
  FiniteMdp(int n_states, int n_actions, std::optional<int> horizon);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  std::optional<int> horizon() const { return horizon_; }
  void set_horizon(std::optional<int> h) { horizon_ = h; }

  std::vector<std::string> state_labels;
  std::vector<std::string> action_labels;
  std::vector<double> terminal;  ///< C(s), zero by default

  const std::vector<int>& allowed(int s) const { return allowed_.at(s); }
  void set_allowed(int s, std::vector<int> actions);
  bool admissible(int s, int a) const;

  std::size_t n_stage_blocks() const { return stages_.size(); }
  /// Switch to per-stage tables, copying the stationary entries into H blocks.
  void make_nonstationary();

  const Row& row(int t, int s, int a) const;
  Row& mutable_row(int t, int s, int a);
  Row& mutable_row(int s, int a) { return mutable_row(0, s, a); }
  /// Dense convenience setter; successors with zero probability are dropped.
  void set_row(int t, int s, int a, const std::vector<double>& probs, const std::vector<double>& costs);
  void set_row(int s, int a, const std::vector<double>& probs, double cost);

  std::vector<double> dense_probs(int t, int s, int a) const;
  /// Expected immediate cost Σ P(s'|s,a) c(s,a,s').
  double expected_cost(int t, int s, int a) const;

 private:
  std::size_t block(int t) const { return stages_.size() == 1 ? 0 : static_cast<std::size_t>(t); }

  int n_states_ = 0;
  int n_actions_ = 0;
  std::optional<int> horizon_;
  std::vector<std::vector<int>> allowed_;
  std::vector<std::vector<Row>> stages_;
};

struct Diagnostics {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  std::vector<int> unreachable;
  bool ok() const { return errors.empty(); }
};

Diagnostics validate(const FiniteMdp& mdp, int s0 = 0);
/// Throws kValidation with the first error when the model is invalid.
void require_valid(const FiniteMdp& mdp);

/// Deterministic or stochastic, stationary or Markovian policy table.
struct Policy {
  bool stationary = true;
  std::vector<std::vector<int>> actions;                ///< [t][s], deterministic
  std::vector<std::vector<std::vector<double>>> probs;  ///< [t][s][a], stochastic

  bool deterministic() const { return probs.empty(); }
  int action(int t, int s) const;
  double prob(int t, int s, int a) const;
  int sample(int t, int s, Rng& rng) const;

  static Policy stationary_deterministic(std::vector<int> actions);
  static Policy markov_deterministic(std::vector<std::vector<int>> actions);
  static Policy stationary_stochastic(std::vector<std::vector<double>> probs);
};

/// Throws kInadmissible when the policy puts mass outside K(s).
void check_admissible(const FiniteMdp& mdp, const Policy& policy);

struct Step {
  int t = 0;
  int s = 0;
  int a = 0;
  double cost = 0.0;
};

struct TrajectoryRecord {
  std::vector<Step> steps;
  int terminal_state = 0;
  double terminal_cost = 0.0;
  double total(double discount = 1.0) const;
};

/// Draws a successor state (not a row index) from the row.
int sample_next(const Row& row, Rng& rng);

/// Rollout of a policy from s0; `length` is required for infinite-horizon models.
TrajectoryRecord simulate_policy(const FiniteMdp& mdp, const Policy& policy, int s0, Rng& rng,
                                 std::size_t length = 0);

using HistoryPolicy = std::function<int(const TrajectoryRecord& so_far, int s, Rng& rng)>;
TrajectoryRecord simulate_history_policy(const FiniteMdp& mdp, const HistoryPolicy& policy, int s0,
                                         Rng& rng, std::size_t length = 0);

std::vector<double> evaluate_policy_exact(const FiniteMdp& mdp, const Policy& policy, double discount);
/// Exact finite-horizon values V_0..V_H of a Markov policy.
std::vector<std::vector<double>> evaluate_policy_finite(const FiniteMdp& mdp, const Policy& policy);

Estimate evaluate_total_cost_mc(const FiniteMdp& mdp, const Policy& policy, int s0,
                                std::size_t n_sims, Rng& rng);
/// truncation = 0 picks the smallest T with γ^T max|c| ≤ 1e-6.
Estimate evaluate_discounted_mc(const FiniteMdp& mdp, const Policy& policy, int s0, double discount,
                                std::size_t n_sims, std::size_t truncation, Rng& rng);
Estimate evaluate_average_mc(const FiniteMdp& mdp, const Policy& policy, int s0,
                             std::size_t h_trunc, std::size_t n_sims, Rng& rng);

/// Q(s,a) = Σ P(s'|s,a)(c + γ V(s')) at stage t; +inf for inadmissible pairs.
std::vector<std::vector<double>> q_from_v(const FiniteMdp& mdp, const std::vector<double>& next_values,
                                          double discount, int t = 0);

}  // namespace pdmdp
