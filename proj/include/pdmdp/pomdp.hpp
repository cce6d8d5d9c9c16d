#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdmdp/dp.hpp"
#include "pdmdp/mdp.hpp"

namespace pdmdp {

using Belief = std::vector<double>;

/// Throws kValidation unless b is non-negative and sums to 1 within 1e-12.
void check_belief(const Belief& b);

struct FinitePomdp {
  FiniteMdp base;
  int n_obs = 0;
  std::vector<std::string> obs_labels;
  std::vector<std::vector<std::vector<double>>> obs;  ///< [a][s'][ω]
  Belief b0;

  double O(int next, int a, int w) const {
    return obs[static_cast<std::size_t>(a)][static_cast<std::size_t>(next)][static_cast<std::size_t>(w)];
  }
  void validate() const;
};

/// Bayes posterior over S given a prior and one observation (used when only ω0 is known).
Belief belief_from_observation(const std::vector<double>& obs_likelihood, const Belief& prior);

/// One-step prediction Σ_s b(s) P(s'|s,a).
Belief predict_belief(const FiniteMdp& mdp, const Belief& b, int a, int t = 0);
Belief belief_update(const FinitePomdp& pomdp, const Belief& b, int a, int w, int t = 0);

struct BeliefSuccessor {
  int obs = 0;
  double prob = 0.0;
  Belief belief;
};
std::vector<BeliefSuccessor> belief_transition(const FinitePomdp& pomdp, const Belief& b, int a, int t = 0);

/// ρ(b,a,b') = Σ_s b(s) Σ_{s'} b'(s') c(s,a,s'); pairs outside the support of P(·|s,a) use the
/// row's expected cost.
double belief_cost(const FiniteMdp& mdp, const Belief& b, int a, const Belief& next, int t = 0);

/// Actions admissible in every state of the belief's support.
std::vector<int> belief_admissible(const FiniteMdp& mdp, const Belief& b);

struct BeliefMdp {
  FiniteMdp mdp;  ///< over nodes, horizon H
  std::vector<Belief> beliefs;
  std::vector<int> stage;
  std::vector<std::size_t> nodes_per_stage;
  int root = 0;

  /// Node of a belief reached at stage t, or -1.
  int find(int t, const Belief& b) const;

 private:
  friend BeliefMdp build_belief_mdp(const FinitePomdp&, int, std::size_t);
  std::map<std::pair<int, std::vector<std::int64_t>>, int> index_;
};

std::vector<std::int64_t> belief_key(const Belief& b);
BeliefMdp build_belief_mdp(const FinitePomdp& pomdp, int depth, std::size_t cap = 1'000'000);

using BeliefPolicy = std::function<int(int t, const Belief& b)>;

struct PomdpSolution {
  double value = 0.0;
  BeliefMdp belief_mdp;
  SolveResult result;
  BeliefPolicy policy() const;
};

PomdpSolution solve_pomdp(const FinitePomdp& pomdp, int depth, std::size_t cap = 1'000'000);

struct PomdpEpisode {
  std::vector<int> states;  ///< s_0..s_H
  std::vector<int> actions;
  std::vector<int> observations;
  std::vector<double> costs;
  std::vector<Belief> beliefs;  ///< b_0..b_H
  double terminal_cost = 0.0;
  double total = 0.0;
};

PomdpEpisode pomdp_simulate(const FinitePomdp& pomdp, const BeliefPolicy& policy, int horizon, Rng& rng);

/// Continuous observations handled through a density O(s', a, y).
struct DensityPomdp {
  FiniteMdp base;
  std::function<double(int next, int a, double y, int z)> density;
  std::function<std::pair<double, int>(int next, int a, Rng&)> sample;
  Belief b0;
};
Belief belief_update(const DensityPomdp& pomdp, const Belief& b, int a, double y, int z, int t = 0);

nlohmann::json to_json(const FinitePomdp& pomdp);
FinitePomdp pomdp_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const PomdpSolution& solution);

}  // namespace pdmdp
