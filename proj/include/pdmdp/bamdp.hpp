#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "pdmdp/generative.hpp"
#include "pdmdp/mdp.hpp"

namespace pdmdp {

using Count = std::int64_t;

/// A transition row (s, a) whose successor law is unknown, restricted to `support`.
struct UnknownRow {
  int s = 0;
  int a = 0;
  std::vector<int> support;
  std::vector<double> costs;  ///< c(s,a,s') aligned with support; filled from the base row when empty
};

struct HyperState {
  int s = 0;
  std::vector<std::vector<Count>> theta;  ///< one count vector per unknown row

  bool operator==(const HyperState& o) const { return s == o.s && theta == o.theta; }
  bool operator<(const HyperState& o) const { return s != o.s ? s < o.s : theta < o.theta; }
  Count mass() const;
};

struct HyperOutcome {
  double prob = 0.0;
  HyperState next;
  double cost = 0.0;
};

class Bamdp {
 public:
  Bamdp(FiniteMdp base, std::vector<UnknownRow> rows);

  const FiniteMdp& base() const { return base_; }
  const std::vector<UnknownRow>& rows() const { return rows_; }
  /// Index of the unknown row at (s, a), or -1.
  int unknown_index(int s, int a) const;

  /// Predictive probability θ_{s'} / Σθ of entry `k` of unknown row `row`.
  double predictive(const HyperState& h, int row, std::size_t k) const;
  std::vector<HyperOutcome> transition(const HyperState& h, int a) const;
  HyperState step(const HyperState& h, int a, int next) const;

  GenerativeModel<HyperState, int> generative() const;

 private:
  FiniteMdp base_;
  std::vector<UnknownRow> rows_;
  std::map<std::pair<int, int>, int> index_;
};

struct HyperMdp {
  FiniteMdp mdp;
  std::vector<HyperState> nodes;
  std::vector<int> stage;
  int root = 0;
};

HyperMdp build_bamdp(const Bamdp& model, const HyperState& h0, int horizon, std::size_t cap = 1'000'000);

/// Observation counts ψ over (a, s', ω).
struct ObsCounts {
  int n_actions = 0;
  int n_states = 0;
  int n_obs = 0;
  std::vector<Count> psi;

  ObsCounts() = default;
  ObsCounts(int actions, int states, int obs, Count init = 0);
  Count& at(int a, int next, int w);
  Count at(int a, int next, int w) const;
  Count row_sum(int a, int next) const;
};

double bapomdp_obs_prob(const ObsCounts& psi, int a, int next, int w);
ObsCounts bapomdp_count_update(const ObsCounts& psi, int a, int next, int w);

}  // namespace pdmdp
