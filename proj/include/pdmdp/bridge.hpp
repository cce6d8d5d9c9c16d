#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pdmdp/dp.hpp"
#include "pdmdp/generative.hpp"
#include "pdmdp/mcts.hpp"
#include "pdmdp/pdmp.hpp"

namespace pdmdp {

/// Finite partition of the natural state space used for kernel tabulation.
struct Partition {
  std::function<int(const HybridState&)> cell;
  int n_cells = 0;
  std::vector<std::string> labels;
};

/**
 * PDMP whose mode is a pair (regime ℓ, natural mode m), encoded in the underlying PdmpModel as
 * ℓ * kStride + m. Kernels must never change ℓ.
 */
struct ModeAugmentedPdmp {
  static constexpr int kStride = 100;
  static int code(int regime, int mode) { return regime * kStride + mode; }
  static int regime_of(int code) { return code / kStride; }
  static int natural_of(int code) { return code % kStride; }

  std::vector<int> regimes;
  std::vector<int> natural_modes;
  PdmpModel pdmp;
  std::set<int> terminal_modes;  ///< natural modes where only ď is allowed (death)
  /// Identity of natural states for tree keys and tabulation; default quantises at 1e-9.
  std::function<std::vector<std::int64_t>(const HybridState&)> state_key;

  void validate() const;
  std::vector<std::int64_t> key(const HybridState& x) const;
};

struct BridgeAction {
  bool stop = false;  ///< the artificial action ď
  int regime = 0;
  int delay = 0;  ///< in units of δ

  bool operator==(const BridgeAction& o) const {
    return stop == o.stop && (stop || (regime == o.regime && delay == o.delay));
  }
  static BridgeAction dummy() { return {true, 0, 0}; }
  std::string label() const;
};

struct BridgeState {
  bool cemetery = false;
  HybridState x;  ///< natural mode in x.mode
  int clock = 0;  ///< decision clock in units of δ

  static BridgeState dead_end() {
    BridgeState s;
    s.cemetery = true;
    return s;
  }
};

struct BridgeConfig {
  double delta = 15.0;
  int horizon = 1;             ///< H decisions; real horizon H·δ
  std::vector<int> delays{1};  ///< 𝕋 in units of δ

  void validate() const;
};

struct BridgeCosts {
  std::function<double(const BridgeState&, const BridgeAction&, const BridgeState&)> step;
  std::function<double(const BridgeState&)> terminal;
  /// Optional cost computed from the simulated sub-trajectory; replaces `step` in sampled steps.
  std::function<double(const BridgeState&, const BridgeAction&, const Trajectory&, const BridgeState&)> path;
};

/// Exact finite-support skeleton law of a PDMP run for `duration` when all visited modes have
/// zero intensity and kernels expose their outcomes.
std::vector<std::pair<double, HybridState>> exact_skeleton_kernel(const PdmpModel& pdmp, const HybridState& x,
                                                                  double duration);

class Bridge {
 public:
  Bridge(ModeAugmentedPdmp model, BridgeConfig config, BridgeCosts costs);

  const ModeAugmentedPdmp& model() const { return model_; }
  const BridgeConfig& config() const { return config_; }
  const BridgeCosts& costs() const { return costs_; }

  std::vector<BridgeAction> admissible(const BridgeState& s) const;
  bool is_admissible(const BridgeState& s, const BridgeAction& a) const;
  /// Underlying PDMP state for natural state x under regime ℓ.
  HybridState lift(const HybridState& x, int regime) const;
  HybridState drop(const HybridState& y) const;

  std::pair<BridgeState, double> step(const BridgeState& s, const BridgeAction& a, Rng& rng) const;
  /// Exact successor law when the sub-dynamics admit exact_skeleton_kernel.
  std::vector<std::pair<double, BridgeState>> exact_successors(const BridgeState& s, const BridgeAction& a) const;
  double terminal_cost(const BridgeState& s) const;

  bool same_state(const BridgeState& a, const BridgeState& b) const;

  GenerativeModel<BridgeState, BridgeAction> generative() const;

 private:
  ModeAugmentedPdmp model_;
  BridgeConfig config_;
  BridgeCosts costs_;
};

inline std::pair<BridgeState, double> bridge_step(const Bridge& bridge, const BridgeState& s, const BridgeAction& a,
                                                  Rng& rng) {
  return bridge.step(s, a, rng);
}

/// Monte-Carlo estimate of P^ℓ_r(·|x) over the partition cells.
std::vector<double> estimate_kernel(const ModeAugmentedPdmp& model, const HybridState& x, int regime, double duration,
                                    std::size_t n_sims, const Partition& partition, Rng& rng);

GenerativeModel<BridgeState, BridgeAction> wrap_as_mdp(const Bridge& bridge);

/// Explicit MDP over reachable bridge states from s0, built from exact sub-dynamics.
struct BridgeTable {
  FiniteMdp mdp;
  std::vector<BridgeState> states;
  std::vector<BridgeAction> actions;
  int root = 0;
};
BridgeTable tabulate_bridge(const Bridge& bridge, const BridgeState& s0, std::size_t cap = 1'000'000);

// ---------------------------------------------------------------- observations and filtering

struct Noise {
  enum class Kind { kNone, kDiscreteUniform, kUniform, kGaussian };
  Kind kind = Kind::kNone;
  double scale = 0.0;  ///< half-width (uniform families) or standard deviation

  double density(double eps) const;
  double sample(Rng& rng) const;
};

struct ObservationModel {
  std::function<double(const HybridState&)> link;  ///< F
  Noise noise;
  std::set<int> flagged_modes;  ///< z = 1 exactly when the natural mode is in this set
  bool full_state = false;      ///< emit the whole state (perfectly observed wrapper)

  double likelihood(const HybridState& x, double y, int z) const;
};

struct BridgeObservation {
  bool cemetery = false;
  double y = 0.0;
  int z = 0;
  int clock = 0;
  std::optional<HybridState> full;
};

class BridgePomdp {
 public:
  BridgePomdp(const Bridge& bridge, ObservationModel obs) : bridge_(&bridge), obs_(std::move(obs)) {}

  const Bridge& bridge() const { return *bridge_; }
  const ObservationModel& observation_model() const { return obs_; }

  BridgeObservation observe(const BridgeState& s, Rng& rng) const;
  std::tuple<BridgeState, double, BridgeObservation> step(const BridgeState& s, const BridgeAction& a, Rng& rng) const;
  bool same_observation(const BridgeObservation& a, const BridgeObservation& b) const;

 private:
  const Bridge* bridge_;
  ObservationModel obs_;
};

BridgePomdp wrap_as_pomdp(const Bridge& bridge, ObservationModel obs);

struct ParticleFilter {
  std::vector<HybridState> particles;
  std::vector<double> weights;
};

/// Weights over fixed grid points with a transition rule between them.
struct GridFilter {
  std::vector<HybridState> points;
  std::vector<double> weights;
};

using FilterState = std::variant<ParticleFilter, GridFilter>;

/// Transition between grid points under (ℓ, r): list of (probability, target index).
using GridKernel = std::function<std::vector<std::pair<double, int>>(int from, int regime, int delay)>;

/// Grid kernel from exact sub-dynamics; successors are matched to points by the model's state key.
GridKernel exact_grid_kernel(const Bridge& bridge, const std::vector<HybridState>& points);
/// Grid kernel from estimate_kernel, with one representative point per partition cell.
GridKernel estimated_grid_kernel(const Bridge& bridge, const std::vector<HybridState>& points, const Partition& partition,
                                 std::size_t n_sims, std::uint64_t seed);

ParticleFilter filter_update(const Bridge& bridge, const ObservationModel& obs, const ParticleFilter& theta,
                             const BridgeAction& a, const BridgeObservation& y, Rng& rng);
GridFilter filter_update(const ObservationModel& obs, const GridFilter& theta, const BridgeAction& a,
                         const BridgeObservation& y, const GridKernel& kernel);

/// Sample a natural state from the filter.
HybridState sample_filter(const FilterState& theta, Rng& rng);

/// Tree search over observation histories; hidden states are drawn from the filter at the root.
MctsResult<BridgeObservation, BridgeAction> plan_pomdp_mcts(const BridgePomdp& pomdp, const FilterState& theta, int clock,
                                                            const MctsOptions& opt, Rng& rng);

struct EpisodeRow {
  int n = 0;
  double t = 0.0;
  int mode = 0;
  double marker = 0.0;
  double elapsed = 0.0;
  BridgeAction action;
  double y = 0.0;
  double cost = 0.0;
  bool cemetery = false;
};
void write_episode_csv(std::ostream& out, const std::vector<EpisodeRow>& rows);

}  // namespace pdmdp
