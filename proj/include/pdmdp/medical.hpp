#pragma once

#include <array>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pdmdp/bamdp.hpp"
#include "pdmdp/bridge.hpp"
#include "pdmdp/impulse.hpp"
#include "pdmdp/mdp.hpp"
#include "pdmdp/pdmp.hpp"
#include "pdmdp/pomdp.hpp"

namespace pdmdp::medical {

// Natural modes of the controlled model.
inline constexpr int kRemission = 0;
inline constexpr int kRelapse = 1;
inline constexpr int kEscape = 2;  // aggressive relapse / therapeutic escape
inline constexpr int kDeath = 3;

struct Weibull {
  double alpha = 0.0;  ///< 0 gives a constant rate β
  double beta = 0.0;
};

struct MedicalConfig {
  // Continuous marker models.
  double zeta0 = 1.0;        ///< nominal (remission) level
  double death_level = 40.0;  ///< D
  double zeta_start = 10.0;  ///< initial marker under treatment
  double v_treat = -0.05;    ///< v_{-1}
  double v_relapse = 0.02;   ///< v_1
  Weibull remission{0.0, 0.005};
  double surgery_cost = 100.0;
  double surgery_threshold = 20.0;
  double surgery_horizon = 2400.0;

  // Controlled model rates (per day).
  double v_relapse_untreated = 0.02;
  double v_escape_untreated = 0.04;
  double v_relapse_treated = 0.03;
  double v_escape_treated = 0.02;
  Weibull relapse_untreated{0.0, 0.004};  ///< remission to relapse, no treatment
  Weibull escape_untreated{0.0, 0.001};   ///< remission to escape, no treatment
  Weibull escape_treated{0.0, 0.0005};    ///< remission to escape under treatment
  double relapse_to_escape_untreated = 0.002;
  double relapse_to_escape_treated = 0.003;
  double visit_cost = 10.0;
  std::array<double, 2> treatment_cost{0.0, 50.0};
  double death_cost = 20000.0;
  double gaussian_sd = 1.0;
  int bridge_horizon = 160;

  // Finite models.
  std::array<double, 3> p_remission{0.90, 0.07, 0.03};
  std::array<Count, 3> prior_counts{5, 1, 0};
  std::array<Count, 5> noise_counts{1, 1, 1, 1, 1};

  // Values fixed by the model definition; changing them is rejected.
  int marker_max = 40;
  int mdp_horizon = 160;
  double treat_step_cost = 2.0;
  double slow_step_cost = 2.0;
  double aggressive_step_cost = 3.0;
  double mdp_death_cost = 200.0;
  int slow_rise = 1;
  int aggressive_rise = 2;
  int treat_fall = 1;
  int noise_window = 5;
  double delta = 15.0;
  std::vector<int> delays{15, 30, 60};

  void validate() const;
};

MedicalConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const MedicalConfig& cfg);

// ---------------------------------------------------------------- finite models

/// State index of (m, ζ) in the finite model: (0,0), (1,0..39), (2,0..39), (3,40).
int mdp_state(int mode, int marker);
std::pair<int, int> mdp_state_pair(int s);
int observation_index(int y, int z);

FiniteMdp make_mdp(const MedicalConfig& cfg);
FinitePomdp make_pomdp_discrete(const MedicalConfig& cfg);
DensityPomdp make_pomdp_continuous(const MedicalConfig& cfg);

struct BamdpVariant {
  Bamdp model;
  HyperState h0;
};
BamdpVariant make_bamdp(const MedicalConfig& cfg);

/// Noise counts ψ over ε ∈ {−2..2}, one row per action.
ObsCounts make_noise_counts(const MedicalConfig& cfg);
/// Entry of ψ incremented after observing y with true marker ζ'.
int noise_index(int marker_next, int y);

// ---------------------------------------------------------------- continuous models

struct PdmpVariant {
  PdmpModel model;
  HybridState x0;
  std::optional<CostSpec> costs;
};

PdmpVariant make_pdmp_basic(const MedicalConfig& cfg);
PdmpVariant make_pdmp_semi_markov(const MedicalConfig& cfg);
PdmpVariant make_pdmp_surgery(const MedicalConfig& cfg);
/// Surgery once the marker reaches the threshold during relapse; keeps a reference to `model`.
ImpulseStrategy make_surgery_strategy(const PdmpModel& model, const MedicalConfig& cfg);

ModeAugmentedPdmp make_controlled_pdmp(const MedicalConfig& cfg);
BridgeCosts make_bridge_costs(const MedicalConfig& cfg);

struct BridgeVariant {
  std::shared_ptr<Bridge> bridge;
  BridgeState s0;
  std::optional<ObservationModel> obs;
  std::vector<HybridState> grid;  ///< filter grid, when finite
};

BridgeVariant make_bridge_full(const MedicalConfig& cfg);
BridgeVariant make_bridge_pomdp(const MedicalConfig& cfg);
/// The finite MDP re-expressed as a bridge with unit-time deterministic sub-dynamics.
BridgeVariant make_bridge_twin(const MedicalConfig& cfg);
/// Twin natural state for finite state index s.
HybridState twin_state(int s);

using Variant = std::variant<PdmpVariant, FiniteMdp, FinitePomdp, DensityPomdp, BamdpVariant, BridgeVariant>;

const std::vector<std::string>& variant_names();
Variant make_variant(const std::string& name, const MedicalConfig& cfg);

}  // namespace pdmdp::medical
