#include "pdmdp/medical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "pdmdp/pdmp_io.hpp"

namespace pdmdp::medical {

namespace {

constexpr int kMarkerMax = 40;
constexpr int kMdpHorizon = 160;
constexpr int kObsLow = -2;
constexpr int kObsWidth = 45;  // y in [-2, 42]

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kValidation, "medical config: " + what);
}

void check_weibull(const Weibull& w, const std::string& name) {
  require(w.alpha >= 0.0 && w.beta >= 0.0, name + " needs α ≥ 0 and β ≥ 0");
}

double weibull_max(const Weibull& w, double u_max) {
  return w.alpha == 0.0 ? w.beta : w.beta * std::pow(u_max, w.alpha);
}

ModeSpec weibull_rate(const Weibull& w) {
  ModeSpec spec;
  families::set_weibull(spec, w.alpha, w.beta);
  return spec;
}

ModeSpec constant_mode() {
  ModeSpec spec;
  spec.flow = families::linear_flow({0.0});
  return spec;
}

ModeSpec exponential_mode(double rate, double lower, double upper) {
  ModeSpec spec;
  spec.flow = families::exponential_flow({rate});
  spec.boundary_time = families::exponential_walls(0, rate, lower, upper);
  return spec;
}

}  // namespace

void MedicalConfig::validate() const {
  require(zeta0 > 0.0 && death_level > zeta0, "need D > ζ0 > 0");
  require(zeta_start > zeta0 && zeta_start < death_level, "initial marker must lie in (ζ0, D)");
  require(v_treat < 0.0 && v_relapse > 0.0, "need v_{-1} < 0 < v_1");
  require(v_relapse_untreated > 0.0 && v_escape_untreated > 0.0 && v_relapse_treated > 0.0 && v_escape_treated > 0.0,
          "controlled rates must be positive");
  for (auto [w, name] : {std::pair{remission, "remission"}, std::pair{relapse_untreated, "relapse_untreated"},
                         std::pair{escape_untreated, "escape_untreated"}, std::pair{escape_treated, "escape_treated"}})
    check_weibull(w, name);
  require(relapse_to_escape_untreated >= 0.0 && relapse_to_escape_treated >= 0.0, "escape rates must be non-negative");
  require(surgery_cost >= 0.0 && surgery_horizon > 0.0, "surgery cost and horizon");
  require(surgery_threshold > zeta0 && surgery_threshold <= death_level, "surgery threshold must lie in (ζ0, D]");
  require(visit_cost >= 0.0 && treatment_cost[0] >= 0.0 && treatment_cost[1] > 0.0 && death_cost > 0.0,
          "costs must be non-negative with C_1 > 0 and C_D > 0");
  require(gaussian_sd > 0.0, "gaussian_sd must be positive");
  require(bridge_horizon >= 1, "bridge_horizon must be at least 1");
  double total = 0.0;
  for (double p : p_remission) {
    require(p >= 0.0, "p_remission entries must be non-negative");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-12, "p_remission must sum to 1");
  require(std::all_of(prior_counts.begin(), prior_counts.end(), [](Count c) { return c >= 0; }) &&
              std::accumulate(prior_counts.begin(), prior_counts.end(), Count{0}) > 0,
          "prior counts must be non-negative with positive sum");
  require(std::all_of(noise_counts.begin(), noise_counts.end(), [](Count c) { return c >= 0; }) &&
              std::accumulate(noise_counts.begin(), noise_counts.end(), Count{0}) > 0,
          "noise counts must be non-negative with positive sum");

  require(marker_max == kMarkerMax, "marker range is fixed to [0, 40]");
  require(mdp_horizon == kMdpHorizon, "finite horizon is fixed to 160");
  require(treat_step_cost == 2.0 && slow_step_cost == 2.0 && aggressive_step_cost == 3.0,
          "step costs are fixed to 2a + 2·1{m=1} + 3·1{m=2}");
  require(mdp_death_cost == 200.0, "terminal death cost is fixed to 200");
  require(slow_rise == 1 && aggressive_rise == 2 && treat_fall == 1, "marker steps are fixed to +1, +2, -1");
  require(noise_window == 5, "discrete noise window is fixed to 5");
  require(delta == 15.0, "δ is fixed to 15");
  require(delays == std::vector<int>({15, 30, 60}), "delay set is fixed to {15, 30, 60}");
}

namespace {

using Reader = std::function<void(MedicalConfig&, const nlohmann::json&)>;

template <class T>
Reader field(T MedicalConfig::*member) {
  return [member](MedicalConfig& cfg, const nlohmann::json& v) { cfg.*member = v.get<T>(); };
}

Reader weibull_field(Weibull MedicalConfig::*member) {
  return [member](MedicalConfig& cfg, const nlohmann::json& v) {
    (cfg.*member).alpha = v.at("alpha").get<double>();
    (cfg.*member).beta = v.at("beta").get<double>();
  };
}

const std::map<std::string, Reader>& readers() {
  static const std::map<std::string, Reader> table = {
      {"zeta0", field(&MedicalConfig::zeta0)},
      {"death_level", field(&MedicalConfig::death_level)},
      {"zeta_start", field(&MedicalConfig::zeta_start)},
      {"v_treat", field(&MedicalConfig::v_treat)},
      {"v_relapse", field(&MedicalConfig::v_relapse)},
      {"remission", weibull_field(&MedicalConfig::remission)},
      {"surgery_cost", field(&MedicalConfig::surgery_cost)},
      {"surgery_threshold", field(&MedicalConfig::surgery_threshold)},
      {"surgery_horizon", field(&MedicalConfig::surgery_horizon)},
      {"v_relapse_untreated", field(&MedicalConfig::v_relapse_untreated)},
      {"v_escape_untreated", field(&MedicalConfig::v_escape_untreated)},
      {"v_relapse_treated", field(&MedicalConfig::v_relapse_treated)},
      {"v_escape_treated", field(&MedicalConfig::v_escape_treated)},
      {"relapse_untreated", weibull_field(&MedicalConfig::relapse_untreated)},
      {"escape_untreated", weibull_field(&MedicalConfig::escape_untreated)},
      {"escape_treated", weibull_field(&MedicalConfig::escape_treated)},
      {"relapse_to_escape_untreated", field(&MedicalConfig::relapse_to_escape_untreated)},
      {"relapse_to_escape_treated", field(&MedicalConfig::relapse_to_escape_treated)},
      {"visit_cost", field(&MedicalConfig::visit_cost)},
      {"treatment_cost", field(&MedicalConfig::treatment_cost)},
      {"death_cost", field(&MedicalConfig::death_cost)},
      {"gaussian_sd", field(&MedicalConfig::gaussian_sd)},
      {"bridge_horizon", field(&MedicalConfig::bridge_horizon)},
      {"p_remission", field(&MedicalConfig::p_remission)},
      {"prior_counts", field(&MedicalConfig::prior_counts)},
      {"noise_counts", field(&MedicalConfig::noise_counts)},
      {"marker_max", field(&MedicalConfig::marker_max)},
      {"mdp_horizon", field(&MedicalConfig::mdp_horizon)},
      {"treat_step_cost", field(&MedicalConfig::treat_step_cost)},
      {"slow_step_cost", field(&MedicalConfig::slow_step_cost)},
      {"aggressive_step_cost", field(&MedicalConfig::aggressive_step_cost)},
      {"mdp_death_cost", field(&MedicalConfig::mdp_death_cost)},
      {"slow_rise", field(&MedicalConfig::slow_rise)},
      {"aggressive_rise", field(&MedicalConfig::aggressive_rise)},
      {"treat_fall", field(&MedicalConfig::treat_fall)},
      {"noise_window", field(&MedicalConfig::noise_window)},
      {"delta", field(&MedicalConfig::delta)},
      {"delays", field(&MedicalConfig::delays)},
  };
  return table;
}

}  // namespace

MedicalConfig config_from_json(const nlohmann::json& doc) {
  MedicalConfig cfg;
  if (doc.is_null()) return cfg;
  if (!doc.is_object()) throw Error(ErrorCode::kValidation, "medical config must be an object");
  for (const auto& [key, value] : doc.items()) {
    auto it = readers().find(key);
    if (it == readers().end()) throw Error(ErrorCode::kValidation, "unknown medical config key: " + key);
    try {
      it->second(cfg, value);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kValidation, "medical config key " + key + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const MedicalConfig& c) {
  auto w = [](const Weibull& x) { return nlohmann::json{{"alpha", x.alpha}, {"beta", x.beta}}; };
  return {{"zeta0", c.zeta0},
          {"death_level", c.death_level},
          {"zeta_start", c.zeta_start},
          {"v_treat", c.v_treat},
          {"v_relapse", c.v_relapse},
          {"remission", w(c.remission)},
          {"surgery_cost", c.surgery_cost},
          {"surgery_threshold", c.surgery_threshold},
          {"surgery_horizon", c.surgery_horizon},
          {"v_relapse_untreated", c.v_relapse_untreated},
          {"v_escape_untreated", c.v_escape_untreated},
          {"v_relapse_treated", c.v_relapse_treated},
          {"v_escape_treated", c.v_escape_treated},
          {"relapse_untreated", w(c.relapse_untreated)},
          {"escape_untreated", w(c.escape_untreated)},
          {"escape_treated", w(c.escape_treated)},
          {"relapse_to_escape_untreated", c.relapse_to_escape_untreated},
          {"relapse_to_escape_treated", c.relapse_to_escape_treated},
          {"visit_cost", c.visit_cost},
          {"treatment_cost", c.treatment_cost},
          {"death_cost", c.death_cost},
          {"gaussian_sd", c.gaussian_sd},
          {"bridge_horizon", c.bridge_horizon},
          {"p_remission", c.p_remission},
          {"prior_counts", c.prior_counts},
          {"noise_counts", c.noise_counts},
          {"marker_max", c.marker_max},
          {"mdp_horizon", c.mdp_horizon},
          {"delta", c.delta},
          {"delays", c.delays}};
}

// ---------------------------------------------------------------- finite models

int mdp_state(int mode, int marker) {
  if (mode == kRemission && marker == 0) return 0;
  if ((mode == kRelapse || mode == kEscape) && marker >= 0 && marker < kMarkerMax)
    return 1 + (mode - 1) * kMarkerMax + marker;
  if (mode == kDeath && marker == kMarkerMax) return 1 + 2 * kMarkerMax;
  throw Error(ErrorCode::kRange, "no finite state (" + std::to_string(mode) + ", " + std::to_string(marker) + ")");
}

std::pair<int, int> mdp_state_pair(int s) {
  if (s == 0) return {kRemission, 0};
  if (s >= 1 && s <= 2 * kMarkerMax) return {1 + (s - 1) / kMarkerMax, (s - 1) % kMarkerMax};
  if (s == 1 + 2 * kMarkerMax) return {kDeath, kMarkerMax};
  throw Error(ErrorCode::kRange, "finite state index out of range");
}

int observation_index(int y, int z) {
  if (y < kObsLow || y >= kObsLow + kObsWidth || (z != 0 && z != 1))
    throw Error(ErrorCode::kRange, "observation out of range");
  return (y - kObsLow) + kObsWidth * z;
}

namespace {

struct Successor {
  double prob;
  int mode;
  int marker;
};

/// One step of the finite model from (m, ζ) under action a.
std::vector<Successor> finite_step(const MedicalConfig& cfg, int m, int z, int a) {
  if (m == kDeath) return {{1.0, kDeath, kMarkerMax}};
  if (m == kRemission) {
    if (a == 1) return {{1.0, kRemission, 0}};
    std::vector<Successor> out;
    for (int k = 0; k < 3; ++k)
      if (cfg.p_remission[static_cast<std::size_t>(k)] > 0.0)
        out.push_back({cfg.p_remission[static_cast<std::size_t>(k)], k, 0});
    return out;
  }
  if (a == 1) {
    if (z > 1) return {{1.0, m, z - cfg.treat_fall}};
    return {{1.0, kRemission, 0}};
  }
  int rise = m == kRelapse ? cfg.slow_rise : cfg.aggressive_rise;
  if (z + rise < kMarkerMax) return {{1.0, m, z + rise}};
  return {{1.0, kDeath, kMarkerMax}};
}

double finite_cost(const MedicalConfig& cfg, int m, int a) {
  return cfg.treat_step_cost * a + (m == kRelapse ? cfg.slow_step_cost : 0.0) +
         (m == kEscape ? cfg.aggressive_step_cost : 0.0);
}

std::string state_label(int s) {
  auto [m, z] = mdp_state_pair(s);
  return "(" + std::to_string(m) + "," + std::to_string(z) + ")";
}

}  // namespace

FiniteMdp make_mdp(const MedicalConfig& cfg) {
  cfg.validate();
  const int n = 2 + 2 * kMarkerMax;
  FiniteMdp mdp(n, 2, cfg.mdp_horizon);
  mdp.action_labels = {"no_treatment", "treatment"};
  for (int s = 0; s < n; ++s) {
    auto [m, z] = mdp_state_pair(s);
    mdp.state_labels[static_cast<std::size_t>(s)] = state_label(s);
    if (m == kDeath) {
      mdp.set_allowed(s, {0});
      mdp.terminal[static_cast<std::size_t>(s)] = cfg.mdp_death_cost;
    }
    for (int a : mdp.allowed(s)) {
      Row& row = mdp.mutable_row(s, a);
      for (const Successor& o : finite_step(cfg, m, z, a))
        row.push_back({mdp_state(o.mode, o.marker), o.prob, finite_cost(cfg, m, a)});
    }
  }
  require_valid(mdp);
  return mdp;
}

FinitePomdp make_pomdp_discrete(const MedicalConfig& cfg) {
  FinitePomdp p;
  p.base = make_mdp(cfg);
  const int n = p.base.n_states();
  p.n_obs = 2 * kObsWidth;
  for (int z = 0; z < 2; ++z)
    for (int y = kObsLow; y < kObsLow + kObsWidth; ++y)
      p.obs_labels.push_back("y=" + std::to_string(y) + ",z=" + std::to_string(z));
  const int half = cfg.noise_window / 2;
  std::vector<std::vector<double>> table(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(p.n_obs), 0.0));
  for (int s = 0; s < n; ++s) {
    auto [m, z] = mdp_state_pair(s);
    int flag = m == kDeath ? 1 : 0;
    for (int e = -half; e <= half; ++e)
      table[static_cast<std::size_t>(s)][static_cast<std::size_t>(observation_index(z + e, flag))] =
          1.0 / cfg.noise_window;
  }
  p.obs.assign(2, table);
  p.b0.assign(static_cast<std::size_t>(n), 0.0);
  p.b0[0] = 1.0;
  p.validate();
  return p;
}

DensityPomdp make_pomdp_continuous(const MedicalConfig& cfg) {
  DensityPomdp p;
  p.base = make_mdp(cfg);
  const double half = 0.5 * (cfg.noise_window - 1);
  p.density = [half](int next, int, double y, int flag) {
    auto [m, z] = mdp_state_pair(next);
    int expected = m == kDeath ? 1 : 0;
    if (flag != expected) return 0.0;
    return std::abs(y - z) <= half ? 1.0 / (2.0 * half) : 0.0;
  };
  p.sample = [half](int next, int, Rng& rng) {
    auto [m, z] = mdp_state_pair(next);
    return std::make_pair(z + (2.0 * uniform01(rng) - 1.0) * half, m == kDeath ? 1 : 0);
  };
  p.b0.assign(static_cast<std::size_t>(p.base.n_states()), 0.0);
  p.b0[0] = 1.0;
  return p;
}

BamdpVariant make_bamdp(const MedicalConfig& cfg) {
  FiniteMdp base = make_mdp(cfg);
  UnknownRow row{0, 0, {mdp_state(kRemission, 0), mdp_state(kRelapse, 0), mdp_state(kEscape, 0)}, {}};
  Bamdp model(std::move(base), {row});
  HyperState h0{0, {std::vector<Count>(cfg.prior_counts.begin(), cfg.prior_counts.end())}};
  return {std::move(model), std::move(h0)};
}

ObsCounts make_noise_counts(const MedicalConfig& cfg) {
  ObsCounts psi(2, 1, cfg.noise_window);
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < cfg.noise_window; ++k) psi.at(a, 0, k) = cfg.noise_counts[static_cast<std::size_t>(k)];
  return psi;
}

int noise_index(int marker_next, int y) {
  int i = marker_next - y;
  if (i < -2 || i > 2) throw Error(ErrorCode::kRange, "observation outside the noise window");
  return i + 2;
}

// ---------------------------------------------------------------- continuous models

PdmpVariant make_pdmp_basic(const MedicalConfig& cfg) {
  cfg.validate();
  PdmpVariant v;
  ModeSpec treat = exponential_mode(cfg.v_treat, cfg.zeta0, kInf);
  families::set_switch_kernel(treat, {0, Vec{cfg.zeta0}});
  ModeSpec remission = constant_mode();
  remission.constant_intensity = cfg.remission.beta;
  families::set_switch_kernel(remission, {1, Vec{cfg.zeta0}});
  ModeSpec relapse = exponential_mode(cfg.v_relapse, -kInf, kInf);
  v.model.modes = {{-1, treat}, {0, remission}, {1, relapse}};
  v.x0 = {-1, {cfg.zeta_start}, std::nullopt};
  return v;
}

PdmpVariant make_pdmp_semi_markov(const MedicalConfig& cfg) {
  PdmpVariant v = make_pdmp_basic(cfg);
  v.model.time_augmented = true;
  families::set_weibull(v.model.modes.at(0), cfg.remission.alpha, cfg.remission.beta);
  v.x0.elapsed = 0.0;
  return v;
}

PdmpVariant make_pdmp_surgery(const MedicalConfig& cfg) {
  PdmpVariant v = make_pdmp_semi_markov(cfg);
  ModeSpec relapse = exponential_mode(cfg.v_relapse, -kInf, cfg.death_level);
  families::set_switch_kernel(relapse, {2, Vec{cfg.death_level}});
  v.model.modes.at(1) = relapse;
  v.model.modes[2] = constant_mode();
  const double z0 = cfg.zeta0;
  CostSpec costs;
  costs.running = [z0](const HybridState& x) { return x.euclid.at(0) - z0; };
  const double c = cfg.surgery_cost;
  costs.impulse = [c](const HybridState&, const HybridState&) { return c; };
  costs.horizon = cfg.surgery_horizon;
  v.costs = costs;
  return v;
}

ImpulseStrategy make_surgery_strategy(const PdmpModel& model, const MedicalConfig& cfg) {
  return threshold_strategy(model, 0, cfg.surgery_threshold, {1}, HybridState{0, {cfg.zeta0}, 0.0});
}

ModeAugmentedPdmp make_controlled_pdmp(const MedicalConfig& cfg) {
  cfg.validate();
  using M = ModeAugmentedPdmp;
  const double z0 = cfg.zeta0, d = cfg.death_level;
  M out;
  out.regimes = {0, 1};
  out.natural_modes = {kRemission, kRelapse, kEscape, kDeath};
  out.terminal_modes = {kDeath};
  PdmpModel& p = out.pdmp;
  p.time_augmented = true;

  // no treatment
  ModeSpec rem0 = constant_mode();
  families::set_competing(rem0, {{weibull_rate(cfg.relapse_untreated), {M::code(0, kRelapse), Vec{z0}}},
                                 {weibull_rate(cfg.escape_untreated), {M::code(0, kEscape), Vec{z0}}}});
  ModeSpec rel0 = exponential_mode(cfg.v_relapse_untreated, -kInf, d);
  rel0.constant_intensity = cfg.relapse_to_escape_untreated;
  families::set_switch_kernel(rel0, {M::code(0, kEscape), std::nullopt}, families::Target{M::code(0, kDeath), Vec{d}});
  ModeSpec esc0 = exponential_mode(cfg.v_escape_untreated, -kInf, d);
  families::set_switch_kernel(esc0, {M::code(0, kDeath), Vec{d}});

  // treatment
  ModeSpec rem1 = constant_mode();
  families::set_weibull(rem1, cfg.escape_treated.alpha, cfg.escape_treated.beta);
  families::set_switch_kernel(rem1, {M::code(1, kEscape), Vec{z0}});
  ModeSpec rel1 = exponential_mode(-cfg.v_relapse_treated, z0, kInf);
  rel1.constant_intensity = cfg.relapse_to_escape_treated;
  families::set_switch_kernel(rel1, {M::code(1, kEscape), std::nullopt}, families::Target{M::code(1, kRemission), Vec{z0}});
  ModeSpec esc1 = exponential_mode(cfg.v_escape_treated, -kInf, d);
  families::set_switch_kernel(esc1, {M::code(1, kDeath), Vec{d}});

  p.modes = {{M::code(0, kRemission), rem0}, {M::code(0, kRelapse), rel0}, {M::code(0, kEscape), esc0},
             {M::code(0, kDeath), constant_mode()}, {M::code(1, kRemission), rem1}, {M::code(1, kRelapse), rel1},
             {M::code(1, kEscape), esc1}, {M::code(1, kDeath), constant_mode()}};

  const double u_max = cfg.bridge_horizon * cfg.delta;
  double bound = std::max({weibull_max(cfg.relapse_untreated, u_max) + weibull_max(cfg.escape_untreated, u_max),
                           weibull_max(cfg.escape_treated, u_max), cfg.relapse_to_escape_untreated,
                           cfg.relapse_to_escape_treated});
  p.intensity_bound = bound;
  p.max_time = u_max;
  return out;
}

BridgeCosts make_bridge_costs(const MedicalConfig& cfg) {
  BridgeCosts costs;
  const double z0 = cfg.zeta0, delta = cfg.delta, visit = cfg.visit_cost, death = cfg.death_cost;
  const std::array<double, 2> treat = cfg.treatment_cost;
  costs.step = [=](const BridgeState& s, const BridgeAction& a, const BridgeState& next) {
    double r = a.delay * delta;
    double c = (next.x.euclid.at(0) - z0) * r + visit + treat.at(static_cast<std::size_t>(a.regime));
    if (next.x.mode == kDeath && s.x.mode != kDeath) c += death;
    return c;
  };
  costs.terminal = [](const BridgeState&) { return 0.0; };
  return costs;
}

namespace {

BridgeConfig medical_bridge_config(const MedicalConfig& cfg) {
  BridgeConfig bc;
  bc.delta = cfg.delta;
  bc.horizon = cfg.bridge_horizon;
  bc.delays.clear();
  for (int r : cfg.delays) bc.delays.push_back(static_cast<int>(std::lround(r / cfg.delta)));
  return bc;
}

}  // namespace

BridgeVariant make_bridge_full(const MedicalConfig& cfg) {
  BridgeVariant v;
  v.bridge = std::make_shared<Bridge>(make_controlled_pdmp(cfg), medical_bridge_config(cfg), make_bridge_costs(cfg));
  v.s0 = {false, HybridState{kRemission, {cfg.zeta0}, 0.0}, 0};
  return v;
}

BridgeVariant make_bridge_pomdp(const MedicalConfig& cfg) {
  BridgeVariant v = make_bridge_full(cfg);
  ObservationModel obs;
  obs.link = [](const HybridState& x) { return x.euclid.at(0); };
  obs.noise = {Noise::Kind::kGaussian, cfg.gaussian_sd};
  obs.flagged_modes = {kDeath};
  v.obs = obs;
  return v;
}

HybridState twin_state(int s) {
  auto [m, z] = mdp_state_pair(s);
  return {m, {static_cast<double>(z)}, 0.0};
}

BridgeVariant make_bridge_twin(const MedicalConfig& cfg) {
  cfg.validate();
  using M = ModeAugmentedPdmp;
  M model;
  model.regimes = {0, 1};
  model.natural_modes = {kRemission, kRelapse, kEscape, kDeath};
  model.terminal_modes = {kDeath};
  model.pdmp.time_augmented = true;
  model.pdmp.intensity_bound = 0.0;
  for (int l : model.regimes) {
    for (int m : model.natural_modes) {
      ModeSpec spec = constant_mode();
      if (m != kDeath) {
        spec.boundary_time = [](const HybridState& x) { return 1.0 - x.elapsed.value(); };
        spec.kernel_outcomes = [cfg, l, m](const HybridState& pre, JumpKind) {
          std::vector<std::pair<double, HybridState>> out;
          int z = static_cast<int>(std::lround(pre.euclid.at(0)));
          for (const Successor& o : finite_step(cfg, m, z, l))
            out.push_back({o.prob, HybridState{M::code(l, o.mode), {static_cast<double>(o.marker)}, 0.0}});
          return out;
        };
        spec.kernel = [outcomes = spec.kernel_outcomes](const HybridState& pre, JumpKind kind, Rng& rng) {
          auto outs = outcomes(pre, kind);
          double u = uniform01(rng), acc = 0.0;
          for (auto& [p, x] : outs) {
            acc += p;
            if (u < acc) return x;
          }
          return outs.back().second;
        };
      }
      model.pdmp.modes[M::code(l, m)] = spec;
    }
  }
  model.state_key = [](const HybridState& x) {
    return std::vector<std::int64_t>{x.mode, std::llround(x.euclid.at(0))};
  };
  BridgeCosts costs;
  const double treat = cfg.treat_step_cost, slow = cfg.slow_step_cost, aggressive = cfg.aggressive_step_cost,
               death = cfg.mdp_death_cost;
  costs.step = [=](const BridgeState& s, const BridgeAction& a, const BridgeState& next) {
    int m = s.x.mode;
    double c = treat * a.regime + (m == kRelapse ? slow : 0.0) + (m == kEscape ? aggressive : 0.0);
    if (next.x.mode == kDeath && m != kDeath) c += death;
    return c;
  };
  BridgeConfig bc{1.0, cfg.mdp_horizon, {1}};
  BridgeVariant v;
  v.bridge = std::make_shared<Bridge>(std::move(model), bc, costs);
  v.s0 = {false, twin_state(0), 0};
  ObservationModel obs;
  obs.link = [](const HybridState& x) { return x.euclid.at(0); };
  obs.noise = {Noise::Kind::kDiscreteUniform, static_cast<double>(cfg.noise_window / 2)};
  obs.flagged_modes = {kDeath};
  v.obs = obs;
  for (int s = 0; s < 2 + 2 * kMarkerMax; ++s) v.grid.push_back(twin_state(s));
  return v;
}

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = {"pdmp_basic",     "pdmp_semi_markov", "pdmp_surgery",
                                                 "mdp_finite",     "pomdp_discrete",   "pomdp_continuous",
                                                 "bamdp",          "bridge_full",      "bridge_pomdp",
                                                 "bridge_twin"};
  return names;
}

Variant make_variant(const std::string& name, const MedicalConfig& cfg) {
  if (name == "pdmp_basic") return make_pdmp_basic(cfg);
  if (name == "pdmp_semi_markov") return make_pdmp_semi_markov(cfg);
  if (name == "pdmp_surgery") return make_pdmp_surgery(cfg);
  if (name == "mdp_finite") return make_mdp(cfg);
  if (name == "pomdp_discrete") return make_pomdp_discrete(cfg);
  if (name == "pomdp_continuous") return make_pomdp_continuous(cfg);
  if (name == "bamdp") return make_bamdp(cfg);
  if (name == "bridge_full") return make_bridge_full(cfg);
  if (name == "bridge_pomdp") return make_bridge_pomdp(cfg);
  if (name == "bridge_twin") return make_bridge_twin(cfg);
  throw Error(ErrorCode::kValidation, "unknown variant: " + name);
}

}  // namespace pdmdp::medical
