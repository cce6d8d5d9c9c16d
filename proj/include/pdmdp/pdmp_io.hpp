#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdmdp/pdmp.hpp"

namespace pdmdp {

/// Built-in flow, intensity, boundary and kernel families shared by the JSON loader
/// and the medical models.
namespace families {

/// x_i(t) = x_i e^{rate_i t}
std::function<Vec(const Vec&, double)> exponential_flow(Vec rates);
/// x_i(t) = x_i + velocity_i t
std::function<Vec(const Vec&, double)> linear_flow(Vec velocity);

/// Hitting time of [lower, upper] walls on one coordinate under exponential growth.
std::function<double(const HybridState&)> exponential_walls(std::size_t coord, double rate,
                                                            double lower, double upper);
std::function<double(const HybridState&)> linear_walls(std::size_t coord, double velocity,
                                                       double lower, double upper);

/// λ(x) = β u^α on the elapsed coordinate; fills intensity, hazard and inverse hazard.
void set_weibull(ModeSpec& spec, double alpha, double beta);

struct Target {
  int mode = 0;
  std::optional<Vec> euclid;  ///< replaces the euclidean part when present
};

HybridState retarget(const HybridState& pre, const Target& target);

/// Deterministic mode switch, with an optional different target for boundary jumps.
void set_switch_kernel(ModeSpec& spec, Target on_random, std::optional<Target> on_boundary = {});

/// Competing risks: λ = Σ λ_i, the winner i is drawn with probability λ_i / Σ λ.
struct Branch {
  ModeSpec rate;  ///< only the intensity fields are used
  Target target;
};
void set_competing(ModeSpec& spec, std::vector<Branch> branches,
                   std::optional<Target> on_boundary = {});

}  // namespace families

/// Load a model from the JSON schema described in the README.
PdmpModel pdmp_from_json(const nlohmann::json& doc);
HybridState hybrid_state_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const HybridState& x);

void write_trajectory_csv(std::ostream& out, const PdmpModel& model, const Trajectory& traj);

}  // namespace pdmdp
