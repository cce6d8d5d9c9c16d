#pragma once

#include <ostream>

#include <json.hpp>

#include "pdmdp/mdp.hpp"

namespace pdmdp {

/// Dense JSON export (stage-0 tables): states, actions, horizon, K, P[s][a][s'], c[s][a][s'], C.
nlohmann::json to_json(const FiniteMdp& mdp);
/// Accepts dense P rows; c may be [s][a] or [s][a][s'].
FiniteMdp mdp_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const Policy& policy);

void write_mdp_trajectory_csv(std::ostream& out, const FiniteMdp& mdp, const TrajectoryRecord& rec);

}  // namespace pdmdp
