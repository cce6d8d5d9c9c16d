#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace pdmdp {

struct ExperimentSpec {
  std::string command;  ///< simulate, solve, plan, evaluate or filter
  std::string variant;
  std::uint64_t seed = 0;
  nlohmann::json model = nlohmann::json::object();   ///< medical config overrides
  nlohmann::json params = nlohmann::json::object();  ///< command options
  std::filesystem::path out;
};

/// Reads {command, variant, seed, model, params, out}; missing keys keep their defaults.
ExperimentSpec experiment_from_json(const nlohmann::json& doc);

const std::vector<std::string>& experiment_commands();

/// Runs one experiment and writes its artifacts plus summary.json under spec.out.
/// Returns the artifact file names, summary last.
std::vector<std::string> run_experiment(const ExperimentSpec& spec);

}  // namespace pdmdp
