#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdmdp/common.hpp"
#include "pdmdp/experiment.hpp"
#include "pdmdp/medical.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;

struct Options {
  std::string config;
  std::string variant;
  std::uint64_t seed = 0;
  std::string out;
};

/// Config file: {"model": {...}, "params": {...}}; both parts optional.
pdmdp::ExperimentSpec load_spec(const std::string& command, const Options& opt) {
  pdmdp::ExperimentSpec spec;
  spec.command = command;
  spec.variant = opt.variant;
  spec.seed = opt.seed;
  spec.out = opt.out;
  if (opt.config.empty()) return spec;
  std::ifstream in(opt.config);
  if (!in) throw pdmdp::Error(pdmdp::ErrorCode::kValidation, "cannot open config " + opt.config);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw pdmdp::Error(pdmdp::ErrorCode::kValidation, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw pdmdp::Error(pdmdp::ErrorCode::kValidation, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "model")
      spec.model = value;
    else if (key == "params")
      spec.params = value;
    else
      throw pdmdp::Error(pdmdp::ErrorCode::kValidation, "unknown config key: " + key);
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise-deterministic decision process toolkit"};
  app.require_subcommand(1);
  Options opt;
  const std::map<std::string, std::string> help = {
      {"simulate", "simulate one trajectory or episode"},
      {"solve", "solve a finite model exactly"},
      {"plan", "run tree search from the initial state"},
      {"evaluate", "Monte-Carlo evaluation of a policy"},
      {"filter", "run a belief filter along one episode"},
  };
  std::string variants;
  for (const auto& name : pdmdp::medical::variant_names()) variants += (variants.empty() ? "" : ", ") + name;
  for (const auto& name : pdmdp::experiment_commands()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", opt.config, "JSON file with model overrides and command parameters");
    sub->add_option("--variant", opt.variant, "model variant: " + variants)->required();
    sub->add_option("--seed", opt.seed, "random seed")->default_val(0);
    sub->add_option("--out", opt.out, "output directory")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    pdmdp::ExperimentSpec spec = load_spec(command, opt);
    for (const auto& file : pdmdp::run_experiment(spec)) std::cout << (spec.out / file).string() << '\n';
    return 0;
  } catch (const pdmdp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == pdmdp::ErrorCode::kValidation ? kExitValidation : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
