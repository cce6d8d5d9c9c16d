#include "pdmdp/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "pdmdp/bamdp.hpp"
#include "pdmdp/bridge.hpp"
#include "pdmdp/dp.hpp"
#include "pdmdp/impulse.hpp"
#include "pdmdp/mcts.hpp"
#include "pdmdp/mdp_io.hpp"
#include "pdmdp/medical.hpp"
#include "pdmdp/pdmp_io.hpp"
#include "pdmdp/pomdp.hpp"

namespace pdmdp {

namespace fs = std::filesystem;
using nlohmann::json;
namespace med = medical;

ExperimentSpec experiment_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kValidation, "experiment spec must be an object");
  static const std::set<std::string> keys = {"command", "variant", "seed", "model", "params", "out"};
  for (const auto& [k, v] : doc.items())
    if (!keys.count(k)) throw Error(ErrorCode::kValidation, "unknown experiment key: " + k);
  ExperimentSpec spec;
  try {
    spec.command = doc.value("command", std::string{});
    spec.variant = doc.value("variant", std::string{});
    spec.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("model")) spec.model = doc.at("model");
    if (doc.contains("params")) spec.params = doc.at("params");
    if (doc.contains("out")) spec.out = doc.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("experiment spec: ") + e.what());
  }
  return spec;
}

const std::vector<std::string>& experiment_commands() {
  static const std::vector<std::string> names = {"simulate", "solve", "plan", "evaluate", "filter"};
  return names;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Params {
 public:
  explicit Params(const json& doc) : doc_(doc.is_null() ? json::object() : doc) {
    if (!doc_.is_object()) throw Error(ErrorCode::kValidation, "params must be an object");
    static const std::set<std::string> known = {"n_jumps", "depth", "budget", "episodes", "particles",
                                                "treat_above", "c_uct", "max_depth", "algorithm",
                                                "discount", "tolerance"};
    for (const auto& [k, v] : doc_.items())
      if (!known.count(k)) throw Error(ErrorCode::kValidation, "unknown parameter: " + k);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    T value = fallback;
    if (doc_.contains(key)) {
      try {
        value = doc_.at(key).get<T>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kValidation, "parameter " + key + ": " + e.what());
      }
    }
    used_[key] = value;
    return value;
  }

  const json& used() const { return used_; }

 private:
  json doc_;
  json used_ = json::object();
};

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + dir_.string());
  }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir_ / name).string());
    files_.push_back(name);
    return out;
  }

  void write_json(const std::string& name, const json& doc) { open(name) << doc.dump(2) << '\n'; }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"se", e.se}, {"n", e.n}}; }

[[noreturn]] void unsupported(const ExperimentSpec& spec) {
  throw Error(ErrorCode::kValidation, "command '" + spec.command + "' is not available for variant '" + spec.variant + "'");
}

MctsOptions mcts_options(Params& p) {
  MctsOptions opt;
  opt.budget = p.get<std::size_t>("budget", 1000);
  opt.c_uct = p.get<double>("c_uct", opt.c_uct);
  opt.max_depth = p.get<std::size_t>("max_depth", 0);
  return opt;
}

template <class K, class A, class Label>
json plan_json(const MctsResult<K, A>& res, Label label) {
  json stats = json::array();
  for (const auto& s : res.root) stats.push_back({{"action", label(s.action)}, {"visits", s.visits}, {"value", s.value}});
  return {{"action", label(res.action)}, {"iterations", res.iterations}, {"tree_size", res.tree.size()}, {"root", stats}};
}

// ---------------------------------------------------------------- bridge episodes

double marker_of(const HybridState& x) { return x.euclid.at(0); }

/// Visit every δ; treat when the marker reading is at or above the threshold.
BridgeAction rule(const Bridge& bridge, const BridgeState& s, double reading, double threshold) {
  std::vector<BridgeAction> acts = bridge.admissible(s);
  if (acts.size() == 1 && acts[0].stop) return acts[0];
  return {false, reading >= threshold ? 1 : 0, 1};
}

struct Episode {
  std::vector<EpisodeRow> rows;
  double total = 0.0;
};

Episode bridge_episode(const med::BridgeVariant& v, double threshold, Rng& rng) {
  const Bridge& bridge = *v.bridge;
  std::optional<BridgePomdp> pomdp;
  if (v.obs) pomdp.emplace(bridge, *v.obs);
  Episode ep;
  BridgeState s = v.s0;
  double reading = marker_of(s.x);
  for (int n = 0; !s.cemetery; ++n) {
    BridgeAction a = rule(bridge, s, reading, threshold);
    auto [next, cost] = bridge.step(s, a, rng);
    EpisodeRow row;
    row.n = n;
    row.t = s.clock * bridge.config().delta;
    row.mode = s.x.mode;
    row.marker = marker_of(s.x);
    row.elapsed = s.x.elapsed.value_or(0.0);
    row.action = a;
    row.y = reading;
    row.cost = cost;
    ep.rows.push_back(row);
    ep.total += cost;
    s = next;
    if (!s.cemetery) reading = pomdp ? pomdp->observe(s, rng).y : marker_of(s.x);
  }
  EpisodeRow last;
  last.n = static_cast<int>(ep.rows.size());
  last.cemetery = true;
  last.action = BridgeAction::dummy();
  ep.rows.push_back(last);
  return ep;
}

std::array<double, 4> mode_mass(const FilterState& theta, double& mean_marker) {
  std::array<double, 4> mass{};
  mean_marker = 0.0;
  std::visit(
      [&](const auto& f) {
        const auto& pts = [&]() -> const std::vector<HybridState>& {
          if constexpr (std::is_same_v<std::decay_t<decltype(f)>, ParticleFilter>)
            return f.particles;
          else
            return f.points;
        }();
        for (std::size_t i = 0; i < pts.size(); ++i) {
          mass.at(static_cast<std::size_t>(pts[i].mode)) += f.weights[i];
          mean_marker += f.weights[i] * marker_of(pts[i]);
        }
      },
      theta);
  return mass;
}

// ---------------------------------------------------------------- per-family commands

void run_pdmp(const ExperimentSpec& spec, const med::MedicalConfig& cfg, const med::PdmpVariant& v, Params& p,
              Artifacts& art, json& summary) {
  Rng rng = derive_rng(spec.seed, 0);
  if (spec.command == "simulate") {
    Trajectory traj;
    if (spec.variant == "pdmp_surgery") {
      ImpulseStrategy strategy = med::make_surgery_strategy(v.model, cfg);
      traj = simulate_controlled(v.model, strategy, v.x0, 100000, rng, v.costs->horizon);
      summary["cost"] = trajectory_cost(v.model, traj, *v.costs);
    } else {
      traj = simulate_iterative(v.model, v.x0, p.get<std::size_t>("n_jumps", 2), rng);
    }
    auto out = art.open("trajectory.csv");
    write_trajectory_csv(out, v.model, traj);
    json kinds = json::array();
    for (const Jump& j : traj.jumps) kinds.push_back(to_string(j.kind));
    summary["jumps"] = kinds;
    return;
  }
  if (spec.command == "evaluate" && v.costs) {
    std::size_t n = p.get<std::size_t>("episodes", 1000);
    ImpulseStrategy strategy = med::make_surgery_strategy(v.model, cfg);
    Estimate with = evaluate_strategy_cost(v.model, strategy, *v.costs, v.x0, n, rng);
    Rng rng2 = derive_rng(spec.seed, 1);
    Estimate without = evaluate_no_impulse_cost(v.model, *v.costs, v.x0, n, rng2);
    art.write_json("evaluation.json", {{"threshold", cfg.surgery_threshold},
                                       {"threshold_strategy", estimate_json(with)},
                                       {"no_impulse", estimate_json(without)}});
    return;
  }
  unsupported(spec);
}

void run_mdp(const ExperimentSpec& spec, const FiniteMdp& mdp, Params& p, Artifacts& art, json& summary) {
  Rng rng = derive_rng(spec.seed, 0);
  if (spec.command == "solve") {
    auto algorithm = p.get<std::string>("algorithm", "backward_induction");
    SolveResult res;
    if (algorithm == "backward_induction") {
      res = backward_induction(mdp);
    } else if (algorithm == "value_iteration" || algorithm == "policy_iteration") {
      FiniteMdp stationary = mdp;
      stationary.set_horizon(std::nullopt);
      double discount = p.get<double>("discount", 0.95);
      res = algorithm == "value_iteration" ? value_iteration(stationary, discount, p.get<double>("tolerance", 1e-8))
                                           : policy_iteration(stationary, discount);
    } else {
      throw Error(ErrorCode::kValidation, "unknown algorithm: " + algorithm);
    }
    art.write_json("values.json", to_json(res));
    art.write_json("policy.json", to_json(res.as_policy()));
    summary["value_s0"] = res.values.at(0).at(0);
    summary["iterations"] = res.iterations;
    summary["bellman_residual"] = res.residual;
    return;
  }
  if (spec.command == "simulate") {
    SolveResult res = backward_induction(mdp);
    TrajectoryRecord rec = simulate_policy(mdp, res.as_policy(), 0, rng);
    auto out = art.open("trajectory.csv");
    write_mdp_trajectory_csv(out, mdp, rec);
    summary["total_cost"] = rec.total();
    return;
  }
  if (spec.command == "evaluate") {
    SolveResult res = backward_induction(mdp);
    Estimate e = evaluate_total_cost_mc(mdp, res.as_policy(), 0, p.get<std::size_t>("episodes", 10000), rng);
    art.write_json("evaluation.json", {{"value_s0", res.values.at(0).at(0)}, {"monte_carlo", estimate_json(e)}});
    return;
  }
  if (spec.command == "plan") {
    auto gen = generative_from_mdp(mdp);
    auto res = mcts_search(gen, 0, mcts_options(p), rng);
    art.write_json("plan.json", plan_json(res, [&](int a) { return mdp.action_labels.at(static_cast<std::size_t>(a)); }));
    return;
  }
  unsupported(spec);
}

int relapse_rule(const Belief& b, const FiniteMdp& mdp) {
  double sick = 0.0;
  for (int s = 0; s < mdp.n_states(); ++s) {
    int m = med::mdp_state_pair(s).first;
    if (m == med::kRelapse || m == med::kEscape) sick += b[static_cast<std::size_t>(s)];
  }
  std::vector<int> allowed = belief_admissible(mdp, b);
  int a = sick > 0.5 ? 1 : 0;
  return std::find(allowed.begin(), allowed.end(), a) != allowed.end() ? a : allowed.front();
}

void run_pomdp(const ExperimentSpec& spec, const FinitePomdp& pomdp, Params& p, Artifacts& art, json& summary) {
  Rng rng = derive_rng(spec.seed, 0);
  const FiniteMdp& mdp = pomdp.base;
  if (spec.command == "solve") {
    int depth = p.get<int>("depth", 3);
    PomdpSolution sol = solve_pomdp(pomdp, depth);
    art.write_json("solution.json", to_json(sol));
    summary["value"] = sol.value;
    summary["belief_nodes"] = sol.belief_mdp.beliefs.size();
    return;
  }
  if (spec.command == "evaluate") {
    int depth = p.get<int>("depth", 3);
    std::size_t n = p.get<std::size_t>("episodes", 10000);
    PomdpSolution sol = solve_pomdp(pomdp, depth);
    BeliefPolicy policy = sol.policy();
    MeanAccumulator acc;
    for (std::size_t i = 0; i < n; ++i) {
      Rng r = derive_rng(spec.seed, i);
      acc.add(pomdp_simulate(pomdp, policy, depth, r).total);
    }
    art.write_json("evaluation.json", {{"depth", depth}, {"value", sol.value}, {"monte_carlo", estimate_json(acc.estimate())}});
    return;
  }
  if (spec.command == "simulate" || spec.command == "filter") {
    BeliefPolicy policy = [&mdp](int, const Belief& b) { return relapse_rule(b, mdp); };
    PomdpEpisode ep = pomdp_simulate(pomdp, policy, *mdp.horizon(), rng);
    auto out = art.open(spec.command == "filter" ? "filter.csv" : "episode.csv");
    out << "t,state,action,observation,cost,p_remission,p_relapse,p_escape,p_death\n";
    for (std::size_t t = 0; t < ep.states.size(); ++t) {
      std::array<double, 4> mass{};
      for (int s = 0; s < mdp.n_states(); ++s)
        mass.at(static_cast<std::size_t>(med::mdp_state_pair(s).first)) += ep.beliefs[t][static_cast<std::size_t>(s)];
      bool step = t < ep.actions.size();
      out << t << ',' << '"' << mdp.state_labels[static_cast<std::size_t>(ep.states[t])] << '"' << ','
          << (step ? std::to_string(ep.actions[t]) : "") << ','
          << (t > 0 ? '"' + pomdp.obs_labels[static_cast<std::size_t>(ep.observations[t - 1])] + '"' : "") << ','
          << (step ? num(ep.costs[t]) : num(mdp.terminal[static_cast<std::size_t>(ep.states[t])])) << ','
          << num(mass[0]) << ',' << num(mass[1]) << ',' << num(mass[2]) << ',' << num(mass[3]) << '\n';
    }
    summary["total_cost"] = ep.total;
    return;
  }
  unsupported(spec);
}

void run_density_pomdp(const ExperimentSpec& spec, const DensityPomdp& pomdp, Artifacts& art, json& summary) {
  if (spec.command != "simulate" && spec.command != "filter") unsupported(spec);
  Rng rng = derive_rng(spec.seed, 0);
  const FiniteMdp& mdp = pomdp.base;
  Belief b = pomdp.b0;
  int s = 0;
  double total = 0.0;
  auto out = art.open(spec.command == "filter" ? "filter.csv" : "episode.csv");
  out << "t,state,action,y,z,cost,p_relapse_or_escape\n";
  for (int t = 0; t < *mdp.horizon(); ++t) {
    int a = relapse_rule(b, mdp);
    const Row& row = mdp.row(t, s, a);
    const int next = sample_next(row, rng);
    const Outcome& o = *std::find_if(row.begin(), row.end(), [next](const Outcome& x) { return x.next == next; });
    auto [y, z] = pomdp.sample(o.next, a, rng);
    b = belief_update(pomdp, b, a, y, z, t);
    double sick = 0.0;
    for (int i = 0; i < mdp.n_states(); ++i) {
      int m = med::mdp_state_pair(i).first;
      if (m == med::kRelapse || m == med::kEscape) sick += b[static_cast<std::size_t>(i)];
    }
    out << t << ",\"" << mdp.state_labels[static_cast<std::size_t>(s)] << "\"," << a << ',' << num(y) << ',' << z << ','
        << num(o.cost) << ',' << num(sick) << '\n';
    total += o.cost;
    s = o.next;
  }
  total += mdp.terminal[static_cast<std::size_t>(s)];
  summary["total_cost"] = total;
}

void run_bamdp(const ExperimentSpec& spec, const med::BamdpVariant& v, Params& p, Artifacts& art, json& summary) {
  Rng rng = derive_rng(spec.seed, 0);
  if (spec.command == "solve") {
    int depth = p.get<int>("depth", 8);
    HyperMdp hyper = build_bamdp(v.model, v.h0, depth);
    SolveResult res = backward_induction(hyper.mdp);
    art.write_json("solution.json", {{"depth", depth},
                                     {"hyperstates", hyper.nodes.size()},
                                     {"value", res.values.at(0).at(static_cast<std::size_t>(hyper.root))},
                                     {"root_action", res.policy.at(0).at(static_cast<std::size_t>(hyper.root))}});
    summary["value"] = res.values.at(0).at(static_cast<std::size_t>(hyper.root));
    return;
  }
  auto gen = v.model.generative();
  if (spec.command == "plan") {
    auto res = mcts_search(gen, v.h0, mcts_options(p), rng);
    art.write_json("plan.json", plan_json(res, [&](int a) {
                     return v.model.base().action_labels.at(static_cast<std::size_t>(a));
                   }));
    return;
  }
  if (spec.command == "simulate") {
    const FiniteMdp& base = v.model.base();
    HyperState h = v.h0;
    double total = 0.0;
    auto out = art.open("episode.csv");
    out << "t,state,action,cost,theta\n";
    for (int t = 0; t < *base.horizon(); ++t) {
      int m = med::mdp_state_pair(h.s).first;
      int a = (m == med::kRelapse || m == med::kEscape) ? 1 : 0;
      auto [next, cost] = gen.step(h, a, rng);
      std::string theta;
      for (Count c : h.theta.at(0)) theta += (theta.empty() ? "" : " ") + std::to_string(c);
      out << t << ",\"" << base.state_labels[static_cast<std::size_t>(h.s)] << "\"," << a << ',' << num(cost) << ','
          << theta << '\n';
      total += cost;
      h = std::move(next);
    }
    total += base.terminal[static_cast<std::size_t>(h.s)];
    summary["total_cost"] = total;
    return;
  }
  unsupported(spec);
}

void run_bridge(const ExperimentSpec& spec, const med::MedicalConfig& cfg, const med::BridgeVariant& v, Params& p,
                Artifacts& art, json& summary) {
  const Bridge& bridge = *v.bridge;
  Rng rng = derive_rng(spec.seed, 0);
  const bool twin = spec.variant == "bridge_twin";
  if (spec.command == "simulate") {
    Episode ep = bridge_episode(v, p.get<double>("treat_above", 5.0), rng);
    auto out = art.open("episode.csv");
    write_episode_csv(out, ep.rows);
    summary["total_cost"] = ep.total;
    return;
  }
  if (spec.command == "evaluate") {
    double threshold = p.get<double>("treat_above", 5.0);
    std::size_t n = p.get<std::size_t>("episodes", 200);
    MeanAccumulator acc;
    for (std::size_t i = 0; i < n; ++i) {
      Rng r = derive_rng(spec.seed, i);
      acc.add(bridge_episode(v, threshold, r).total);
    }
    art.write_json("evaluation.json", {{"treat_above", threshold}, {"monte_carlo", estimate_json(acc.estimate())}});
    return;
  }
  if (spec.command == "solve" && twin) {
    BridgeTable table = tabulate_bridge(bridge, v.s0);
    SolveResult res = backward_induction(table.mdp);
    double twin_value = res.values.at(0).at(static_cast<std::size_t>(table.root));
    double mdp_value = backward_induction(med::make_mdp(cfg)).values.at(0).at(0);
    art.write_json("solution.json", {{"states", table.states.size()},
                                     {"value_bridge", twin_value},
                                     {"value_mdp", mdp_value},
                                     {"abs_diff", std::abs(twin_value - mdp_value)}});
    summary["value"] = twin_value;
    return;
  }
  if (spec.command == "plan") {
    MctsOptions opt = mcts_options(p);
    auto label = [](const BridgeAction& a) { return a.label(); };
    if (!v.obs || spec.variant == "bridge_full") {
      auto gen = wrap_as_mdp(bridge);
      auto res = mcts_search<BridgeState, BridgeAction>(
          gen, v.s0, opt, rng, [&bridge](const BridgeState& a, const BridgeState& b) { return bridge.same_state(a, b); });
      art.write_json("plan.json", plan_json(res, label));
    } else {
      BridgePomdp pomdp = wrap_as_pomdp(bridge, *v.obs);
      FilterState theta = ParticleFilter{{v.s0.x}, {1.0}};
      auto res = plan_pomdp_mcts(pomdp, theta, v.s0.clock, opt, rng);
      art.write_json("plan.json", plan_json(res, label));
    }
    return;
  }
  if (spec.command == "filter" && v.obs) {
    BridgePomdp pomdp = wrap_as_pomdp(bridge, *v.obs);
    FilterState theta;
    GridKernel kernel;
    if (!v.grid.empty()) {
      std::vector<double> w(v.grid.size(), 0.0);
      for (std::size_t i = 0; i < v.grid.size(); ++i)
        if (v.grid[i] == v.s0.x) w[i] = 1.0;
      theta = GridFilter{v.grid, w};
      kernel = exact_grid_kernel(bridge, v.grid);
    } else {
      std::size_t n = p.get<std::size_t>("particles", 1000);
      theta = ParticleFilter{std::vector<HybridState>(n, v.s0.x), std::vector<double>(n, 1.0 / static_cast<double>(n))};
    }
    auto out = art.open("filter.csv");
    out << "n,t,true_mode,true_marker,action,y,z,mean_marker,p_remission,p_relapse,p_escape,p_death\n";
    BridgeState s = v.s0;
    double total = 0.0;
    for (int n = 0; !s.cemetery; ++n) {
      double mean = 0.0;
      std::array<double, 4> mass = mode_mass(theta, mean);
      std::vector<BridgeAction> acts = bridge.admissible(s);
      BridgeAction a = (acts.size() == 1 && acts[0].stop) ? acts[0]
                                                           : BridgeAction{false, mass[1] + mass[2] > 0.5 ? 1 : 0, 1};
      auto [next, cost, obs] = pomdp.step(s, a, rng);
      total += cost;
      out << n << ',' << num(s.clock * bridge.config().delta) << ',' << s.x.mode << ',' << num(marker_of(s.x)) << ','
          << a.label() << ',';
      bool lost = false;
      if (!next.cemetery) {
        try {
          if (auto* pf = std::get_if<ParticleFilter>(&theta))
            theta = filter_update(bridge, pomdp.observation_model(), *pf, a, obs, rng);
          else
            theta = filter_update(pomdp.observation_model(), std::get<GridFilter>(theta), a, obs, kernel);
        } catch (const Error& e) {
          // no particle explains the reading; a small cloud can miss a rare jump
          if (e.code() != ErrorCode::kImpossibleEvidence) throw;
          lost = true;
        }
        out << num(obs.y) << ',' << obs.z;
      } else {
        out << ',';
      }
      out << ',' << num(mean) << ',' << num(mass[0]) << ',' << num(mass[1]) << ',' << num(mass[2]) << ','
          << num(mass[3]) << '\n';
      if (lost) {
        summary["lost_track_at"] = n;
        break;
      }
      s = next;
    }
    summary["total_cost"] = total;
    return;
  }
  unsupported(spec);
}

}  // namespace

std::vector<std::string> run_experiment(const ExperimentSpec& spec) {
  const auto& cmds = experiment_commands();
  if (std::find(cmds.begin(), cmds.end(), spec.command) == cmds.end())
    throw Error(ErrorCode::kValidation, "unknown command: " + spec.command);
  const auto& names = med::variant_names();
  if (std::find(names.begin(), names.end(), spec.variant) == names.end())
    throw Error(ErrorCode::kValidation, "unknown variant: " + spec.variant);
  if (spec.out.empty()) throw Error(ErrorCode::kValidation, "output directory is required");
  med::MedicalConfig cfg = med::config_from_json(spec.model);
  Params params(spec.params);
  med::Variant variant = med::make_variant(spec.variant, cfg);

  Artifacts art(spec.out);
  json summary = {{"command", spec.command}, {"variant", spec.variant}, {"seed", spec.seed}};
  std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, med::PdmpVariant>)
          run_pdmp(spec, cfg, v, params, art, summary);
        else if constexpr (std::is_same_v<V, FiniteMdp>)
          run_mdp(spec, v, params, art, summary);
        else if constexpr (std::is_same_v<V, FinitePomdp>)
          run_pomdp(spec, v, params, art, summary);
        else if constexpr (std::is_same_v<V, DensityPomdp>)
          run_density_pomdp(spec, v, art, summary);
        else if constexpr (std::is_same_v<V, med::BamdpVariant>)
          run_bamdp(spec, v, params, art, summary);
        else
          run_bridge(spec, cfg, v, params, art, summary);
      },
      variant);
  summary["params"] = params.used();
  summary["model"] = med::to_json(cfg);
  summary["artifacts"] = art.files();
  art.write_json("summary.json", summary);
  return art.files();
}

}  // namespace pdmdp
