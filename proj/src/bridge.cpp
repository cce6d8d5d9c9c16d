#include "pdmdp/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numeric>
#include <tuple>

namespace pdmdp {

namespace {

constexpr double kKeyQuantum = 1e-9;

std::int64_t quantise(double v) { return std::llround(v / kKeyQuantum); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t pick(const std::vector<double>& weights, Rng& rng) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = uniform01(rng) * total, acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  throw Error(ErrorCode::kValidation, "all filter weights are zero");
}

}  // namespace

void ModeAugmentedPdmp::validate() const {
  if (regimes.empty() || natural_modes.empty()) throw Error(ErrorCode::kValidation, "empty regime or mode set");
  for (int m : natural_modes)
    if (m < 0 || m >= kStride) throw Error(ErrorCode::kValidation, "natural mode out of range");
  for (int l : regimes) {
    if (l < 0) throw Error(ErrorCode::kValidation, "negative regime");
    for (int m : natural_modes)
      if (!pdmp.modes.count(code(l, m)))
        throw Error(ErrorCode::kValidation, "missing mode for regime " + std::to_string(l) + ", mode " + std::to_string(m));
  }
  for (int m : terminal_modes)
    if (std::find(natural_modes.begin(), natural_modes.end(), m) == natural_modes.end())
      throw Error(ErrorCode::kValidation, "terminal mode is not a natural mode");
}

std::vector<std::int64_t> ModeAugmentedPdmp::key(const HybridState& x) const {
  if (state_key) return state_key(x);
  std::vector<std::int64_t> k{x.mode};
  for (double v : x.euclid) k.push_back(quantise(v));
  if (x.elapsed) k.push_back(quantise(*x.elapsed));
  return k;
}

std::string BridgeAction::label() const {
  if (stop) return "stop";
  return "l" + std::to_string(regime) + "_r" + std::to_string(delay);
}

void BridgeConfig::validate() const {
  if (!(delta > 0.0)) throw Error(ErrorCode::kValidation, "δ must be positive");
  if (horizon < 1) throw Error(ErrorCode::kValidation, "horizon must be at least one step");
  if (delays.empty()) throw Error(ErrorCode::kValidation, "delay set is empty");
  for (int r : delays)
    if (r < 1) throw Error(ErrorCode::kValidation, "delays must be positive multiples of δ");
}

std::vector<std::pair<double, HybridState>> exact_skeleton_kernel(const PdmpModel& pdmp, const HybridState& x,
                                                                  double duration) {
  std::vector<std::pair<double, HybridState>> out;
  struct Item {
    double prob;
    HybridState x;
    double remaining;
    std::size_t jumps;
  };
  std::vector<Item> stack{{1.0, x, duration, 0}};
  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    const ModeSpec& spec = pdmp.mode(it.x.mode);
    if (!spec.zero_intensity())
      throw Error(ErrorCode::kValidation, "exact kernel needs zero intensity in mode " + std::to_string(it.x.mode));
    double tstar = boundary_time(pdmp, it.x);
    if (tstar > it.remaining) {
      out.emplace_back(it.prob, flow_at(pdmp, it.x, it.remaining));
      continue;
    }
    if (!spec.kernel_outcomes)
      throw Error(ErrorCode::kValidation, "exact kernel needs kernel outcomes in mode " + std::to_string(it.x.mode));
    if (it.jumps >= pdmp.max_jumps) throw Error(ErrorCode::kExplosion, "jump cap exceeded in exact kernel");
    HybridState pre = flow_at(pdmp, it.x, tstar);
    for (auto& [p, post] : spec.kernel_outcomes(pre, JumpKind::kBoundary)) {
      if (p <= 0.0) continue;
      if (pdmp.time_augmented) post.elapsed = 0.0;
      stack.push_back({it.prob * p, post, it.remaining - tstar, it.jumps + 1});
    }
  }
  return out;
}

Bridge::Bridge(ModeAugmentedPdmp model, BridgeConfig config, BridgeCosts costs)
    : model_(std::move(model)), config_(std::move(config)), costs_(std::move(costs)) {
  model_.validate();
  config_.validate();
  if (!costs_.step && !costs_.path) throw Error(ErrorCode::kValidation, "bridge needs a step cost");
}

std::vector<BridgeAction> Bridge::admissible(const BridgeState& s) const {
  if (s.cemetery || model_.terminal_modes.count(s.x.mode) || s.clock >= config_.horizon) return {BridgeAction::dummy()};
  std::vector<BridgeAction> out;
  for (int l : model_.regimes)
    for (int r : config_.delays)
      if (s.clock + r <= config_.horizon) out.push_back({false, l, r});
  if (out.empty()) out.push_back(BridgeAction::dummy());
  return out;
}

bool Bridge::is_admissible(const BridgeState& s, const BridgeAction& a) const {
  for (const BridgeAction& b : admissible(s))
    if (b == a) return true;
  return false;
}

HybridState Bridge::lift(const HybridState& x, int regime) const {
  HybridState y = x;
  y.mode = ModeAugmentedPdmp::code(regime, x.mode);
  return y;
}

HybridState Bridge::drop(const HybridState& y) const {
  HybridState x = y;
  x.mode = ModeAugmentedPdmp::natural_of(y.mode);
  return x;
}

namespace {

double transition_cost(const Bridge& b, const BridgeState& s, const BridgeAction& a, const BridgeState& next) {
  if (s.cemetery) return 0.0;
  if (a.stop) return b.terminal_cost(s);
  if (!b.costs().step) throw Error(ErrorCode::kValidation, "exact transitions need a (s, a, s') cost");
  return b.costs().step(s, a, next);
}

}  // namespace

std::pair<BridgeState, double> Bridge::step(const BridgeState& s, const BridgeAction& a, Rng& rng) const {
  if (!is_admissible(s, a)) throw Error(ErrorCode::kInadmissible, "action " + a.label() + " outside K(s)");
  if (a.stop) return {BridgeState::dead_end(), transition_cost(*this, s, a, BridgeState::dead_end())};
  const double duration = a.delay * config_.delta;
  Trajectory traj = simulate_ssa(model_.pdmp, lift(s.x, a.regime), duration, rng);
  HybridState end = state_at(model_.pdmp, traj, duration);
  if (ModeAugmentedPdmp::regime_of(end.mode) != a.regime)
    throw Error(ErrorCode::kValidation, "kernel changed the regime");
  BridgeState next{false, drop(end), s.clock + a.delay};
  if (costs_.path) return {next, costs_.path(s, a, traj, next)};
  return {next, transition_cost(*this, s, a, next)};
}

std::vector<std::pair<double, BridgeState>> Bridge::exact_successors(const BridgeState& s, const BridgeAction& a) const {
  if (!is_admissible(s, a)) throw Error(ErrorCode::kInadmissible, "action " + a.label() + " outside K(s)");
  if (a.stop) return {{1.0, BridgeState::dead_end()}};
  std::vector<std::pair<double, BridgeState>> out;
  std::map<std::vector<std::int64_t>, std::size_t> seen;
  for (auto& [p, y] : exact_skeleton_kernel(model_.pdmp, lift(s.x, a.regime), a.delay * config_.delta)) {
    if (ModeAugmentedPdmp::regime_of(y.mode) != a.regime)
      throw Error(ErrorCode::kValidation, "kernel changed the regime");
    HybridState x = drop(y);
    auto k = model_.key(x);
    auto it = seen.find(k);
    if (it != seen.end()) {
      out[it->second].first += p;
      continue;
    }
    seen.emplace(std::move(k), out.size());
    out.push_back({p, BridgeState{false, std::move(x), s.clock + a.delay}});
  }
  return out;
}

double Bridge::terminal_cost(const BridgeState& s) const {
  if (s.cemetery || !costs_.terminal) return 0.0;
  return costs_.terminal(s);
}

bool Bridge::same_state(const BridgeState& a, const BridgeState& b) const {
  if (a.cemetery || b.cemetery) return a.cemetery == b.cemetery;
  return a.clock == b.clock && model_.key(a.x) == model_.key(b.x);
}

GenerativeModel<BridgeState, BridgeAction> Bridge::generative() const {
  GenerativeModel<BridgeState, BridgeAction> gen;
  gen.step = [this](const BridgeState& s, const BridgeAction& a, Rng& rng) { return step(s, a, rng); };
  gen.admissible = [this](const BridgeState& s) { return admissible(s); };
  gen.is_terminal = [](const BridgeState& s) { return s.cemetery; };
  gen.terminal_cost = [](const BridgeState&) { return 0.0; };
  gen.horizon = config_.horizon + 1;
  return gen;
}

GenerativeModel<BridgeState, BridgeAction> wrap_as_mdp(const Bridge& bridge) { return bridge.generative(); }

std::vector<double> estimate_kernel(const ModeAugmentedPdmp& model, const HybridState& x, int regime, double duration,
                                    std::size_t n_sims, const Partition& partition, Rng& rng) {
  if (n_sims == 0) throw Error(ErrorCode::kValidation, "n_sims must be positive");
  if (!partition.cell || partition.n_cells <= 0) throw Error(ErrorCode::kValidation, "empty partition");
  std::vector<double> freq(static_cast<std::size_t>(partition.n_cells), 0.0);
  HybridState y = x;
  y.mode = ModeAugmentedPdmp::code(regime, x.mode);
  for (std::size_t i = 0; i < n_sims; ++i) {
    Trajectory traj = simulate_ssa(model.pdmp, y, duration, rng);
    HybridState end = state_at(model.pdmp, traj, duration);
    if (ModeAugmentedPdmp::regime_of(end.mode) != regime) throw Error(ErrorCode::kValidation, "kernel changed the regime");
    end.mode = ModeAugmentedPdmp::natural_of(end.mode);
    int c = partition.cell(end);
    if (c < 0 || c >= partition.n_cells) throw Error(ErrorCode::kRange, "state outside the partition");
    freq[static_cast<std::size_t>(c)] += 1.0;
  }
  for (double& f : freq) f /= static_cast<double>(n_sims);
  return freq;
}

BridgeTable tabulate_bridge(const Bridge& bridge, const BridgeState& s0, std::size_t cap) {
  BridgeTable out;
  out.actions.push_back(BridgeAction::dummy());
  for (int l : bridge.model().regimes)
    for (int r : bridge.config().delays) out.actions.push_back({false, l, r});
  auto action_index = [&](const BridgeAction& a) {
    for (std::size_t i = 0; i < out.actions.size(); ++i)
      if (out.actions[i] == a) return static_cast<int>(i);
    throw Error(ErrorCode::kValidation, "unknown action");
  };
  using Key = std::tuple<bool, int, std::vector<std::int64_t>>;
  auto key_of = [&](const BridgeState& s) {
    return s.cemetery ? Key{true, 0, {}} : Key{false, s.clock, bridge.model().key(s.x)};
  };
  std::map<Key, int> index;
  auto intern = [&](const BridgeState& s) {
    Key k = key_of(s);
    auto it = index.find(k);
    if (it != index.end()) return it->second;
    if (out.states.size() >= cap) throw Error(ErrorCode::kCapExceeded, "bridge table exceeds cap");
    int id = static_cast<int>(out.states.size());
    index.emplace(std::move(k), id);
    out.states.push_back(s);
    return id;
  };
  struct Edge {
    int a;
    int next;
    double prob;
    double cost;
  };
  std::vector<std::vector<Edge>> edges;
  out.root = intern(s0);
  for (std::size_t v = 0; v < out.states.size(); ++v) {
    BridgeState s = out.states[v];
    std::vector<Edge> e;
    for (const BridgeAction& a : bridge.admissible(s)) {
      if (s.cemetery) {
        e.push_back({action_index(a), static_cast<int>(v), 1.0, 0.0});
        continue;
      }
      for (auto& [p, next] : bridge.exact_successors(s, a)) {
        double c = transition_cost(bridge, s, a, next);
        e.push_back({action_index(a), intern(next), p, c});
      }
    }
    edges.push_back(std::move(e));
  }
  const int n = static_cast<int>(out.states.size());
  out.mdp = FiniteMdp(n, static_cast<int>(out.actions.size()), bridge.config().horizon + 1);
  for (std::size_t i = 0; i < out.actions.size(); ++i) out.mdp.action_labels[i] = out.actions[i].label();
  for (int v = 0; v < n; ++v) {
    const BridgeState& s = out.states[static_cast<std::size_t>(v)];
    std::string label = s.cemetery ? "cemetery" : "m" + std::to_string(s.x.mode) + "@" + std::to_string(s.clock);
    if (!s.cemetery)
      for (double c : s.x.euclid) label += "_" + num(c);
    out.mdp.state_labels[static_cast<std::size_t>(v)] = label;
    std::vector<int> allowed;
    for (const BridgeAction& a : bridge.admissible(s)) allowed.push_back(action_index(a));
    out.mdp.set_allowed(v, allowed);
    for (const Edge& e : edges[static_cast<std::size_t>(v)])
      out.mdp.mutable_row(v, e.a).push_back({e.next, e.prob, e.cost});
  }
  return out;
}

// ---------------------------------------------------------------- observations and filtering

double Noise::density(double eps) const {
  switch (kind) {
    case Kind::kNone:
      return std::abs(eps) <= 1e-9 ? 1.0 : 0.0;
    case Kind::kDiscreteUniform: {
      double r = std::round(eps);
      if (std::abs(eps - r) > 1e-9 || std::abs(r) > scale + 1e-9) return 0.0;
      return 1.0 / (2.0 * std::round(scale) + 1.0);
    }
    case Kind::kUniform:
      return std::abs(eps) <= scale ? 1.0 / (2.0 * scale) : 0.0;
    case Kind::kGaussian:
      return std::exp(-0.5 * eps * eps / (scale * scale)) / (scale * std::sqrt(2.0 * M_PI));
  }
  return 0.0;
}

double Noise::sample(Rng& rng) const {
  switch (kind) {
    case Kind::kNone:
      return 0.0;
    case Kind::kDiscreteUniform: {
      long k = std::lround(scale);
      return static_cast<double>(std::uniform_int_distribution<long>(-k, k)(rng));
    }
    case Kind::kUniform:
      return (2.0 * uniform01(rng) - 1.0) * scale;
    case Kind::kGaussian:
      return std::normal_distribution<double>(0.0, scale)(rng);
  }
  return 0.0;
}

double ObservationModel::likelihood(const HybridState& x, double y, int z) const {
  int flag = flagged_modes.count(x.mode) ? 1 : 0;
  if (flag != z) return 0.0;
  return noise.density(y - (link ? link(x) : 0.0));
}

BridgeObservation BridgePomdp::observe(const BridgeState& s, Rng& rng) const {
  BridgeObservation o;
  o.clock = s.clock;
  if (s.cemetery) {
    o.cemetery = true;
    return o;
  }
  o.z = obs_.flagged_modes.count(s.x.mode) ? 1 : 0;
  double f = obs_.link ? obs_.link(s.x) : 0.0;
  if (obs_.full_state) {
    o.full = s.x;
    o.y = f;
  } else {
    o.y = f + obs_.noise.sample(rng);
  }
  return o;
}

std::tuple<BridgeState, double, BridgeObservation> BridgePomdp::step(const BridgeState& s, const BridgeAction& a,
                                                                     Rng& rng) const {
  auto [next, cost] = bridge_->step(s, a, rng);
  BridgeObservation o = observe(next, rng);
  return {std::move(next), cost, std::move(o)};
}

bool BridgePomdp::same_observation(const BridgeObservation& a, const BridgeObservation& b) const {
  if (a.cemetery || b.cemetery) return a.cemetery == b.cemetery;
  if (a.clock != b.clock || a.z != b.z) return false;
  if (a.full || b.full) return a.full && b.full && bridge_->model().key(*a.full) == bridge_->model().key(*b.full);
  return std::abs(a.y - b.y) <= 1e-9;
}

BridgePomdp wrap_as_pomdp(const Bridge& bridge, ObservationModel obs) { return BridgePomdp(bridge, std::move(obs)); }

namespace {

double observation_weight(const ModeAugmentedPdmp& model, const ObservationModel& obs, const HybridState& x,
                          const BridgeObservation& y) {
  if (y.cemetery) throw Error(ErrorCode::kValidation, "filter cannot condition on the cemetery");
  if (y.full) return model.key(x) == model.key(*y.full) ? 1.0 : 0.0;
  return obs.likelihood(x, y.y, y.z);
}

void normalise(std::vector<double>& w) {
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::kImpossibleEvidence, "observation has zero likelihood under the filter");
  for (double& v : w) v /= total;
}

}  // namespace

ParticleFilter filter_update(const Bridge& bridge, const ObservationModel& obs, const ParticleFilter& theta,
                             const BridgeAction& a, const BridgeObservation& y, Rng& rng) {
  if (a.stop) throw Error(ErrorCode::kValidation, "no filter update after ď");
  if (theta.particles.empty() || theta.particles.size() != theta.weights.size())
    throw Error(ErrorCode::kValidation, "malformed particle filter");
  const double duration = a.delay * bridge.config().delta;
  ParticleFilter out;
  out.particles.reserve(theta.particles.size());
  out.weights.reserve(theta.particles.size());
  for (std::size_t i = 0; i < theta.particles.size(); ++i) {
    Trajectory traj = simulate_ssa(bridge.model().pdmp, bridge.lift(theta.particles[i], a.regime), duration, rng);
    HybridState x = bridge.drop(state_at(bridge.model().pdmp, traj, duration));
    out.weights.push_back(theta.weights[i] * observation_weight(bridge.model(), obs, x, y));
    out.particles.push_back(std::move(x));
  }
  normalise(out.weights);
  double sq = 0.0;
  for (double w : out.weights) sq += w * w;
  const std::size_t n = out.particles.size();
  if (1.0 / sq < 0.5 * static_cast<double>(n)) {
    ParticleFilter res;
    double step = 1.0 / static_cast<double>(n);
    double u = uniform01(rng) * step, acc = out.weights[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double target = u + static_cast<double>(i) * step;
      while (target > acc && j + 1 < n) acc += out.weights[++j];
      res.particles.push_back(out.particles[j]);
    }
    res.weights.assign(n, step);
    return res;
  }
  return out;
}

GridFilter filter_update(const ObservationModel& obs, const GridFilter& theta, const BridgeAction& a,
                         const BridgeObservation& y, const GridKernel& kernel) {
  if (a.stop) throw Error(ErrorCode::kValidation, "no filter update after ď");
  if (theta.points.size() != theta.weights.size()) throw Error(ErrorCode::kValidation, "malformed grid filter");
  GridFilter out{theta.points, std::vector<double>(theta.points.size(), 0.0)};
  for (std::size_t i = 0; i < theta.points.size(); ++i) {
    if (theta.weights[i] <= 0.0) continue;
    for (auto [p, j] : kernel(static_cast<int>(i), a.regime, a.delay))
      out.weights.at(static_cast<std::size_t>(j)) += theta.weights[i] * p;
  }
  for (std::size_t j = 0; j < out.points.size(); ++j) {
    if (out.weights[j] <= 0.0) continue;
    const HybridState& x = out.points[j];
    double lik;
    if (y.cemetery) throw Error(ErrorCode::kValidation, "filter cannot condition on the cemetery");
    if (y.full)
      lik = x == *y.full ? 1.0 : 0.0;
    else
      lik = obs.likelihood(x, y.y, y.z);
    out.weights[j] *= lik;
  }
  normalise(out.weights);
  return out;
}

GridKernel exact_grid_kernel(const Bridge& bridge, const std::vector<HybridState>& points) {
  auto lookup = std::make_shared<std::map<std::vector<std::int64_t>, int>>();
  for (std::size_t i = 0; i < points.size(); ++i) lookup->emplace(bridge.model().key(points[i]), static_cast<int>(i));
  auto cache = std::make_shared<std::map<std::tuple<int, int, int>, std::vector<std::pair<double, int>>>>();
  const Bridge* b = &bridge;
  return [b, points, lookup, cache](int from, int regime, int delay) {
    auto ck = std::make_tuple(from, regime, delay);
    auto hit = cache->find(ck);
    if (hit != cache->end()) return hit->second;
    std::map<int, double> acc;
    HybridState y = b->lift(points.at(static_cast<std::size_t>(from)), regime);
    for (auto& [p, x] : exact_skeleton_kernel(b->model().pdmp, y, delay * b->config().delta)) {
      auto it = lookup->find(b->model().key(b->drop(x)));
      if (it == lookup->end()) throw Error(ErrorCode::kValidation, "successor outside the filter grid");
      acc[it->second] += p;
    }
    std::vector<std::pair<double, int>> out;
    for (auto [j, p] : acc) out.emplace_back(p, j);
    cache->emplace(ck, out);
    return out;
  };
}

GridKernel estimated_grid_kernel(const Bridge& bridge, const std::vector<HybridState>& points, const Partition& partition,
                                 std::size_t n_sims, std::uint64_t seed) {
  auto rep = std::make_shared<std::vector<int>>(static_cast<std::size_t>(partition.n_cells), -1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    int c = partition.cell(points[i]);
    if (c < 0 || c >= partition.n_cells) throw Error(ErrorCode::kRange, "grid point outside the partition");
    if ((*rep)[static_cast<std::size_t>(c)] < 0) (*rep)[static_cast<std::size_t>(c)] = static_cast<int>(i);
  }
  auto cache = std::make_shared<std::map<std::tuple<int, int, int>, std::vector<std::pair<double, int>>>>();
  const Bridge* b = &bridge;
  return [b, points, partition, n_sims, seed, rep, cache](int from, int regime, int delay) {
    auto ck = std::make_tuple(from, regime, delay);
    auto hit = cache->find(ck);
    if (hit != cache->end()) return hit->second;
    std::uint64_t stream = (static_cast<std::uint64_t>(from) << 20) ^ (static_cast<std::uint64_t>(regime) << 10) ^
                           static_cast<std::uint64_t>(delay);
    Rng rng = derive_rng(seed, stream);
    std::vector<double> freq = estimate_kernel(b->model(), points.at(static_cast<std::size_t>(from)), regime,
                                               delay * b->config().delta, n_sims, partition, rng);
    std::vector<std::pair<double, int>> out;
    for (std::size_t c = 0; c < freq.size(); ++c) {
      if (freq[c] <= 0.0) continue;
      if ((*rep)[c] < 0) throw Error(ErrorCode::kValidation, "partition cell has no grid point");
      out.emplace_back(freq[c], (*rep)[c]);
    }
    cache->emplace(ck, out);
    return out;
  };
}

HybridState sample_filter(const FilterState& theta, Rng& rng) {
  return std::visit(
      [&rng](const auto& f) -> HybridState {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ParticleFilter>) {
          if (f.particles.empty()) throw Error(ErrorCode::kValidation, "empty filter");
          return f.particles[pick(f.weights, rng)];
        } else {
          if (f.points.empty()) throw Error(ErrorCode::kValidation, "empty filter");
          return f.points[pick(f.weights, rng)];
        }
      },
      theta);
}

MctsResult<BridgeObservation, BridgeAction> plan_pomdp_mcts(const BridgePomdp& pomdp, const FilterState& theta, int clock,
                                                            const MctsOptions& opt, Rng& rng) {
  const Bridge& bridge = pomdp.bridge();
  TreeSearch<BridgeState, BridgeAction, BridgeObservation> search;
  search.step = [&pomdp](const BridgeState& s, const BridgeAction& a, Rng& r) { return pomdp.step(s, a, r); };
  search.admissible = [&bridge](const BridgeState& s) { return bridge.admissible(s); };
  search.is_terminal = [](const BridgeState& s) { return s.cemetery; };
  search.terminal_cost = [](const BridgeState&) { return 0.0; };
  search.same_key = [&pomdp](const BridgeObservation& a, const BridgeObservation& b) {
    return pomdp.same_observation(a, b);
  };
  search.horizon = bridge.config().horizon - clock + 1;
  BridgeObservation root;
  root.clock = clock;
  auto sample_root = [&theta, clock](Rng& r) { return BridgeState{false, sample_filter(theta, r), clock}; };
  return search.run(root, sample_root, opt, rng);
}

void write_episode_csv(std::ostream& out, const std::vector<EpisodeRow>& rows) {
  out << "n,t,mode,marker,elapsed,action,y,cost\n";
  for (const EpisodeRow& r : rows) {
    out << r.n << ',' << num(r.t) << ',' << (r.cemetery ? std::string("cemetery") : std::to_string(r.mode)) << ','
        << num(r.marker) << ',' << num(r.elapsed) << ',' << r.action.label() << ',' << num(r.y) << ',' << num(r.cost)
        << '\n';
  }
}

}  // namespace pdmdp
