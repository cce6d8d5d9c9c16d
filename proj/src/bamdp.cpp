#include "pdmdp/bamdp.hpp"

#include <numeric>

namespace pdmdp {

Count HyperState::mass() const {
  Count m = 0;
  for (const auto& row : theta) m = std::accumulate(row.begin(), row.end(), m);
  return m;
}

Bamdp::Bamdp(FiniteMdp base, std::vector<UnknownRow> rows) : base_(std::move(base)), rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    UnknownRow& r = rows_[i];
    if (!base_.admissible(r.s, r.a)) throw Error(ErrorCode::kValidation, "unknown row on an inadmissible pair");
    if (r.support.empty()) throw Error(ErrorCode::kValidation, "unknown row needs a support");
    if (r.costs.empty()) {
      const Row& known = base_.row(0, r.s, r.a);
      double fallback = base_.expected_cost(0, r.s, r.a);
      for (int s2 : r.support) {
        double c = fallback;
        for (const Outcome& o : known)
          if (o.next == s2) c = o.cost;
        r.costs.push_back(c);
      }
    }
    if (r.costs.size() != r.support.size()) throw Error(ErrorCode::kValidation, "cost/support size mismatch");
    if (!index_.emplace(std::make_pair(r.s, r.a), static_cast<int>(i)).second)
      throw Error(ErrorCode::kValidation, "duplicate unknown row");
  }
}

int Bamdp::unknown_index(int s, int a) const {
  auto it = index_.find({s, a});
  return it == index_.end() ? -1 : it->second;
}

double Bamdp::predictive(const HyperState& h, int row, std::size_t k) const {
  const auto& counts = h.theta.at(static_cast<std::size_t>(row));
  Count total = std::accumulate(counts.begin(), counts.end(), Count{0});
  if (total <= 0) throw Error(ErrorCode::kValidation, "zero count mass on an exercised unknown row");
  return static_cast<double>(counts.at(k)) / static_cast<double>(total);
}

std::vector<HyperOutcome> Bamdp::transition(const HyperState& h, int a) const {
  if (!base_.admissible(h.s, a)) throw Error(ErrorCode::kInadmissible, "action outside K(s)");
  std::vector<HyperOutcome> out;
  int row = unknown_index(h.s, a);
  if (row < 0) {
    for (const Outcome& o : base_.row(0, h.s, a)) out.push_back({o.prob, HyperState{o.next, h.theta}, o.cost});
    return out;
  }
  const UnknownRow& r = rows_[static_cast<std::size_t>(row)];
  for (std::size_t k = 0; k < r.support.size(); ++k) {
    double p = predictive(h, row, k);
    if (p <= 0.0) continue;
    HyperState next{r.support[k], h.theta};
    ++next.theta[static_cast<std::size_t>(row)][k];
    out.push_back({p, std::move(next), r.costs[k]});
  }
  return out;
}

HyperState Bamdp::step(const HyperState& h, int a, int next) const {
  HyperState out{next, h.theta};
  int row = unknown_index(h.s, a);
  if (row >= 0) {
    const UnknownRow& r = rows_[static_cast<std::size_t>(row)];
    for (std::size_t k = 0; k < r.support.size(); ++k)
      if (r.support[k] == next) {
        ++out.theta[static_cast<std::size_t>(row)][k];
        return out;
      }
    throw Error(ErrorCode::kValidation, "successor outside the unknown row's support");
  }
  return out;
}

GenerativeModel<HyperState, int> Bamdp::generative() const {
  GenerativeModel<HyperState, int> gen;
  gen.step = [this](const HyperState& h, const int& a, Rng& rng) {
    std::vector<HyperOutcome> outs = transition(h, a);
    double u = uniform01(rng), acc = 0.0;
    for (HyperOutcome& o : outs) {
      acc += o.prob;
      if (u < acc) return std::make_pair(std::move(o.next), o.cost);
    }
    return std::make_pair(outs.back().next, outs.back().cost);
  };
  gen.admissible = [this](const HyperState& h) { return base_.allowed(h.s); };
  if (base_.horizon()) {
    gen.horizon = base_.horizon();
    gen.terminal_cost = [this](const HyperState& h) { return base_.terminal.at(static_cast<std::size_t>(h.s)); };
  }
  return gen;
}

HyperMdp build_bamdp(const Bamdp& model, const HyperState& h0, int horizon, std::size_t cap) {
  if (horizon < 0) throw Error(ErrorCode::kValidation, "negative horizon");
  if (h0.theta.size() != model.rows().size()) throw Error(ErrorCode::kValidation, "θ0 needs one vector per unknown row");
  for (std::size_t i = 0; i < h0.theta.size(); ++i)
    if (h0.theta[i].size() != model.rows()[i].support.size())
      throw Error(ErrorCode::kValidation, "θ0 row width differs from its support");
  const FiniteMdp& base = model.base();
  HyperMdp out;
  std::map<std::pair<int, HyperState>, int> index;
  std::vector<std::vector<std::pair<int, HyperOutcome>>> edges;  // (action, outcome with node id in next.s)
  std::vector<std::vector<int>> targets;
  auto intern = [&](int t, const HyperState& h) {
    auto key = std::make_pair(t, h);
    auto it = index.find(key);
    if (it != index.end()) return std::make_pair(it->second, false);
    int id = static_cast<int>(out.nodes.size());
    if (static_cast<std::size_t>(id) >= cap) throw Error(ErrorCode::kCapExceeded, "hyperstate MDP exceeds cap");
    index.emplace(std::move(key), id);
    out.nodes.push_back(h);
    out.stage.push_back(t);
    edges.emplace_back();
    targets.emplace_back();
    return std::make_pair(id, true);
  };
  std::vector<int> frontier{intern(0, h0).first};
  for (int t = 0; t < horizon; ++t) {
    std::vector<int> next_frontier;
    for (int v : frontier) {
      HyperState h = out.nodes[static_cast<std::size_t>(v)];
      for (int a : base.allowed(h.s)) {
        for (HyperOutcome& o : model.transition(h, a)) {
          auto [id, fresh] = intern(t + 1, o.next);
          if (fresh) next_frontier.push_back(id);
          edges[static_cast<std::size_t>(v)].push_back({a, o});
          targets[static_cast<std::size_t>(v)].push_back(id);
        }
      }
    }
    frontier = std::move(next_frontier);
  }
  const int n = static_cast<int>(out.nodes.size());
  out.mdp = FiniteMdp(n, base.n_actions(), horizon);
  out.mdp.action_labels = base.action_labels;
  for (int v = 0; v < n; ++v) {
    const HyperState& h = out.nodes[static_cast<std::size_t>(v)];
    out.mdp.state_labels[static_cast<std::size_t>(v)] = base.state_labels[static_cast<std::size_t>(h.s)] + "@t" +
                                                        std::to_string(out.stage[static_cast<std::size_t>(v)]);
    out.mdp.terminal[static_cast<std::size_t>(v)] = base.terminal[static_cast<std::size_t>(h.s)];
    out.mdp.set_allowed(v, base.allowed(h.s));
    const auto& e = edges[static_cast<std::size_t>(v)];
    if (e.empty()) {
      for (int a : base.allowed(h.s)) out.mdp.mutable_row(v, a) = {{v, 1.0, 0.0}};
      continue;
    }
    for (std::size_t k = 0; k < e.size(); ++k)
      out.mdp.mutable_row(v, e[k].first).push_back({targets[static_cast<std::size_t>(v)][k], e[k].second.prob, e[k].second.cost});
  }
  return out;
}

ObsCounts::ObsCounts(int actions, int states, int obs, Count init)
    : n_actions(actions), n_states(states), n_obs(obs),
      psi(static_cast<std::size_t>(actions) * static_cast<std::size_t>(states) * static_cast<std::size_t>(obs), init) {}

Count& ObsCounts::at(int a, int next, int w) {
  if (a < 0 || a >= n_actions || next < 0 || next >= n_states || w < 0 || w >= n_obs)
    throw Error(ErrorCode::kRange, "observation count index out of range");
  return psi[(static_cast<std::size_t>(a) * static_cast<std::size_t>(n_states) + static_cast<std::size_t>(next)) *
                 static_cast<std::size_t>(n_obs) + static_cast<std::size_t>(w)];
}

Count ObsCounts::at(int a, int next, int w) const { return const_cast<ObsCounts*>(this)->at(a, next, w); }

Count ObsCounts::row_sum(int a, int next) const {
  Count total = 0;
  for (int w = 0; w < n_obs; ++w) total += at(a, next, w);
  return total;
}

double bapomdp_obs_prob(const ObsCounts& psi, int a, int next, int w) {
  Count total = psi.row_sum(a, next);
  if (total < 1) throw Error(ErrorCode::kValidation, "observation counts sum to zero");
  return static_cast<double>(psi.at(a, next, w)) / static_cast<double>(total);
}

ObsCounts bapomdp_count_update(const ObsCounts& psi, int a, int next, int w) {
  ObsCounts out = psi;
  ++out.at(a, next, w);
  return out;
}

}  // namespace pdmdp
