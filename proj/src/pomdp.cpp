#include "pdmdp/pomdp.hpp"

#include <algorithm>
#include <cmath>

#include "pdmdp/mdp_io.hpp"

namespace pdmdp {

void check_belief(const Belief& b) {
  double sum = 0.0;
  for (double w : b) {
    if (w < 0.0 || !std::isfinite(w)) throw Error(ErrorCode::kValidation, "belief weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw Error(ErrorCode::kValidation, "belief does not sum to one");
}

void FinitePomdp::validate() const {
  require_valid(base);
  if (static_cast<int>(obs.size()) != base.n_actions())
    throw Error(ErrorCode::kValidation, "observation table needs one block per action");
  for (int a = 0; a < base.n_actions(); ++a) {
    if (static_cast<int>(obs[static_cast<std::size_t>(a)].size()) != base.n_states())
      throw Error(ErrorCode::kValidation, "observation table needs one row per state");
    for (int s = 0; s < base.n_states(); ++s) {
      const auto& row = obs[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)];
      if (static_cast<int>(row.size()) != n_obs) throw Error(ErrorCode::kValidation, "observation row has wrong width");
      double sum = 0.0;
      for (double p : row) {
        if (p < 0.0) throw Error(ErrorCode::kValidation, "negative observation probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw Error(ErrorCode::kValidation, "observation row (" + base.state_labels[s] + ", " +
                                                base.action_labels[a] + ") sums to " + std::to_string(sum));
    }
  }
  if (static_cast<int>(b0.size()) != base.n_states()) throw Error(ErrorCode::kValidation, "b0 has wrong size");
  check_belief(b0);
}

namespace {
Belief normalized(Belief b) {
  double z = 0.0;
  for (double w : b) z += w;
  if (!(z > 0.0)) throw Error(ErrorCode::kImpossibleEvidence, "observation has zero probability under the belief");
  for (double& w : b) w /= z;
  return b;
}
}  // namespace

Belief belief_from_observation(const std::vector<double>& obs_likelihood, const Belief& prior) {
  Belief b(prior.size());
  for (std::size_t s = 0; s < prior.size(); ++s) b[s] = prior[s] * obs_likelihood.at(s);
  return normalized(std::move(b));
}

Belief predict_belief(const FiniteMdp& mdp, const Belief& b, int a, int t) {
  Belief pred(static_cast<std::size_t>(mdp.n_states()), 0.0);
  for (int s = 0; s < mdp.n_states(); ++s) {
    double w = b[static_cast<std::size_t>(s)];
    if (w == 0.0) continue;
    if (!mdp.admissible(s, a))
      throw Error(ErrorCode::kInadmissible, "action " + mdp.action_labels[a] + " outside K(" + mdp.state_labels[s] + ")");
    for (const Outcome& o : mdp.row(t, s, a)) pred[static_cast<std::size_t>(o.next)] += w * o.prob;
  }
  return pred;
}

Belief belief_update(const FinitePomdp& pomdp, const Belief& b, int a, int w, int t) {
  Belief pred = predict_belief(pomdp.base, b, a, t);
  for (int s = 0; s < pomdp.base.n_states(); ++s) pred[static_cast<std::size_t>(s)] *= pomdp.O(s, a, w);
  return normalized(std::move(pred));
}

Belief belief_update(const DensityPomdp& pomdp, const Belief& b, int a, double y, int z, int t) {
  Belief pred = predict_belief(pomdp.base, b, a, t);
  for (int s = 0; s < pomdp.base.n_states(); ++s) pred[static_cast<std::size_t>(s)] *= pomdp.density(s, a, y, z);
  return normalized(std::move(pred));
}

std::vector<BeliefSuccessor> belief_transition(const FinitePomdp& pomdp, const Belief& b, int a, int t) {
  Belief pred = predict_belief(pomdp.base, b, a, t);
  std::vector<BeliefSuccessor> out;
  for (int w = 0; w < pomdp.n_obs; ++w) {
    double pw = 0.0;
    Belief post(pred.size());
    for (std::size_t s = 0; s < pred.size(); ++s) {
      post[s] = pred[s] * pomdp.O(static_cast<int>(s), a, w);
      pw += post[s];
    }
    if (pw <= 0.0) continue;
    for (double& v : post) v /= pw;
    out.push_back({w, pw, std::move(post)});
  }
  return out;
}

double belief_cost(const FiniteMdp& mdp, const Belief& b, int a, const Belief& next, int t) {
  double total = 0.0;
  for (int s = 0; s < mdp.n_states(); ++s) {
    double w = b[static_cast<std::size_t>(s)];
    if (w == 0.0) continue;
    const Row& row = mdp.row(t, s, a);
    double fallback = mdp.expected_cost(t, s, a);
    double inner = 0.0;
    for (int s2 = 0; s2 < mdp.n_states(); ++s2) {
      double w2 = next[static_cast<std::size_t>(s2)];
      if (w2 == 0.0) continue;
      double c = fallback;
      for (const Outcome& o : row)
        if (o.next == s2) {
          c = o.cost;
          break;
        }
      inner += w2 * c;
    }
    total += w * inner;
  }
  return total;
}

std::vector<int> belief_admissible(const FiniteMdp& mdp, const Belief& b) {
  std::vector<int> acts;
  for (int a = 0; a < mdp.n_actions(); ++a) {
    bool ok = true;
    for (int s = 0; s < mdp.n_states() && ok; ++s)
      if (b[static_cast<std::size_t>(s)] > 0.0 && !mdp.admissible(s, a)) ok = false;
    if (ok) acts.push_back(a);
  }
  return acts;
}

std::vector<std::int64_t> belief_key(const Belief& b) {
  std::vector<std::int64_t> key(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) key[i] = std::llround(b[i] * 1e12);
  return key;
}

int BeliefMdp::find(int t, const Belief& b) const {
  auto it = index_.find({t, belief_key(b)});
  return it == index_.end() ? -1 : it->second;
}

BeliefMdp build_belief_mdp(const FinitePomdp& pomdp, int depth, std::size_t cap) {
  if (depth < 0) throw Error(ErrorCode::kValidation, "negative depth");
  struct Edge {
    int action;
    int target;
    double prob;
    double cost;
  };
  BeliefMdp out;
  std::vector<std::vector<Edge>> edges;
  auto intern = [&](int t, const Belief& b) {
    auto key = std::make_pair(t, belief_key(b));
    auto it = out.index_.find(key);
    if (it != out.index_.end()) return std::make_pair(it->second, false);
    int id = static_cast<int>(out.beliefs.size());
    if (static_cast<std::size_t>(id) >= cap) throw Error(ErrorCode::kCapExceeded, "belief MDP exceeds node cap");
    out.index_.emplace(std::move(key), id);
    out.beliefs.push_back(b);
    out.stage.push_back(t);
    edges.emplace_back();
    return std::make_pair(id, true);
  };
  std::vector<int> frontier{intern(0, pomdp.b0).first};
  out.nodes_per_stage.push_back(1);
  for (int t = 0; t < depth; ++t) {
    std::vector<int> next_frontier;
    for (int node : frontier) {
      Belief b = out.beliefs[static_cast<std::size_t>(node)];
      std::vector<int> acts = belief_admissible(pomdp.base, b);
      if (acts.empty()) throw Error(ErrorCode::kValidation, "no action admissible on a whole belief support");
      for (int a : acts) {
        for (BeliefSuccessor& succ : belief_transition(pomdp, b, a, t)) {
          auto [id, fresh] = intern(t + 1, succ.belief);
          if (fresh) next_frontier.push_back(id);
          double cost = belief_cost(pomdp.base, b, a, out.beliefs[static_cast<std::size_t>(id)], t);
          edges[static_cast<std::size_t>(node)].push_back({a, id, succ.prob, cost});
        }
      }
    }
    out.nodes_per_stage.push_back(next_frontier.size());
    frontier = std::move(next_frontier);
  }
  const int n = static_cast<int>(out.beliefs.size());
  out.mdp = FiniteMdp(n, pomdp.base.n_actions(), depth);
  out.mdp.action_labels = pomdp.base.action_labels;
  for (int v = 0; v < n; ++v) {
    const Belief& b = out.beliefs[static_cast<std::size_t>(v)];
    out.mdp.state_labels[static_cast<std::size_t>(v)] = "t" + std::to_string(out.stage[static_cast<std::size_t>(v)]) + "#" + std::to_string(v);
    double term = 0.0;
    for (int s = 0; s < pomdp.base.n_states(); ++s) term += b[static_cast<std::size_t>(s)] * pomdp.base.terminal[static_cast<std::size_t>(s)];
    out.mdp.terminal[static_cast<std::size_t>(v)] = term;
    std::vector<int> acts = belief_admissible(pomdp.base, b);
    if (acts.empty()) acts = {0};
    out.mdp.set_allowed(v, acts);
    if (edges[static_cast<std::size_t>(v)].empty()) {
      // last stage: self loops keep the table well formed; never used by the recursion
      for (int a : acts) out.mdp.mutable_row(v, a) = {{v, 1.0, 0.0}};
      continue;
    }
    for (const Edge& e : edges[static_cast<std::size_t>(v)]) {
      Row& row = out.mdp.mutable_row(v, e.action);
      auto it = std::find_if(row.begin(), row.end(), [&](const Outcome& o) { return o.next == e.target; });
      if (it == row.end()) {
        row.push_back({e.target, e.prob, e.cost});
      } else {
        // two observations leading to the same belief: merge, keeping the probability-weighted cost
        double p = it->prob + e.prob;
        it->cost = (it->prob * it->cost + e.prob * e.cost) / p;
        it->prob = p;
      }
    }
  }
  return out;
}

BeliefPolicy PomdpSolution::policy() const {
  return [this](int t, const Belief& b) {
    int node = belief_mdp.find(t, b);
    if (node < 0) throw Error(ErrorCode::kRange, "belief not in the solved belief MDP");
    return result.policy.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(node));
  };
}

PomdpSolution solve_pomdp(const FinitePomdp& pomdp, int depth, std::size_t cap) {
  PomdpSolution sol;
  sol.belief_mdp = build_belief_mdp(pomdp, depth, cap);
  sol.result = backward_induction(sol.belief_mdp.mdp);
  sol.value = sol.result.values[0][static_cast<std::size_t>(sol.belief_mdp.root)];
  return sol;
}

PomdpEpisode pomdp_simulate(const FinitePomdp& pomdp, const BeliefPolicy& policy, int horizon, Rng& rng) {
  PomdpEpisode ep;
  Belief b = pomdp.b0;
  double u = uniform01(rng), acc = 0.0;
  int s = pomdp.base.n_states() - 1;
  for (int i = 0; i < pomdp.base.n_states(); ++i) {
    acc += b[static_cast<std::size_t>(i)];
    if (u < acc) {
      s = i;
      break;
    }
  }
  ep.states.push_back(s);
  ep.beliefs.push_back(b);
  for (int t = 0; t < horizon; ++t) {
    int a = policy(t, b);
    if (!pomdp.base.admissible(s, a)) throw Error(ErrorCode::kInadmissible, "belief policy chose an inadmissible action");
    const Row& row = pomdp.base.row(t, s, a);
    double v = uniform01(rng), cum = 0.0;
    const Outcome* hit = &row.back();
    for (const Outcome& o : row) {
      cum += o.prob;
      if (v < cum) {
        hit = &o;
        break;
      }
    }
    int next = hit->next;
    const auto& orow = pomdp.obs[static_cast<std::size_t>(a)][static_cast<std::size_t>(next)];
    double r = uniform01(rng), oc = 0.0;
    int w = pomdp.n_obs - 1;
    for (int k = 0; k < pomdp.n_obs; ++k) {
      oc += orow[static_cast<std::size_t>(k)];
      if (orow[static_cast<std::size_t>(k)] > 0.0 && r < oc) {
        w = k;
        break;
      }
    }
    b = belief_update(pomdp, b, a, w, t);
    ep.actions.push_back(a);
    ep.observations.push_back(w);
    ep.costs.push_back(hit->cost);
    ep.states.push_back(next);
    ep.beliefs.push_back(b);
    ep.total += hit->cost;
    s = next;
  }
  ep.terminal_cost = pomdp.base.terminal[static_cast<std::size_t>(s)];
  ep.total += ep.terminal_cost;
  return ep;
}

nlohmann::json to_json(const FinitePomdp& pomdp) {
  nlohmann::json doc = to_json(pomdp.base);
  doc["observations"] = pomdp.obs_labels;
  doc["O"] = pomdp.obs;
  doc["b0"] = pomdp.b0;
  return doc;
}

FinitePomdp pomdp_from_json(const nlohmann::json& doc) {
  FinitePomdp p;
  p.base = mdp_from_json(doc);
  try {
    p.obs_labels = doc.at("observations").get<std::vector<std::string>>();
    p.n_obs = static_cast<int>(p.obs_labels.size());
    p.obs = doc.at("O").get<std::vector<std::vector<std::vector<double>>>>();
    p.b0 = doc.at("b0").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("malformed POMDP document: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const PomdpSolution& solution) {
  nlohmann::json nodes = nlohmann::json::array();
  const auto& bm = solution.belief_mdp;
  for (std::size_t v = 0; v < bm.beliefs.size(); ++v) {
    int t = bm.stage[v];
    nlohmann::json node{{"id", v}, {"stage", t}, {"belief", bm.beliefs[v]}};
    if (static_cast<std::size_t>(t) < solution.result.policy.size()) {
      node["action"] = solution.result.policy[static_cast<std::size_t>(t)][v];
      node["value"] = solution.result.values[static_cast<std::size_t>(t)][v];
    }
    nodes.push_back(std::move(node));
  }
  return {{"value", solution.value}, {"nodes", nodes}, {"nodes_per_stage", bm.nodes_per_stage}};
}

}  // namespace pdmdp
