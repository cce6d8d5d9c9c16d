#include "pdmdp/mdp_io.hpp"

#include <cstdio>

namespace pdmdp {

using nlohmann::json;

json to_json(const FiniteMdp& mdp) {
  json doc;
  doc["states"] = mdp.state_labels;
  doc["actions"] = mdp.action_labels;
  doc["horizon"] = mdp.horizon() ? json(*mdp.horizon()) : json(nullptr);
  json k = json::array(), p = json::array(), c = json::array();
  for (int s = 0; s < mdp.n_states(); ++s) {
    k.push_back(mdp.allowed(s));
    json ps = json::array(), cs = json::array();
    for (int a = 0; a < mdp.n_actions(); ++a) {
      std::vector<double> prow(static_cast<std::size_t>(mdp.n_states()), 0.0), crow = prow;
      for (const Outcome& o : mdp.row(0, s, a)) {
        prow[static_cast<std::size_t>(o.next)] += o.prob;
        crow[static_cast<std::size_t>(o.next)] = o.cost;
      }
      ps.push_back(prow);
      cs.push_back(crow);
    }
    p.push_back(ps);
    c.push_back(cs);
  }
  doc["K"] = k;
  doc["P"] = p;
  doc["c"] = c;
  doc["C"] = mdp.terminal;
  return doc;
}

FiniteMdp mdp_from_json(const json& doc) {
  try {
    auto states = doc.at("states").get<std::vector<std::string>>();
    auto actions = doc.at("actions").get<std::vector<std::string>>();
    std::optional<int> horizon;
    if (doc.contains("horizon") && !doc.at("horizon").is_null()) horizon = doc.at("horizon").get<int>();
    const int ns = static_cast<int>(states.size()), na = static_cast<int>(actions.size());
    FiniteMdp mdp(ns, na, horizon);
    mdp.state_labels = states;
    mdp.action_labels = actions;
    if (doc.contains("K"))
      for (int s = 0; s < ns; ++s) mdp.set_allowed(s, doc.at("K").at(s).get<std::vector<int>>());
    const json& p = doc.at("P");
    const json& c = doc.at("c");
    if (static_cast<int>(p.size()) != ns) throw Error(ErrorCode::kValidation, "P needs one entry per state");
    for (int s = 0; s < ns; ++s)
      for (int a = 0; a < na; ++a) {
        auto probs = p.at(s).at(a).get<std::vector<double>>();
        if (static_cast<int>(probs.size()) != ns)
          throw Error(ErrorCode::kValidation, "P rows must be dense over states");
        const json& cc = c.at(s).at(a);
        std::vector<double> costs = cc.is_number() ? std::vector<double>(static_cast<std::size_t>(ns), cc.get<double>())
                                                   : cc.get<std::vector<double>>();
        mdp.set_row(0, s, a, probs, costs);
      }
    if (doc.contains("C")) mdp.terminal = doc.at("C").get<std::vector<double>>();
    return mdp;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("malformed MDP document: ") + e.what());
  }
}

json to_json(const Policy& policy) {
  json doc;
  doc["stationary"] = policy.stationary;
  if (policy.deterministic())
    doc["actions"] = policy.actions;
  else
    doc["probabilities"] = policy.probs;
  return doc;
}

void write_mdp_trajectory_csv(std::ostream& out, const FiniteMdp& mdp, const TrajectoryRecord& rec) {
  out << "t,state,action,cost\n";
  char buf[64];
  for (const Step& st : rec.steps) {
    std::snprintf(buf, sizeof buf, "%.17g", st.cost);
    out << st.t << ",\"" << mdp.state_labels[st.s] << "\",\"" << mdp.action_labels[st.a] << "\"," << buf
        << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.17g", rec.terminal_cost);
  out << rec.steps.size() << ",\"" << mdp.state_labels[rec.terminal_state] << "\",," << buf << '\n';
}

}  // namespace pdmdp
