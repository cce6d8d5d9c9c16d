#include "pdmdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <Eigen/Dense>

namespace pdmdp {

FiniteMdp::FiniteMdp(int n_states, int n_actions, std::optional<int> horizon)
    : terminal(static_cast<std::size_t>(n_states), 0.0),
      n_states_(n_states),
      n_actions_(n_actions),
      horizon_(horizon) {
  if (n_states <= 0 || n_actions <= 0)
    throw Error(ErrorCode::kValidation, "state and action sets must be non-empty");
  if (horizon && *horizon < 0) throw Error(ErrorCode::kValidation, "negative horizon");
  std::vector<int> all(static_cast<std::size_t>(n_actions));
  for (int a = 0; a < n_actions; ++a) all[static_cast<std::size_t>(a)] = a;
  allowed_.assign(static_cast<std::size_t>(n_states), all);
  stages_.assign(1, std::vector<Row>(static_cast<std::size_t>(n_states * n_actions)));
  for (int s = 0; s < n_states; ++s) state_labels.push_back(std::to_string(s));
  for (int a = 0; a < n_actions; ++a) action_labels.push_back(std::to_string(a));
}

void FiniteMdp::set_allowed(int s, std::vector<int> actions) {
  std::sort(actions.begin(), actions.end());
  actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
  for (int a : actions)
    if (a < 0 || a >= n_actions_) throw Error(ErrorCode::kValidation, "action index out of range");
  allowed_.at(static_cast<std::size_t>(s)) = std::move(actions);
}

bool FiniteMdp::admissible(int s, int a) const {
  const auto& k = allowed_.at(static_cast<std::size_t>(s));
  return std::binary_search(k.begin(), k.end(), a);
}

void FiniteMdp::make_nonstationary() {
  if (!horizon_) throw Error(ErrorCode::kValidation, "stage tables need a finite horizon");
  if (stages_.size() > 1) return;
  stages_.assign(static_cast<std::size_t>(std::max(1, *horizon_)), stages_[0]);
}

const Row& FiniteMdp::row(int t, int s, int a) const {
  return stages_.at(block(t)).at(static_cast<std::size_t>(s * n_actions_ + a));
}

Row& FiniteMdp::mutable_row(int t, int s, int a) {
  return stages_.at(block(t)).at(static_cast<std::size_t>(s * n_actions_ + a));
}

void FiniteMdp::set_row(int t, int s, int a, const std::vector<double>& probs,
                        const std::vector<double>& costs) {
  Row& r = mutable_row(t, s, a);
  r.clear();
  for (int j = 0; j < n_states_; ++j) {
    double p = probs.at(static_cast<std::size_t>(j));
    if (p != 0.0) r.push_back({j, p, costs.at(static_cast<std::size_t>(j))});
  }
}

void FiniteMdp::set_row(int s, int a, const std::vector<double>& probs, double cost) {
  set_row(0, s, a, probs, std::vector<double>(static_cast<std::size_t>(n_states_), cost));
}

std::vector<double> FiniteMdp::dense_probs(int t, int s, int a) const {
  std::vector<double> p(static_cast<std::size_t>(n_states_), 0.0);
  for (const Outcome& o : row(t, s, a)) p[static_cast<std::size_t>(o.next)] += o.prob;
  return p;
}

double FiniteMdp::expected_cost(int t, int s, int a) const {
  double c = 0.0;
  for (const Outcome& o : row(t, s, a)) c += o.prob * o.cost;
  return c;
}

Diagnostics validate(const FiniteMdp& mdp, int s0) {
  Diagnostics d;
  int blocks = static_cast<int>(mdp.n_stage_blocks());
  for (int s = 0; s < mdp.n_states(); ++s) {
    if (mdp.allowed(s).empty()) d.errors.push_back("empty constraint set K(" + mdp.state_labels[s] + ")");
    for (int a : mdp.allowed(s)) {
      for (int b = 0; b < blocks; ++b) {
        double sum = 0.0;
        bool negative = false, infinite_cost = false, bad_index = false;
        for (const Outcome& o : mdp.row(b, s, a)) {
          sum += o.prob;
          negative = negative || o.prob < 0.0;
          infinite_cost = infinite_cost || std::isinf(o.cost);
          bad_index = bad_index || o.next < 0 || o.next >= mdp.n_states();
        }
        std::string where = "(" + mdp.state_labels[s] + ", " + mdp.action_labels[a] + ")" +
                            (blocks > 1 ? " at stage " + std::to_string(b) : "");
        if (bad_index) d.errors.push_back("successor index out of range at " + where);
        if (negative) d.errors.push_back("negative probability at " + where);
        if (std::abs(sum - 1.0) > 1e-12)
          d.errors.push_back("row sums to " + std::to_string(sum) + " at " + where);
        if (infinite_cost) d.warnings.push_back("infinite cost at " + where + "; prefer K(s)");
      }
    }
  }
  if (static_cast<int>(mdp.terminal.size()) != mdp.n_states())
    d.errors.push_back("terminal cost vector has wrong size");
  if (!d.ok() || s0 < 0 || s0 >= mdp.n_states()) return d;
  std::vector<char> seen(static_cast<std::size_t>(mdp.n_states()), 0);
  std::deque<int> queue{s0};
  seen[static_cast<std::size_t>(s0)] = 1;
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int a : mdp.allowed(s))
      for (int b = 0; b < blocks; ++b)
        for (const Outcome& o : mdp.row(b, s, a))
          if (o.prob > 0.0 && !seen[static_cast<std::size_t>(o.next)]) {
            seen[static_cast<std::size_t>(o.next)] = 1;
            queue.push_back(o.next);
          }
  }
  for (int s = 0; s < mdp.n_states(); ++s)
    if (!seen[static_cast<std::size_t>(s)]) d.unreachable.push_back(s);
  return d;
}

void require_valid(const FiniteMdp& mdp) {
  Diagnostics d = validate(mdp);
  if (!d.ok()) throw Error(ErrorCode::kValidation, d.errors.front());
}

int Policy::action(int t, int s) const {
  std::size_t k = stationary ? 0 : static_cast<std::size_t>(t);
  return actions.at(k).at(static_cast<std::size_t>(s));
}

double Policy::prob(int t, int s, int a) const {
  std::size_t k = stationary ? 0 : static_cast<std::size_t>(t);
  if (deterministic()) return actions.at(k).at(static_cast<std::size_t>(s)) == a ? 1.0 : 0.0;
  return probs.at(k).at(static_cast<std::size_t>(s)).at(static_cast<std::size_t>(a));
}

int Policy::sample(int t, int s, Rng& rng) const {
  if (deterministic()) return action(t, s);
  std::size_t k = stationary ? 0 : static_cast<std::size_t>(t);
  const auto& dist = probs.at(k).at(static_cast<std::size_t>(s));
  double u = uniform01(rng), acc = 0.0;
  int last = 0;
  for (std::size_t a = 0; a < dist.size(); ++a) {
    if (dist[a] <= 0.0) continue;
    last = static_cast<int>(a);
    acc += dist[a];
    if (u < acc) return last;
  }
  return last;
}

Policy Policy::stationary_deterministic(std::vector<int> a) {
  Policy p;
  p.actions.push_back(std::move(a));
  return p;
}

Policy Policy::markov_deterministic(std::vector<std::vector<int>> a) {
  Policy p;
  p.stationary = false;
  p.actions = std::move(a);
  return p;
}

Policy Policy::stationary_stochastic(std::vector<std::vector<double>> probs) {
  Policy p;
  p.probs.push_back(std::move(probs));
  return p;
}

void check_admissible(const FiniteMdp& mdp, const Policy& policy) {
  std::size_t stages = policy.deterministic() ? policy.actions.size() : policy.probs.size();
  for (std::size_t t = 0; t < stages; ++t)
    for (int s = 0; s < mdp.n_states(); ++s)
      for (int a = 0; a < mdp.n_actions(); ++a)
        if (policy.prob(static_cast<int>(t), s, a) > 0.0 && !mdp.admissible(s, a))
          throw Error(ErrorCode::kInadmissible, "policy uses action " + mdp.action_labels[a] +
                                                    " outside K(" + mdp.state_labels[s] + ")");
}

double TrajectoryRecord::total(double discount) const {
  double sum = 0.0, w = 1.0;
  for (const Step& st : steps) {
    sum += w * st.cost;
    w *= discount;
  }
  return sum + w * terminal_cost;
}

int sample_next(const Row& row, Rng& rng) {
  double u = uniform01(rng), acc = 0.0;
  for (const Outcome& o : row) {
    acc += o.prob;
    if (u < acc) return o.next;
  }
  return row.back().next;
}

namespace {

std::size_t rollout_length(const FiniteMdp& mdp, std::size_t length) {
  if (mdp.horizon()) return static_cast<std::size_t>(*mdp.horizon());
  if (length == 0) throw Error(ErrorCode::kValidation, "infinite-horizon rollout needs a length");
  return length;
}

TrajectoryRecord rollout(const FiniteMdp& mdp, int s0, std::size_t steps,
                         const std::function<int(const TrajectoryRecord&, int, int)>& choose, Rng& rng) {
  TrajectoryRecord rec;
  rec.steps.reserve(steps);
  int s = s0;
  for (std::size_t t = 0; t < steps; ++t) {
    int a = choose(rec, static_cast<int>(t), s);
    if (!mdp.admissible(s, a))
      throw Error(ErrorCode::kInadmissible, "action " + mdp.action_labels[a] + " outside K(" +
                                                mdp.state_labels[s] + ")");
    const Row& row = mdp.row(static_cast<int>(t), s, a);
    double u = uniform01(rng), acc = 0.0;
    const Outcome* hit = &row.back();
    for (const Outcome& o : row) {
      acc += o.prob;
      if (u < acc) {
        hit = &o;
        break;
      }
    }
    rec.steps.push_back({static_cast<int>(t), s, a, hit->cost});
    s = hit->next;
  }
  rec.terminal_state = s;
  rec.terminal_cost = mdp.horizon() ? mdp.terminal.at(static_cast<std::size_t>(s)) : 0.0;
  return rec;
}

}  // namespace

TrajectoryRecord simulate_policy(const FiniteMdp& mdp, const Policy& policy, int s0, Rng& rng,
                                 std::size_t length) {
  return rollout(mdp, s0, rollout_length(mdp, length),
                 [&](const TrajectoryRecord&, int t, int s) { return policy.sample(t, s, rng); }, rng);
}

TrajectoryRecord simulate_history_policy(const FiniteMdp& mdp, const HistoryPolicy& policy, int s0,
                                         Rng& rng, std::size_t length) {
  return rollout(mdp, s0, rollout_length(mdp, length),
                 [&](const TrajectoryRecord& rec, int, int s) { return policy(rec, s, rng); }, rng);
}

std::vector<double> evaluate_policy_exact(const FiniteMdp& mdp, const Policy& policy, double discount) {
  if (!(discount > 0.0 && discount < 1.0))
    throw Error(ErrorCode::kValidation, "exact evaluation needs a discount in (0,1)");
  if (!policy.stationary) throw Error(ErrorCode::kValidation, "exact evaluation needs a stationary policy");
  const int n = mdp.n_states();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < mdp.n_actions(); ++a) {
      double w = policy.prob(0, s, a);
      if (w == 0.0) continue;
      if (!mdp.admissible(s, a)) throw Error(ErrorCode::kInadmissible, "policy outside K(s)");
      for (const Outcome& o : mdp.row(0, s, a)) {
        m(s, o.next) -= discount * w * o.prob;
        rhs(s) += w * o.prob * o.cost;
      }
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  Eigen::VectorXd v = lu.solve(rhs);
  // one refinement step keeps the residual at round-off level for ill-conditioned γ near 1
  Eigen::VectorXd r = rhs - m * v;
  v += lu.solve(r);
  return {v.data(), v.data() + n};
}

std::vector<std::vector<double>> evaluate_policy_finite(const FiniteMdp& mdp, const Policy& policy) {
  if (!mdp.horizon()) throw Error(ErrorCode::kValidation, "finite evaluation needs a finite horizon");
  const int h = *mdp.horizon();
  std::vector<std::vector<double>> v(static_cast<std::size_t>(h + 1));
  v[static_cast<std::size_t>(h)] = mdp.terminal;
  for (int t = h - 1; t >= 0; --t) {
    auto& cur = v[static_cast<std::size_t>(t)];
    const auto& next = v[static_cast<std::size_t>(t + 1)];
    cur.assign(static_cast<std::size_t>(mdp.n_states()), 0.0);
    for (int s = 0; s < mdp.n_states(); ++s)
      for (int a = 0; a < mdp.n_actions(); ++a) {
        double w = policy.prob(t, s, a);
        if (w == 0.0) continue;
        double q = 0.0;
        for (const Outcome& o : mdp.row(t, s, a)) q += o.prob * (o.cost + next[static_cast<std::size_t>(o.next)]);
        cur[static_cast<std::size_t>(s)] += w * q;
      }
  }
  return v;
}

Estimate evaluate_total_cost_mc(const FiniteMdp& mdp, const Policy& policy, int s0,
                                std::size_t n_sims, Rng& rng) {
  if (!mdp.horizon()) throw Error(ErrorCode::kValidation, "total cost needs a finite horizon");
  if (n_sims < 1) throw Error(ErrorCode::kValidation, "n_sims must be positive");
  MeanAccumulator acc;
  for (std::size_t i = 0; i < n_sims; ++i) acc.add(simulate_policy(mdp, policy, s0, rng).total());
  return acc.estimate();
}

Estimate evaluate_discounted_mc(const FiniteMdp& mdp, const Policy& policy, int s0, double discount,
                                std::size_t n_sims, std::size_t truncation, Rng& rng) {
  if (n_sims < 1) throw Error(ErrorCode::kValidation, "n_sims must be positive");
  if (truncation == 0) {
    double cmax = 0.0;
    for (int s = 0; s < mdp.n_states(); ++s)
      for (int a : mdp.allowed(s))
        for (const Outcome& o : mdp.row(0, s, a)) cmax = std::max(cmax, std::abs(o.cost));
    truncation = 1;
    if (cmax > 1e-6 && discount > 0.0)
      truncation = static_cast<std::size_t>(std::ceil(std::log(1e-6 / cmax) / std::log(discount)));
  }
  FiniteMdp unbounded = mdp;
  unbounded.set_horizon(std::nullopt);
  MeanAccumulator acc;
  for (std::size_t i = 0; i < n_sims; ++i)
    acc.add(simulate_policy(unbounded, policy, s0, rng, truncation).total(discount));
  return acc.estimate();
}

Estimate evaluate_average_mc(const FiniteMdp& mdp, const Policy& policy, int s0, std::size_t h_trunc,
                             std::size_t n_sims, Rng& rng) {
  if (n_sims < 1 || h_trunc < 1) throw Error(ErrorCode::kValidation, "n_sims and h_trunc must be positive");
  FiniteMdp unbounded = mdp;
  unbounded.set_horizon(std::nullopt);
  MeanAccumulator acc;
  for (std::size_t i = 0; i < n_sims; ++i) {
    TrajectoryRecord rec = simulate_policy(unbounded, policy, s0, rng, h_trunc);
    double sum = 0.0;
    for (const Step& st : rec.steps) sum += st.cost;
    acc.add(sum / static_cast<double>(h_trunc));
  }
  return acc.estimate();
}

std::vector<std::vector<double>> q_from_v(const FiniteMdp& mdp, const std::vector<double>& next_values,
                                          double discount, int t) {
  std::vector<std::vector<double>> q(static_cast<std::size_t>(mdp.n_states()),
                                     std::vector<double>(static_cast<std::size_t>(mdp.n_actions()), kInf));
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a : mdp.allowed(s)) {
      double v = 0.0;
      for (const Outcome& o : mdp.row(t, s, a))
        v += o.prob * (o.cost + discount * next_values.at(static_cast<std::size_t>(o.next)));
      q[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = v;
    }
  return q;
}

}  // namespace pdmdp
