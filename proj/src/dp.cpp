#include "pdmdp/dp.hpp"

#include <algorithm>
#include <cmath>

namespace pdmdp {

Policy SolveResult::as_policy() const {
  if (policy.size() == 1 && values.size() == 1) return Policy::stationary_deterministic(policy[0]);
  return Policy::markov_deterministic(policy);
}

int greedy_action(const FiniteMdp& mdp, int s, const std::vector<double>& q_row) {
  int best = -1;
  for (int a : mdp.allowed(s))
    if (best < 0 || q_row[static_cast<std::size_t>(a)] < q_row[static_cast<std::size_t>(best)]) best = a;
  return best;
}

namespace {

double q_value(const FiniteMdp& mdp, int t, int s, int a, const std::vector<double>& next, double discount) {
  double v = 0.0;
  for (const Outcome& o : mdp.row(t, s, a)) v += o.prob * (o.cost + discount * next[static_cast<std::size_t>(o.next)]);
  return v;
}

/// One Bellman sweep: returns min_a Q and fills the lowest-index argmin.
std::vector<double> bellman_sweep(const FiniteMdp& mdp, int t, const std::vector<double>& next, double discount,
                                  std::vector<int>& argmin) {
  std::vector<double> out(static_cast<std::size_t>(mdp.n_states()));
  argmin.assign(static_cast<std::size_t>(mdp.n_states()), -1);
  for (int s = 0; s < mdp.n_states(); ++s) {
    double best = kInf;
    int best_a = -1;
    for (int a : mdp.allowed(s)) {
      double q = q_value(mdp, t, s, a, next, discount);
      if (best_a < 0 || q < best) {
        best = q;
        best_a = a;
      }
    }
    out[static_cast<std::size_t>(s)] = best;
    argmin[static_cast<std::size_t>(s)] = best_a;
  }
  return out;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

SolveResult backward_induction(const FiniteMdp& mdp) {
  if (!mdp.horizon()) throw Error(ErrorCode::kValidation, "backward induction needs a finite horizon");
  const int h = *mdp.horizon();
  SolveResult res;
  res.values.resize(static_cast<std::size_t>(h + 1));
  res.policy.resize(static_cast<std::size_t>(h));
  res.values[static_cast<std::size_t>(h)] = mdp.terminal;
  for (int t = h - 1; t >= 0; --t)
    res.values[static_cast<std::size_t>(t)] =
        bellman_sweep(mdp, t, res.values[static_cast<std::size_t>(t + 1)], 1.0, res.policy[static_cast<std::size_t>(t)]);
  res.iterations = static_cast<std::size_t>(h);
  res.residual = bellman_residual(mdp, res);
  return res;
}

SolveResult value_iteration(const FiniteMdp& mdp, double discount, double epsilon,
                            const std::optional<std::vector<double>>& warm_start, std::size_t max_iterations) {
  if (!(discount > 0.0 && discount < 1.0)) throw Error(ErrorCode::kValidation, "discount must lie in (0,1)");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kValidation, "epsilon must be positive");
  const double stop = epsilon * (1.0 - discount) / discount;
  std::vector<double> v = warm_start.value_or(std::vector<double>(static_cast<std::size_t>(mdp.n_states()), 0.0));
  SolveResult res;
  std::vector<int> argmin;
  while (res.iterations < max_iterations) {
    std::vector<double> next = bellman_sweep(mdp, 0, v, discount, argmin);
    double delta = sup_diff(next, v);
    v = std::move(next);
    res.deltas.push_back(delta);
    ++res.iterations;
    if (delta <= stop) break;
  }
  bellman_sweep(mdp, 0, v, discount, argmin);
  res.values = {v};
  res.policy = {argmin};
  res.residual = bellman_residual(mdp, res, discount);
  return res;
}

SolveResult policy_iteration(const FiniteMdp& mdp, double discount, const std::optional<std::vector<int>>& initial,
                             std::size_t max_iterations) {
  std::vector<int> pi;
  if (initial) {
    pi = *initial;
  } else {
    for (int s = 0; s < mdp.n_states(); ++s) pi.push_back(mdp.allowed(s).front());
  }
  for (int s = 0; s < mdp.n_states(); ++s)
    if (!mdp.admissible(s, pi.at(static_cast<std::size_t>(s))))
      throw Error(ErrorCode::kInadmissible, "initial policy outside K(s)");
  SolveResult res;
  while (true) {
    if (res.iterations >= max_iterations)
      throw Error(ErrorCode::kCapExceeded, "policy iteration did not stabilise");
    std::vector<double> v = evaluate_policy_exact(mdp, Policy::stationary_deterministic(pi), discount);
    res.evaluations.push_back(v);
    ++res.iterations;
    bool changed = false;
    for (int s = 0; s < mdp.n_states(); ++s) {
      std::size_t si = static_cast<std::size_t>(s);
      double current = q_value(mdp, 0, s, pi[si], v, discount);
      int best_a = pi[si];
      double best = current;
      for (int a : mdp.allowed(s)) {
        double q = q_value(mdp, 0, s, a, v, discount);
        if (q < best) {
          best = q;
          best_a = a;
        }
      }
      // switch only on a strict improvement beyond round-off, so ties cannot cycle
      if (best_a != pi[si] && best < current - 1e-12 * (1.0 + std::abs(current))) {
        int lowest = greedy_action(mdp, s, q_from_v(mdp, v, discount, 0)[si]);
        pi[si] = lowest;
        changed = true;
      }
    }
    if (!changed) {
      res.values = {v};
      break;
    }
  }
  res.policy = {pi};
  res.residual = bellman_residual(mdp, res, discount);
  return res;
}

double bellman_residual(const FiniteMdp& mdp, const SolveResult& result, double discount) {
  std::vector<int> argmin;
  double r = 0.0;
  if (result.values.size() == 1 && !mdp.horizon()) {
    r = sup_diff(bellman_sweep(mdp, 0, result.values[0], discount, argmin), result.values[0]);
  } else {
    for (std::size_t t = 0; t + 1 < result.values.size(); ++t)
      r = std::max(r, sup_diff(bellman_sweep(mdp, static_cast<int>(t), result.values[t + 1], 1.0, argmin),
                               result.values[t]));
  }
  return r;
}

namespace {

struct Slots {
  std::vector<std::vector<int>> reachable;  // per stage
};

Slots reachable_pairs(const FiniteMdp& mdp, int s0) {
  const int h = *mdp.horizon();
  Slots slots;
  slots.reachable.resize(static_cast<std::size_t>(h + 1));
  slots.reachable[0] = {s0};
  for (int t = 0; t < h; ++t) {
    std::vector<char> seen(static_cast<std::size_t>(mdp.n_states()), 0);
    for (int s : slots.reachable[static_cast<std::size_t>(t)])
      for (int a : mdp.allowed(s))
        for (const Outcome& o : mdp.row(t, s, a))
          if (o.prob > 0.0) seen[static_cast<std::size_t>(o.next)] = 1;
    for (int s = 0; s < mdp.n_states(); ++s)
      if (seen[static_cast<std::size_t>(s)]) slots.reachable[static_cast<std::size_t>(t + 1)].push_back(s);
  }
  return slots;
}

}  // namespace

double brute_force_count(const FiniteMdp& mdp, int s0) {
  if (!mdp.horizon()) throw Error(ErrorCode::kValidation, "brute force needs a finite horizon");
  Slots slots = reachable_pairs(mdp, s0);
  double count = 1.0;
  for (int t = 0; t < *mdp.horizon(); ++t)
    for (int s : slots.reachable[static_cast<std::size_t>(t)]) count *= static_cast<double>(mdp.allowed(s).size());
  return count;
}

double brute_force_optimal(const FiniteMdp& mdp, int s0, double limit) {
  if (!mdp.horizon()) throw Error(ErrorCode::kValidation, "brute force needs a finite horizon");
  const int h = *mdp.horizon();
  if (brute_force_count(mdp, s0) > limit) throw Error(ErrorCode::kCapExceeded, "instance too large to enumerate");
  if (h == 0) return mdp.terminal.at(static_cast<std::size_t>(s0));
  Slots slots = reachable_pairs(mdp, s0);
  struct Slot {
    int t, s;
    std::size_t choice;
  };
  std::vector<Slot> decisions;
  for (int t = 0; t < h; ++t)
    for (int s : slots.reachable[static_cast<std::size_t>(t)]) decisions.push_back({t, s, 0});

  std::vector<std::vector<int>> table(static_cast<std::size_t>(h), std::vector<int>(static_cast<std::size_t>(mdp.n_states()), -1));
  auto apply = [&](const Slot& d) {
    table[static_cast<std::size_t>(d.t)][static_cast<std::size_t>(d.s)] = mdp.allowed(d.s)[d.choice];
  };
  for (const Slot& d : decisions) apply(d);

  std::vector<double> next(static_cast<std::size_t>(mdp.n_states())), cur(next.size());
  double best = kInf;
  while (true) {
    next = mdp.terminal;
    for (int t = h - 1; t >= 0; --t) {
      for (int s : slots.reachable[static_cast<std::size_t>(t)]) {
        int a = table[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)];
        double v = 0.0;
        for (const Outcome& o : mdp.row(t, s, a)) v += o.prob * (o.cost + next[static_cast<std::size_t>(o.next)]);
        cur[static_cast<std::size_t>(s)] = v;
      }
      std::swap(cur, next);
    }
    best = std::min(best, next[static_cast<std::size_t>(s0)]);
    // odometer increment
    std::size_t i = 0;
    for (; i < decisions.size(); ++i) {
      Slot& d = decisions[i];
      if (++d.choice < mdp.allowed(d.s).size()) {
        apply(d);
        break;
      }
      d.choice = 0;
      apply(d);
    }
    if (i == decisions.size()) break;
  }
  return best;
}

nlohmann::json to_json(const SolveResult& result) {
  nlohmann::json doc;
  doc["values"] = result.values;
  doc["policy"] = result.policy;
  doc["iterations"] = result.iterations;
  doc["residual"] = result.residual;
  return doc;
}

}  // namespace pdmdp
