#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "pdmdp/generative.hpp"

namespace pdmdp {

template <class S, class A>
class QTable {
 public:
  double get(const S& s, const A& a) const {
    auto it = table_.find({s, a});
    return it == table_.end() ? 0.0 : it->second;
  }
  bool contains(const S& s, const A& a) const { return table_.count({s, a}) > 0; }
  double& at(const S& s, const A& a) { return table_.at({s, a}); }
  void ensure(const S& s, const std::vector<A>& actions) {
    for (const A& a : actions) table_.emplace(std::make_pair(s, a), 0.0);
  }
  std::size_t size() const { return table_.size(); }
  const std::map<std::pair<S, A>, double>& entries() const { return table_; }

  /// Lowest-index argmin and its value over the given actions.
  std::pair<A, double> best(const S& s, const std::vector<A>& actions) const {
    A arg = actions.front();
    double v = get(s, arg);
    for (const A& a : actions) {
      double q = get(s, a);
      if (q < v) {
        v = q;
        arg = a;
      }
    }
    return {arg, v};
  }

 private:
  std::map<std::pair<S, A>, double> table_;
};

/**
 * Tabular Q-learning for cost minimisation. Each episode starts from `initial_state(rng)`;
 * the behaviour policy is greedy with probability 1-ε and uniform over K(s) otherwise.
 */
template <class S, class A, class Init>
QTable<S, A> q_learning(const GenerativeModel<S, A>& gen, Init initial_state, double discount, double alpha,
                        double epsilon, std::size_t n_episodes, std::size_t episode_len, Rng& rng,
                        QTable<S, A> q = {}) {
  if (!(discount > 0.0 && discount < 1.0) || !(alpha > 0.0 && alpha <= 1.0) || !(epsilon >= 0.0 && epsilon <= 1.0))
    throw Error(ErrorCode::kValidation, "q_learning parameters out of range");
  for (std::size_t ep = 0; ep < n_episodes; ++ep) {
    S s = initial_state(rng);
    for (std::size_t k = 0; k < episode_len; ++k) {
      std::vector<A> acts = gen.admissible(s);
      q.ensure(s, acts);
      A a;
      if (uniform01(rng) < epsilon) {
        a = acts[std::uniform_int_distribution<std::size_t>(0, acts.size() - 1)(rng)];
      } else {
        a = q.best(s, acts).first;
      }
      auto [next, cost] = gen.step(s, a, rng);
      bool done = gen.is_terminal && gen.is_terminal(next);
      double future = 0.0;
      if (!done) {
        std::vector<A> next_acts = gen.admissible(next);
        q.ensure(next, next_acts);
        future = q.best(next, next_acts).second;
      }
      double& entry = q.at(s, a);
      entry += alpha * (cost + discount * future - entry);
      if (done) break;
      s = next;
    }
  }
  return q;
}

}  // namespace pdmdp
