#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <optional>
#include <tuple>
#include <vector>

#include "pdmdp/generative.hpp"

namespace pdmdp {

enum class Backup {
  kBellmanMin,      ///< ρ_v = min_a Σ ν (c + γρ) / Σ ν over children taking a
  kRolloutAverage,  ///< ρ_v = mean of the returns that went through v
};

struct MctsOptions {
  std::size_t budget = 1000;
  double c_uct = std::sqrt(2.0);
  std::size_t max_depth = 0;  ///< 0: remaining horizon, or the discount tail bound
  Backup backup = Backup::kBellmanMin;
  double tail_epsilon = 1e-6;
};

/// Exploration score for a child with empirical mean cost `mean` (lower is better).
inline double uct_score(double parent_visits, double mean, double visits, double c_uct) {
  if (parent_visits <= 1.0) return mean;
  return mean - c_uct * std::sqrt(std::log(parent_visits) / visits);
}

template <class K, class A>
struct SearchNode {
  K key;
  std::optional<A> action;  ///< incoming action, empty at the root
  std::size_t visits = 1;   ///< ν
  double rho = 0.0;         ///< ρ
  double cost = 0.0;        ///< running mean of the incoming transition cost
  std::size_t depth = 0;
  int parent = -1;
  std::vector<int> children;
  double return_min = kInf;
  double return_max = -kInf;
  double return_sum = 0.0;
  std::size_t return_count = 0;
};

template <class A>
struct ActionStats {
  A action;
  std::size_t visits = 0;
  double value = 0.0;  ///< visit-weighted mean of c + γρ
};

template <class K, class A>
struct MctsResult {
  A action;
  std::vector<ActionStats<A>> root;
  std::vector<SearchNode<K, A>> tree;
  std::size_t iterations = 0;
};

/**
 * Four-phase tree search shared by the fully and partially observed planners.
 *
 * Hidden states H drive the simulator; tree children are keyed by (action, K) where K is the
 * state itself (fully observed) or the emitted observation (partially observed).
 */
template <class H, class A, class K>
class TreeSearch {
 public:
  std::function<std::tuple<H, double, K>(const H&, const A&, Rng&)> step;
  std::function<std::vector<A>(const H&)> admissible;
  std::function<bool(const H&)> is_terminal;
  std::function<double(const H&)> terminal_cost;
  std::function<bool(const K&, const K&)> same_key;  ///< defaults to operator==
  std::optional<int> horizon;
  double discount = 1.0;

  MctsResult<K, A> run(const K& root_key, const std::function<H(Rng&)>& sample_root, const MctsOptions& opt,
                       Rng& rng) const {
    const std::size_t depth_cap = depth_limit(opt);
    MctsResult<K, A> res;
    auto& tree = res.tree;
    SearchNode<K, A> root;
    root.key = root_key;
    tree.push_back(std::move(root));
    {
      H probe = sample_root(rng);
      if (opt.budget < admissible(probe).size())
        throw Error(ErrorCode::kValidation, "budget smaller than the number of root actions");
    }
    double scale = 0.0;
    std::vector<int> path;
    for (std::size_t it = 0; it < opt.budget; ++it) {
      path.assign(1, 0);
      H s = sample_root(rng);
      double leaf_return = 0.0;
      while (true) {
        int v = path.back();
        if (tree[v].depth >= depth_cap || (is_terminal && is_terminal(s))) {
          leaf_return = leaf_value(s, tree[v].depth, depth_cap);
          tree[v].rho = leaf_return;
          break;
        }
        std::vector<A> acts = admissible(s);
        std::vector<A> untried;
        for (const A& a : acts)
          if (!has_action(tree, v, a)) untried.push_back(a);
        A a = untried.empty() ? select(tree, v, acts, opt.c_uct, scale)
                              : untried[std::uniform_int_distribution<std::size_t>(0, untried.size() - 1)(rng)];
        auto [next, cost, key] = step(s, a, rng);
        int child = untried.empty() ? find_child(tree, v, a, key) : -1;
        if (child >= 0) {
          auto& c = tree[child];
          ++c.visits;
          c.cost += (cost - c.cost) / static_cast<double>(c.visits);
          path.push_back(child);
          s = next;
          continue;
        }
        SearchNode<K, A> node;
        node.key = key;
        node.action = a;
        node.cost = cost;
        node.depth = tree[v].depth + 1;
        node.parent = v;
        tree.push_back(node);
        int id = static_cast<int>(tree.size()) - 1;
        tree[v].children.push_back(id);
        path.push_back(id);
        leaf_return = rollout(next, tree[id].depth, depth_cap, rng);
        tree[id].rho = leaf_return;
        break;
      }
      backpropagate(tree, path, leaf_return, opt.backup, scale);
      ++tree[0].visits;
      ++res.iterations;
    }
    res.root = root_stats(tree);
    if (res.root.empty()) throw Error(ErrorCode::kValidation, "root has no admissible action");
    auto best = std::min_element(res.root.begin(), res.root.end(),
                                 [](const auto& x, const auto& y) { return x.value < y.value; });
    res.action = best->action;
    return res;
  }

  std::size_t depth_limit(const MctsOptions& opt) const {
    if (horizon) return opt.max_depth ? std::min<std::size_t>(opt.max_depth, static_cast<std::size_t>(*horizon))
                                      : static_cast<std::size_t>(*horizon);
    if (opt.max_depth) return opt.max_depth;
    if (discount >= 1.0) throw Error(ErrorCode::kValidation, "undiscounted search needs a depth cap");
    return static_cast<std::size_t>(std::ceil(std::log(opt.tail_epsilon) / std::log(discount)));
  }

 private:
  using Tree = std::vector<SearchNode<K, A>>;

  double leaf_value(const H& s, std::size_t depth, std::size_t cap) const {
    if (is_terminal && is_terminal(s) && depth < cap) return 0.0;
    return (horizon && terminal_cost) ? terminal_cost(s) : 0.0;
  }

  double rollout(H s, std::size_t depth, std::size_t cap, Rng& rng) const {
    double total = 0.0, w = 1.0;
    while (depth < cap && !(is_terminal && is_terminal(s))) {
      std::vector<A> acts = admissible(s);
      const A& a = acts[std::uniform_int_distribution<std::size_t>(0, acts.size() - 1)(rng)];
      auto [next, cost, key] = step(s, a, rng);
      total += w * cost;
      w *= discount;
      s = std::move(next);
      ++depth;
    }
    return total + w * leaf_value(s, depth, cap);
  }

  static bool has_action(const Tree& tree, int v, const A& a) {
    for (int c : tree[v].children)
      if (*tree[c].action == a) return true;
    return false;
  }

  bool keys_match(const K& a, const K& b) const {
    if (same_key) return same_key(a, b);
    if constexpr (std::equality_comparable<K>) {
      return a == b;
    } else {
      throw Error(ErrorCode::kValidation, "tree key needs a comparison");
    }
  }

  int find_child(const Tree& tree, int v, const A& a, const K& key) const {
    for (int c : tree[v].children)
      if (*tree[c].action == a && keys_match(tree[c].key, key)) return c;
    return -1;
  }

  std::vector<ActionStats<A>> action_stats(const Tree& tree, int v) const {
    std::vector<ActionStats<A>> stats;
    for (int c : tree[v].children) {
      const auto& n = tree[c];
      auto it = std::find_if(stats.begin(), stats.end(), [&](const auto& s) { return s.action == *n.action; });
      if (it == stats.end()) {
        stats.push_back({*n.action, 0, 0.0});
        it = std::prev(stats.end());
      }
      it->value += static_cast<double>(n.visits) * (n.cost + discount * n.rho);
      it->visits += n.visits;
    }
    for (auto& s : stats) s.value /= static_cast<double>(s.visits);
    return stats;
  }

  std::vector<ActionStats<A>> root_stats(const Tree& tree) const { return action_stats(tree, 0); }

  A select(const Tree& tree, int v, const std::vector<A>& acts, double c_uct, double scale) const {
    std::vector<ActionStats<A>> stats = action_stats(tree, v);
    double parent = 0.0;
    for (const auto& s : stats) parent += static_cast<double>(s.visits);
    double norm = scale > 0.0 ? scale : 1.0;
    const ActionStats<A>* best = nullptr;
    double best_score = kInf;
    for (const A& a : acts) {
      for (const auto& s : stats) {
        if (!(s.action == a)) continue;
        double score = uct_score(parent, s.value / norm, static_cast<double>(s.visits), c_uct);
        if (!best || score < best_score) {
          best = &s;
          best_score = score;
        }
      }
    }
    return best->action;
  }

  void backpropagate(Tree& tree, const std::vector<int>& path, double leaf_return, Backup backup,
                     double& scale) const {
    double g = leaf_return;
    for (std::size_t i = path.size(); i-- > 0;) {
      auto& node = tree[path[i]];
      if (i + 1 < path.size()) g = tree[path[i + 1]].cost + discount * g;
      node.return_min = std::min(node.return_min, g);
      node.return_max = std::max(node.return_max, g);
      node.return_sum += g;
      ++node.return_count;
      scale = std::max(scale, std::abs(g));
      if (i + 1 == path.size()) continue;
      if (backup == Backup::kRolloutAverage) {
        node.rho = node.return_sum / static_cast<double>(node.return_count);
      } else {
        std::vector<ActionStats<A>> stats = action_stats(tree, path[i]);
        double best = kInf;
        for (const auto& s : stats) best = std::min(best, s.value);
        node.rho = best;
      }
    }
  }
};

/// UCT planning on a fully observed generative model; returns the chosen root action and tree.
template <class S, class A>
MctsResult<S, A> mcts_search(const GenerativeModel<S, A>& gen, const S& s0, const MctsOptions& opt, Rng& rng,
                             std::function<bool(const S&, const S&)> same_state = nullptr) {
  TreeSearch<S, A, S> search;
  search.step = [&gen](const S& s, const A& a, Rng& r) {
    auto [next, cost] = gen.step(s, a, r);
    return std::make_tuple(next, cost, next);
  };
  search.admissible = gen.admissible;
  search.is_terminal = gen.is_terminal;
  search.terminal_cost = gen.terminal_cost;
  if (same_state) search.same_key = std::move(same_state);
  search.horizon = gen.horizon;
  search.discount = gen.discount;
  return search.run(s0, [&s0](Rng&) { return s0; }, opt, rng);
}

template <class S, class A>
A mcts_plan(const GenerativeModel<S, A>& gen, const S& s0, const MctsOptions& opt, Rng& rng) {
  return mcts_search(gen, s0, opt, rng).action;
}

}  // namespace pdmdp
