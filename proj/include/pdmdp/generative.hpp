#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "pdmdp/common.hpp"
#include "pdmdp/mdp.hpp"

namespace pdmdp {

/// Simulator-only access to a decision process.
template <class S, class A>
struct GenerativeModel {
  std::function<std::pair<S, double>(const S&, const A&, Rng&)> step;
  std::function<std::vector<A>(const S&)> admissible;
  std::function<bool(const S&)> is_terminal;     ///< optional; terminal states absorb
  std::function<double(const S&)> terminal_cost;  ///< optional; charged at the horizon
  std::optional<int> horizon;
  double discount = 1.0;
};

/// Generative view of a stationary finite MDP.
inline GenerativeModel<int, int> generative_from_mdp(const FiniteMdp& mdp, double discount = 1.0) {
  GenerativeModel<int, int> gen;
  gen.step = [&mdp](const int& s, const int& a, Rng& rng) {
    if (!mdp.admissible(s, a)) throw Error(ErrorCode::kInadmissible, "generative step outside K(s)");
    const Row& row = mdp.row(0, s, a);
    double u = uniform01(rng), acc = 0.0;
    for (const Outcome& o : row) {
      acc += o.prob;
      if (u < acc) return std::make_pair(o.next, o.cost);
    }
    return std::make_pair(row.back().next, row.back().cost);
  };
  gen.admissible = [&mdp](const int& s) { return mdp.allowed(s); };
  if (mdp.horizon()) {
    gen.terminal_cost = [&mdp](const int& s) { return mdp.terminal.at(static_cast<std::size_t>(s)); };
    gen.horizon = mdp.horizon();
  }
  gen.discount = discount;
  return gen;
}

}  // namespace pdmdp
