#pragma once

// Lattice greedy: spend the budget one step t at a time on the coordinate
// with the largest marginal gain.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include "cam/strategy.hpp"

namespace cam {

/// An objective the greedy can drive: a moving point with per-coordinate
/// marginal gains.
template <class T>
concept GreedyObjective = requires(T& obj, const T& cobj, std::size_t i) {
  { cobj.dimensions() } -> std::convertible_to<std::size_t>;
  { cobj.can_increment(i) } -> std::convertible_to<bool>;
  { obj.marginal_gain(i) } -> std::convertible_to<double>;
  { obj.increment(i) };
  { cobj.value() } -> std::convertible_to<double>;
};

struct TraceRow {
  double budget = 0.0;  ///< k of the lattice the greedy ran on
  std::string phase;
  std::size_t iteration = 0;
  std::size_t dimension = 0;
  double gain = 0.0;
  double cumulative = 0.0;
};

using GreedyTrace = std::vector<TraceRow>;

/// Gains within this relative distance of the best count as ties.
inline constexpr double kGreedyTieTolerance = 1e-12;

/// Runs floor(k/t) iterations (fewer only if every coordinate is saturated).
/// Ties go to the lowest index. Returns the step counts of the final point.
template <GreedyObjective Objective>
StrategyVector lattice_greedy(Objective& objective, const LatticeSpec& spec,
                              GreedyTrace* trace = nullptr, const std::string& phase = {}) {
  const std::uint32_t iterations = spec.max_steps();
  const std::size_t d = objective.dimensions();
  std::vector<std::uint32_t> steps(d, 0);
  double cumulative = trace ? objective.value() : 0.0;
  for (std::uint32_t it = 0; it < iterations; ++it) {
    std::size_t best = d;
    double best_gain = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (!objective.can_increment(i)) continue;
      const double gain = objective.marginal_gain(i);
      if (best == d ||
          gain > best_gain + kGreedyTieTolerance * std::max(1.0, std::abs(best_gain))) {
        best = i;
        best_gain = gain;
      }
    }
    if (best == d) break;
    objective.increment(best);
    ++steps[best];
    if (trace) {
      cumulative += best_gain;
      trace->push_back({spec.budget, phase, it + 1, best, best_gain, cumulative});
    }
  }
  return StrategyVector::from_steps(std::move(steps), spec.granularity);
}

/// Same selection as lattice_greedy for objectives whose marginal gains never
/// increase as the point moves (DR-submodular on the lattice). A gain from an
/// earlier iteration is then an upper bound on the current one, so only
/// coordinates whose stale bound could still win get re-evaluated.
template <GreedyObjective Objective>
StrategyVector lazy_lattice_greedy(Objective& objective, const LatticeSpec& spec,
                                   GreedyTrace* trace = nullptr, const std::string& phase = {}) {
  const std::uint32_t iterations = spec.max_steps();
  const std::size_t d = objective.dimensions();
  std::vector<std::uint32_t> steps(d, 0);
  std::vector<double> bound(d, 0.0);
  std::vector<char> fresh(d, 0);
  if (iterations > 0) {
    for (std::size_t i = 0; i < d; ++i) {
      if (objective.can_increment(i)) bound[i] = objective.marginal_gain(i);
    }
    std::fill(fresh.begin(), fresh.end(), 1);
  }
  // Scans in index order with the tie rule of lattice_greedy.
  const auto leader = [&] {
    std::size_t best = d;
    for (std::size_t i = 0; i < d; ++i) {
      if (!objective.can_increment(i)) continue;
      if (best == d ||
          bound[i] > bound[best] + kGreedyTieTolerance * std::max(1.0, std::abs(bound[best]))) {
        best = i;
      }
    }
    return best;
  };
  double cumulative = trace ? objective.value() : 0.0;
  for (std::uint32_t it = 0; it < iterations; ++it) {
    std::size_t best = leader();
    // Refresh until the leader is exact and no stale bound inside its tie
    // window remains; stale bounds outside the window cannot win.
    for (;;) {
      if (best == d) break;
      const double floor =
          bound[best] - kGreedyTieTolerance * std::max(1.0, std::abs(bound[best]));
      bool refreshed = false;
      for (std::size_t i = 0; i < d; ++i) {
        if (fresh[i] || !objective.can_increment(i) || bound[i] < floor) continue;
        bound[i] = objective.marginal_gain(i);
        fresh[i] = 1;
        refreshed = true;
      }
      if (!refreshed) break;
      best = leader();
    }
    if (best == d) break;
    const double best_gain = bound[best];
    objective.increment(best);
    ++steps[best];
    std::fill(fresh.begin(), fresh.end(), 0);
    if (trace) {
      cumulative += best_gain;
      trace->push_back({spec.budget, phase, it + 1, best, best_gain, cumulative});
    }
  }
  return StrategyVector::from_steps(std::move(steps), spec.granularity);
}

}  // namespace cam
