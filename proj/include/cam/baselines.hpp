#pragma once

// Comparison strategies: lattice influence maximization that ignores
// activity strengths, highest out-degree first, and uniform random steps.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "cam/graph.hpp"
#include "cam/imm.hpp"
#include "cam/rng.hpp"
#include "cam/sampling.hpp"
#include "cam/strategy.hpp"

namespace cam {

struct InfluenceResult {
  StrategyVector x;
  std::size_t samples = 0;
};

/// Greedy on the expected influence spread: RN-samples with uniform roots,
/// scale n.
inline InfluenceResult baseline_im(const SocialGraph& g, const GraphAggregates& agg,
                                   const StrategyFunction& h, const LatticeSpec& spec,
                                   const ImmParams& params, std::uint64_t seed,
                                   GreedyTrace* trace = nullptr) {
  const DiscreteDistribution uniform(std::vector<double>(g.node_count(), 1.0));
  SamplingTarget target{Estimator::kUpper, static_cast<double>(g.node_count()), &uniform,
                        Stream::kInfluenceEstimation, Stream::kInfluenceFinal, "influence"};
  ImmResult r = run_imm(g, agg, h, spec, params, target, seed, trace);
  return {r.x, r.sampling.samples.size()};
}

/// Coordinates ranked by the total out-degree of the nodes they affect,
/// descending, ties to the lower index. With d = n this is plain out-degree.
inline std::vector<std::size_t> degree_ranking(const SocialGraph& g, const StrategyFunction& h) {
  std::vector<std::size_t> degree(h.dimensions(), 0);
  for (std::size_t i = 0; i < h.dimensions(); ++i) {
    for (NodeId u : h.nodes_affected_by(i)) degree[i] += g.out_degree(u);
  }
  std::vector<std::size_t> order(h.dimensions());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return degree[a] > degree[b]; });
  return order;
}

/// Fills coordinates to their cap in degree order until the budget runs out.
inline StrategyVector baseline_max_degree(const SocialGraph& g, const StrategyFunction& h,
                                          const LatticeSpec& spec) {
  h.check_lattice(spec);
  std::uint64_t remaining = spec.max_steps();
  const std::uint32_t cap = h.step_cap(spec.granularity);
  std::vector<std::uint32_t> steps(h.dimensions(), 0);
  for (std::size_t i : degree_ranking(g, h)) {
    if (remaining == 0) break;
    const auto take = static_cast<std::uint32_t>(std::min<std::uint64_t>(cap, remaining));
    steps[i] = take;
    remaining -= take;
  }
  return StrategyVector::from_steps(std::move(steps), spec.granularity);
}

/// Adds t to a uniformly random unsaturated coordinate until the budget runs out.
inline StrategyVector baseline_random(const StrategyFunction& h, const LatticeSpec& spec,
                                      std::uint64_t seed) {
  h.check_lattice(spec);
  Rng rng(stream_seed(seed, Stream::kRandomBaseline, 0));
  const std::uint32_t cap = h.step_cap(spec.granularity);
  std::vector<std::uint32_t> steps(h.dimensions(), 0);
  std::vector<std::size_t> open(h.dimensions());
  std::iota(open.begin(), open.end(), std::size_t{0});
  for (std::uint32_t it = 0; it < spec.max_steps() && !open.empty(); ++it) {
    const std::size_t slot = static_cast<std::size_t>(rng.below(open.size()));
    const std::size_t i = open[slot];
    if (++steps[i] >= cap) {
      open[slot] = open.back();
      open.pop_back();
    }
  }
  return StrategyVector::from_steps(std::move(steps), spec.granularity);
}

}  // namespace cam
