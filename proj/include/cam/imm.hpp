#pragma once

// Sample sizes for the lower- and upper-bound maximizers, and the two-phase
// procedure that uses them: estimate a lower bound on the optimum with a
// doubling schedule, then draw a fresh collection of size lambda* / LB and
// run the lattice greedy on it.

#include <cmath>
#include <numbers>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "cam/error.hpp"
#include "cam/graph.hpp"
#include "cam/greedy.hpp"
#include "cam/rng.hpp"
#include "cam/sampling.hpp"
#include "cam/strategy.hpp"

namespace cam {

struct ImmParams {
  double epsilon = 0.1;  ///< accuracy, in (0, 1)
  double ell = 1.0;      ///< confidence exponent, > 0
  /// Upper limit on any single collection; 0 means unlimited.
  std::size_t max_samples = 0;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
    if (!(ell > 0.0) || !std::isfinite(ell)) throw ConfigError("ell must be positive");
  }
  double epsilon_prime() const { return std::sqrt(2.0) * epsilon; }
};

/// min(K ln d, d ln K) with K = k / t, clamped at 0.
inline double ln_combinations(double budget_steps, std::size_t dimensions) {
  if (budget_steps < 1.0 || dimensions < 1) return 0.0;
  const double d = static_cast<double>(dimensions);
  return std::max(0.0, std::min(budget_steps * std::log(d), d * std::log(budget_steps)));
}

struct SampleSizePlan {
  double scale = 0.0;  ///< T for the lower bound, W for the upper bound
  double epsilon = 0.0;
  double epsilon_prime = 0.0;
  double ln_combinations = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double lambda_prime = 0.0;
  double lambda_star = 0.0;
  std::size_t rounds = 0;  ///< doubling-schedule iterations

  /// y_i = scale / 2^i.
  double threshold(std::size_t i) const { return scale / std::ldexp(1.0, static_cast<int>(i)); }
  /// ceil(lambda' / y_i).
  std::size_t estimation_size(std::size_t i) const {
    return static_cast<std::size_t>(std::ceil(lambda_prime / threshold(i)));
  }
  /// ceil(lambda* / LB).
  std::size_t final_size(double lower_bound) const {
    return static_cast<std::size_t>(std::ceil(lambda_star / lower_bound));
  }
};

inline SampleSizePlan sample_size_plan(double scale, const LatticeSpec& spec,
                                       const ImmParams& params) {
  params.validate();
  spec.validate();
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DegenerateInstanceError("sample-size scale must be positive");
  }
  SampleSizePlan plan;
  plan.scale = scale;
  plan.epsilon = params.epsilon;
  plan.epsilon_prime = params.epsilon_prime();
  plan.ln_combinations = ln_combinations(spec.budget / spec.granularity, spec.dimensions);
  const double ln_scale = std::max(0.0, std::log(scale));
  const double ln_log2_scale = scale > 2.0 ? std::log(std::log2(scale)) : 0.0;
  plan.alpha = std::sqrt(params.ell * ln_scale + std::log(2.0));
  plan.beta = std::sqrt((1.0 - 1.0 / std::numbers::e) * (plan.ln_combinations + plan.alpha * plan.alpha));
  // Floored at ln 2 so the estimation phase never asks for zero samples.
  const double log_terms =
      std::max(std::log(2.0), plan.ln_combinations + params.ell * ln_scale + ln_log2_scale);
  const double ep = plan.epsilon_prime;
  plan.lambda_prime = (2.0 + 2.0 * ep / 3.0) * log_terms * scale / (ep * ep);
  const double mix = (1.0 - 1.0 / std::numbers::e) * plan.alpha + plan.beta;
  plan.lambda_star = 2.0 * scale * mix * mix / (params.epsilon * params.epsilon);
  const double log2_scale = std::ceil(std::log2(scale) - 1e-12);
  plan.rounds = static_cast<std::size_t>(std::max(1.0, log2_scale - 1.0));
  return plan;
}

/// Which collection the procedure draws and which estimator it maximizes.
struct SamplingTarget {
  Estimator estimator = Estimator::kLower;
  double scale = 0.0;
  const DiscreteDistribution* roots = nullptr;  ///< RN roots; unused for RE
  Stream estimation_stream = Stream::kLowerEstimation;
  Stream final_stream = Stream::kLowerFinal;
  std::string phase = "lower";
};

struct SamplingOutcome {
  SampleCollection samples;  ///< the fresh final collection
  SampleSizePlan plan;
  double lower_bound = 0.0;  ///< LB on the optimum of the maximized estimator
  std::size_t rounds_used = 0;
  bool triggered = false;  ///< false: the schedule ran out and LB = y_last
  std::size_t estimation_samples = 0;
};

namespace detail {

inline void check_sample_limit(std::size_t count, const ImmParams& params, const std::string& phase) {
  if (params.max_samples != 0 && count > params.max_samples) {
    throw GuardExceededError(phase + " phase needs " + std::to_string(count) +
                             " samples, above the limit of " + std::to_string(params.max_samples));
  }
  if (count > SampleCollection::kMaxSamples) {
    throw GuardExceededError(phase + " phase needs " + std::to_string(count) +
                             " samples, above the storage limit");
  }
}

inline void extend_collection(SampleCollection& c, const SocialGraph& g, const GraphAggregates& agg,
                              const SamplingTarget& target, std::size_t count, std::uint64_t seed,
                              Stream stream) {
  if (target.estimator == Estimator::kUpper) {
    extend_rn_samples(c, g, *target.roots, count, seed, stream);
  } else {
    extend_re_samples(c, g, agg, count, seed, stream);
  }
}

inline SampleCollection empty_collection(const SocialGraph& g, const SamplingTarget& target) {
  return SampleCollection(required_kind(target.estimator), target.scale, g.node_count());
}

}  // namespace detail

/// Estimation phase followed by a fresh final collection. With a zero step
/// budget no samples are drawn.
inline SamplingOutcome run_sampling_phase(const SocialGraph& g, const GraphAggregates& agg,
                                          const StrategyFunction& h, const LatticeSpec& spec,
                                          const ImmParams& params, const SamplingTarget& target,
                                          std::uint64_t seed) {
  h.check_lattice(spec);
  SamplingOutcome out;
  out.plan = sample_size_plan(target.scale, spec, params);
  out.samples = detail::empty_collection(g, target);
  if (spec.max_steps() == 0) {
    out.samples.build_index();
    return out;
  }
  const SampleSizePlan& plan = out.plan;
  SampleCollection estimation = detail::empty_collection(g, target);
  for (std::size_t i = 1; i <= plan.rounds; ++i) {
    const std::size_t theta = plan.estimation_size(i);
    detail::check_sample_limit(theta, params, target.phase);
    detail::extend_collection(estimation, g, agg, target, theta, seed, target.estimation_stream);
    IncrementalEstimator objective(estimation, h, target.estimator, spec.granularity);
    lazy_lattice_greedy(objective, spec);
    const double value = objective.value();
    out.rounds_used = i;
    if (value >= (1.0 + plan.epsilon_prime) * plan.threshold(i)) {
      out.lower_bound = value / (1.0 + plan.epsilon_prime);
      out.triggered = true;
      break;
    }
  }
  if (!out.triggered) {
    out.lower_bound = plan.threshold(plan.rounds);
    std::clog << "warning: " << target.phase
              << " estimation did not trigger; using LB = " << out.lower_bound << '\n';
  }
  out.estimation_samples = estimation.size();
  estimation.release();
  const std::size_t theta = plan.final_size(out.lower_bound);
  detail::check_sample_limit(theta, params, target.phase);
  detail::extend_collection(out.samples, g, agg, target, theta, seed, target.final_stream);
  return out;
}

inline SamplingTarget lower_target(const GraphAggregates& agg) {
  return {Estimator::kLower, agg.total_strength, nullptr, Stream::kLowerEstimation,
          Stream::kLowerFinal, "lower"};
}

inline SamplingTarget upper_target(const GraphAggregates& agg) {
  return {Estimator::kUpper, agg.total_node_weight, &agg.node_distribution,
          Stream::kUpperEstimation, Stream::kUpperFinal, "upper"};
}

/// RE collection M' for the lower bound.
inline SamplingOutcome sampling_lb(const SocialGraph& g, const GraphAggregates& agg,
                                   const StrategyFunction& h, const LatticeSpec& spec,
                                   const ImmParams& params, std::uint64_t seed) {
  return run_sampling_phase(g, agg, h, spec, params, lower_target(agg), seed);
}

/// RN collection N' for the upper bound.
inline SamplingOutcome sampling_ub(const SocialGraph& g, const GraphAggregates& agg,
                                   const StrategyFunction& h, const LatticeSpec& spec,
                                   const ImmParams& params, std::uint64_t seed) {
  return run_sampling_phase(g, agg, h, spec, params, upper_target(agg), seed);
}

struct ImmResult {
  StrategyVector x;
  SamplingOutcome sampling;
};

inline ImmResult run_imm(const SocialGraph& g, const GraphAggregates& agg, const StrategyFunction& h,
                         const LatticeSpec& spec, const ImmParams& params,
                         const SamplingTarget& target, std::uint64_t seed,
                         GreedyTrace* trace = nullptr) {
  ImmResult result;
  result.sampling = run_sampling_phase(g, agg, h, spec, params, target, seed);
  IncrementalEstimator objective(result.sampling.samples, h, target.estimator, spec.granularity);
  result.x = lazy_lattice_greedy(objective, spec, trace, target.phase);
  return result;
}

/// x_L and the collection M' it was chosen on.
inline ImmResult imm_lb(const SocialGraph& g, const GraphAggregates& agg, const StrategyFunction& h,
                        const LatticeSpec& spec, const ImmParams& params, std::uint64_t seed,
                        GreedyTrace* trace = nullptr) {
  return run_imm(g, agg, h, spec, params, lower_target(agg), seed, trace);
}

/// x_U and the collection N' it was chosen on.
inline ImmResult imm_ub(const SocialGraph& g, const GraphAggregates& agg, const StrategyFunction& h,
                        const LatticeSpec& spec, const ImmParams& params, std::uint64_t seed,
                        GreedyTrace* trace = nullptr) {
  return run_imm(g, agg, h, spec, params, upper_target(agg), seed, trace);
}

}  // namespace cam
