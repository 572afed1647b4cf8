#pragma once

// Sandwich approximation: maximize the lower bound, the sampled objective,
// and the upper bound, then keep whichever candidate scores best under
// Monte Carlo simulation.

#include <array>
#include <cmath>
#include <numbers>
#include <cstdint>
#include <string>

#include "cam/diffusion.hpp"
#include "cam/error.hpp"
#include "cam/graph.hpp"
#include "cam/greedy.hpp"
#include "cam/imm.hpp"
#include "cam/sampling.hpp"
#include "cam/strategy.hpp"

namespace cam {

enum class SandwichCandidate : std::size_t { kLower = 0, kActivity = 1, kUpper = 2 };

inline std::string_view to_string(SandwichCandidate c) {
  switch (c) {
    case SandwichCandidate::kLower: return "lower";
    case SandwichCandidate::kActivity: return "activity";
    case SandwichCandidate::kUpper: return "upper";
  }
  return "?";
}

/// The computable part of the approximation ratio. The full ratio also needs
/// the unknown optima of f_c and of the lower bound.
struct RatioCertificate {
  double fc_at_upper = 0.0;     ///< MC estimate of f_c(x_U)
  double upper_at_upper = 0.0;  ///< sampled upper bound at x_U
  double upper_ratio = 0.0;     ///< fc_at_upper / upper_at_upper
  double greedy_factor = 0.0;   ///< 1 - 1/e - epsilon
  std::string label = "data-dependent, partially reported";
};

struct SandwichResult {
  StrategyVector x_lower;
  StrategyVector x_mid;
  StrategyVector x_upper;
  StrategyVector x_sand;
  SandwichCandidate chosen = SandwichCandidate::kLower;
  std::array<McEstimate, 3> fc_dot_values{};  ///< MC scores of x_lower, x_mid, x_upper
  SampledEstimate lower_at_sand;              ///< lower estimator on M' at x_sand
  SampledEstimate upper_at_sand;              ///< upper estimator on N' at x_sand
  RatioCertificate certificate;
  std::size_t lower_samples = 0;  ///< |M'|
  std::size_t upper_samples = 0;  ///< |N'|

  const McEstimate& score() const { return fc_dot_values[static_cast<std::size_t>(chosen)]; }
};

/// Seeds the MC scoring of candidates; shared so comparisons use common
/// random numbers.
inline std::uint64_t scoring_seed(std::uint64_t seed) {
  return stream_seed(seed, Stream::kMonteCarlo, 0);
}

inline SandwichResult sandwich(const SocialGraph& g, const GraphAggregates& agg,
                               const StrategyFunction& h, const LatticeSpec& spec,
                               const ImmParams& params, std::size_t mc_runs, std::uint64_t seed,
                               GreedyTrace* trace = nullptr) {
  if (mc_runs < 1) throw ConfigError("mc_runs must be at least 1");
  SandwichResult out;
  const double eps = params.epsilon;

  ImmResult lower = imm_lb(g, agg, h, spec, params, seed, trace);
  out.x_lower = lower.x;
  const SampleCollection& m_prime = lower.sampling.samples;
  {
    IncrementalEstimator mid(m_prime, h, Estimator::kActivity, spec.granularity);
    out.x_mid = lattice_greedy(mid, spec, trace, "activity");
  }
  ImmResult upper = imm_ub(g, agg, h, spec, params, seed, trace);
  out.x_upper = upper.x;
  const SampleCollection& n_prime = upper.sampling.samples;
  out.lower_samples = m_prime.size();
  out.upper_samples = n_prime.size();

  const std::uint64_t mc_seed = scoring_seed(seed);
  const std::array<const StrategyVector*, 3> candidates{&out.x_lower, &out.x_mid, &out.x_upper};
  for (std::size_t c = 0; c < 3; ++c) {
    out.fc_dot_values[c] = monte_carlo_fc(g, h.probabilities(*candidates[c]), mc_runs, mc_seed);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < 3; ++c) {
    if (out.fc_dot_values[c].mean > out.fc_dot_values[best].mean) best = c;
  }
  out.chosen = static_cast<SandwichCandidate>(best);
  out.x_sand = *candidates[best];

  const auto p_sand = h.probabilities(out.x_sand);
  if (!m_prime.empty()) out.lower_at_sand = evaluate_estimator(m_prime, p_sand, Estimator::kLower);
  if (!n_prime.empty()) out.upper_at_sand = evaluate_estimator(n_prime, p_sand, Estimator::kUpper);

  out.certificate.fc_at_upper = out.fc_dot_values[2].mean;
  if (!n_prime.empty()) {
    out.certificate.upper_at_upper =
        evaluate_estimator(n_prime, h.probabilities(out.x_upper), Estimator::kUpper).value;
  }
  out.certificate.upper_ratio = out.certificate.upper_at_upper > 0.0
                                    ? out.certificate.fc_at_upper / out.certificate.upper_at_upper
                                    : 0.0;
  out.certificate.greedy_factor = 1.0 - 1.0 / std::numbers::e - eps;
  return out;
}

}  // namespace cam
