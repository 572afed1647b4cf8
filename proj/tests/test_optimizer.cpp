#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "cam/baselines.hpp"
#include "cam/exact_oracle.hpp"
#include "cam/generators.hpp"
#include "cam/greedy.hpp"
#include "cam/imm.hpp"
#include "cam/sandwich.hpp"
#include "support/instances.hpp"

namespace {

using cam::DiffusionModel;
using cam::Estimator;
using cam::ImmParams;
using cam::LatticeSpec;
using cam::NodeId;
using cam::SocialGraph;
using cam::StrategyFunction;
using camtest::vec;

constexpr auto kIC = DiffusionModel::kIndependentCascade;
constexpr auto kLT = DiffusionModel::kLinearThreshold;
const double kGreedyRatio = 1.0 - 1.0 / std::numbers::e;

/// g(x) = sum c_i * steps_i with a per-coordinate cap.
struct ModularObjective {
  std::vector<double> weights;
  std::uint32_t cap;
  std::vector<std::uint32_t> steps = std::vector<std::uint32_t>(weights.size(), 0);

  std::size_t dimensions() const { return weights.size(); }
  bool can_increment(std::size_t i) const { return steps[i] < cap; }
  double marginal_gain(std::size_t i) { return weights[i]; }
  void increment(std::size_t i) { ++steps[i]; }
  double value() const {
    double v = 0;
    for (std::size_t i = 0; i < steps.size(); ++i) v += weights[i] * steps[i];
    return v;
  }
};

TEST(Greedy, ZeroBudgetGivesZeroVector) {
  ModularObjective obj{{1.0, 2.0}, 5};
  EXPECT_TRUE(cam::lattice_greedy(obj, LatticeSpec{2, 0.2, 0.0}).is_zero());
}

TEST(Greedy, ModularObjectiveFillsBestCoordinateFirst) {
  ModularObjective obj{{1.0, 3.0, 2.0}, 100};
  const auto x = cam::lattice_greedy(obj, LatticeSpec{3, 0.2, 1.0});
  EXPECT_EQ(x.steps(), (std::vector<std::uint32_t>{0, 5, 0}));
  ModularObjective capped{{1.0, 3.0, 2.0}, 2};
  EXPECT_EQ(cam::lattice_greedy(capped, LatticeSpec{3, 0.2, 1.0}).steps(),
            (std::vector<std::uint32_t>{1, 2, 2}));
}

TEST(Greedy, TiesGoToLowestIndexAndTraceIsRecorded) {
  ModularObjective obj{{2.0, 2.0, 2.0}, 1};
  cam::GreedyTrace trace;
  const auto x = cam::lattice_greedy(obj, LatticeSpec{3, 0.5, 1.0}, &trace, "test");
  EXPECT_EQ(x.steps(), (std::vector<std::uint32_t>{1, 1, 0}));
  ASSERT_EQ(trace.size(), 2u);
  EXPECT_EQ(trace[0].dimension, 0u);
  EXPECT_EQ(trace[1].dimension, 1u);
  EXPECT_DOUBLE_EQ(trace[1].cumulative, 4.0);
  EXPECT_EQ(trace[1].phase, "test");
  EXPECT_EQ(trace[1].iteration, 2u);
}

TEST(Greedy, StopsWhenEverythingIsSaturated) {
  ModularObjective obj{{1.0, 1.0}, 1};
  EXPECT_EQ(cam::lattice_greedy(obj, LatticeSpec{2, 0.2, 2.0}).total_steps(), 2u);
}

TEST(Greedy, RatioAgainstExhaustiveOnFixedCollections) {
  cam::Rng rng(1);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = camtest::random_tiny_graph(rng, trial % 2 ? kLT : kIC, {2, 4, 8});
    const auto agg = cam::compute_aggregates(g);
    const Estimator e = trial % 4 < 2 ? Estimator::kLower : Estimator::kUpper;
    const auto c = e == Estimator::kUpper
                       ? cam::generate_rn_samples(g, agg, 200, trial, cam::Stream::kTest)
                       : cam::generate_re_samples(g, agg, 200, trial, cam::Stream::kTest);
    const auto h = StrategyFunction::personalized(g.node_count());
    const double t = 0.2;
    const LatticeSpec spec{g.node_count(), t, t * static_cast<double>(1 + rng.below(4))};
    cam::IncrementalEstimator obj(c, h, e, t);
    const auto x = cam::lattice_greedy(obj, spec);
    ASSERT_LE(x.total_steps(), spec.max_steps());
    const double got = cam::evaluate_estimator(c, h.probabilities(x), e).value;
    double best = 0.0;
    cam::for_each_lattice_point(cam::lattice_caps(h, spec), spec.max_steps(),
                                [&](const std::vector<std::uint32_t>& s) {
                                  const auto y = vec(s, t);
                                  best = std::max(best, cam::evaluate_estimator(c, h.probabilities(y), e).value);
                                });
    EXPECT_GE(got, kGreedyRatio * best - 1e-9) << "trial " << trial;
  }
}

TEST(Greedy, LazyMatchesPlainOnBoundEstimators) {
  cam::Rng rng(21);
  const cam::GeneratorKind shapes[] = {cam::GeneratorKind::kRandomDag,
                                       cam::GeneratorKind::kPreferentialAttachment,
                                       cam::GeneratorKind::kTwoCommunity};
  for (int trial = 0; trial < 36; ++trial) {
    const auto model = trial % 2 ? kLT : kIC;
    const auto g = cam::generate_graph(shapes[trial % 3], 60, 150, rng(), model);
    const auto agg = cam::compute_aggregates(g);
    const Estimator e = trial % 4 < 2 ? Estimator::kLower : Estimator::kUpper;
    auto c = e == Estimator::kUpper ? cam::generate_rn_samples(g, agg, 300, rng(), cam::Stream::kTest)
                                    : cam::generate_re_samples(g, agg, 300, rng(), cam::Stream::kTest);
    c.build_index();
    std::vector<StrategyFunction> strategies{StrategyFunction::personalized(60),
                                             StrategyFunction::characteristic(60)};
    std::vector<cam::ActivationCurve> curves;
    for (NodeId u = 0; u < 60; ++u) {
      curves.push_back({u, u % 7, 0.2 + 0.8 * rng.uniform(), 0.3 + 2 * rng.uniform()});
    }
    strategies.push_back(StrategyFunction::independent_activation(60, 7, curves));
    for (const auto& h : strategies) {
      const double t = h.dimensions() == 60 && trial % 3 == 0 ? 1.0 : 0.2;
      const LatticeSpec spec{h.dimensions(), t, t * static_cast<double>(3 + rng.below(10))};
      cam::IncrementalEstimator plain(c, h, e, t), lazy(c, h, e, t);
      cam::GreedyTrace plain_trace, lazy_trace;
      const auto a = cam::lattice_greedy(plain, spec, &plain_trace);
      const auto b = cam::lazy_lattice_greedy(lazy, spec, &lazy_trace);
      ASSERT_EQ(a.steps(), b.steps()) << "trial " << trial;
      ASSERT_EQ(plain_trace.size(), lazy_trace.size());
      for (std::size_t i = 0; i < plain_trace.size(); ++i) {
        EXPECT_NEAR(plain_trace[i].gain, lazy_trace[i].gain, 1e-12);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Sample sizes

TEST(SampleSizePlan, DoublingScheduleAndFinalSize) {
  const LatticeSpec spec{50, 0.2, 2.0};
  const auto plan = cam::sample_size_plan(1000.0, spec, ImmParams{});
  EXPECT_EQ(plan.rounds, 9u);
  EXPECT_NEAR(plan.epsilon_prime, std::sqrt(2.0) * 0.1, 1e-15);
  EXPECT_GT(plan.lambda_prime, 0.0);
  EXPECT_GT(plan.lambda_star, 0.0);
  for (std::size_t i = 1; i < plan.rounds; ++i) {
    EXPECT_DOUBLE_EQ(plan.threshold(i), 2 * plan.threshold(i + 1));
    const double ratio = static_cast<double>(plan.estimation_size(i + 1)) /
                         static_cast<double>(plan.estimation_size(i));
    EXPECT_NEAR(ratio, 2.0, 2.0 / static_cast<double>(plan.estimation_size(i)));
  }
  EXPECT_GT(plan.final_size(10.0), plan.final_size(20.0));
  EXPECT_EQ(plan.final_size(7.0), static_cast<std::size_t>(std::ceil(plan.lambda_star / 7.0)));
  // min(K ln d, d ln K) with K = 10, d = 50.
  EXPECT_NEAR(plan.ln_combinations, 10 * std::log(50.0), 1e-12);
}

TEST(SampleSizePlan, RejectsBadParameters) {
  const LatticeSpec spec{2, 0.2, 1.0};
  EXPECT_THROW(cam::sample_size_plan(10.0, spec, ImmParams{0.0, 1.0}), cam::ConfigError);
  EXPECT_THROW(cam::sample_size_plan(10.0, spec, ImmParams{0.1, 0.0}), cam::ConfigError);
  EXPECT_THROW(cam::sample_size_plan(0.0, spec, ImmParams{}), cam::DegenerateInstanceError);
}

SocialGraph heavy_edge() { return SocialGraph(2, {{0, 1, 1.0, 4.0}}, kIC); }

TEST(SamplingLb, AllMassReachableTriggersInFirstRound) {
  const auto g = heavy_edge();
  const auto agg = cam::compute_aggregates(g);
  const auto h = StrategyFunction::personalized(2);
  const LatticeSpec spec{2, 0.2, 1.0};
  for (const auto& out : {cam::sampling_lb(g, agg, h, spec, {}, 3), cam::sampling_ub(g, agg, h, spec, {}, 3)}) {
    EXPECT_TRUE(out.triggered);
    EXPECT_EQ(out.rounds_used, 1u);
    EXPECT_NEAR(out.lower_bound, 4.0 / (1 + out.plan.epsilon_prime), 1e-9);
    EXPECT_EQ(out.samples.size(), out.plan.final_size(out.lower_bound));
    EXPECT_TRUE(out.samples.indexed());
  }
}

TEST(SamplingLb, FinalCollectionIsFreshAndSizedByLambdaStar) {
  cam::Rng rng(2);
  for (int trial = 0; trial < 6; ++trial) {
    const auto g = camtest::random_tiny_graph(rng, trial % 2 ? kLT : kIC);
    const auto agg = cam::compute_aggregates(g);
    const auto h = StrategyFunction::personalized(g.node_count());
    const LatticeSpec spec{g.node_count(), 0.2, 1.0};
    const ImmParams params{0.3, 1.0};
    const auto out = cam::sampling_lb(g, agg, h, spec, params, 11);
    EXPECT_EQ(out.samples.size(), out.plan.final_size(out.lower_bound));
    const auto fresh = cam::generate_re_samples(g, agg, out.samples.size(), 11, cam::Stream::kLowerFinal);
    std::stringstream a, b;
    out.samples.save(a);
    fresh.save(b);
    EXPECT_EQ(a.str(), b.str());
  }
}

TEST(SamplingLb, FallsBackWhenThresholdNeverReached) {
  const auto g = heavy_edge();
  const auto agg = cam::compute_aggregates(g);
  const auto h = StrategyFunction::personalized(2);
  const auto out = cam::sampling_lb(g, agg, h, LatticeSpec{2, 0.2, 0.2}, {}, 3);
  EXPECT_FALSE(out.triggered);
  EXPECT_DOUBLE_EQ(out.lower_bound, out.plan.threshold(out.plan.rounds));
  EXPECT_EQ(out.samples.size(), out.plan.final_size(out.lower_bound));
}

TEST(SamplingLb, SampleLimitIsEnforced) {
  const auto g = heavy_edge();
  const auto agg = cam::compute_aggregates(g);
  const auto h = StrategyFunction::personalized(2);
  ImmParams params;
  params.max_samples = 10;
  EXPECT_THROW(cam::sampling_lb(g, agg, h, LatticeSpec{2, 0.2, 1.0}, params, 3), cam::GuardExceededError);
}

// ---------------------------------------------------------------------------
// Greedy on the sampled bounds

TEST(ImmBounds, ZeroBudget) {
  const auto g = camtest::decreasing_gain_graph(kIC);
  const auto agg = cam::compute_aggregates(g);
  const auto h = StrategyFunction::personalized(4);
  const LatticeSpec spec{4, 0.2, 0.0};
  EXPECT_TRUE(cam::imm_lb(g, agg, h, spec, {}, 1).x.is_zero());
  EXPECT_TRUE(cam::imm_ub(g, agg, h, spec, {}, 1).x.is_zero());
}

TEST(ImmBounds, DeterministicInstanceIsSeedIndependent) {
  for (auto model : {kIC, kLT}) {
    const auto g = camtest::decreasing_gain_graph(model);
    const auto agg = cam::compute_aggregates(g);
    const auto h = StrategyFunction::personalized(4);
    const LatticeSpec spec{4, 0.2, 1.0};
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto lb = cam::imm_lb(g, agg, h, spec, {}, seed);
      const auto ub = cam::imm_ub(g, agg, h, spec, {}, seed);
      EXPECT_DOUBLE_EQ(cam::fc_lower_exact(g, lb.x, h), 3.0);
      EXPECT_DOUBLE_EQ(cam::fc_upper_exact(g, ub.x, h), 3.0);
      EXPECT_EQ(lb.x.steps(), (std::vector<std::uint32_t>{0, 5, 0, 0}));
    }
  }
}

TEST(ImmBounds, LowerBoundApproximationOnTinyInstances) {
  cam::Rng rng(3);
  const ImmParams params{0.1, 1.0};
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = camtest::random_tiny_graph(rng, trial % 2 ? kLT : kIC, {2, 5, 6});
    const auto agg = cam::compute_aggregates(g);
    const auto h = StrategyFunction::personalized(g.node_count());
    const LatticeSpec spec{g.node_count(), 0.2, 0.6};
    const auto lb = cam::imm_lb(g, agg, h, spec, params, trial);
    const auto ub = cam::imm_ub(g, agg, h, spec, params, trial);
    const auto lower_opt = cam::lattice_opt_exact(g, h, spec, cam::BenefitKind::kLower);
    const auto upper_opt = cam::lattice_opt_exact(g, h, spec, cam::BenefitKind::kUpper);
    const double factor = kGreedyRatio - params.epsilon;
    EXPECT_GE(cam::fc_lower_exact(g, lb.x, h), factor * lower_opt.value - 1e-9) << trial;
    EXPECT_GE(cam::fc_upper_exact(g, ub.x, h), factor * upper_opt.value - 1e-9) << trial;
    EXPECT_LE(lb.x.total_steps(), spec.max_steps());
  }
}

// ---------------------------------------------------------------------------
// Sandwich

TEST(Sandwich, DisjointEdgesAllCandidatesReachOptimum) {
  const SocialGraph g(4, {{0, 1, 1.0, 2.0}, {2, 3, 1.0, 1.0}}, kIC);
  const auto agg = cam::compute_aggregates(g);
  const auto h = StrategyFunction::personalized(4);
  const LatticeSpec spec{4, 0.2, 1.2};
  const auto opt = cam::lattice_opt_exact(g, h, spec, cam::BenefitKind::kExact);
  EXPECT_NEAR(opt.value, 2 * 0.96 + 0.64, 1e-12);
  const auto s = cam::sandwich(g, agg, h, spec, {}, 500, 5);
  for (const auto* x : {&s.x_lower, &s.x_mid, &s.x_upper, &s.x_sand}) {
    EXPECT_EQ(x->steps(), (std::vector<std::uint32_t>{4, 0, 2, 0}));
    EXPECT_NEAR(cam::fc_exact(g, *x, h), opt.value, 1e-9);
  }
  EXPECT_EQ(s.certificate.label, "data-dependent, partially reported");
  EXPECT_NEAR(s.certificate.greedy_factor, kGreedyRatio - 0.1, 1e-12);
}

TEST(Sandwich, IncreasingGainCharacteristicReachesThree) {
  for (auto model : {kIC, kLT}) {
    const auto g = camtest::increasing_gain_graph(model);
    const auto agg = cam::compute_aggregates(g);
    const auto h = StrategyFunction::characteristic(4);
    const auto s = cam::sandwich(g, agg, h, LatticeSpec{4, 1.0, 2.0}, {}, 200, 9);
    EXPECT_DOUBLE_EQ(cam::fc_exact(g, s.x_sand, h), 3.0);
    EXPECT_DOUBLE_EQ(s.score().mean, 3.0);
  }
}

TEST(Sandwich, ChoosesBestScoredCandidateAndStaysBetweenBounds) {
  cam::Rng rng(4);
  for (int trial = 0; trial < 8; ++trial) {
    const auto g = camtest::random_tiny_graph(rng, trial % 2 ? kLT : kIC);
    const auto agg = cam::compute_aggregates(g);
    const auto h = StrategyFunction::personalized(g.node_count());
    const LatticeSpec spec{g.node_count(), 0.2, 0.8};
    const auto s = cam::sandwich(g, agg, h, spec, ImmParams{0.2, 1.0}, 2000, trial);
    for (const auto& v : s.fc_dot_values) EXPECT_LE(v.mean, s.score().mean);
    const double exact_sand = cam::fc_exact(g, s.x_sand, h);
    double band = 0;
    for (const auto& v : s.fc_dot_values) band = std::max(band, 3 * v.std_error);
    for (const auto* x : {&s.x_lower, &s.x_mid, &s.x_upper}) {
      EXPECT_GE(exact_sand, cam::fc_exact(g, *x, h) - 2 * band - 1e-9);
    }
    EXPECT_LE(s.lower_at_sand.value, s.score().mean + 3 * (s.score().std_error + s.lower_at_sand.std_error) + 1e-9);
    EXPECT_LE(s.score().mean, s.upper_at_sand.value + 3 * (s.score().std_error + s.upper_at_sand.std_error) + 1e-9);
    EXPECT_GT(s.lower_samples, 0u);
    EXPECT_GT(s.upper_samples, 0u);
  }
}

TEST(Sandwich, RequiresPositiveRunCount) {
  const auto g = heavy_edge();
  const auto agg = cam::compute_aggregates(g);
  EXPECT_THROW(cam::sandwich(g, agg, StrategyFunction::personalized(2), LatticeSpec{2, 0.2, 1.0}, {}, 0, 1),
               cam::ConfigError);
}

TEST(Sandwich, IsDeterministicGivenSeed) {
  const auto g = camtest::decreasing_gain_graph(kLT);
  const auto agg = cam::compute_aggregates(g);
  const auto h = StrategyFunction::personalized(4);
  const LatticeSpec spec{4, 0.2, 0.6};
  const auto a = cam::sandwich(g, agg, h, spec, {}, 300, 21);
  const auto b = cam::sandwich(g, agg, h, spec, {}, 300, 21);
  EXPECT_EQ(a.x_sand, b.x_sand);
  EXPECT_EQ(a.score().mean, b.score().mean);
  EXPECT_EQ(a.lower_samples, b.lower_samples);
}

// ---------------------------------------------------------------------------
// Baselines

SocialGraph star() {
  return SocialGraph(5, {{0, 1, 0.5, 1}, {0, 2, 0.5, 1}, {0, 3, 0.5, 1}, {0, 4, 0.5, 1}, {1, 2, 0.5, 1}}, kIC);
}

TEST(Baselines, MaxDegreeStartsAtStarCenter) {
  const auto h = StrategyFunction::personalized(5);
  const auto x = cam::baseline_max_degree(star(), h, LatticeSpec{5, 0.2, 1.4});
  EXPECT_EQ(x.steps(), (std::vector<std::uint32_t>{5, 2, 0, 0, 0}));
}

TEST(Baselines, MaxDegreeSaturatesWithLargeBudget) {
  const auto h = StrategyFunction::personalized(5);
  const auto x = cam::baseline_max_degree(star(), h, LatticeSpec{5, 0.2, 10.0});
  EXPECT_EQ(x.steps(), std::vector<std::uint32_t>(5, 5));
}

TEST(Baselines, RandomIsReproducibleAndFeasible) {
  const auto h = StrategyFunction::personalized(5);
  const LatticeSpec spec{5, 0.2, 2.0};
  const auto a = cam::baseline_random(h, spec, 17);
  EXPECT_EQ(a, cam::baseline_random(h, spec, 17));
  EXPECT_EQ(a.total_steps(), 10u);
  for (auto s : a.steps()) EXPECT_LE(s, 5u);
  EXPECT_TRUE(cam::baseline_random(h, LatticeSpec{5, 0.2, 0.0}, 17).is_zero());
  const auto all = cam::baseline_random(h, LatticeSpec{5, 0.2, 9.0}, 3);
  EXPECT_EQ(all.steps(), std::vector<std::uint32_t>(5, 5));
}

TEST(Baselines, InfluenceIgnoresStrengths) {
  // The hub reaches more nodes but its edges carry no benefit.
  const SocialGraph g(7, {{0, 1, 1, 0}, {0, 2, 1, 0}, {0, 3, 1, 0}, {0, 4, 1, 0}, {5, 6, 1, 1}}, kIC);
  const auto agg = cam::compute_aggregates(g);
  const auto h = StrategyFunction::characteristic(7);
  const LatticeSpec spec{7, 1.0, 1.0};
  const auto im = cam::baseline_im(g, agg, h, spec, {}, 1);
  const auto s = cam::sandwich(g, agg, h, spec, {}, 200, 1);
  EXPECT_EQ(im.x.steps()[0], 1u);
  EXPECT_GT(im.samples, 0u);
  EXPECT_EQ(cam::fc_exact(g, im.x, h), 0.0);
  EXPECT_EQ(cam::fc_exact(g, s.x_sand, h), 1.0);
  EXPECT_TRUE(cam::baseline_im(g, agg, h, LatticeSpec{7, 1.0, 0.0}, {}, 1).x.is_zero());
}

TEST(Baselines, InfluenceMatchesActivityOnSymmetricGraph) {
  for (auto model : {kIC, kLT}) {
    const SocialGraph g(4, {{0, 1, 0.5, 1}, {1, 2, 0.5, 1}, {2, 3, 0.5, 1}, {3, 0, 0.5, 1}}, model);
    const auto agg = cam::compute_aggregates(g);
    const auto h = StrategyFunction::characteristic(4);
    const LatticeSpec spec{4, 1.0, 1.0};
    const auto im = cam::baseline_im(g, agg, h, spec, {}, 2);
    const auto s = cam::sandwich(g, agg, h, spec, {}, 200, 2);
    EXPECT_NEAR(cam::fc_exact(g, im.x, h), cam::fc_exact(g, s.x_mid, h), 1e-12);
  }
}

TEST(Baselines, MaxDegreeRanksIndependentActivationDimensions) {
  const auto h = StrategyFunction::independent_activation(
      5, 2, {{1, 0, 0.5, 1.0}, {0, 1, 0.5, 1.0}, {2, 1, 0.5, 1.0}});
  const auto ranking = cam::degree_ranking(star(), h);
  EXPECT_EQ(ranking, (std::vector<std::size_t>{1, 0}));
}

}  // namespace
