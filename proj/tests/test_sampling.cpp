#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cam/exact_oracle.hpp"
#include "cam/sampling.hpp"
#include "support/instances.hpp"

namespace {

using cam::DiffusionModel;
using cam::Estimator;
using cam::NodeId;
using cam::SampleCollection;
using cam::SampleKind;
using cam::SocialGraph;
using cam::StrategyFunction;
using camtest::vec;

constexpr auto kIC = DiffusionModel::kIndependentCascade;
constexpr auto kLT = DiffusionModel::kLinearThreshold;
using Nodes = std::vector<NodeId>;

TEST(ReSample, SingleCertainEdge) {
  const SocialGraph g(2, {{0, 1, 1.0, 1.0}}, kIC);
  const auto agg = cam::compute_aggregates(g);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto r = cam::draw_re_sample(g, agg, s);
    EXPECT_EQ(r.first(), Nodes{0});
    EXPECT_EQ(r.second(), (Nodes{0, 1}));
    EXPECT_EQ(r.both, Nodes{0});
    EXPECT_TRUE(r.only_first.empty());
    EXPECT_EQ(r.only_second, Nodes{1});
  }
}

TEST(ReSample, BlockedEdgesGiveEndpointsOnly) {
  const SocialGraph g(3, {{0, 1, 0.0, 1.0}, {1, 2, 0.0, 2.0}}, kIC);
  const auto agg = cam::compute_aggregates(g);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto r = cam::draw_re_sample(g, agg, s);
    const auto& e = g.edge(r.edge);
    EXPECT_EQ(r.first(), Nodes{e.source});
    EXPECT_EQ(r.second(), Nodes{e.target});
    EXPECT_TRUE(r.both.empty());
  }
}

TEST(ReSample, IncreasingGainGraphEdgeIntoSharedTarget) {
  // Only (3,2) carries strength, so it is always the sampled edge.
  for (auto model : {kIC, kLT}) {
    const SocialGraph g(4, {{0, 1, 1.0, 0.0}, {1, 2, 0.0, 0.0}, {3, 2, 1.0, 1.0}}, model);
    const auto agg = cam::compute_aggregates(g);
    const auto r = cam::draw_re_sample(g, agg, 4);
    EXPECT_EQ(r.edge, 2u);
    EXPECT_EQ(r.first(), Nodes{3});
    EXPECT_EQ(r.second(), (Nodes{2, 3}));
  }
}

TEST(ReSample, PartitionIsConsistent) {
  cam::Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = camtest::random_tiny_graph(rng, trial % 2 ? kLT : kIC);
    const auto agg = cam::compute_aggregates(g);
    const auto r = cam::draw_re_sample(g, agg, trial);
    const auto& e = g.edge(r.edge);
    const auto a = r.first();
    const auto b = r.second();
    EXPECT_TRUE(std::binary_search(a.begin(), a.end(), e.source));
    EXPECT_TRUE(std::binary_search(b.begin(), b.end(), e.target));
    Nodes both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    EXPECT_EQ(both, r.both);
    for (NodeId u : r.only_first) EXPECT_FALSE(std::binary_search(b.begin(), b.end(), u));
    for (NodeId u : r.only_second) EXPECT_FALSE(std::binary_search(a.begin(), a.end(), u));
  }
}

TEST(ReSample, TraversalsShareOneRealization) {
  // Chain 0 -> 1 -> 2 sampled at (1,2): the second traversal passes through 1
  // and must see the same outcome for (0,1) as the first.
  for (auto model : {kIC, kLT}) {
    const SocialGraph g(3, {{0, 1, 0.5, 0.0}, {1, 2, 1.0, 1.0}}, model);
    const auto agg = cam::compute_aggregates(g);
    std::size_t with_zero = 0;
    for (std::uint64_t s = 0; s < 2000; ++s) {
      const auto r = cam::draw_re_sample(g, agg, cam::stream_seed(5, cam::Stream::kTest, s));
      ASSERT_TRUE(r.only_first.empty());
      ASSERT_EQ(r.only_second, Nodes{2});
      with_zero += r.both.size() == 2;
    }
    EXPECT_GT(with_zero, 800u);
    EXPECT_LT(with_zero, 1200u);
  }
}

TEST(ReSample, DeterministicParametersGiveDeterministicSets) {
  cam::Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    auto base = camtest::random_tiny_graph(rng, kIC);
    std::vector<cam::Edge> edges = base.edges();
    for (auto& e : edges) e.diffusion = rng.uniform() < 0.5 ? 0.0 : 1.0;
    const SocialGraph g(base.node_count(), edges, kIC);
    const auto world = camtest::all_worlds(g);
    ASSERT_EQ(world.size(), 1u);
    auto reverse_reach = [&](NodeId v) {
      Nodes out;
      for (NodeId u = 0; u < g.node_count(); ++u) {
        if (camtest::reach(world[0], {u}).count(v)) out.push_back(u);
      }
      return out;
    };
    const auto agg = cam::compute_aggregates(g);
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto r = cam::draw_re_sample(g, agg, s * 31 + trial);
      EXPECT_EQ(r.first(), reverse_reach(g.edge(r.edge).source));
      EXPECT_EQ(r.second(), reverse_reach(g.edge(r.edge).target));
    }
  }
}

TEST(RnSample, HandCases) {
  const SocialGraph live(3, {{0, 1, 1.0, 1.0}}, kIC);
  const SocialGraph dead(3, {{0, 1, 0.0, 1.0}}, kIC);
  cam::Rng rng(3);
  cam::ReverseSampler a(live);
  EXPECT_EQ(a.reverse_reachable(2, rng), Nodes{2});
  EXPECT_EQ(a.reverse_reachable(1, rng), (Nodes{0, 1}));
  cam::ReverseSampler b(dead);
  EXPECT_EQ(b.reverse_reachable(1, rng), Nodes{1});
  const auto agg = cam::compute_aggregates(live);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto r = cam::draw_rn_sample(live, agg, s);
    EXPECT_NE(r.root, 2u);  // w(2) = 0
    EXPECT_TRUE(std::binary_search(r.nodes.begin(), r.nodes.end(), r.root));
  }
}

TEST(Estimators, ZeroStrategyAndFullStrategy) {
  cam::Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = camtest::random_tiny_graph(rng, trial % 2 ? kLT : kIC);
    const auto agg = cam::compute_aggregates(g);
    const auto m = cam::generate_re_samples(g, agg, 200, trial, cam::Stream::kTest);
    const auto n = cam::generate_rn_samples(g, agg, 200, trial, cam::Stream::kTest);
    const auto h = StrategyFunction::personalized(g.node_count());
    const cam::StrategyVector zero(g.node_count(), 0.2);
    EXPECT_EQ(cam::estimate_fc(m, zero, h), 0.0);
    EXPECT_EQ(cam::estimate_fc_lower(m, zero, h), 0.0);
    EXPECT_EQ(cam::estimate_fc_upper(n, zero, h), 0.0);
    const auto full = vec(std::vector<std::uint32_t>(g.node_count(), 5), 0.2);
    EXPECT_NEAR(cam::estimate_fc(m, full, h), agg.total_strength, 1e-9);
    EXPECT_NEAR(cam::estimate_fc_upper(n, full, h), agg.total_node_weight, 1e-9);
  }
}

TEST(Estimators, EmptyIntersectionContributesNothingToLower) {
  SampleCollection c(SampleKind::kRandomEdge, 4.0, 2);
  c.add(cam::RESample{0, {}, {0}, {1}});
  c.build_index();
  const std::vector<double> p{1.0, 1.0};
  EXPECT_EQ(cam::evaluate_estimator(c, p, Estimator::kLower).value, 0.0);
  EXPECT_DOUBLE_EQ(cam::evaluate_estimator(c, p, Estimator::kActivity).value, 4.0);
}

TEST(Estimators, KindMismatchIsRejected) {
  SampleCollection c(SampleKind::kRandomNode, 1.0, 2);
  const std::vector<double> p{0.0, 0.0};
  EXPECT_THROW(cam::evaluate_estimator(c, p, Estimator::kActivity), cam::ConfigError);
}

TEST(Estimators, PartitionFormulaIsExactJointHitProbability) {
  cam::Rng rng(5);
  constexpr std::size_t n = 8;
  for (int trial = 0; trial < 500; ++trial) {
    Nodes a, b;
    for (NodeId u = 0; u < n; ++u) {
      if (rng.uniform() < 0.4) a.push_back(u);
      if (rng.uniform() < 0.4) b.push_back(u);
    }
    std::vector<double> p(n);
    for (double& q : p) q = rng.uniform();
    cam::RESample s;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(s.both));
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(s.only_first));
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(s.only_second));
    const double miss[3] = {cam::miss_probability(s.both, p), cam::miss_probability(s.only_first, p),
                            cam::miss_probability(s.only_second, p)};
    EXPECT_NEAR(cam::sample_value(Estimator::kActivity, miss), camtest::reference_both_hit(a, b, p),
                1e-12);
  }
}

TEST(Estimators, UnbiasedOnTinyInstances) {
  cam::Rng rng(6);
  constexpr std::size_t kTheta = 1'000'000;
  for (int trial = 0; trial < 2; ++trial) {
    const auto g = camtest::random_tiny_graph(rng, trial % 2 ? kLT : kIC, {3, 5, 6});
    const auto agg = cam::compute_aggregates(g);
    std::vector<double> p(g.node_count());
    for (double& q : p) q = rng.uniform();
    const auto m = cam::generate_re_samples(g, agg, kTheta, 10 + trial, cam::Stream::kTest);
    const auto n = cam::generate_rn_samples(g, agg, kTheta, 20 + trial, cam::Stream::kTest);
    const std::pair<Estimator, camtest::Flavor> cases[] = {
        {Estimator::kActivity, camtest::Flavor::kExact},
        {Estimator::kLower, camtest::Flavor::kLower},
        {Estimator::kUpper, camtest::Flavor::kUpper}};
    for (const auto& [est, flavor] : cases) {
      const auto& c = est == Estimator::kUpper ? n : m;
      const auto got = cam::evaluate_estimator(c, p, est);
      EXPECT_NEAR(got.value, camtest::reference_fc(g, p, flavor), 4 * got.std_error + 1e-12);
    }
  }
}

TEST(Estimators, EvaluateMatchesDirectRecomputation) {
  cam::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = camtest::random_tiny_graph(rng, trial % 2 ? kLT : kIC);
    const auto agg = cam::compute_aggregates(g);
    const auto m = cam::generate_re_samples(g, agg, 300, trial, cam::Stream::kTest);
    std::vector<double> p(g.node_count());
    for (double& q : p) q = rng.uniform();
    for (auto e : {Estimator::kActivity, Estimator::kLower}) {
      EXPECT_NEAR(cam::evaluate_estimator(m, p, e).value, camtest::reference_estimate(m, p, e), 1e-9);
    }
  }
}

// Random collection of the kind the estimator needs, on a random tiny graph.
struct Fixture {
  SocialGraph graph;
  SampleCollection samples;
};

Fixture random_fixture(cam::Rng& rng, Estimator e, std::size_t theta, camtest::TinyOptions opt = {}) {
  auto g = camtest::random_tiny_graph(rng, rng.uniform() < 0.5 ? kLT : kIC, opt);
  const auto agg = cam::compute_aggregates(g);
  const std::uint64_t seed = rng();
  auto c = e == Estimator::kUpper ? cam::generate_rn_samples(g, agg, theta, seed, cam::Stream::kTest)
                                  : cam::generate_re_samples(g, agg, theta, seed, cam::Stream::kTest);
  return {std::move(g), std::move(c)};
}

StrategyFunction random_independent_activation(cam::Rng& rng, std::size_t n, std::size_t d) {
  std::vector<cam::ActivationCurve> curves;
  for (NodeId u = 0; u < n; ++u) {
    for (std::size_t j = 0; j < d; ++j) {
      if (rng.uniform() < 0.5) curves.push_back({u, j, 0.1 + 0.9 * rng.uniform(), 0.2 + 2 * rng.uniform()});
    }
  }
  return StrategyFunction::independent_activation(n, d, curves);
}

TEST(IncrementalEstimator, GainsMatchNaiveRecomputation) {
  cam::Rng rng(8);
  const Estimator kinds[] = {Estimator::kActivity, Estimator::kLower, Estimator::kUpper};
  for (int trial = 0; trial < 1000; ++trial) {
    const Estimator e = kinds[trial % 3];
    auto fx = random_fixture(rng, e, 40);
    const std::size_t n = fx.graph.node_count();
    const bool ia = trial % 4 == 3;
    const auto h = ia ? random_independent_activation(rng, n, 1 + rng.below(3))
                      : StrategyFunction::personalized(n);
    const double t = 0.2;
    cam::IncrementalEstimator inc(fx.samples, h, e, t);
    const std::size_t steps = rng.below(8);
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t dim = rng.below(h.dimensions());
      if (!inc.can_increment(dim)) continue;
      inc.marginal_gain(rng.below(h.dimensions()));  // leave some cached gains behind
      inc.increment(dim);
    }
    const auto& x = inc.point();
    const double base = cam::evaluate_estimator(fx.samples, h.probabilities(x), e).value;
    ASSERT_NEAR(inc.value(), base, 1e-9 * (1 + base));
    for (std::size_t dim = 0; dim < h.dimensions(); ++dim) {
      const double gain = inc.marginal_gain(dim);
      if (!inc.can_increment(dim)) {
        ASSERT_EQ(gain, 0.0);
        continue;
      }
      const double naive =
          cam::evaluate_estimator(fx.samples, h.probabilities(x.incremented(dim)), e).value - base;
      ASSERT_NEAR(gain, naive, 1e-9 * (1 + std::abs(base))) << "trial " << trial << " dim " << dim;
    }
  }
}

TEST(IncrementalEstimator, NodeInNoSampleHasZeroGain) {
  SampleCollection c(SampleKind::kRandomNode, 2.0, 3);
  c.add(cam::RNSample{0, {0, 1}});
  c.build_index();
  const auto h = StrategyFunction::personalized(3);
  cam::IncrementalEstimator inc(c, h, Estimator::kUpper, 0.2);
  EXPECT_EQ(inc.marginal_gain(2), 0.0);
  EXPECT_GT(inc.marginal_gain(0), 0.0);
}

TEST(IncrementalEstimator, RequiresIndex) {
  SampleCollection c(SampleKind::kRandomNode, 2.0, 2);
  c.add(cam::RNSample{0, {0}});
  const auto h = StrategyFunction::personalized(2);
  EXPECT_THROW(cam::IncrementalEstimator(c, h, Estimator::kUpper, 0.2), cam::ConfigError);
}

TEST(IncrementalEstimator, BoundGainsShrinkAlongTrajectory) {
  cam::Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Estimator e = trial % 2 ? Estimator::kUpper : Estimator::kLower;
    auto fx = random_fixture(rng, e, 100);
    const auto h = StrategyFunction::personalized(fx.graph.node_count());
    cam::IncrementalEstimator inc(fx.samples, h, e, 0.2);
    std::vector<double> last(h.dimensions(), std::numeric_limits<double>::infinity());
    for (int step = 0; step < 12; ++step) {
      std::size_t best = 0;
      double best_gain = -1;
      for (std::size_t d = 0; d < h.dimensions(); ++d) {
        const double g = inc.marginal_gain(d);
        ASSERT_LE(g, last[d] + 1e-12);
        last[d] = g;
        if (inc.can_increment(d) && g > best_gain) {
          best_gain = g;
          best = d;
        }
      }
      if (best_gain < 0) break;
      inc.increment(best);
    }
  }
}

// x <= y and y + e_i feasible: F(x + e_i) - F(x) >= F(y + e_i) - F(y), F(x) <= F(y).
void check_dr_submodular(const SampleCollection& c, Estimator e, cam::Rng& rng, int triples) {
  const std::size_t n = c.node_count();
  const auto h = StrategyFunction::personalized(n);
  auto value = [&](const cam::StrategyVector& x) {
    return cam::evaluate_estimator(c, h.probabilities(x), e).value;
  };
  for (int k = 0; k < triples; ++k) {
    std::vector<std::uint32_t> xs(n), ys(n);
    for (std::size_t j = 0; j < n; ++j) {
      xs[j] = static_cast<std::uint32_t>(rng.below(5));
      ys[j] = xs[j] + static_cast<std::uint32_t>(rng.below(5 - xs[j]));
    }
    const std::size_t i = rng.below(n);
    const auto x = vec(xs, 0.2);
    const auto y = vec(ys, 0.2);
    ASSERT_GE(value(x.incremented(i)) - value(x), value(y.incremented(i)) - value(y) - 1e-12);
    ASSERT_LE(value(x), value(y) + 1e-12);
  }
}

TEST(Estimators, BoundEstimatorsAreDrSubmodularOnFixedCollections) {
  cam::Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Estimator e = trial % 2 ? Estimator::kUpper : Estimator::kLower;
    auto fx = random_fixture(rng, e, 200, {2, 4, 8});
    check_dr_submodular(fx.samples, e, rng, 200);
  }
}

TEST(Estimators, ActivityEstimatorCanViolateDrSubmodularity) {
  // One RE-sample whose endpoints are reached from different single nodes:
  // raising x_3 makes raising x_0 worth more.
  SampleCollection c(SampleKind::kRandomEdge, 1.0, 4);
  c.add(cam::RESample{0, {}, {0}, {3}});
  c.build_index();
  const auto h = StrategyFunction::personalized(4);
  auto value = [&](const cam::StrategyVector& x) {
    return cam::evaluate_estimator(c, h.probabilities(x), Estimator::kActivity).value;
  };
  const auto x = vec({0, 0, 0, 0}, 0.2);
  const auto y = vec({0, 0, 0, 1}, 0.2);
  const double gain_x = value(x.incremented(0)) - value(x);
  const double gain_y = value(y.incremented(0)) - value(y);
  EXPECT_EQ(gain_x, 0.0);
  EXPECT_NEAR(gain_y, 0.36 * 0.36, 1e-12);
  EXPECT_LT(gain_x, gain_y);
  EXPECT_LE(value(x), value(y));
}

TEST(SampleCollection, BinaryRoundTrip) {
  cam::Rng rng(11);
  for (auto e : {Estimator::kActivity, Estimator::kUpper}) {
    auto fx = random_fixture(rng, e, 500);
    std::stringstream buf;
    fx.samples.save(buf);
    const auto back = SampleCollection::load(buf);
    ASSERT_EQ(back.kind(), fx.samples.kind());
    ASSERT_EQ(back.size(), fx.samples.size());
    EXPECT_EQ(back.scale(), fx.samples.scale());
    EXPECT_EQ(back.node_count(), fx.samples.node_count());
    EXPECT_TRUE(back.indexed());
    for (std::size_t s = 0; s < back.size(); ++s) {
      for (std::size_t p = 0; p < back.parts_per_sample(); ++p) {
        const auto a = back.part(s, p);
        const auto b = fx.samples.part(s, p);
        ASSERT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
      }
    }
    std::stringstream again;
    back.save(again);
    EXPECT_EQ(again.str(), buf.str());
  }
}

TEST(SampleCollection, LoadRejectsCorruptInput) {
  std::stringstream junk("not a collection at all");
  EXPECT_THROW(SampleCollection::load(junk), cam::ParseError);
  SampleCollection c(SampleKind::kRandomNode, 1.0, 2);
  c.add(cam::RNSample{1, {0, 1}});
  std::stringstream buf;
  c.save(buf);
  std::string bytes = buf.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 2));
  EXPECT_THROW(SampleCollection::load(truncated), cam::ParseError);
  bytes[bytes.size() - 4] = 9;  // node id out of range
  std::stringstream bad(bytes);
  EXPECT_THROW(SampleCollection::load(bad), cam::ParseError);
}

TEST(SampleCollection, GenerationIsReproducibleAndExtensible) {
  const auto g = camtest::decreasing_gain_graph(kIC);
  const auto agg = cam::compute_aggregates(g);
  auto a = cam::generate_re_samples(g, agg, 50, 3, cam::Stream::kTest);
  cam::extend_re_samples(a, g, agg, 80, 3, cam::Stream::kTest);
  const auto b = cam::generate_re_samples(g, agg, 80, 3, cam::Stream::kTest);
  std::stringstream sa, sb;
  a.save(sa);
  b.save(sb);
  EXPECT_EQ(sa.str(), sb.str());
}

}  // namespace
