#pragma once

// Live-edge realizations, forward diffusion, the constructed graph with a
// virtual seed layer, and Monte Carlo estimation of f_c.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "cam/error.hpp"
#include "cam/graph.hpp"
#include "cam/rng.hpp"
#include "cam/strategy.hpp"

namespace cam {

/// A live-edge subgraph g of G.
class Realization {
 public:
  Realization() = default;

  /// `live` must be a subset of the graph's edge ids.
  Realization(const SocialGraph& g, std::vector<EdgeId> live, std::uint64_t seed = 0)
      : live_edges_(std::move(live)), seed_(seed) {
    std::sort(live_edges_.begin(), live_edges_.end());
    offsets_.assign(g.node_count() + 1, 0);
    for (EdgeId e : live_edges_) {
      if (e >= g.edge_count()) throw ValidationError("live edge id out of range");
      ++offsets_[g.edge(e).source + 1];
    }
    for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
    out_.resize(live_edges_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (EdgeId e : live_edges_) out_[fill[g.edge(e).source]++] = e;
  }

  const std::vector<EdgeId>& live_edges() const noexcept { return live_edges_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::span<const EdgeId> live_out(NodeId u) const {
    return {out_.data() + offsets_[u], out_.data() + offsets_[u + 1]};
  }

  bool is_live(EdgeId e) const {
    return std::binary_search(live_edges_.begin(), live_edges_.end(), e);
  }

  friend bool operator==(const Realization& a, const Realization& b) {
    return a.live_edges_ == b.live_edges_;
  }

 private:
  std::vector<EdgeId> live_edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<EdgeId> out_;
  std::uint64_t seed_ = 0;
};

/// Index into `in_edges(v)` chosen by one uniform draw under LT, or -1 for none.
inline std::int64_t choose_live_in_edge(const SocialGraph& g, NodeId v, double u) {
  double cumulative = 0.0;
  const auto in = g.in_edges(v);
  for (std::size_t i = 0; i < in.size(); ++i) {
    cumulative += g.edge(in[i]).diffusion;
    if (u < cumulative) return static_cast<std::int64_t>(i);
  }
  return -1;
}

/// IC: every edge live independently with probability p_uv, drawn in edge-id order.
/// LT: every node, in id order, keeps at most one in-edge; (u,v) with probability b_uv.
inline Realization sample_realization(const SocialGraph& g, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EdgeId> live;
  if (g.model() == DiffusionModel::kIndependentCascade) {
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      if (rng.bernoulli(g.edge(e).diffusion)) live.push_back(e);
    }
  } else {
    for (NodeId v = 0; v < g.node_count(); ++v) {
      const std::int64_t pick = choose_live_in_edge(g, v, rng.uniform());
      if (pick >= 0) live.push_back(g.in_edges(v)[static_cast<std::size_t>(pick)]);
    }
  }
  return Realization(g, std::move(live), seed);
}

/// I(S): nodes reachable from `seeds` over live edges, sorted.
inline std::vector<NodeId> forward_diffuse(const SocialGraph& g, const Realization& r,
                                           std::span<const NodeId> seeds) {
  std::vector<char> active(g.node_count(), 0);
  std::vector<NodeId> queue;
  for (NodeId s : seeds) {
    if (s >= g.node_count()) throw ValidationError("seed node out of range");
    if (!active[s]) {
      active[s] = 1;
      queue.push_back(s);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (EdgeId e : r.live_out(queue[head])) {
      const NodeId v = g.edge(e).target;
      if (!active[v]) {
        active[v] = 1;
        queue.push_back(v);
      }
    }
  }
  std::sort(queue.begin(), queue.end());
  return queue;
}

/// Sum of A_uv over edges whose endpoints are both in `active`.
inline double activity_benefit(const SocialGraph& g, std::span<const NodeId> active) {
  std::vector<char> in_set(g.node_count(), 0);
  for (NodeId u : active) in_set.at(u) = 1;
  double total = 0.0;
  for (const Edge& e : g.edges()) {
    if (in_set[e.source] && in_set[e.target]) total += e.strength;
  }
  return total;
}

/// G plus, for every node u, a virtual node ~u and edge (~u, u) carrying
/// h_u(x) with zero activity strength.
class ConstructedGraph {
 public:
  ConstructedGraph(const SocialGraph& base, std::vector<double> seed_probabilities)
      : base_(&base), seed_probabilities_(std::move(seed_probabilities)) {
    if (seed_probabilities_.size() != base.node_count()) {
      throw ConfigError("one seed probability per node required");
    }
  }

  const SocialGraph& base() const noexcept { return *base_; }
  std::size_t virtual_node_count() const noexcept { return base_->node_count(); }

  /// Parameter of the virtual edge (~u, u): h_u(x).
  double virtual_edge_param(NodeId u) const { return seed_probabilities_.at(u); }
  const std::vector<double>& seed_probabilities() const noexcept { return seed_probabilities_; }

  /// Id of ~u in the materialized graph.
  NodeId virtual_node(NodeId u) const { return static_cast<NodeId>(base_->node_count() + u); }

  std::vector<NodeId> virtual_nodes() const {
    std::vector<NodeId> out(base_->node_count());
    for (NodeId u = 0; u < out.size(); ++u) out[u] = virtual_node(u);
    return out;
  }

  /// Explicit 2n-node graph. Edge ids 0..m-1 are the original edges, m+u is (~u, u).
  ///
  /// Under LT the original in-weights of u are scaled by 1 - h_u(x) so that
  /// the in-weight sum stays within 1 and ~u wins u's live-edge choice with
  /// probability h_u(x). A seed's own in-edge never affects the active set, so
  /// this gives the same active-set distribution as seeding u independently.
  SocialGraph materialize() const {
    const SocialGraph& g = *base_;
    const std::size_t n = g.node_count();
    std::vector<Edge> edges = g.edges();
    if (g.model() == DiffusionModel::kLinearThreshold) {
      for (Edge& e : edges) e.diffusion *= 1.0 - seed_probabilities_[e.target];
    }
    for (NodeId u = 0; u < n; ++u) {
      edges.push_back(Edge{virtual_node(u), u, seed_probabilities_[u], 0.0});
    }
    return SocialGraph(2 * n, std::move(edges), g.model());
  }

 private:
  const SocialGraph* base_;
  std::vector<double> seed_probabilities_;
};

inline ConstructedGraph build_constructed_graph(const SocialGraph& g, const StrategyVector& x,
                                                const StrategyFunction& h) {
  if (h.node_count() != g.node_count()) throw ConfigError("strategy function node count mismatch");
  return ConstructedGraph(g, h.probabilities(x));
}

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t runs = 0;
};

/// One forward simulation on the constructed graph, sampling coin flips on
/// first touch. Reusable scratch; not thread-safe.
class ForwardSimulator {
 public:
  explicit ForwardSimulator(const SocialGraph& g)
      : g_(&g), stamp_(g.node_count(), 0), choice_stamp_(g.node_count(), 0),
        choice_(g.node_count(), -1) {}

  /// Seeds every node u with probability seed_probabilities[u] (one draw per
  /// node, in id order), diffuses, and returns the activity benefit.
  double run(std::span<const double> seed_probabilities, Rng& rng) {
    const SocialGraph& g = *g_;
    next_epoch();
    queue_.clear();
    for (NodeId u = 0; u < g.node_count(); ++u) {
      if (rng.bernoulli(seed_probabilities[u])) activate(u);
    }
    const bool ic = g.model() == DiffusionModel::kIndependentCascade;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const NodeId u = queue_[head];
      for (EdgeId e : g.out_edges(u)) {
        const NodeId v = g.edge(e).target;
        if (stamp_[v] == epoch_) continue;
        if (ic) {
          if (rng.bernoulli(g.edge(e).diffusion)) activate(v);
        } else {
          if (choice_stamp_[v] != epoch_) {
            choice_stamp_[v] = epoch_;
            const std::int64_t pick = choose_live_in_edge(g, v, rng.uniform());
            choice_[v] = pick < 0 ? -1 : static_cast<std::int64_t>(g.in_edges(v)[pick]);
          }
          if (choice_[v] == static_cast<std::int64_t>(e)) activate(v);
        }
      }
    }
    double benefit = 0.0;
    for (NodeId u : queue_) {
      for (EdgeId e : g.out_edges(u)) {
        if (stamp_[g.edge(e).target] == epoch_) benefit += g.edge(e).strength;
      }
    }
    return benefit;
  }

  /// Nodes activated by the most recent run, in activation order.
  const std::vector<NodeId>& last_active() const noexcept { return queue_; }

 private:
  void next_epoch() {
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      std::fill(choice_stamp_.begin(), choice_stamp_.end(), 0);
      epoch_ = 1;
    }
  }

  void activate(NodeId v) {
    stamp_[v] = epoch_;
    queue_.push_back(v);
  }

  const SocialGraph* g_;
  std::uint32_t epoch_ = 0;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::uint32_t> choice_stamp_;
  std::vector<std::int64_t> choice_;
  std::vector<NodeId> queue_;
};

/// Mean and standard error of the activity benefit over `runs` independent
/// simulations. Simulation i draws from stream (seed, kMonteCarlo, i), so two
/// calls with the same seed use common random numbers.
inline McEstimate monte_carlo_fc(const SocialGraph& g, std::span<const double> seed_probabilities,
                                 std::size_t runs, std::uint64_t seed) {
  if (runs == 0) throw ConfigError("Monte Carlo needs at least one simulation");
  if (seed_probabilities.size() != g.node_count()) {
    throw ConfigError("one seed probability per node required");
  }
  ForwardSimulator sim(g);
  // Welford accumulation.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < runs; ++i) {
    Rng rng(stream_seed(seed, Stream::kMonteCarlo, i));
    const double value = sim.run(seed_probabilities, rng);
    const double delta = value - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (value - mean);
  }
  McEstimate out;
  out.mean = mean;
  out.runs = runs;
  if (runs > 1) {
    const double variance = std::max(0.0, m2 / static_cast<double>(runs - 1));
    out.std_error = std::sqrt(variance / static_cast<double>(runs));
  }
  return out;
}

inline McEstimate monte_carlo_fc(const SocialGraph& g, const StrategyVector& x,
                                 const StrategyFunction& h, std::size_t runs, std::uint64_t seed) {
  const auto p = build_constructed_graph(g, x, h).seed_probabilities();
  return monte_carlo_fc(g, p, runs, seed);
}

/// alpha = sum A_uv and beta = sum h_u h_v A_uv, the Hoeffding range and the
/// lower bound on f_c.
struct HoeffdingSums {
  double alpha = 0.0;
  double beta = 0.0;
};

inline HoeffdingSums hoeffding_sums(const SocialGraph& g, std::span<const double> p) {
  HoeffdingSums s;
  for (const Edge& e : g.edges()) {
    s.alpha += e.strength;
    s.beta += p[e.source] * p[e.target] * e.strength;
  }
  return s;
}

/// ceil(alpha^2 ln(2/delta) / (2 gamma^2 beta^2)).
inline std::uint64_t required_simulations(double gamma, double delta, double alpha_sum,
                                          double beta_sum) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(alpha_sum >= 0.0)) throw ConfigError("alpha must be nonnegative");
  if (!(beta_sum > 0.0)) {
    throw DegenerateInstanceError(
        "beta = sum h_u h_v A_uv is zero; the Hoeffding sample size is unbounded");
  }
  const double ratio = alpha_sum / beta_sum;
  const double r = ratio * ratio * std::log(2.0 / delta) / (2.0 * gamma * gamma);
  // Guard against 184.00000000000003-style round-up of exact integers.
  const double rounded = std::round(r);
  if (std::abs(r - rounded) < 1e-9 * std::max(1.0, r)) return static_cast<std::uint64_t>(rounded);
  return static_cast<std::uint64_t>(std::ceil(r));
}

}  // namespace cam
