#pragma once

// Brute-force ground truth for tiny instances: exact f_d, f_c and their
// lower/upper bounds by enumerating every realization and every seed set,
// plus exhaustive optimization over the feasible lattice.

#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cam/error.hpp"
#include "cam/graph.hpp"
#include "cam/strategy.hpp"

namespace cam {

struct TinyInstanceGuard {
  std::size_t max_edges = 12;
  std::size_t max_nodes = 10;
  std::size_t max_lattice_points = 1'000'000;

  void check(const SocialGraph& g) const {
    if (g.node_count() > max_nodes || g.node_count() > 63) {
      throw GuardExceededError("exact oracle: " + std::to_string(g.node_count()) +
                               " nodes exceeds the guard of " + std::to_string(max_nodes));
    }
    if (g.edge_count() > max_edges) {
      throw GuardExceededError("exact oracle: " + std::to_string(g.edge_count()) +
                               " edges exceeds the guard of " + std::to_string(max_edges));
    }
  }
};

/// Which per-realization benefit is averaged:
///   kExact  edges with both endpoints in I(S)
///   kLower  edges with both endpoints reached from one common seed
///   kUpper  sum of w(u) over active u
enum class BenefitKind { kExact, kLower, kUpper };

inline std::string_view to_string(BenefitKind kind) {
  switch (kind) {
    case BenefitKind::kExact: return "fc";
    case BenefitKind::kLower: return "lower";
    case BenefitKind::kUpper: return "upper";
  }
  return "?";
}

class KahanSum {
 public:
  void add(double x) noexcept {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const noexcept { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

namespace detail {

using NodeMask = std::uint64_t;

/// Calls visit(probability, live) for every realization with nonzero
/// probability; `live[e]` flags live edges. Deterministic edges (p in {0,1})
/// under IC and zero-probability LT choices are not branched on.
template <class Visit>
void for_each_realization(const SocialGraph& g, Visit&& visit) {
  std::vector<char> live(g.edge_count(), 0);
  if (g.model() == DiffusionModel::kIndependentCascade) {
    std::vector<EdgeId> uncertain;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      const double p = g.edge(e).diffusion;
      if (p >= 1.0) live[e] = 1;
      else if (p > 0.0) uncertain.push_back(e);
    }
    if (uncertain.size() > 40) throw GuardExceededError("too many uncertain edges");
    const std::uint64_t count = std::uint64_t{1} << uncertain.size();
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      double prob = 1.0;
      for (std::size_t i = 0; i < uncertain.size(); ++i) {
        const bool on = (mask >> i) & 1U;
        const double p = g.edge(uncertain[i]).diffusion;
        live[uncertain[i]] = on;
        prob *= on ? p : 1.0 - p;
      }
      visit(prob, live);
    }
    return;
  }

  // LT: product over nodes of {one in-edge, none}.
  struct Choice {
    std::int64_t edge;
    double prob;
  };
  std::vector<std::vector<Choice>> options(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    double sum = 0.0;
    for (EdgeId e : g.in_edges(v)) {
      const double b = g.edge(e).diffusion;
      sum += b;
      if (b > 0.0) options[v].push_back({static_cast<std::int64_t>(e), b});
    }
    const double none = 1.0 - sum;
    if (none > 1e-15) options[v].push_back({-1, none});
    if (options[v].empty()) options[v].push_back({-1, 1.0});
  }
  std::vector<std::size_t> pick(g.node_count(), 0);
  while (true) {
    double prob = 1.0;
    std::fill(live.begin(), live.end(), 0);
    for (NodeId v = 0; v < g.node_count(); ++v) {
      const Choice& c = options[v][pick[v]];
      prob *= c.prob;
      if (c.edge >= 0) live[static_cast<std::size_t>(c.edge)] = 1;
    }
    visit(prob, live);
    std::size_t v = 0;
    while (v < pick.size()) {
      if (++pick[v] < options[v].size()) break;
      pick[v] = 0;
      ++v;
    }
    if (v == pick.size()) break;
  }
}

/// descendants[u]: nodes reachable from u over live edges (u included).
inline std::vector<NodeMask> descendants(const SocialGraph& g, const std::vector<char>& live) {
  const std::size_t n = g.node_count();
  std::vector<NodeMask> desc(n, 0);
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < n; ++s) {
    NodeMask seen = NodeMask{1} << s;
    stack.assign(1, s);
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (EdgeId e : g.out_edges(u)) {
        if (!live[e]) continue;
        const NodeId v = g.edge(e).target;
        if (!(seen >> v & 1U)) {
          seen |= NodeMask{1} << v;
          stack.push_back(v);
        }
      }
    }
    desc[s] = seen;
  }
  return desc;
}

inline NodeMask to_mask(std::span<const NodeId> nodes, std::size_t n) {
  NodeMask mask = 0;
  for (NodeId u : nodes) {
    if (u >= n) throw ValidationError("seed node out of range");
    mask |= NodeMask{1} << u;
  }
  return mask;
}

/// Benefit of seed mask S in one realization.
inline double realization_benefit(const SocialGraph& g, BenefitKind kind,
                                  const std::vector<NodeMask>& desc,
                                  const std::vector<double>& weights, NodeMask seeds) {
  NodeMask active = 0;
  for (NodeMask s = seeds; s; s &= s - 1) active |= desc[std::countr_zero(s)];
  double total = 0.0;
  switch (kind) {
    case BenefitKind::kExact:
      for (const Edge& e : g.edges()) {
        if ((active >> e.source & 1U) && (active >> e.target & 1U)) total += e.strength;
      }
      break;
    case BenefitKind::kLower:
      for (const Edge& e : g.edges()) {
        for (NodeMask s = seeds; s; s &= s - 1) {
          const NodeMask reach = desc[std::countr_zero(s)];
          if ((reach >> e.source & 1U) && (reach >> e.target & 1U)) {
            total += e.strength;
            break;
          }
        }
      }
      break;
    case BenefitKind::kUpper:
      for (NodeMask a = active; a; a &= a - 1) total += weights[std::countr_zero(a)];
      break;
  }
  return total;
}

}  // namespace detail

/// Exact expected benefit of every seed set S ⊆ V, indexed by bitmask.
class SetFunctionTable {
 public:
  SetFunctionTable() = default;
  SetFunctionTable(std::size_t node_count, std::vector<double> values)
      : node_count_(node_count), values_(std::move(values)) {}

  std::size_t node_count() const noexcept { return node_count_; }
  double operator[](std::uint64_t mask) const { return values_[mask]; }
  double at(std::span<const NodeId> seeds) const {
    return values_[detail::to_mask(seeds, node_count_)];
  }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t node_count_ = 0;
  std::vector<double> values_;
};

inline SetFunctionTable set_function_table(const SocialGraph& g, BenefitKind kind,
                                           const TinyInstanceGuard& guard = {}) {
  guard.check(g);
  const std::size_t n = g.node_count();
  const std::uint64_t subsets = std::uint64_t{1} << n;
  const auto weights = node_weights(g);
  std::vector<KahanSum> sums(subsets);
  std::vector<detail::NodeMask> active(subsets, 0);
  detail::for_each_realization(g, [&](double prob, const std::vector<char>& live) {
    const auto desc = detail::descendants(g, live);
    for (std::uint64_t s = 1; s < subsets; ++s) {
      const std::uint64_t low = s & (~s + 1);
      active[s] = active[s ^ low] | desc[std::countr_zero(low)];
      double value = 0.0;
      if (kind == BenefitKind::kExact) {
        for (const Edge& e : g.edges()) {
          if ((active[s] >> e.source & 1U) && (active[s] >> e.target & 1U)) value += e.strength;
        }
      } else {
        value = detail::realization_benefit(g, kind, desc, weights, s);
      }
      sums[s].add(prob * value);
    }
  });
  std::vector<double> values(subsets, 0.0);
  for (std::uint64_t s = 0; s < subsets; ++s) values[s] = sums[s].value();
  return SetFunctionTable(n, std::move(values));
}

/// Exact expected benefit of a single seed set; cheaper than a full table and
/// usable on graphs up to 63 nodes as long as the guard allows.
inline double set_function_value(const SocialGraph& g, BenefitKind kind,
                                 std::span<const NodeId> seeds,
                                 const TinyInstanceGuard& guard = {}) {
  guard.check(g);
  const auto mask = detail::to_mask(seeds, g.node_count());
  const auto weights = node_weights(g);
  KahanSum sum;
  detail::for_each_realization(g, [&](double prob, const std::vector<char>& live) {
    const auto desc = detail::descendants(g, live);
    sum.add(prob * detail::realization_benefit(g, kind, desc, weights, mask));
  });
  return sum.value();
}

inline double fd_exact(const SocialGraph& g, std::span<const NodeId> seeds,
                       const TinyInstanceGuard& guard = {}) {
  return set_function_value(g, BenefitKind::kExact, seeds, guard);
}
inline double fd_lower_exact(const SocialGraph& g, std::span<const NodeId> seeds,
                             const TinyInstanceGuard& guard = {}) {
  return set_function_value(g, BenefitKind::kLower, seeds, guard);
}
inline double fd_upper_exact(const SocialGraph& g, std::span<const NodeId> seeds,
                             const TinyInstanceGuard& guard = {}) {
  return set_function_value(g, BenefitKind::kUpper, seeds, guard);
}

/// Pr[S | x] for every S, indexed by bitmask.
inline std::vector<double> seed_set_distribution(std::span<const double> p) {
  std::vector<double> dist{1.0};
  for (std::size_t u = 0; u < p.size(); ++u) {
    const std::size_t half = dist.size();
    dist.resize(2 * half);
    for (std::size_t s = 0; s < half; ++s) {
      dist[s + half] = dist[s] * p[u];
      dist[s] *= 1.0 - p[u];
    }
  }
  return dist;
}

/// Sum over S of Pr[S | p] * table[S].
inline double expectation_over_seed_sets(const SetFunctionTable& table, std::span<const double> p) {
  if (p.size() != table.node_count()) throw ConfigError("probability vector size mismatch");
  const auto dist = seed_set_distribution(p);
  KahanSum sum;
  for (std::size_t s = 0; s < dist.size(); ++s) sum.add(dist[s] * table[s]);
  return sum.value();
}

inline double fc_exact_kind(const SocialGraph& g, const StrategyVector& x,
                            const StrategyFunction& h, BenefitKind kind,
                            const TinyInstanceGuard& guard = {}) {
  const auto table = set_function_table(g, kind, guard);
  return expectation_over_seed_sets(table, h.probabilities(x));
}

inline double fc_exact(const SocialGraph& g, const StrategyVector& x, const StrategyFunction& h,
                       const TinyInstanceGuard& guard = {}) {
  return fc_exact_kind(g, x, h, BenefitKind::kExact, guard);
}
inline double fc_lower_exact(const SocialGraph& g, const StrategyVector& x,
                             const StrategyFunction& h, const TinyInstanceGuard& guard = {}) {
  return fc_exact_kind(g, x, h, BenefitKind::kLower, guard);
}
inline double fc_upper_exact(const SocialGraph& g, const StrategyVector& x,
                             const StrategyFunction& h, const TinyInstanceGuard& guard = {}) {
  return fc_exact_kind(g, x, h, BenefitKind::kUpper, guard);
}

// ---------------------------------------------------------------------------
// Lattice enumeration

/// Number of step vectors with steps[i] <= caps[i] and total <= max_total,
/// saturating at `limit + 1`.
inline std::size_t count_lattice_points(std::span<const std::uint32_t> caps,
                                        std::uint32_t max_total, std::size_t limit) {
  // ways[s] = number of prefixes with total s.
  std::vector<std::size_t> ways(max_total + 1, 0);
  ways[0] = 1;
  const std::size_t saturate = limit + 1;
  for (std::uint32_t cap : caps) {
    std::vector<std::size_t> next(max_total + 1, 0);
    for (std::uint32_t s = 0; s <= max_total; ++s) {
      if (!ways[s]) continue;
      const std::uint32_t top = std::min<std::uint64_t>(cap, max_total - s);
      for (std::uint32_t c = 0; c <= top; ++c) next[s + c] = std::min(saturate, next[s + c] + ways[s]);
    }
    ways.swap(next);
  }
  std::size_t total = 0;
  for (std::size_t w : ways) total = std::min(saturate, total + w);
  return total;
}

/// Visits every feasible step vector in lexicographic order (zero vector first).
template <class Visit>
void for_each_lattice_point(std::span<const std::uint32_t> caps, std::uint32_t max_total,
                            Visit&& visit) {
  std::vector<std::uint32_t> steps(caps.size(), 0);
  std::function<void(std::size_t, std::uint32_t)> recurse = [&](std::size_t i, std::uint32_t left) {
    if (i == caps.size()) {
      visit(static_cast<const std::vector<std::uint32_t>&>(steps));
      return;
    }
    const std::uint32_t top = std::min(caps[i], left);
    for (std::uint32_t c = 0; c <= top; ++c) {
      steps[i] = c;
      recurse(i + 1, left - c);
    }
    steps[i] = 0;
  };
  recurse(0, max_total);
}

/// Per-coordinate step caps implied by h on this lattice.
inline std::vector<std::uint32_t> lattice_caps(const StrategyFunction& h, const LatticeSpec& spec) {
  const std::uint32_t cap = std::min(h.step_cap(spec.granularity), spec.max_steps());
  return std::vector<std::uint32_t>(spec.dimensions, cap);
}

struct LatticeOptimum {
  StrategyVector x;
  double value = 0.0;
  std::size_t points = 0;
};

/// Exhaustive argmax of an exact objective over {x in X : |x| <= k}. Ties keep
/// the first point in lexicographic order.
inline LatticeOptimum lattice_opt_exact(const SocialGraph& g, const StrategyFunction& h,
                                        const LatticeSpec& spec, BenefitKind kind,
                                        const TinyInstanceGuard& guard = {}) {
  h.check_lattice(spec);
  const auto caps = lattice_caps(h, spec);
  const std::uint32_t max_total = spec.max_steps();
  const std::size_t points = count_lattice_points(caps, max_total, guard.max_lattice_points);
  if (points > guard.max_lattice_points) {
    throw GuardExceededError("exact oracle: lattice has more than " +
                             std::to_string(guard.max_lattice_points) + " feasible points");
  }
  const auto table = set_function_table(g, kind, guard);
  LatticeOptimum best;
  best.x = StrategyVector(spec.dimensions, spec.granularity);
  best.value = -1.0;
  best.points = points;
  for_each_lattice_point(caps, max_total, [&](const std::vector<std::uint32_t>& steps) {
    auto x = StrategyVector::from_steps(steps, spec.granularity);
    const double value = expectation_over_seed_sets(table, h.probabilities(x));
    if (value > best.value + 1e-12) {
      best.value = value;
      best.x = std::move(x);
    }
  });
  return best;
}

}  // namespace cam
