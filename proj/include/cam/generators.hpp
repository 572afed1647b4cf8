#pragma once

// Synthetic social graphs. Every edge gets strength 1 and the diffusion
// parameter 1 / indeg(target), which is valid under both models.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cam/error.hpp"
#include "cam/graph.hpp"
#include "cam/rng.hpp"

namespace cam {

enum class GeneratorKind { kRandomDag, kPreferentialAttachment, kTwoCommunity };

inline GeneratorKind parse_generator_kind(std::string_view text) {
  if (text == "dag") return GeneratorKind::kRandomDag;
  if (text == "pa") return GeneratorKind::kPreferentialAttachment;
  if (text == "two-community") return GeneratorKind::kTwoCommunity;
  throw ConfigError("unknown generator '" + std::string(text) +
                    "' (expected dag, pa or two-community)");
}

inline std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kRandomDag: return "dag";
    case GeneratorKind::kPreferentialAttachment: return "pa";
    case GeneratorKind::kTwoCommunity: return "two-community";
  }
  return "?";
}

namespace detail {

using Arc = std::pair<NodeId, NodeId>;

inline SocialGraph weighted_cascade_graph(std::size_t n, const std::vector<Arc>& arcs,
                                          DiffusionModel model) {
  std::vector<std::size_t> indeg(n, 0);
  for (const auto& [u, v] : arcs) ++indeg[v];
  std::vector<Edge> edges;
  edges.reserve(arcs.size());
  for (const auto& [u, v] : arcs) {
    edges.push_back({u, v, 1.0 / static_cast<double>(indeg[v]), 1.0});
  }
  return SocialGraph(n, std::move(edges), model);
}

inline void check_size(std::size_t n, std::size_t m, std::size_t capacity) {
  if (n < 2) throw ConfigError("generator needs at least 2 nodes");
  if (m > capacity) {
    throw ConfigError("cannot place " + std::to_string(m) + " distinct edges on " +
                      std::to_string(n) + " nodes");
  }
}

}  // namespace detail

/// m distinct arcs u -> v with pos(u) < pos(v) in a random topological order.
inline SocialGraph random_dag(std::size_t n, std::size_t m, std::uint64_t seed,
                              DiffusionModel model = DiffusionModel::kIndependentCascade) {
  detail::check_size(n, m, n * (n - 1) / 2);
  Rng rng(stream_seed(seed, Stream::kGenerator, 0));
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::set<detail::Arc> seen;
  std::vector<detail::Arc> arcs;
  while (arcs.size() < m) {
    auto a = rng.below(n);
    auto b = rng.below(n);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const detail::Arc arc{order[a], order[b]};
    if (seen.insert(arc).second) arcs.push_back(arc);
  }
  return detail::weighted_cascade_graph(n, arcs, model);
}

/// Growth with degree-proportional attachment. Each new node links to
/// existing nodes; each link is oriented at random. Exactly m arcs if m is
/// reachable with distinct pairs.
inline SocialGraph preferential_attachment(std::size_t n, std::size_t m, std::uint64_t seed,
                                           DiffusionModel model = DiffusionModel::kIndependentCascade) {
  detail::check_size(n, m, n * (n - 1) / 2);
  if (m + 1 < n) throw ConfigError("preferential attachment needs at least n - 1 edges");
  Rng rng(stream_seed(seed, Stream::kGenerator, 1));
  std::set<std::pair<NodeId, NodeId>> pairs;  // unordered, stored as (min, max)
  std::vector<detail::Arc> arcs;
  std::vector<NodeId> endpoints;  // node repeated once per incident edge
  auto link = [&](NodeId a, NodeId b) {
    if (a == b || !pairs.insert({std::min(a, b), std::max(a, b)}).second) return false;
    if (rng.bernoulli(0.5)) std::swap(a, b);
    arcs.push_back({a, b});
    endpoints.push_back(a);
    endpoints.push_back(b);
    return true;
  };
  link(0, 1);
  const std::size_t extra = m - 1;
  for (std::size_t v = 2; v < n; ++v) {
    // Spread the remaining edges evenly over the arriving nodes.
    const std::size_t quota_before = extra * (v - 2) / (n - 2);
    const std::size_t quota_after = extra * (v - 1) / (n - 2);
    const std::size_t want = std::max<std::size_t>(1, quota_after - quota_before);
    const std::size_t possible = std::min(want, v);
    std::size_t added = 0;
    for (std::size_t attempts = 0; added < possible && attempts < 64 * possible; ++attempts) {
      if (link(static_cast<NodeId>(v), endpoints[rng.below(endpoints.size())])) ++added;
    }
    for (NodeId u = 0; added < possible && u < v; ++u) {
      if (link(static_cast<NodeId>(v), u)) ++added;
    }
  }
  // Top up any shortfall with degree-proportional pairs among existing nodes.
  while (arcs.size() < m) {
    link(endpoints[rng.below(endpoints.size())], static_cast<NodeId>(rng.below(n)));
  }
  while (arcs.size() > m) arcs.pop_back();
  return detail::weighted_cascade_graph(n, arcs, model);
}

/// Two halves; each arc stays within a community with probability `inside`.
inline SocialGraph two_community(std::size_t n, std::size_t m, std::uint64_t seed,
                                 DiffusionModel model = DiffusionModel::kIndependentCascade,
                                 double inside = 0.9) {
  detail::check_size(n, m, n * (n - 1) / 2);
  if (n < 4) throw ConfigError("two-community graph needs at least 4 nodes");
  if (!(inside >= 0.0 && inside <= 1.0)) throw ConfigError("inside fraction must lie in [0, 1]");
  Rng rng(stream_seed(seed, Stream::kGenerator, 2));
  const std::size_t half = n / 2;
  std::set<detail::Arc> seen;
  std::vector<detail::Arc> arcs;
  while (arcs.size() < m) {
    const bool first = rng.bernoulli(0.5);
    const std::size_t lo = first ? 0 : half;
    const std::size_t size = first ? half : n - half;
    const auto u = static_cast<NodeId>(lo + rng.below(size));
    NodeId v;
    if (rng.bernoulli(inside)) {
      v = static_cast<NodeId>(lo + rng.below(size));
    } else {
      const std::size_t other_lo = first ? half : 0;
      const std::size_t other_size = first ? n - half : half;
      v = static_cast<NodeId>(other_lo + rng.below(other_size));
    }
    if (u == v) continue;
    if (seen.insert({u, v}).second) arcs.push_back({u, v});
  }
  return detail::weighted_cascade_graph(n, arcs, model);
}

inline SocialGraph generate_graph(GeneratorKind kind, std::size_t n, std::size_t m,
                                  std::uint64_t seed, DiffusionModel model) {
  switch (kind) {
    case GeneratorKind::kRandomDag: return random_dag(n, m, seed, model);
    case GeneratorKind::kPreferentialAttachment: return preferential_attachment(n, m, seed, model);
    case GeneratorKind::kTwoCommunity: return two_community(n, m, seed, model);
  }
  throw ConfigError("unknown generator");
}

}  // namespace cam
