#pragma once

// Reverse sampling (RE: random edge, RN: random node), sample collections,
// and the three estimators of f_c, its lower bound and its upper bound.
//
// An RE-sample draws an edge (u,v) with probability A_uv / T and one
// realization g, and keeps N1 = R_{g^T}(u) and N2 = R_{g^T}(v). It is stored
// as the disjoint parts N1∩N2, N1\N2 and N2\N1. An RN-sample draws a node u
// with probability w(u) / W and keeps R_{g^T}(u).

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cam/diffusion.hpp"
#include "cam/error.hpp"
#include "cam/graph.hpp"
#include "cam/rng.hpp"
#include "cam/strategy.hpp"

namespace cam {

enum class SampleKind : std::uint8_t { kRandomEdge = 1, kRandomNode = 2 };

struct RESample {
  EdgeId edge = 0;
  std::vector<NodeId> both;         ///< N1 ∩ N2
  std::vector<NodeId> only_first;   ///< N1 \ N2
  std::vector<NodeId> only_second;  ///< N2 \ N1

  std::vector<NodeId> first() const {
    std::vector<NodeId> out;
    std::set_union(both.begin(), both.end(), only_first.begin(), only_first.end(),
                   std::back_inserter(out));
    return out;
  }
  std::vector<NodeId> second() const {
    std::vector<NodeId> out;
    std::set_union(both.begin(), both.end(), only_second.begin(), only_second.end(),
                   std::back_inserter(out));
    return out;
  }
};

struct RNSample {
  NodeId root = 0;
  std::vector<NodeId> nodes;
};

/// Reverse BFS over one lazily sampled realization. Coin flips (IC) and
/// in-edge choices (LT) are memoized until reset(), so several traversals
/// between resets see the same realization.
class ReverseSampler {
 public:
  explicit ReverseSampler(const SocialGraph& g)
      : g_(&g), edge_state_(g.edge_count(), kUnknown), choice_(g.node_count(), kUndrawn),
        visit_(g.node_count(), 0) {}

  const SocialGraph& graph() const noexcept { return *g_; }

  /// Forgets the current realization.
  void reset() {
    for (EdgeId e : touched_edges_) edge_state_[e] = kUnknown;
    for (NodeId v : touched_nodes_) choice_[v] = kUndrawn;
    touched_edges_.clear();
    touched_nodes_.clear();
  }

  /// R_{g^T}(root), sorted.
  std::vector<NodeId> reverse_reachable(NodeId root, Rng& rng) {
    const SocialGraph& g = *g_;
    if (++epoch_ == 0) {
      std::fill(visit_.begin(), visit_.end(), 0);
      epoch_ = 1;
    }
    std::vector<NodeId> found{root};
    visit_[root] = epoch_;
    const bool ic = g.model() == DiffusionModel::kIndependentCascade;
    for (std::size_t head = 0; head < found.size(); ++head) {
      const NodeId v = found[head];
      if (ic) {
        for (EdgeId e : g.in_edges(v)) {
          const NodeId u = g.edge(e).source;
          if (visit_[u] == epoch_) continue;
          if (edge_state_[e] == kUnknown) {
            edge_state_[e] = rng.bernoulli(g.edge(e).diffusion) ? kLive : kBlocked;
            touched_edges_.push_back(e);
          }
          if (edge_state_[e] == kLive) {
            visit_[u] = epoch_;
            found.push_back(u);
          }
        }
      } else {
        if (choice_[v] == kUndrawn) {
          const std::int64_t pick = choose_live_in_edge(g, v, rng.uniform());
          choice_[v] = pick < 0 ? kNone : static_cast<std::int64_t>(g.in_edges(v)[pick]);
          touched_nodes_.push_back(v);
        }
        if (choice_[v] >= 0) {
          const NodeId u = g.edge(static_cast<EdgeId>(choice_[v])).source;
          if (visit_[u] != epoch_) {
            visit_[u] = epoch_;
            found.push_back(u);
          }
        }
      }
    }
    std::sort(found.begin(), found.end());
    return found;
  }

 private:
  static constexpr std::int8_t kUnknown = 0;
  static constexpr std::int8_t kLive = 1;
  static constexpr std::int8_t kBlocked = 2;
  static constexpr std::int64_t kUndrawn = -2;
  static constexpr std::int64_t kNone = -1;

  const SocialGraph* g_;
  std::vector<std::int8_t> edge_state_;
  std::vector<std::int64_t> choice_;
  std::vector<EdgeId> touched_edges_;
  std::vector<NodeId> touched_nodes_;
  std::vector<std::uint32_t> visit_;
  std::uint32_t epoch_ = 0;
};

inline RESample draw_re_sample(ReverseSampler& sampler, const GraphAggregates& agg, Rng& rng) {
  const SocialGraph& g = sampler.graph();
  RESample sample;
  sample.edge = static_cast<EdgeId>(agg.edge_distribution.sample(rng));
  sampler.reset();
  const auto first = sampler.reverse_reachable(g.edge(sample.edge).source, rng);
  const auto second = sampler.reverse_reachable(g.edge(sample.edge).target, rng);
  std::set_intersection(first.begin(), first.end(), second.begin(), second.end(),
                        std::back_inserter(sample.both));
  std::set_difference(first.begin(), first.end(), second.begin(), second.end(),
                      std::back_inserter(sample.only_first));
  std::set_difference(second.begin(), second.end(), first.begin(), first.end(),
                      std::back_inserter(sample.only_second));
  return sample;
}

inline RESample draw_re_sample(const SocialGraph& g, const GraphAggregates& agg,
                               std::uint64_t seed) {
  ReverseSampler sampler(g);
  Rng rng(seed);
  return draw_re_sample(sampler, agg, rng);
}

/// RN-sample with the root drawn from `roots` (w(u)/W for the upper bound,
/// uniform for influence spread).
inline RNSample draw_rn_sample(ReverseSampler& sampler, const DiscreteDistribution& roots,
                               Rng& rng) {
  RNSample sample;
  sample.root = static_cast<NodeId>(roots.sample(rng));
  sampler.reset();
  sample.nodes = sampler.reverse_reachable(sample.root, rng);
  return sample;
}

inline RNSample draw_rn_sample(const SocialGraph& g, const GraphAggregates& agg,
                               std::uint64_t seed) {
  ReverseSampler sampler(g);
  Rng rng(seed);
  return draw_rn_sample(sampler, agg.node_distribution, rng);
}

/// Flat storage of RE- or RN-samples plus an inverted node index.
class SampleCollection {
 public:
  /// Node occurrence packed as (sample << 2) | part.
  using Occurrence = std::uint32_t;
  static constexpr std::size_t kMaxSamples = (std::size_t{1} << 30) - 1;

  SampleCollection() = default;
  SampleCollection(SampleKind kind, double scale, std::size_t node_count)
      : kind_(kind), scale_(scale), node_count_(node_count) {}

  SampleKind kind() const noexcept { return kind_; }
  double scale() const noexcept { return scale_; }
  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t parts_per_sample() const noexcept { return kind_ == SampleKind::kRandomEdge ? 3 : 1; }
  std::size_t size() const noexcept { return (offsets_.size() - 1) / parts_per_sample(); }
  bool empty() const noexcept { return size() == 0; }
  std::size_t entry_count() const noexcept { return nodes_.size(); }

  std::span<const NodeId> part(std::size_t sample, std::size_t part) const {
    const std::size_t slot = sample * parts_per_sample() + part;
    return {nodes_.data() + offsets_[slot], nodes_.data() + offsets_[slot + 1]};
  }

  /// All nodes of a sample across its parts (parts are contiguous).
  std::span<const NodeId> sample_nodes(std::size_t sample) const {
    const std::size_t slot = sample * parts_per_sample();
    return {nodes_.data() + offsets_[slot], nodes_.data() + offsets_[slot + parts_per_sample()]};
  }

  void add(const RESample& s) {
    require(SampleKind::kRandomEdge);
    append_part(s.both);
    append_part(s.only_first);
    append_part(s.only_second);
  }

  void add(const RNSample& s) {
    require(SampleKind::kRandomNode);
    append_part(s.nodes);
  }

  void reserve(std::size_t samples, std::size_t entries) {
    offsets_.reserve(samples * parts_per_sample() + 1);
    nodes_.reserve(entries);
  }

  void build_index() {
    index_offsets_.assign(node_count_ + 1, 0);
    for (NodeId u : nodes_) ++index_offsets_[u + 1];
    for (std::size_t i = 1; i < index_offsets_.size(); ++i) index_offsets_[i] += index_offsets_[i - 1];
    index_.resize(nodes_.size());
    std::vector<std::size_t> fill(index_offsets_.begin(), index_offsets_.end() - 1);
    const std::size_t parts = parts_per_sample();
    for (std::size_t slot = 0; slot + 1 < offsets_.size(); ++slot) {
      const auto occurrence = static_cast<Occurrence>(((slot / parts) << 2) | (slot % parts));
      for (std::size_t i = offsets_[slot]; i < offsets_[slot + 1]; ++i) {
        index_[fill[nodes_[i]]++] = occurrence;
      }
    }
    indexed_ = true;
  }

  bool indexed() const noexcept { return indexed_; }

  std::span<const Occurrence> occurrences(NodeId u) const {
    return {index_.data() + index_offsets_[u], index_.data() + index_offsets_[u + 1]};
  }
  static std::size_t occurrence_sample(Occurrence o) noexcept { return o >> 2; }
  static std::size_t occurrence_part(Occurrence o) noexcept { return o & 3U; }

  void release() {
    offsets_.assign(1, 0);
    nodes_.clear();
    nodes_.shrink_to_fit();
    index_.clear();
    index_.shrink_to_fit();
    index_offsets_.clear();
    indexed_ = false;
  }

  // Binary format (little-endian):
  //   char[8] "CAMSMPL1" | u32 version=1 | u8 kind | u8 parts | u16 0
  //   f64 scale | u64 node_count | u64 samples | u64 entries
  //   u64 offsets[samples*parts + 1] | u32 nodes[entries]
  void save(std::ostream& out) const {
    static_assert(std::endian::native == std::endian::little, "binary format is little-endian");
    out.write(kMagic, 8);
    write_pod(out, std::uint32_t{1});
    write_pod(out, static_cast<std::uint8_t>(kind_));
    write_pod(out, static_cast<std::uint8_t>(parts_per_sample()));
    write_pod(out, std::uint16_t{0});
    write_pod(out, scale_);
    write_pod(out, static_cast<std::uint64_t>(node_count_));
    write_pod(out, static_cast<std::uint64_t>(size()));
    write_pod(out, static_cast<std::uint64_t>(nodes_.size()));
    for (std::size_t o : offsets_) write_pod(out, static_cast<std::uint64_t>(o));
    out.write(reinterpret_cast<const char*>(nodes_.data()),
              static_cast<std::streamsize>(nodes_.size() * sizeof(NodeId)));
    if (!out) throw Error("failed to write sample collection");
  }

  static SampleCollection load(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw ParseError(0, "not a sample collection");
    const auto version = read_pod<std::uint32_t>(in);
    if (version != 1) throw ParseError(0, "unsupported sample collection version");
    const auto kind = read_pod<std::uint8_t>(in);
    const auto parts = read_pod<std::uint8_t>(in);
    read_pod<std::uint16_t>(in);
    if (kind != 1 && kind != 2) throw ParseError(0, "bad sample kind");
    const auto scale = read_pod<double>(in);
    const auto node_count = read_pod<std::uint64_t>(in);
    SampleCollection c(static_cast<SampleKind>(kind), scale, static_cast<std::size_t>(node_count));
    if (parts != c.parts_per_sample()) throw ParseError(0, "part count does not match kind");
    const auto samples = read_pod<std::uint64_t>(in);
    const auto entries = read_pod<std::uint64_t>(in);
    if (samples > kMaxSamples) throw ParseError(0, "too many samples");
    // Grow while reading so a corrupt header cannot force a huge allocation.
    c.offsets_.clear();
    for (std::uint64_t i = 0; i < samples * parts + 1; ++i) {
      c.offsets_.push_back(static_cast<std::size_t>(read_pod<std::uint64_t>(in)));
    }
    if (c.offsets_.front() != 0 || c.offsets_.back() != entries ||
        !std::is_sorted(c.offsets_.begin(), c.offsets_.end())) {
      throw ParseError(0, "inconsistent sample offsets");
    }
    c.nodes_.reserve(static_cast<std::size_t>(entries));
    for (std::uint64_t i = 0; i < entries; ++i) c.nodes_.push_back(read_pod<NodeId>(in));
    for (NodeId u : c.nodes_) {
      if (u >= c.node_count_) throw ParseError(0, "node id out of range in sample collection");
    }
    c.build_index();
    return c;
  }

 private:
  static constexpr char kMagic[8] = {'C', 'A', 'M', 'S', 'M', 'P', 'L', '1'};

  template <class T>
  static void write_pod(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  template <class T>
  static T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw ParseError(0, "truncated sample collection");
    return value;
  }

  void require(SampleKind kind) const {
    if (kind != kind_) throw ConfigError("sample kind does not match collection kind");
    if (size() >= kMaxSamples) throw ConfigError("sample collection is full");
  }

  void append_part(const std::vector<NodeId>& part) {
    nodes_.insert(nodes_.end(), part.begin(), part.end());
    offsets_.push_back(nodes_.size());
    indexed_ = false;
  }

  SampleKind kind_ = SampleKind::kRandomEdge;
  double scale_ = 0.0;
  std::size_t node_count_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> nodes_;
  std::vector<std::size_t> index_offsets_;
  std::vector<Occurrence> index_;
  bool indexed_ = false;
};

/// Grows an RE collection to `target` samples; sample i uses stream
/// (seed, stream, i). Rebuilds the index.
inline void extend_re_samples(SampleCollection& c, const SocialGraph& g, const GraphAggregates& agg,
                              std::size_t target, std::uint64_t seed, Stream stream) {
  ReverseSampler sampler(g);
  for (std::size_t i = c.size(); i < target; ++i) {
    Rng rng(stream_seed(seed, stream, i));
    c.add(draw_re_sample(sampler, agg, rng));
  }
  c.build_index();
}

inline SampleCollection generate_re_samples(const SocialGraph& g, const GraphAggregates& agg,
                                            std::size_t count, std::uint64_t seed, Stream stream) {
  SampleCollection c(SampleKind::kRandomEdge, agg.total_strength, g.node_count());
  extend_re_samples(c, g, agg, count, seed, stream);
  return c;
}

inline void extend_rn_samples(SampleCollection& c, const SocialGraph& g,
                              const DiscreteDistribution& roots, std::size_t target,
                              std::uint64_t seed, Stream stream) {
  ReverseSampler sampler(g);
  for (std::size_t i = c.size(); i < target; ++i) {
    Rng rng(stream_seed(seed, stream, i));
    c.add(draw_rn_sample(sampler, roots, rng));
  }
  c.build_index();
}

/// RN collection for the upper bound: roots ~ w(u)/W, scale W.
inline SampleCollection generate_rn_samples(const SocialGraph& g, const GraphAggregates& agg,
                                            std::size_t count, std::uint64_t seed, Stream stream) {
  SampleCollection c(SampleKind::kRandomNode, agg.total_node_weight, g.node_count());
  extend_rn_samples(c, g, agg.node_distribution, count, seed, stream);
  return c;
}

// ---------------------------------------------------------------------------
// Estimators

enum class Estimator {
  kActivity,  ///< f_c on RE-samples
  kLower,     ///< lower bound on RE-samples
  kUpper,     ///< upper bound on RN-samples (also influence spread with uniform roots)
};

inline SampleKind required_kind(Estimator e) {
  return e == Estimator::kUpper ? SampleKind::kRandomNode : SampleKind::kRandomEdge;
}

/// Pr[S ∩ A = ∅] = prod_{s in A} (1 - p_s).
inline double miss_probability(std::span<const NodeId> nodes, std::span<const double> p) {
  double miss = 1.0;
  for (NodeId s : nodes) miss *= 1.0 - p[s];
  return miss;
}

/// Per-sample estimator value from the miss probabilities of its parts.
inline double sample_value(Estimator e, const double* miss) {
  switch (e) {
    case Estimator::kActivity:
      // H(N1∩N2) + (1 - H(N1∩N2)) H(N1\N2) H(N2\N1)
      return (1.0 - miss[0]) + miss[0] * (1.0 - miss[1]) * (1.0 - miss[2]);
    case Estimator::kLower:
      return 1.0 - miss[0];
    case Estimator::kUpper:
      return 1.0 - miss[0];
  }
  return 0.0;
}

struct SampledEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// scale / θ * sum of per-sample values, with the standard error of that mean.
inline SampledEstimate evaluate_estimator(const SampleCollection& c, std::span<const double> p,
                                          Estimator e) {
  if (c.kind() != required_kind(e)) throw ConfigError("estimator does not match sample kind");
  if (p.size() != c.node_count()) throw ConfigError("probability vector size mismatch");
  const std::size_t theta = c.size();
  if (theta == 0) return {};
  double mean = 0.0;
  double m2 = 0.0;
  std::array<double, 3> miss{1.0, 1.0, 1.0};
  for (std::size_t s = 0; s < theta; ++s) {
    for (std::size_t part = 0; part < c.parts_per_sample(); ++part) {
      miss[part] = miss_probability(c.part(s, part), p);
    }
    const double v = sample_value(e, miss.data());
    const double delta = v - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (v - mean);
  }
  SampledEstimate out;
  out.value = c.scale() * mean;
  if (theta > 1) {
    out.std_error = c.scale() * std::sqrt(std::max(0.0, m2 / static_cast<double>(theta - 1)) /
                                          static_cast<double>(theta));
  }
  return out;
}

inline double estimate_fc(const SampleCollection& m, const StrategyVector& x,
                          const StrategyFunction& h) {
  return evaluate_estimator(m, h.probabilities(x), Estimator::kActivity).value;
}
inline double estimate_fc_lower(const SampleCollection& m, const StrategyVector& x,
                                const StrategyFunction& h) {
  return evaluate_estimator(m, h.probabilities(x), Estimator::kLower).value;
}
inline double estimate_fc_upper(const SampleCollection& n, const StrategyVector& x,
                                const StrategyFunction& h) {
  return evaluate_estimator(n, h.probabilities(x), Estimator::kUpper).value;
}

/// An estimator over a fixed collection at a moving lattice point, with
/// marginal gains maintained incrementally for the greedy.
///
/// For every (sample, part) it caches prod (1 - h_s(x)). Moving x along
/// coordinate i only touches the samples that contain a node whose h depends
/// on x_i; gains are cached per coordinate and recomputed only when one of
/// their samples changed.
class IncrementalEstimator {
 public:
  /// Products below this are rebuilt from scratch instead of updated by ratio.
  static constexpr double kRebuildThreshold = 1e-12;

  IncrementalEstimator(const SampleCollection& c, const StrategyFunction& h, Estimator e,
                       double granularity)
      : c_(&c), h_(&h), estimator_(e), parts_(c.parts_per_sample()),
        x_(h.dimensions(), granularity), cap_(h.step_cap(granularity)),
        probs_(h.probabilities(x_)), miss_(c.size() * parts_, 1.0),
        gain_(h.dimensions(), 0.0), dirty_(h.dimensions(), 1), override_(h.node_count(), -1.0) {
    if (c.kind() != required_kind(e)) throw ConfigError("estimator does not match sample kind");
    if (c.node_count() != h.node_count()) throw ConfigError("collection and strategy disagree on n");
    if (!c.indexed()) throw ConfigError("sample collection must be indexed");
    for (std::size_t s = 0; s < c.size(); ++s) {
      for (std::size_t part = 0; part < parts_; ++part) {
        miss_[s * parts_ + part] = miss_probability(c.part(s, part), probs_);
      }
    }
  }

  std::size_t dimensions() const noexcept { return x_.size(); }
  const StrategyVector& point() const noexcept { return x_; }
  const SampleCollection& collection() const noexcept { return *c_; }

  bool can_increment(std::size_t dim) const { return x_.step(dim) < cap_; }

  /// Estimator value at the current point.
  double value() const {
    if (c_->empty()) return 0.0;
    double total = 0.0;
    for (std::size_t s = 0; s < c_->size(); ++s) total += sample_value(estimator_, &miss_[s * parts_]);
    return c_->scale() * total / static_cast<double>(c_->size());
  }

  /// estimator(x + t e_dim) - estimator(x).
  double marginal_gain(std::size_t dim) {
    if (!dirty_[dim]) return gain_[dim];
    gain_[dim] = compute_gain(dim);
    dirty_[dim] = 0;
    return gain_[dim];
  }

  void increment(std::size_t dim) {
    const std::vector<double> next = next_probabilities(dim);
    const auto affected = h_->nodes_affected_by(dim);
    x_ = x_.incremented(dim);
    dirty_[dim] = 1;
    for (std::size_t a = 0; a < affected.size(); ++a) {
      const NodeId u = affected[a];
      const double old_p = probs_[u];
      const double new_p = next[a];
      for (std::size_t d : h_->dimensions_of(u)) dirty_[d] = 1;
      if (new_p == old_p) continue;
      probs_[u] = new_p;
      for (auto occ : c_->occurrences(u)) {
        const std::size_t s = SampleCollection::occurrence_sample(occ);
        const std::size_t part = SampleCollection::occurrence_part(occ);
        double& m = miss_[s * parts_ + part];
        const double old_factor = 1.0 - old_p;
        if (old_factor >= kRebuildThreshold && m >= kRebuildThreshold) {
          m = m * (1.0 - new_p) / old_factor;
        }
        if (old_factor < kRebuildThreshold || m < kRebuildThreshold) {
          m = miss_probability(c_->part(s, part), probs_);
        }
        for (NodeId w : c_->sample_nodes(s)) {
          for (std::size_t d : h_->dimensions_of(w)) dirty_[d] = 1;
        }
      }
    }
  }

 private:
  std::vector<double> next_probabilities(std::size_t dim) const {
    const auto affected = h_->nodes_affected_by(dim);
    std::vector<double> next(affected.size());
    for (std::size_t a = 0; a < affected.size(); ++a) {
      next[a] = h_->h_incremented(affected[a], x_, dim);
    }
    return next;
  }

  double updated_miss(std::size_t s, std::size_t part, double old_p, double new_p) const {
    const double m = miss_[s * parts_ + part];
    const double old_factor = 1.0 - old_p;
    if (old_factor >= kRebuildThreshold && m >= kRebuildThreshold) {
      return m * (1.0 - new_p) / old_factor;
    }
    double miss = 1.0;
    for (NodeId w : c_->part(s, part)) miss *= 1.0 - (override_[w] >= 0.0 ? override_[w] : probs_[w]);
    return miss;
  }

  double compute_gain(std::size_t dim) {
    if (!can_increment(dim)) return 0.0;
    const auto affected = h_->nodes_affected_by(dim);
    const std::vector<double> next = next_probabilities(dim);
    double delta = 0.0;
    if (affected.size() == 1) {
      const NodeId u = affected[0];
      if (next[0] == probs_[u]) return 0.0;
      override_[u] = next[0];
      std::array<double, 3> trial{};
      for (auto occ : c_->occurrences(u)) {
        const std::size_t s = SampleCollection::occurrence_sample(occ);
        const std::size_t part = SampleCollection::occurrence_part(occ);
        const double* base = &miss_[s * parts_];
        std::copy(base, base + parts_, trial.begin());
        trial[part] = updated_miss(s, part, probs_[u], next[0]);
        delta += sample_value(estimator_, trial.data()) - sample_value(estimator_, base);
      }
      override_[u] = -1.0;
    } else {
      // Several nodes move together; recompute every touched part from scratch.
      for (std::size_t a = 0; a < affected.size(); ++a) override_[affected[a]] = next[a];
      std::vector<std::size_t> touched;
      for (NodeId u : affected) {
        for (auto occ : c_->occurrences(u)) touched.push_back(SampleCollection::occurrence_sample(occ));
      }
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      std::array<double, 3> trial{};
      for (std::size_t s : touched) {
        const double* base = &miss_[s * parts_];
        for (std::size_t part = 0; part < parts_; ++part) {
          double miss = 1.0;
          for (NodeId w : c_->part(s, part)) {
            miss *= 1.0 - (override_[w] >= 0.0 ? override_[w] : probs_[w]);
          }
          trial[part] = miss;
        }
        delta += sample_value(estimator_, trial.data()) - sample_value(estimator_, base);
      }
      for (NodeId u : affected) override_[u] = -1.0;
    }
    if (c_->empty()) return 0.0;
    return c_->scale() * delta / static_cast<double>(c_->size());
  }

  const SampleCollection* c_;
  const StrategyFunction* h_;
  Estimator estimator_;
  std::size_t parts_;
  StrategyVector x_;
  std::uint32_t cap_;
  std::vector<double> probs_;
  std::vector<double> miss_;
  std::vector<double> gain_;
  std::vector<char> dirty_;
  std::vector<double> override_;
};

}  // namespace cam
