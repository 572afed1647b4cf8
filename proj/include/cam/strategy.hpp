#pragma once

// Marketing strategies on the lattice {0, t, 2t, ...}^d and the strategy
// functions h_u that turn a strategy into per-node seed probabilities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cam/error.hpp"
#include "cam/graph.hpp"
#include "cam/rng.hpp"

namespace cam {

struct LatticeSpec {
  std::size_t dimensions = 0;
  double granularity = 0.2;  ///< t
  double budget = 0.0;       ///< k

  void validate() const {
    if (!(granularity > 0.0) || !std::isfinite(granularity)) {
      throw ConfigError("lattice granularity t must be positive");
    }
    if (!(budget >= 0.0) || !std::isfinite(budget)) throw ConfigError("budget k must be nonnegative");
  }

  /// floor(k / t). Any remainder of the budget is left unspent.
  std::uint32_t max_steps() const {
    validate();
    return static_cast<std::uint32_t>(std::floor(budget / granularity + 1e-9));
  }
};

/// A lattice point stored as integer step counts; coordinate i is steps[i] * t.
class StrategyVector {
 public:
  StrategyVector() = default;
  StrategyVector(std::size_t dimensions, double granularity)
      : steps_(dimensions, 0), granularity_(granularity) {}

  static StrategyVector from_steps(std::vector<std::uint32_t> steps, double granularity) {
    StrategyVector x;
    x.steps_ = std::move(steps);
    x.granularity_ = granularity;
    x.total_ = std::accumulate(x.steps_.begin(), x.steps_.end(), std::uint64_t{0});
    return x;
  }

  std::size_t size() const noexcept { return steps_.size(); }
  double granularity() const noexcept { return granularity_; }
  const std::vector<std::uint32_t>& steps() const noexcept { return steps_; }
  std::uint32_t step(std::size_t i) const { return steps_[i]; }
  std::uint64_t total_steps() const noexcept { return total_; }

  double coordinate(std::size_t i) const { return static_cast<double>(steps_[i]) * granularity_; }
  /// |x| in strategy units.
  double spent() const noexcept { return static_cast<double>(total_) * granularity_; }

  /// x + t e_i without any budget check.
  StrategyVector incremented(std::size_t i) const {
    StrategyVector next = *this;
    ++next.steps_.at(i);
    ++next.total_;
    return next;
  }

  bool is_zero() const noexcept { return total_ == 0; }

  /// Componentwise x <= y.
  bool dominated_by(const StrategyVector& other) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < steps_.size(); ++i) {
      if (steps_[i] > other.steps_[i]) return false;
    }
    return true;
  }

  friend bool operator==(const StrategyVector& a, const StrategyVector& b) {
    return a.steps_ == b.steps_ && a.granularity_ == b.granularity_;
  }

 private:
  std::vector<std::uint32_t> steps_;
  double granularity_ = 0.2;
  std::uint64_t total_ = 0;
};

/// x + t e_i; throws when the budget would be exceeded.
inline StrategyVector increment(const StrategyVector& x, std::size_t i, const LatticeSpec& spec) {
  if (i >= x.size()) throw ConfigError("dimension " + std::to_string(i) + " out of range");
  if (x.total_steps() + 1 > spec.max_steps()) {
    throw BudgetExceededError("increment would exceed budget k=" + std::to_string(spec.budget));
  }
  return x.incremented(i);
}

enum class StrategyKind { kPersonalized, kIndependentActivation, kCharacteristicVector };

inline std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kPersonalized: return "personalized";
    case StrategyKind::kIndependentActivation: return "independent";
    case StrategyKind::kCharacteristicVector: return "characteristic";
  }
  return "?";
}

inline StrategyKind parse_strategy_kind(std::string_view text) {
  if (text == "personalized") return StrategyKind::kPersonalized;
  if (text == "independent") return StrategyKind::kIndependentActivation;
  if (text == "characteristic") return StrategyKind::kCharacteristicVector;
  throw ConfigError("unknown strategy kind '" + std::string(text) +
                    "' (expected personalized, independent or characteristic)");
}

/// q(x) = scale * (1 - exp(-rate * x)), clipped to [0, 1]: monotone and concave.
struct ActivationCurve {
  NodeId node = 0;
  std::size_t dimension = 0;
  double scale = 1.0;
  double rate = 1.0;

  double operator()(double x) const {
    return std::clamp(scale * (1.0 - std::exp(-rate * x)), 0.0, 1.0);
  }
};

class StrategyFunction {
 public:
  /// h_u(x) = 2 x_u - x_u^2 with x_u capped at 1; d = n.
  static StrategyFunction personalized(std::size_t node_count) {
    return identity_kind(StrategyKind::kPersonalized, node_count);
  }

  /// h_u(x) = min(x_u, 1); on the lattice {0,1}^n the strategy is the seed set's indicator.
  static StrategyFunction characteristic(std::size_t node_count) {
    return identity_kind(StrategyKind::kCharacteristicVector, node_count);
  }

  /// h_u(x) = 1 - prod_j (1 - q_uj(x_j)) over the curves listed for u.
  static StrategyFunction independent_activation(std::size_t node_count, std::size_t dimensions,
                                                 std::vector<ActivationCurve> curves) {
    StrategyFunction f;
    f.kind_ = StrategyKind::kIndependentActivation;
    f.node_count_ = node_count;
    f.dimensions_ = dimensions;
    for (const auto& c : curves) {
      if (c.node >= node_count) throw ConfigError("activation curve names unknown node");
      if (c.dimension >= dimensions) throw ConfigError("activation curve names unknown dimension");
      if (!(c.scale >= 0.0 && c.scale <= 1.0)) throw ConfigError("curve scale must lie in [0, 1]");
      if (!(c.rate > 0.0) || !std::isfinite(c.rate)) throw ConfigError("curve rate must be positive");
    }
    std::stable_sort(curves.begin(), curves.end(),
                     [](const auto& a, const auto& b) { return a.node < b.node; });
    for (std::size_t i = 1; i < curves.size(); ++i) {
      if (curves[i].node == curves[i - 1].node && curves[i].dimension == curves[i - 1].dimension) {
        throw ConfigError("duplicate activation curve for node " + std::to_string(curves[i].node));
      }
    }
    f.curve_offsets_.assign(node_count + 1, 0);
    for (const auto& c : curves) ++f.curve_offsets_[c.node + 1];
    std::partial_sum(f.curve_offsets_.begin(), f.curve_offsets_.end(), f.curve_offsets_.begin());
    f.curves_ = std::move(curves);

    std::vector<std::vector<NodeId>> by_dim(dimensions);
    std::vector<std::vector<std::size_t>> by_node(node_count);
    for (const auto& c : f.curves_) {
      by_dim[c.dimension].push_back(c.node);
      by_node[c.node].push_back(c.dimension);
    }
    f.flatten(by_dim, by_node);
    return f;
  }

  StrategyKind kind() const noexcept { return kind_; }
  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t dimensions() const noexcept { return dimensions_; }

  /// Throws unless the lattice has exactly this function's dimension count.
  void check_lattice(const LatticeSpec& spec) const {
    spec.validate();
    if (spec.dimensions != dimensions_) {
      throw ConfigError(std::string(to_string(kind_)) + " strategy needs d=" +
                        std::to_string(dimensions_) + " but the lattice has d=" +
                        std::to_string(spec.dimensions));
    }
  }

  /// Maximum step count per coordinate (x_i <= 1 for the identity kinds).
  std::uint32_t step_cap(double granularity) const {
    if (kind_ == StrategyKind::kIndependentActivation) {
      return std::numeric_limits<std::uint32_t>::max();
    }
    return static_cast<std::uint32_t>(std::floor(1.0 / granularity + 1e-9));
  }

  double h(NodeId u, const StrategyVector& x) const { return evaluate(u, x, kNoDimension); }

  /// h_u(x + t e_dim).
  double h_incremented(NodeId u, const StrategyVector& x, std::size_t dim) const {
    return evaluate(u, x, dim);
  }

  std::vector<double> probabilities(const StrategyVector& x) const {
    std::vector<double> p(node_count_);
    for (NodeId u = 0; u < node_count_; ++u) p[u] = h(u, x);
    return p;
  }

  /// Nodes whose h depends on coordinate `dim`.
  std::span<const NodeId> nodes_affected_by(std::size_t dim) const {
    return {affected_nodes_.data() + affected_offsets_[dim],
            affected_nodes_.data() + affected_offsets_[dim + 1]};
  }

  /// Coordinates that h_u depends on.
  std::span<const std::size_t> dimensions_of(NodeId u) const {
    return {node_dims_.data() + node_dim_offsets_[u], node_dims_.data() + node_dim_offsets_[u + 1]};
  }

  const std::vector<ActivationCurve>& curves() const noexcept { return curves_; }

 private:
  static constexpr std::size_t kNoDimension = std::numeric_limits<std::size_t>::max();

  static StrategyFunction identity_kind(StrategyKind kind, std::size_t n) {
    StrategyFunction f;
    f.kind_ = kind;
    f.node_count_ = n;
    f.dimensions_ = n;
    f.affected_offsets_.resize(n + 1);
    f.node_dim_offsets_.resize(n + 1);
    std::iota(f.affected_offsets_.begin(), f.affected_offsets_.end(), std::size_t{0});
    std::iota(f.node_dim_offsets_.begin(), f.node_dim_offsets_.end(), std::size_t{0});
    f.affected_nodes_.resize(n);
    f.node_dims_.resize(n);
    std::iota(f.affected_nodes_.begin(), f.affected_nodes_.end(), NodeId{0});
    std::iota(f.node_dims_.begin(), f.node_dims_.end(), std::size_t{0});
    return f;
  }

  void flatten(const std::vector<std::vector<NodeId>>& by_dim,
               const std::vector<std::vector<std::size_t>>& by_node) {
    affected_offsets_.assign(1, 0);
    for (const auto& list : by_dim) {
      affected_nodes_.insert(affected_nodes_.end(), list.begin(), list.end());
      affected_offsets_.push_back(affected_nodes_.size());
    }
    node_dim_offsets_.assign(1, 0);
    for (const auto& list : by_node) {
      node_dims_.insert(node_dims_.end(), list.begin(), list.end());
      node_dim_offsets_.push_back(node_dims_.size());
    }
  }

  double coordinate_with(const StrategyVector& x, std::size_t i, std::size_t bumped) const {
    double steps = static_cast<double>(x.step(i)) + (i == bumped ? 1.0 : 0.0);
    return steps * x.granularity();
  }

  double evaluate(NodeId u, const StrategyVector& x, std::size_t bumped) const {
    if (x.size() != dimensions_) {
      throw ConfigError("strategy vector has d=" + std::to_string(x.size()) + ", expected " +
                        std::to_string(dimensions_));
    }
    switch (kind_) {
      case StrategyKind::kPersonalized: {
        const double xu = std::min(coordinate_with(x, u, bumped), 1.0);
        return std::clamp(2.0 * xu - xu * xu, 0.0, 1.0);
      }
      case StrategyKind::kCharacteristicVector:
        return std::clamp(coordinate_with(x, u, bumped), 0.0, 1.0);
      case StrategyKind::kIndependentActivation: {
        double miss = 1.0;
        for (std::size_t c = curve_offsets_[u]; c < curve_offsets_[u + 1]; ++c) {
          const auto& curve = curves_[c];
          miss *= 1.0 - curve(coordinate_with(x, curve.dimension, bumped));
        }
        return std::clamp(1.0 - miss, 0.0, 1.0);
      }
    }
    return 0.0;
  }

  StrategyKind kind_ = StrategyKind::kPersonalized;
  std::size_t node_count_ = 0;
  std::size_t dimensions_ = 0;
  std::vector<ActivationCurve> curves_;
  std::vector<std::size_t> curve_offsets_;
  std::vector<NodeId> affected_nodes_;
  std::vector<std::size_t> affected_offsets_{0};
  std::vector<std::size_t> node_dims_;
  std::vector<std::size_t> node_dim_offsets_{0};
};

inline double h_value(const StrategyFunction& f, NodeId u, const StrategyVector& x) {
  return f.h(u, x);
}

/// Draws S ~ x: each node joins independently with probability h_u(x).
inline std::vector<NodeId> sample_seed_set(std::span<const double> probabilities, Rng& rng) {
  std::vector<NodeId> seeds;
  for (NodeId u = 0; u < probabilities.size(); ++u) {
    if (rng.bernoulli(probabilities[u])) seeds.push_back(u);
  }
  return seeds;
}

inline std::vector<NodeId> sample_seed_set(const StrategyFunction& f, const StrategyVector& x,
                                           std::uint64_t seed) {
  Rng rng(seed);
  const auto p = f.probabilities(x);
  return sample_seed_set(p, rng);
}

}  // namespace cam
