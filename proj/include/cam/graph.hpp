#pragma once

// Social graph with per-edge diffusion parameters and activity strengths.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cam/error.hpp"
#include "cam/rng.hpp"

namespace cam {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

enum class DiffusionModel { kIndependentCascade, kLinearThreshold };

inline std::string_view to_string(DiffusionModel model) {
  return model == DiffusionModel::kIndependentCascade ? "ic" : "lt";
}

inline DiffusionModel parse_model(std::string_view text) {
  if (text == "ic" || text == "IC") return DiffusionModel::kIndependentCascade;
  if (text == "lt" || text == "LT") return DiffusionModel::kLinearThreshold;
  throw ConfigError("unknown diffusion model '" + std::string(text) + "' (expected ic or lt)");
}

/// Directed edge. `diffusion` is p_uv under IC and b_uv under LT.
struct Edge {
  NodeId source = 0;
  NodeId target = 0;
  double diffusion = 0.0;
  double strength = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable directed graph with forward and reverse CSR adjacency.
class SocialGraph {
 public:
  /// Sum of LT in-weights may exceed 1 by at most this much.
  static constexpr double kWeightSumTolerance = 1e-9;

  SocialGraph() = default;

  SocialGraph(std::size_t node_count, std::vector<Edge> edges, DiffusionModel model,
              std::vector<std::string> labels = {})
      : node_count_(node_count), model_(model), edges_(std::move(edges)), labels_(std::move(labels)) {
    if (!labels_.empty() && labels_.size() != node_count_) {
      throw ValidationError("label count does not match node count");
    }
    if (edges_.size() > std::numeric_limits<EdgeId>::max()) {
      throw ValidationError("too many edges");
    }
    validate_edges();
    build_adjacency();
    validate_weight_sums();
  }

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  DiffusionModel model() const noexcept { return model_; }

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }

  std::span<const EdgeId> out_edges(NodeId u) const {
    return {out_ids_.data() + out_offsets_[u], out_ids_.data() + out_offsets_[u + 1]};
  }
  std::span<const EdgeId> in_edges(NodeId v) const {
    return {in_ids_.data() + in_offsets_[v], in_ids_.data() + in_offsets_[v + 1]};
  }
  std::size_t out_degree(NodeId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }
  std::size_t in_degree(NodeId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }

  /// Original string labels when the input used non-numeric ids; empty otherwise.
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Same topology and strengths under a different diffusion model.
  SocialGraph with_model(DiffusionModel model) const {
    return SocialGraph(node_count_, edges_, model, labels_);
  }

  friend bool operator==(const SocialGraph& a, const SocialGraph& b) {
    return a.node_count_ == b.node_count_ && a.model_ == b.model_ && a.edges_ == b.edges_;
  }

 private:
  void validate_edges() const {
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const Edge& e = edges_[i];
      const std::string where =
          "edge " + std::to_string(e.source) + "->" + std::to_string(e.target);
      if (e.source >= node_count_ || e.target >= node_count_) {
        throw ValidationError(where + ": node id out of range");
      }
      if (e.source == e.target) throw ValidationError(where + ": self-loop");
      if (!std::isfinite(e.diffusion) || e.diffusion < 0.0 || e.diffusion > 1.0) {
        throw ValidationError(where + ": diffusion parameter must lie in [0, 1]");
      }
      if (!std::isfinite(e.strength) || e.strength < 0.0) {
        throw ValidationError(where + ": activity strength must be finite and nonnegative");
      }
    }
    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(edges_.size());
    for (const Edge& e : edges_) pairs.emplace_back(e.source, e.target);
    std::sort(pairs.begin(), pairs.end());
    auto dup = std::adjacent_find(pairs.begin(), pairs.end());
    if (dup != pairs.end()) {
      throw ValidationError("parallel edge " + std::to_string(dup->first) + "->" +
                            std::to_string(dup->second));
    }
  }

  void build_adjacency() {
    out_offsets_.assign(node_count_ + 1, 0);
    in_offsets_.assign(node_count_ + 1, 0);
    for (const Edge& e : edges_) {
      ++out_offsets_[e.source + 1];
      ++in_offsets_[e.target + 1];
    }
    std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
    std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());
    out_ids_.resize(edges_.size());
    in_ids_.resize(edges_.size());
    std::vector<std::size_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
    std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
    for (EdgeId e = 0; e < edges_.size(); ++e) {
      out_ids_[out_fill[edges_[e].source]++] = e;
      in_ids_[in_fill[edges_[e].target]++] = e;
    }
  }

  void validate_weight_sums() const {
    if (model_ != DiffusionModel::kLinearThreshold) return;
    for (NodeId v = 0; v < node_count_; ++v) {
      double sum = 0.0;
      for (EdgeId e : in_edges(v)) sum += edges_[e].diffusion;
      if (sum > 1.0 + kWeightSumTolerance) {
        std::ostringstream msg;
        msg << "node " << (labels_.empty() ? std::to_string(v) : labels_[v])
            << ": LT in-weights sum to " << sum << " > 1";
        throw ValidationError(msg.str());
      }
    }
  }

  std::size_t node_count_ = 0;
  DiffusionModel model_ = DiffusionModel::kIndependentCascade;
  std::vector<Edge> edges_;
  std::vector<std::string> labels_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<std::size_t> in_offsets_{0};
  std::vector<EdgeId> out_ids_;
  std::vector<EdgeId> in_ids_;
};

// ---------------------------------------------------------------------------
// Edge-list I/O

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::optional<double> parse_double(std::string_view s) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

struct RawEdge {
  std::size_t line;
  std::string_view source;
  std::string_view target;
  std::optional<double> diffusion;
  std::optional<double> strength;
};

}  // namespace detail

/// Parses an edge list:
///   `<src> <dst> [diffusion_param] [activity_strength]`
/// `#` and `%` lines are comments, except `# nodes <n>`, which fixes the node
/// count (written by write_graph so isolated trailing nodes survive a
/// round trip). A Matrix Market header switches to 1-based ids and skips the
/// size line; matrix values are ignored.
///
/// Numeric labels are used as node ids directly. If any label is not a
/// nonnegative integer, every label is remapped to a dense id in order of
/// first appearance and the originals are kept in labels().
///
/// Missing diffusion parameters default to 1 / in-degree(target); missing
/// strengths default to `default_strength`.
inline SocialGraph parse_edge_list(std::istream& in, DiffusionModel model,
                                   double default_strength = 1.0) {
  if (!std::isfinite(default_strength) || default_strength < 0.0) {
    throw ConfigError("default activity strength must be finite and nonnegative");
  }
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));

  bool matrix_market = false;
  bool size_line_pending = false;
  std::size_t declared_nodes = 0;
  std::vector<detail::RawEdge> raw;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    std::string_view text = detail::trim(lines[i]);
    if (text.empty()) continue;
    if (text.starts_with("%%MatrixMarket")) {
      matrix_market = true;
      size_line_pending = true;
      continue;
    }
    if (text.front() == '#' || text.front() == '%') {
      auto tokens = detail::split_ws(text.substr(1));
      if (tokens.size() == 2 && tokens[0] == "nodes") {
        auto n = detail::parse_uint(tokens[1]);
        if (!n) throw ParseError(line_no, "bad node count in '# nodes' header");
        declared_nodes = static_cast<std::size_t>(*n);
      }
      continue;
    }
    auto tokens = detail::split_ws(text);
    if (size_line_pending) {
      size_line_pending = false;
      if (tokens.size() != 3) throw ParseError(line_no, "expected Matrix Market size line");
      auto rows = detail::parse_uint(tokens[0]);
      auto cols = detail::parse_uint(tokens[1]);
      if (!rows || !cols) throw ParseError(line_no, "bad Matrix Market size line");
      declared_nodes = static_cast<std::size_t>(std::max(*rows, *cols));
      continue;
    }
    if (tokens.size() < 2 || tokens.size() > 4) {
      throw ParseError(line_no, "expected '<src> <dst> [diffusion_param] [activity_strength]'");
    }
    detail::RawEdge edge{line_no, tokens[0], tokens[1], std::nullopt, std::nullopt};
    if (!matrix_market) {
      if (tokens.size() >= 3) {
        edge.diffusion = detail::parse_double(tokens[2]);
        if (!edge.diffusion) throw ParseError(line_no, "bad diffusion parameter");
      }
      if (tokens.size() == 4) {
        edge.strength = detail::parse_double(tokens[3]);
        if (!edge.strength) throw ParseError(line_no, "bad activity strength");
      }
    }
    raw.push_back(edge);
  }

  bool numeric = true;
  for (const auto& e : raw) {
    if (!detail::parse_uint(e.source) || !detail::parse_uint(e.target)) {
      numeric = false;
      break;
    }
  }
  if (matrix_market && !numeric) throw ParseError(1, "Matrix Market ids must be integers");

  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> label_ids;
  auto resolve = [&](std::string_view token, std::size_t line_no) -> NodeId {
    if (numeric) {
      std::uint64_t id = *detail::parse_uint(token);
      if (matrix_market) {
        if (id == 0) throw ParseError(line_no, "Matrix Market ids are 1-based");
        --id;
      }
      if (id >= std::numeric_limits<NodeId>::max()) throw ParseError(line_no, "node id too large");
      return static_cast<NodeId>(id);
    }
    auto [it, inserted] = label_ids.try_emplace(std::string(token), static_cast<NodeId>(labels.size()));
    if (inserted) labels.emplace_back(token);
    return it->second;
  };

  std::vector<Edge> edges;
  std::vector<bool> has_param;
  edges.reserve(raw.size());
  std::size_t node_count = numeric ? declared_nodes : 0;
  for (const auto& r : raw) {
    Edge e;
    e.source = resolve(r.source, r.line);
    e.target = resolve(r.target, r.line);
    if (e.source == e.target) throw ParseError(r.line, "self-loop");
    e.diffusion = r.diffusion.value_or(0.0);
    e.strength = r.strength.value_or(default_strength);
    has_param.push_back(r.diffusion.has_value());
    if (numeric) node_count = std::max<std::size_t>(node_count, std::max(e.source, e.target) + std::size_t{1});
    edges.push_back(e);
  }
  if (!numeric) node_count = labels.size();

  std::vector<std::size_t> indegree(node_count, 0);
  for (const Edge& e : edges) ++indegree[e.target];
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!has_param[i]) edges[i].diffusion = 1.0 / static_cast<double>(indegree[edges[i].target]);
  }

  return SocialGraph(node_count, std::move(edges), model, std::move(labels));
}

inline SocialGraph load_graph(const std::string& path, DiffusionModel model,
                              double default_strength = 1.0) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open graph file '" + path + "'");
  return parse_edge_list(in, model, default_strength);
}

/// Writes `# nodes <n>` followed by one `<src> <dst> <param> <strength>` line per edge.
inline void write_graph(std::ostream& out, const SocialGraph& g) {
  out << "# nodes " << g.node_count() << '\n';
  out << std::setprecision(17);
  for (const Edge& e : g.edges()) {
    out << e.source << ' ' << e.target << ' ' << e.diffusion << ' ' << e.strength << '\n';
  }
}

inline void write_graph(const std::string& path, const SocialGraph& g) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write graph file '" + path + "'");
  write_graph(out, g);
}

/// Writes `<dense id> <original label>` lines for a remapped graph.
inline void write_label_map(std::ostream& out, const SocialGraph& g) {
  for (std::size_t i = 0; i < g.labels().size(); ++i) out << i << ' ' << g.labels()[i] << '\n';
}

// ---------------------------------------------------------------------------
// Aggregates

/// Inverse-CDF sampler over a finite index set with nonnegative masses.
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;

  explicit DiscreteDistribution(std::span<const double> masses) : cdf_(masses.size()) {
    double total = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      total += masses[i];
      cdf_[i] = total;
    }
    if (!(total > 0.0)) throw DegenerateInstanceError("distribution has zero total mass");
    for (double& c : cdf_) c /= total;
    // The last positive-mass entry closes the CDF at exactly 1.
    for (std::size_t i = cdf_.size(); i-- > 0;) {
      if (masses[i] > 0.0) {
        for (std::size_t j = i; j < cdf_.size(); ++j) cdf_[j] = 1.0;
        break;
      }
    }
  }

  std::size_t size() const noexcept { return cdf_.size(); }
  std::span<const double> cdf() const noexcept { return cdf_; }

  double probability(std::size_t i) const { return cdf_[i] - (i == 0 ? 0.0 : cdf_[i - 1]); }

  std::size_t sample(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

struct GraphAggregates {
  double total_strength = 0.0;     ///< T: sum of A_uv over all edges
  double total_node_weight = 0.0;  ///< W: sum of w(u)
  std::vector<double> node_weight;  ///< w(u): half the strength of every edge incident to u
  DiscreteDistribution edge_distribution;  ///< mass A_uv / T
  DiscreteDistribution node_distribution;  ///< mass w(u) / W
};

inline double total_strength(const SocialGraph& g) {
  double total = 0.0;
  for (const Edge& e : g.edges()) total += e.strength;
  return total;
}

/// w(u) = sum over edges incident to u (either direction) of A/2.
inline std::vector<double> node_weights(const SocialGraph& g) {
  std::vector<double> w(g.node_count(), 0.0);
  for (const Edge& e : g.edges()) {
    w[e.source] += e.strength / 2.0;
    w[e.target] += e.strength / 2.0;
  }
  return w;
}

inline GraphAggregates compute_aggregates(const SocialGraph& g) {
  GraphAggregates agg;
  agg.total_strength = total_strength(g);
  if (!(agg.total_strength > 0.0)) {
    throw DegenerateInstanceError("total activity strength is zero; every strategy has benefit 0");
  }
  agg.node_weight = node_weights(g);
  agg.total_node_weight = std::accumulate(agg.node_weight.begin(), agg.node_weight.end(), 0.0);
  if (std::abs(agg.total_node_weight - agg.total_strength) >
      1e-9 * std::max(1.0, agg.total_strength)) {
    throw Error("internal: node weights do not sum to total strength");
  }
  std::vector<double> strengths;
  strengths.reserve(g.edge_count());
  for (const Edge& e : g.edges()) strengths.push_back(e.strength);
  agg.edge_distribution = DiscreteDistribution(strengths);
  agg.node_distribution = DiscreteDistribution(agg.node_weight);
  return agg;
}

}  // namespace cam
