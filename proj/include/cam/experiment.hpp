#pragma once

// Experiment orchestration: a declarative run configuration, a budget sweep
// over the requested algorithms, and CSV / JSON result emission.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cam/baselines.hpp"
#include "cam/diffusion.hpp"
#include "cam/error.hpp"
#include "cam/exact_oracle.hpp"
#include "cam/generators.hpp"
#include "cam/graph.hpp"
#include "cam/greedy.hpp"
#include "cam/imm.hpp"
#include "cam/rng.hpp"
#include "cam/sandwich.hpp"
#include "cam/strategy.hpp"

namespace cam {

enum class Algorithm { kSandwich, kInfluence, kMaxDegree, kRandom, kOracle };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kSandwich: return "sandwich";
    case Algorithm::kInfluence: return "im";
    case Algorithm::kMaxDegree: return "maxdegree";
    case Algorithm::kRandom: return "random";
    case Algorithm::kOracle: return "oracle";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view text) {
  for (Algorithm a : {Algorithm::kSandwich, Algorithm::kInfluence, Algorithm::kMaxDegree,
                      Algorithm::kRandom, Algorithm::kOracle}) {
    if (text == to_string(a)) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(text) +
                    "' (expected sandwich, im, maxdegree, random or oracle)");
}

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::kRandomDag;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::uint64_t seed = 1;
};

struct StrategyConfig {
  StrategyKind kind = StrategyKind::kPersonalized;
  /// Independent activation only. Empty curves with curves_per_node > 0
  /// draws random curves from curve_seed.
  std::size_t dimensions = 0;
  std::vector<ActivationCurve> curves;
  std::size_t curves_per_node = 0;
  std::uint64_t curve_seed = 1;
};

struct RunConfig {
  std::string graph_path;
  std::optional<GeneratorSpec> generator;
  DiffusionModel model = DiffusionModel::kIndependentCascade;
  StrategyConfig strategy;
  std::vector<double> budgets{1.0};  ///< the k sweep
  double granularity = 0.2;
  double epsilon = 0.1;
  double ell = 1.0;
  std::size_t mc_runs = 2000;
  std::uint64_t seed = 1;
  std::string output_dir;
  std::vector<Algorithm> algorithms{Algorithm::kSandwich, Algorithm::kInfluence,
                                    Algorithm::kMaxDegree, Algorithm::kRandom};
  std::size_t max_samples = 0;
  TinyInstanceGuard oracle_guard;
  bool timing = false;

  ImmParams imm_params() const { return {epsilon, ell, max_samples}; }

  bool wants(Algorithm a) const {
    return std::find(algorithms.begin(), algorithms.end(), a) != algorithms.end();
  }

  void validate() const {
    if (graph_path.empty() == !generator.has_value()) {
      throw ConfigError("config needs exactly one of 'graph' or 'generator'");
    }
    if (budgets.empty()) throw ConfigError("'k' must list at least one budget");
    for (double k : budgets) LatticeSpec{0, granularity, k}.validate();
    imm_params().validate();
    if (mc_runs < 1) throw ConfigError("'mc_runs' must be at least 1");
    if (algorithms.empty()) throw ConfigError("'algorithms' must not be empty");
    std::set<Algorithm> distinct(algorithms.begin(), algorithms.end());
    if (distinct.size() != algorithms.size()) throw ConfigError("'algorithms' lists a duplicate");
    if (strategy.kind == StrategyKind::kIndependentActivation && strategy.dimensions == 0) {
      throw ConfigError("independent activation needs 'dimensions' > 0");
    }
  }
};

// ---------------------------------------------------------------------------
// Config schema (JSON object; every key optional except one graph source):
//   graph: string | generator: {type: dag|pa|two-community, nodes, edges, seed}
//   model: ic|lt          strategy: {kind, dimensions, curves_per_node, curve_seed,
//                                    curves: [{node, dimension, scale, rate}]}
//   k: number | [numbers] t, epsilon, ell: number  mc_runs, seed, max_samples: integer
//   algorithms: [sandwich|im|maxdegree|random|oracle]  output_dir: string
//   oracle_guard: {max_nodes, max_edges, max_lattice_points}  timing: bool

namespace detail {

template <class T>
T json_get(const nlohmann::json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config key '" + where + key + "': " + e.what());
  }
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> known,
                           const std::string& where) {
  if (!obj.is_object()) throw ConfigError("config section '" + where + "' must be an object");
  for (const auto& item : obj.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError("unknown config key '" + where + item.key() + "'");
    }
  }
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  using detail::json_get;
  detail::reject_unknown(j,
                         {"graph", "generator", "model", "strategy", "k", "t", "epsilon", "ell",
                          "mc_runs", "seed", "output_dir", "algorithms", "max_samples",
                          "oracle_guard", "timing"},
                         "");
  RunConfig c;
  if (j.contains("graph")) c.graph_path = json_get<std::string>(j, "graph", "");
  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    detail::reject_unknown(g, {"type", "nodes", "edges", "seed"}, "generator.");
    GeneratorSpec spec;
    spec.kind = parse_generator_kind(json_get<std::string>(g, "type", "generator."));
    spec.nodes = json_get<std::size_t>(g, "nodes", "generator.");
    spec.edges = json_get<std::size_t>(g, "edges", "generator.");
    if (g.contains("seed")) spec.seed = json_get<std::uint64_t>(g, "seed", "generator.");
    c.generator = spec;
  }
  if (j.contains("model")) c.model = parse_model(json_get<std::string>(j, "model", ""));
  if (j.contains("strategy")) {
    const auto& s = j.at("strategy");
    detail::reject_unknown(s, {"kind", "dimensions", "curves", "curves_per_node", "curve_seed"},
                           "strategy.");
    if (s.contains("kind")) c.strategy.kind = parse_strategy_kind(json_get<std::string>(s, "kind", "strategy."));
    if (s.contains("dimensions")) c.strategy.dimensions = json_get<std::size_t>(s, "dimensions", "strategy.");
    if (s.contains("curves_per_node")) {
      c.strategy.curves_per_node = json_get<std::size_t>(s, "curves_per_node", "strategy.");
    }
    if (s.contains("curve_seed")) c.strategy.curve_seed = json_get<std::uint64_t>(s, "curve_seed", "strategy.");
    if (s.contains("curves")) {
      for (const auto& cj : s.at("curves")) {
        detail::reject_unknown(cj, {"node", "dimension", "scale", "rate"}, "strategy.curves.");
        ActivationCurve curve;
        curve.node = json_get<NodeId>(cj, "node", "strategy.curves.");
        curve.dimension = json_get<std::size_t>(cj, "dimension", "strategy.curves.");
        if (cj.contains("scale")) curve.scale = json_get<double>(cj, "scale", "strategy.curves.");
        if (cj.contains("rate")) curve.rate = json_get<double>(cj, "rate", "strategy.curves.");
        c.strategy.curves.push_back(curve);
      }
    }
  }
  if (j.contains("k")) {
    if (j.at("k").is_array()) {
      c.budgets = json_get<std::vector<double>>(j, "k", "");
    } else {
      c.budgets = {json_get<double>(j, "k", "")};
    }
  }
  if (j.contains("t")) c.granularity = json_get<double>(j, "t", "");
  if (j.contains("epsilon")) c.epsilon = json_get<double>(j, "epsilon", "");
  if (j.contains("ell")) c.ell = json_get<double>(j, "ell", "");
  if (j.contains("mc_runs")) c.mc_runs = json_get<std::size_t>(j, "mc_runs", "");
  if (j.contains("seed")) c.seed = json_get<std::uint64_t>(j, "seed", "");
  if (j.contains("output_dir")) c.output_dir = json_get<std::string>(j, "output_dir", "");
  if (j.contains("max_samples")) c.max_samples = json_get<std::size_t>(j, "max_samples", "");
  if (j.contains("timing")) c.timing = json_get<bool>(j, "timing", "");
  if (j.contains("algorithms")) {
    c.algorithms.clear();
    for (const auto& name : json_get<std::vector<std::string>>(j, "algorithms", "")) {
      c.algorithms.push_back(parse_algorithm(name));
    }
  }
  if (j.contains("oracle_guard")) {
    const auto& g = j.at("oracle_guard");
    detail::reject_unknown(g, {"max_nodes", "max_edges", "max_lattice_points"}, "oracle_guard.");
    if (g.contains("max_nodes")) c.oracle_guard.max_nodes = json_get<std::size_t>(g, "max_nodes", "oracle_guard.");
    if (g.contains("max_edges")) c.oracle_guard.max_edges = json_get<std::size_t>(g, "max_edges", "oracle_guard.");
    if (g.contains("max_lattice_points")) {
      c.oracle_guard.max_lattice_points = json_get<std::size_t>(g, "max_lattice_points", "oracle_guard.");
    }
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  RunConfig c = parse_run_config(j);
  // Relative graph and output paths are relative to the config file.
  if (!c.graph_path.empty() && std::filesystem::path(c.graph_path).is_relative()) {
    c.graph_path = (std::filesystem::path(path).parent_path() / c.graph_path).string();
  }
  if (!c.output_dir.empty() && std::filesystem::path(c.output_dir).is_relative()) {
    c.output_dir = (std::filesystem::path(path).parent_path() / c.output_dir).string();
  }
  return c;
}

// ---------------------------------------------------------------------------
// Instance construction

inline SocialGraph load_instance_graph(const RunConfig& c) {
  if (c.generator) {
    return generate_graph(c.generator->kind, c.generator->nodes, c.generator->edges,
                          c.generator->seed, c.model);
  }
  return load_graph(c.graph_path, c.model);
}

/// Each node gets `per_node` curves on distinct random dimensions with
/// scale in [0.5, 1] and rate in [0.5, 2].
inline std::vector<ActivationCurve> random_activation_curves(std::size_t n, std::size_t d,
                                                             std::size_t per_node,
                                                             std::uint64_t seed) {
  std::vector<ActivationCurve> curves;
  const std::size_t count = std::min(per_node, d);
  for (NodeId u = 0; u < n; ++u) {
    Rng rng(stream_seed(seed, Stream::kGenerator, 100 + u));
    std::vector<std::size_t> dims;
    while (dims.size() < count) {
      const auto dim = static_cast<std::size_t>(rng.below(d));
      if (std::find(dims.begin(), dims.end(), dim) == dims.end()) dims.push_back(dim);
    }
    for (std::size_t dim : dims) {
      curves.push_back({u, dim, 0.5 + 0.5 * rng.uniform(), 0.5 + 1.5 * rng.uniform()});
    }
  }
  return curves;
}

inline StrategyFunction build_strategy(const StrategyConfig& s, std::size_t n) {
  switch (s.kind) {
    case StrategyKind::kPersonalized: return StrategyFunction::personalized(n);
    case StrategyKind::kCharacteristicVector: return StrategyFunction::characteristic(n);
    case StrategyKind::kIndependentActivation: {
      auto curves = s.curves.empty()
                        ? random_activation_curves(n, s.dimensions, s.curves_per_node, s.curve_seed)
                        : s.curves;
      return StrategyFunction::independent_activation(n, s.dimensions, std::move(curves));
    }
  }
  throw ConfigError("unknown strategy kind");
}

// ---------------------------------------------------------------------------
// Results

struct ResultRow {
  std::string algorithm;
  double k = 0.0;
  double fc_estimate = 0.0;
  double fc_stderr = 0.0;
  std::optional<double> wall_time_ms;
  std::size_t samples_used = 0;
  std::uint64_t seed = 0;
  std::optional<double> lower_estimate;
  std::optional<double> lower_stderr;
  std::optional<double> upper_estimate;
  std::optional<double> upper_stderr;
  std::optional<double> exact_fc;
  std::string candidate;  ///< sandwich only: which candidate won
  std::string strategy;   ///< nonzero coordinates as "dim:steps;..."

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline std::string encode_strategy(const StrategyVector& x) {
  std::string out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x.step(i) == 0) continue;
    if (!out.empty()) out += ';';
    out += std::to_string(i) + ':' + std::to_string(x.step(i));
  }
  return out;
}

inline StrategyVector decode_strategy(std::string_view text, std::size_t dimensions,
                                      double granularity) {
  std::vector<std::uint32_t> steps(dimensions, 0);
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(';', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view item = text.substr(pos, end - pos);
    const std::size_t colon = item.find(':');
    const auto dim = colon == std::string_view::npos ? std::nullopt : detail::parse_uint(item.substr(0, colon));
    const auto count = colon == std::string_view::npos ? std::nullopt : detail::parse_uint(item.substr(colon + 1));
    if (!dim || !count) throw ConfigError("bad strategy entry '" + std::string(item) + "' (want dim:steps)");
    if (*dim >= dimensions) throw ConfigError("strategy names dimension " + std::to_string(*dim) + " out of range");
    steps[*dim] = static_cast<std::uint32_t>(*count);
    pos = end + 1;
  }
  return StrategyVector::from_steps(std::move(steps), granularity);
}

/// printf "%.6g".
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline double round_significant(double v) { return std::stod(format_number(v)); }

inline constexpr std::array<std::string_view, 14> kResultColumns{
    "algorithm",      "k",            "fc_estimate",    "fc_stderr",    "wall_time_ms",
    "samples_used",   "seed",         "lower_estimate", "lower_stderr", "upper_estimate",
    "upper_stderr",   "exact_fc",     "candidate",      "strategy"};

inline void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  for (std::size_t i = 0; i < kResultColumns.size(); ++i) out << (i ? "," : "") << kResultColumns[i];
  out << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& r : rows) {
    out << r.algorithm << ',' << format_number(r.k) << ',' << format_number(r.fc_estimate) << ','
        << format_number(r.fc_stderr) << ',' << opt(r.wall_time_ms) << ',' << r.samples_used << ','
        << r.seed << ',' << opt(r.lower_estimate) << ',' << opt(r.lower_stderr) << ','
        << opt(r.upper_estimate) << ',' << opt(r.upper_stderr) << ',' << opt(r.exact_fc) << ','
        << r.candidate << ',' << r.strategy << '\n';
  }
}

// JSON schema: {"columns": [...], "rows": [{column: value}]}. Absent optional
// values are null; numbers carry 6 significant digits.
inline nlohmann::json results_to_json(const std::vector<ResultRow>& rows) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(round_significant(*v)) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["columns"] = kResultColumns;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"algorithm", r.algorithm},
                         {"k", round_significant(r.k)},
                         {"fc_estimate", round_significant(r.fc_estimate)},
                         {"fc_stderr", round_significant(r.fc_stderr)},
                         {"wall_time_ms", opt(r.wall_time_ms)},
                         {"samples_used", r.samples_used},
                         {"seed", r.seed},
                         {"lower_estimate", opt(r.lower_estimate)},
                         {"lower_stderr", opt(r.lower_stderr)},
                         {"upper_estimate", opt(r.upper_estimate)},
                         {"upper_stderr", opt(r.upper_stderr)},
                         {"exact_fc", opt(r.exact_fc)},
                         {"candidate", r.candidate},
                         {"strategy", r.strategy}});
  }
  return j;
}

inline std::vector<ResultRow> results_from_json(const nlohmann::json& j) {
  std::vector<ResultRow> rows;
  try {
    auto opt = [](const nlohmann::json& v) -> std::optional<double> {
      if (v.is_null()) return std::nullopt;
      return v.get<double>();
    };
    for (const auto& r : j.at("rows")) {
      ResultRow row;
      row.algorithm = r.at("algorithm").get<std::string>();
      row.k = r.at("k").get<double>();
      row.fc_estimate = r.at("fc_estimate").get<double>();
      row.fc_stderr = r.at("fc_stderr").get<double>();
      row.wall_time_ms = opt(r.at("wall_time_ms"));
      row.samples_used = r.at("samples_used").get<std::size_t>();
      row.seed = r.at("seed").get<std::uint64_t>();
      row.lower_estimate = opt(r.at("lower_estimate"));
      row.lower_stderr = opt(r.at("lower_stderr"));
      row.upper_estimate = opt(r.at("upper_estimate"));
      row.upper_stderr = opt(r.at("upper_stderr"));
      row.exact_fc = opt(r.at("exact_fc"));
      row.candidate = r.at("candidate").get<std::string>();
      row.strategy = r.at("strategy").get<std::string>();
      rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("result JSON does not match schema: ") + e.what());
  }
  return rows;
}

inline void write_results_json(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << results_to_json(rows).dump(2) << '\n';
}

enum class OutputFormat { kCsv, kJson };

inline OutputFormat parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::kCsv;
  if (text == "json") return OutputFormat::kJson;
  throw ConfigError("unknown format '" + std::string(text) + "' (expected csv or json)");
}

inline void write_results(std::ostream& out, const std::vector<ResultRow>& rows, OutputFormat f) {
  if (f == OutputFormat::kCsv) {
    write_results_csv(out, rows);
  } else {
    write_results_json(out, rows);
  }
}

/// Writes to `path`, or stdout for "-" / empty.
inline void emit_results(const std::vector<ResultRow>& rows, OutputFormat format,
                         const std::string& path) {
  if (path.empty() || path == "-") {
    write_results(std::cout, rows, format);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file '" + path + "' for writing");
  write_results(out, rows, format);
  out.close();
  if (!out) throw Error("failed writing output file '" + path + "'");
}

inline void write_trace_csv(std::ostream& out, const GreedyTrace& trace) {
  out << "k,phase,iteration,dimension,gain,cumulative\n";
  for (const auto& r : trace) {
    out << format_number(r.budget) << ',' << r.phase << ',' << r.iteration << ',' << r.dimension
        << ',' << format_number(r.gain) << ',' << format_number(r.cumulative) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Orchestration

struct Instance {
  SocialGraph graph;
  GraphAggregates aggregates;
  StrategyFunction strategy;
};

inline Instance build_instance(const RunConfig& c) {
  SocialGraph g = load_instance_graph(c);
  GraphAggregates agg = compute_aggregates(g);
  StrategyFunction h = build_strategy(c.strategy, g.node_count());
  return {std::move(g), std::move(agg), std::move(h)};
}

/// One row for `algorithm` at budget k. Scores use a seed shared by all
/// algorithms, so comparisons at equal k see common random numbers.
inline ResultRow run_algorithm(const Instance& inst, const RunConfig& c, Algorithm algorithm,
                               double k, GreedyTrace* trace = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  const LatticeSpec spec{inst.strategy.dimensions(), c.granularity, k};
  inst.strategy.check_lattice(spec);
  const std::uint64_t mc_seed = scoring_seed(c.seed);
  ResultRow row;
  row.algorithm = std::string(to_string(algorithm));
  row.k = k;
  row.seed = c.seed;
  StrategyVector x;
  std::optional<McEstimate> score;
  switch (algorithm) {
    case Algorithm::kSandwich: {
      SandwichResult s = sandwich(inst.graph, inst.aggregates, inst.strategy, spec, c.imm_params(),
                                  c.mc_runs, c.seed, trace);
      x = s.x_sand;
      score = s.score();
      row.samples_used = s.lower_samples + s.upper_samples;
      row.lower_estimate = s.lower_at_sand.value;
      row.lower_stderr = s.lower_at_sand.std_error;
      row.upper_estimate = s.upper_at_sand.value;
      row.upper_stderr = s.upper_at_sand.std_error;
      row.candidate = std::string(to_string(s.chosen));
      break;
    }
    case Algorithm::kInfluence: {
      InfluenceResult r = baseline_im(inst.graph, inst.aggregates, inst.strategy, spec,
                                      c.imm_params(), c.seed, trace);
      x = r.x;
      row.samples_used = r.samples;
      break;
    }
    case Algorithm::kMaxDegree:
      x = baseline_max_degree(inst.graph, inst.strategy, spec);
      break;
    case Algorithm::kRandom:
      x = baseline_random(inst.strategy, spec, c.seed);
      break;
    case Algorithm::kOracle: {
      LatticeOptimum opt =
          lattice_opt_exact(inst.graph, inst.strategy, spec, BenefitKind::kExact, c.oracle_guard);
      x = opt.x;
      score = McEstimate{opt.value, 0.0, 0};
      break;
    }
  }
  if (!score) score = monte_carlo_fc(inst.graph, inst.strategy.probabilities(x), c.mc_runs, mc_seed);
  row.fc_estimate = score->mean;
  row.fc_stderr = score->std_error;
  row.strategy = encode_strategy(x);
  if (c.wants(Algorithm::kOracle)) row.exact_fc = fc_exact(inst.graph, x, inst.strategy, c.oracle_guard);
  if (c.timing) {
    row.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return row;
}

/// Rows ordered by budget, then by the configured algorithm order.
inline std::vector<ResultRow> run_experiment(const RunConfig& c, GreedyTrace* trace = nullptr) {
  c.validate();
  const Instance inst = build_instance(c);
  if (c.wants(Algorithm::kOracle)) c.oracle_guard.check(inst.graph);
  std::vector<ResultRow> rows;
  for (double k : c.budgets) {
    for (Algorithm a : c.algorithms) rows.push_back(run_algorithm(inst, c, a, k, trace));
  }
  return rows;
}

}  // namespace cam
