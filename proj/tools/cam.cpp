// Command-line front end: experiments, single algorithms, the exact oracle,
// scoring a given strategy, and synthetic graph generation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cam/cam.hpp"

namespace {

struct Flags {
  std::string config;
  std::string graph;
  std::string model;
  std::string strategy;
  std::size_t dimensions = 0;
  std::vector<double> budgets;
  double t = 0.2;
  double eps = 0.1;
  double ell = 1.0;
  std::size_t mc_runs = 2000;
  std::uint64_t seed = 1;
  std::size_t max_samples = 0;
  std::string out = "-";
  std::string format = "csv";
  std::string trace;
  bool timing = false;
};

struct Registered {
  CLI::Option* config = nullptr;
  CLI::Option* graph = nullptr;
  CLI::Option* model = nullptr;
  CLI::Option* strategy = nullptr;
  CLI::Option* dimensions = nullptr;
  CLI::Option* budgets = nullptr;
  CLI::Option* t = nullptr;
  CLI::Option* eps = nullptr;
  CLI::Option* ell = nullptr;
  CLI::Option* mc_runs = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* max_samples = nullptr;
};

Registered add_common(CLI::App* app, Flags& f) {
  Registered r;
  r.config = app->add_option("--config", f.config, "JSON run configuration; flags override it");
  r.graph = app->add_option("--graph", f.graph, "edge-list file");
  r.model = app->add_option("--model", f.model, "diffusion model: ic or lt");
  r.strategy = app->add_option("--strategy", f.strategy,
                               "strategy function: personalized, characteristic or independent");
  r.dimensions = app->add_option("--dimensions", f.dimensions, "lattice dimension (independent only)");
  r.budgets = app->add_option("--k", f.budgets, "budget(s) k in strategy units")->delimiter(',');
  r.t = app->add_option("--t", f.t, "lattice granularity");
  r.eps = app->add_option("--eps", f.eps, "accuracy epsilon in (0, 1)");
  r.ell = app->add_option("--ell", f.ell, "confidence exponent");
  r.mc_runs = app->add_option("--mc-runs", f.mc_runs, "Monte Carlo simulations for scoring");
  r.seed = app->add_option("--seed", f.seed, "master random seed");
  r.max_samples = app->add_option("--max-samples", f.max_samples, "refuse collections larger than this (0: no limit)");
  app->add_option("--out", f.out, "output file, '-' for stdout");
  app->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--trace", f.trace, "write the greedy trace as CSV to this file");
  app->add_flag("--timing", f.timing, "fill the wall_time_ms column");
  return r;
}

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

cam::RunConfig resolve_config(const Flags& f, const Registered& r) {
  cam::RunConfig c;
  if (given(r.config)) c = cam::load_run_config(f.config);
  if (given(r.graph)) {
    c.graph_path = f.graph;
    c.generator.reset();
  }
  if (given(r.model)) c.model = cam::parse_model(f.model);
  if (given(r.strategy)) c.strategy.kind = cam::parse_strategy_kind(f.strategy);
  if (given(r.dimensions)) c.strategy.dimensions = f.dimensions;
  if (given(r.budgets)) c.budgets = f.budgets;
  if (given(r.t)) c.granularity = f.t;
  if (given(r.eps)) c.epsilon = f.eps;
  if (given(r.ell)) c.ell = f.ell;
  if (given(r.mc_runs)) c.mc_runs = f.mc_runs;
  if (given(r.seed)) c.seed = f.seed;
  if (given(r.max_samples)) c.max_samples = f.max_samples;
  if (f.timing) c.timing = true;
  return c;
}

void ensure_parent(const std::string& path) {
  if (path.empty() || path == "-") return;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

// --out wins; otherwise the config's output_dir receives results.<format>.
std::string output_path(const Flags& f, const cam::RunConfig& c) {
  if (f.out != "-" || c.output_dir.empty()) return f.out;
  return (std::filesystem::path(c.output_dir) / ("results." + f.format)).string();
}

void emit(const Flags& f, const cam::RunConfig& c, const std::vector<cam::ResultRow>& rows,
          const cam::GreedyTrace& trace) {
  const std::string out = output_path(f, c);
  ensure_parent(out);
  cam::emit_results(rows, cam::parse_output_format(f.format), out);
  if (!f.trace.empty()) {
    ensure_parent(f.trace);
    std::ofstream out(f.trace, std::ios::binary);
    if (!out) throw cam::Error("cannot open trace file '" + f.trace + "'");
    cam::write_trace_csv(out, trace);
  }
}

std::vector<cam::ResultRow> run_rows(cam::RunConfig c, const Flags& f,
                                     std::vector<cam::Algorithm> algorithms) {
  c.algorithms = std::move(algorithms);
  cam::GreedyTrace trace;
  auto rows = cam::run_experiment(c, f.trace.empty() ? nullptr : &trace);
  emit(f, c, rows, trace);
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Activity maximization via marketing strategies on social graphs"};
  app.require_subcommand(1);

  Flags f;
  auto* run = app.add_subcommand("run", "run the configured algorithms over the k sweep");
  const Registered run_opts = add_common(run, f);
  std::vector<std::string> algorithm_names;
  run->add_option("--algorithms", algorithm_names, "subset of sandwich,im,maxdegree,random,oracle")
      ->delimiter(',');

  auto* sand = app.add_subcommand("sandwich", "sandwich approximation only");
  const Registered sand_opts = add_common(sand, f);

  auto* base = app.add_subcommand("baseline", "comparison strategies");
  const Registered base_opts = add_common(base, f);
  std::vector<std::string> baseline_names{"im", "maxdegree", "random"};
  base->add_option("--algorithm", baseline_names, "im, maxdegree and/or random")->delimiter(',');

  auto* oracle = app.add_subcommand("oracle", "exact lattice optimum on a tiny instance");
  const Registered oracle_opts = add_common(oracle, f);

  auto* estimate = app.add_subcommand("estimate", "score a given strategy");
  const Registered estimate_opts = add_common(estimate, f);
  std::string x_text;
  std::size_t bound_samples = 10000;
  estimate->add_option("--x", x_text, "strategy as dim:steps;dim:steps (steps of t)");
  estimate->add_option("--samples", bound_samples, "samples for the bound estimates");

  auto* gen = app.add_subcommand("gen", "write a synthetic graph");
  std::string gen_type = "dag";
  std::size_t gen_nodes = 400;
  std::size_t gen_edges = 1010;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "-";
  gen->add_option("--type", gen_type, "dag, pa or two-community")
      ->check(CLI::IsMember({"dag", "pa", "two-community"}));
  gen->add_option("--nodes", gen_nodes, "node count");
  gen->add_option("--edges", gen_edges, "edge count");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output file, '-' for stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      cam::RunConfig c = resolve_config(f, run_opts);
      std::vector<cam::Algorithm> algorithms = c.algorithms;
      if (!algorithm_names.empty()) {
        algorithms.clear();
        for (const auto& name : algorithm_names) algorithms.push_back(cam::parse_algorithm(name));
      }
      run_rows(c, f, algorithms);
    } else if (sand->parsed()) {
      cam::RunConfig c = resolve_config(f, sand_opts);
      run_rows(c, f, {cam::Algorithm::kSandwich});
    } else if (base->parsed()) {
      cam::RunConfig c = resolve_config(f, base_opts);
      std::vector<cam::Algorithm> algorithms;
      for (const auto& name : baseline_names) {
        const auto a = cam::parse_algorithm(name);
        if (a == cam::Algorithm::kSandwich || a == cam::Algorithm::kOracle) {
          throw cam::ConfigError("'" + name + "' is not a baseline");
        }
        algorithms.push_back(a);
      }
      run_rows(c, f, algorithms);
    } else if (oracle->parsed()) {
      cam::RunConfig c = resolve_config(f, oracle_opts);
      run_rows(c, f, {cam::Algorithm::kOracle});
    } else if (estimate->parsed()) {
      cam::RunConfig c = resolve_config(f, estimate_opts);
      c.validate();
      const cam::Instance inst = cam::build_instance(c);
      const cam::StrategyVector x =
          cam::decode_strategy(x_text, inst.strategy.dimensions(), c.granularity);
      const auto p = inst.strategy.probabilities(x);
      const auto mc = cam::monte_carlo_fc(inst.graph, p, c.mc_runs, cam::scoring_seed(c.seed));
      const auto re = cam::generate_re_samples(inst.graph, inst.aggregates, bound_samples, c.seed,
                                               cam::Stream::kLowerFinal);
      const auto rn = cam::generate_rn_samples(inst.graph, inst.aggregates, bound_samples, c.seed,
                                               cam::Stream::kUpperFinal);
      const auto lower = cam::evaluate_estimator(re, p, cam::Estimator::kLower);
      const auto upper = cam::evaluate_estimator(rn, p, cam::Estimator::kUpper);
      cam::ResultRow row;
      row.algorithm = "estimate";
      row.k = x.spent();
      row.fc_estimate = mc.mean;
      row.fc_stderr = mc.std_error;
      row.samples_used = re.size() + rn.size();
      row.seed = c.seed;
      row.lower_estimate = lower.value;
      row.lower_stderr = lower.std_error;
      row.upper_estimate = upper.value;
      row.upper_stderr = upper.std_error;
      row.strategy = cam::encode_strategy(x);
      emit(f, c, {row}, {});
    } else if (gen->parsed()) {
      const auto g = cam::generate_graph(cam::parse_generator_kind(gen_type), gen_nodes, gen_edges,
                                         gen_seed, cam::DiffusionModel::kIndependentCascade);
      if (gen_out == "-") {
        cam::write_graph(std::cout, g);
      } else {
        ensure_parent(gen_out);
        cam::write_graph(gen_out, g);
      }
    }
  } catch (const cam::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
