// bench: run, sweep and compare sampling-based MPC solvers on the built-in
// environments. See README.md for examples.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rmpc/bench.hpp"

namespace {

using rmpc::bench::ExperimentConfig;

struct CommonOptions {
  std::optional<std::string> config_file;
  std::optional<std::string> preset;
  std::optional<std::string> env;
  std::optional<std::string> solver;
  std::optional<int> steps;
  std::optional<std::string> seeds;
  std::optional<std::string> out;
  std::optional<int> jobs;

  std::optional<long> horizon;
  std::optional<std::size_t> candidates;
  std::optional<std::size_t> oversample;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> gamma;
  std::optional<double> eta;
  std::optional<double> kappa;
  std::optional<double> lambda;
  std::optional<double> temperature;
  std::optional<double> deadline_ms;
  std::optional<int> max_iterations;
  std::optional<int> threads;
  std::optional<std::string> backend;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_file, "key = value config file ([experiment], [solver], [weights])");
  cmd->add_option("--preset", o.preset, "hyperparameter preset: sim-gpu, sim-cpu, robot");
  cmd->add_option("--env", o.env, "environment name");
  cmd->add_option("--steps", o.steps, "episode length in control steps");
  cmd->add_option("--seeds", o.seeds, "seed list, e.g. 0-19 or 1,5,7");
  cmd->add_option("--seed", o.seed, "single seed (same as --seeds N)");
  cmd->add_option("--out", o.out, "output directory (default $RMPC_OUTPUT_DIR or bench_out)");
  cmd->add_option("--jobs", o.jobs, "episodes run concurrently");
  cmd->add_option("--horizon", o.horizon, "H");
  cmd->add_option("--candidates", o.candidates, "N");
  cmd->add_option("--oversample", o.oversample, "N~ (reject / accel)");
  cmd->add_option("--alpha", o.alpha, "step size");
  cmd->add_option("--beta", o.beta, "negative ratio");
  cmd->add_option("--gamma", o.gamma, "slowdown gain");
  cmd->add_option("--eta", o.eta, "warm ratio");
  cmd->add_option("--kappa", o.kappa, "complementary-distribution blend");
  cmd->add_option("--lambda", o.lambda, "CEM quantile fraction");
  cmd->add_option("--temperature", o.temperature, "MPPI temperature");
  cmd->add_option("--deadline-ms", o.deadline_ms, "per-step wall-clock budget in milliseconds");
  cmd->add_option("--max-iterations", o.max_iterations, "iteration cap per control step");
  cmd->add_option("--threads", o.threads, "rollout threads");
  cmd->add_option("--backend", o.backend, "weight backend: cem or mppi");
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ExperimentConfig build_config(const CommonOptions& o) {
  ExperimentConfig c;
  c.output_dir = rmpc::bench::default_output_dir();
  if (o.preset) rmpc::bench::apply_preset(c, *o.preset);
  if (o.config_file) rmpc::bench::load_config_file(*o.config_file, c);
  if (o.env) c.env = *o.env;
  if (o.solver) c.solver.variant = rmpc::parse_solver_variant(*o.solver);
  if (o.steps) c.episode_length = *o.steps;
  if (o.seeds) c.seeds = rmpc::bench::parse_seed_list(*o.seeds);
  if (o.seed) c.seeds = {*o.seed};
  if (o.out) c.output_dir = *o.out;
  if (o.jobs) c.jobs = *o.jobs;
  auto& s = c.solver;
  if (o.horizon) s.horizon = *o.horizon;
  if (o.candidates) s.candidates = *o.candidates;
  if (o.oversample) s.oversample = *o.oversample;
  if (o.alpha) s.alpha = *o.alpha;
  if (o.beta) s.weights.beta = *o.beta;
  if (o.gamma) s.gamma = *o.gamma;
  if (o.eta) s.eta = *o.eta;
  if (o.kappa) s.kappa = *o.kappa;
  if (o.lambda) s.weights.lambda = *o.lambda;
  if (o.temperature) s.weights.temperature = *o.temperature;
  if (o.deadline_ms) s.deadline = *o.deadline_ms / 1000.0;
  if (o.max_iterations) s.max_iterations = *o.max_iterations;
  if (o.threads) s.threads = *o.threads;
  if (o.backend) {
    if (*o.backend == "cem") {
      s.weights.backend = rmpc::WeightBackend::kCem;
    } else if (*o.backend == "mppi") {
      s.weights.backend = rmpc::WeightBackend::kMppi;
    } else {
      throw std::invalid_argument("unknown weight backend '" + *o.backend + "' (known: cem, mppi)");
    }
  }
  c.validate();
  return c;
}

std::string stem_for(const ExperimentConfig& c) {
  return c.env + "_" + rmpc::to_string(c.solver.variant);
}

int cmd_run(const CommonOptions& o) {
  const ExperimentConfig c = build_config(o);
  const auto records = rmpc::bench::run_experiment(c);
  rmpc::bench::write_episode_files(c.output_dir, stem_for(c), records);
  const auto s = rmpc::bench::summarize(rmpc::bench::totals_of(records));
  std::cout << stem_for(c) << ": total reward " << rmpc::bench::format_number(s.mean) << " +- "
            << rmpc::bench::format_number(s.stddev) << " over " << s.count << " seeds -> " << c.output_dir.string()
            << '\n';
  return 0;
}

int cmd_sweep(const CommonOptions& o, const std::string& parameter, const std::string& values) {
  const ExperimentConfig c = build_config(o);
  rmpc::bench::SweepSpec spec{parameter, {}};
  for (const auto& v : split(values)) spec.values.push_back(std::stod(v));
  const auto rows = rmpc::bench::ablation_sweep(c, spec);

  std::vector<std::pair<std::string, rmpc::bench::Summary>> summary;
  std::map<std::string, std::vector<double>> totals;
  for (const auto& row : rows) {
    const std::string key = rmpc::bench::format_number(row.value);
    summary.emplace_back(key, row.totals);
    totals[parameter + "=" + key] = rmpc::bench::totals_of(row.records);
    rmpc::bench::write_episode_files(c.output_dir, stem_for(c) + "_" + parameter + key, row.records);
  }
  const std::string stem = stem_for(c) + "_sweep_" + parameter;
  std::filesystem::create_directories(c.output_dir);
  std::ofstream csv(c.output_dir / (stem + ".csv"));
  rmpc::bench::write_summary_csv(csv, parameter, summary);
  rmpc::bench::write_boxplot(c.output_dir, stem, c.env + " " + parameter + " sweep",
                             rmpc::bench::normalize_scores(totals));
  rmpc::bench::write_summary_csv(std::cout, parameter, summary);
  return 0;
}

int cmd_compare(const CommonOptions& o, const std::string& solvers) {
  ExperimentConfig c = build_config(o);
  std::map<std::string, std::vector<double>> totals;
  for (const auto& name : split(solvers)) {
    c.solver.variant = rmpc::parse_solver_variant(name);
    const auto records = rmpc::bench::run_experiment(c);
    rmpc::bench::write_episode_files(c.output_dir, stem_for(c), records);
    totals[name] = rmpc::bench::totals_of(records);
  }
  const auto normalized = rmpc::bench::normalize_scores(totals);
  if (normalized.degenerate) std::cerr << "warning: degenerate normalization (single method or equal totals)\n";
  std::vector<std::pair<std::string, rmpc::bench::Summary>> summary;
  for (const auto& [name, scores] : normalized.scores) summary.emplace_back(name, rmpc::bench::summarize(scores));
  const std::string stem = c.env + "_compare";
  std::filesystem::create_directories(c.output_dir);
  std::ofstream csv(c.output_dir / (stem + ".csv"));
  rmpc::bench::write_summary_csv(csv, "solver", summary);
  rmpc::bench::write_boxplot(c.output_dir, stem, c.env, normalized);
  rmpc::bench::write_summary_csv(std::cout, "solver", summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-based MPC benchmark (forward / reverse / reject / accel)"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "run one solver on one environment");
  add_common(run, run_opts);
  run->add_option("--solver", run_opts.solver, "forward, reverse, reject or accel");

  CommonOptions sweep_opts;
  std::string sweep_param;
  std::string sweep_values;
  auto* sweep = app.add_subcommand("sweep", "ablation over kappa, gamma, beta or alpha");
  add_common(sweep, sweep_opts);
  sweep->add_option("--solver", sweep_opts.solver, "forward, reverse, reject or accel");
  sweep->add_option("--param", sweep_param, "kappa, gamma, beta or alpha")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();

  CommonOptions compare_opts;
  std::string compare_solvers = "forward,reverse,reject,accel";
  auto* compare = app.add_subcommand("compare", "normalized scores of several solvers on one environment");
  add_common(compare, compare_opts);
  compare->add_option("--solvers", compare_solvers, "comma-separated solver names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_param, sweep_values);
    if (compare->parsed()) return cmd_compare(compare_opts, compare_solvers);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
