#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "rmpc/solvers.hpp"

namespace rmpc::bench {

struct ExperimentConfig {
  std::string env = "point_reacher";
  SolverConfig solver;
  int episode_length = 40;
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path output_dir;
  int jobs = 1;  // episodes run concurrently

  void validate() const;
};

/// Presets: "sim-gpu" (CEM, N = 4096), "sim-cpu" (MPPI, N = 32, eta = 0.25)
/// and "robot" (MPPI, N = 32, eta = 0.5). Overwrites the solver block.
void apply_preset(ExperimentConfig& config, const std::string& preset);

/// Reads a flat key = value file with [experiment], [solver] and [weights]
/// sections into `config`; keys not present keep their current value.
void load_config_file(const std::filesystem::path& path, ExperimentConfig& config);

/// "0-19", "1,5,7" or a mix of both.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Directory from $RMPC_OUTPUT_DIR, or "bench_out".
std::filesystem::path default_output_dir();

struct StepRow {
  int step = 0;
  double wall_time = 0.0;
  double max_iteration_time = 0.0;
  int iterations = 0;
  Eigen::VectorXd u;
  double planned_cost = 0.0;  // J of the final mean sequence from this state
  double noise = 0.0;         // s_i
  double step_size = 0.0;     // a_i
  double stage_cost = 0.0;    // realized, including constraint penalty
  bool violation = false;
};

struct EpisodeRecord {
  std::uint64_t seed = 0;
  std::vector<StepRow> rows;
  double total_reward = 0.0;  // -sum of realized stage costs
  int violation_steps = 0;
  bool entered_violation = false;  // any visited state violates the constraint
};

EpisodeRecord run_episode(const EnvSpec& env, const SolverConfig& solver, int episode_length,
                          std::uint64_t seed);

/// One episode per seed, in seed order.
std::vector<EpisodeRecord> run_experiment(const ExperimentConfig& config);

struct NormalizedScores {
  std::map<std::string, std::vector<double>> scores;
  bool degenerate = false;
};

/// (score - min) / (max - min) with min and max over every run of every
/// method; a single method or max == min gives 0.5 everywhere, flagged.
NormalizedScores normalize_scores(const std::map<std::string, std::vector<double>>& totals);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  std::size_t count = 0;
};
Summary summarize(const std::vector<double>& values);

std::vector<double> totals_of(const std::vector<EpisodeRecord>& records);

struct SweepSpec {
  std::string parameter;  // kappa, gamma, beta or alpha
  std::vector<double> values;
};

struct SweepRow {
  double value = 0.0;
  Summary totals;
  std::vector<EpisodeRecord> records;
};

std::vector<SweepRow> ablation_sweep(const ExperimentConfig& base, const SweepSpec& sweep);

// ---------------------------------------------------------------- output

/// Fixed header, one row per control step, 9 significant digits. Timing
/// columns are written separately so that this file is reproducible.
void write_episode_csv(std::ostream& os, const EpisodeRecord& record);
void write_timing_csv(std::ostream& os, const EpisodeRecord& record);
void write_episode_files(const std::filesystem::path& dir, const std::string& stem,
                         const std::vector<EpisodeRecord>& records);

void write_summary_csv(std::ostream& os, const std::string& key_name,
                       const std::vector<std::pair<std::string, Summary>>& rows);

/// Box-plot data (one column per method) plus a gnuplot script rendering it.
void write_boxplot(const std::filesystem::path& dir, const std::string& stem, const std::string& title,
                   const NormalizedScores& scores);

std::string format_number(double v);

}  // namespace rmpc::bench
