#include "rmpc/bench.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rmpc::bench {

namespace {

WeightBackend parse_backend(const std::string& name) {
  if (name == "cem" || name == "CEM") return WeightBackend::kCem;
  if (name == "mppi" || name == "MPPI") return WeightBackend::kMppi;
  throw std::invalid_argument("unknown weight backend '" + name + "' (known: cem, mppi)");
}

void set_parameter(SolverConfig& solver, const std::string& name, double value) {
  if (name == "kappa") {
    solver.kappa = value;
  } else if (name == "gamma") {
    solver.gamma = value;
  } else if (name == "beta") {
    solver.weights.beta = value;
  } else if (name == "alpha") {
    solver.alpha = value;
  } else {
    throw std::invalid_argument("unknown sweep parameter '" + name + "' (known: kappa, gamma, beta, alpha)");
  }
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const auto lo = std::stoull(item.substr(0, dash));
      const auto hi = std::stoull(item.substr(dash + 1));
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(std::stoull(item));
    }
  }
  return seeds;
}

void ExperimentConfig::validate() const {
  make_env(env);
  solver.validate();
  if (seeds.empty()) throw std::invalid_argument("seeds must be non-empty");
  if (episode_length < 1) throw std::invalid_argument("episode length must be >= 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
}

void apply_preset(ExperimentConfig& config, const std::string& preset) {
  SolverConfig& s = config.solver;
  s.horizon = 12;
  s.weights.beta = 1.0;
  s.gamma = 0.5;
  s.weights.lambda = 0.01;
  s.weights.temperature = 1.0;
  if (preset == "sim-gpu") {
    s.candidates = 4096;
    s.alpha = 0.5;
    s.oversample = 16 * s.candidates;
    s.eta = 0.0;
    s.weights.backend = WeightBackend::kCem;
  } else if (preset == "sim-cpu" || preset == "robot") {
    s.candidates = 32;
    s.alpha = 0.05;
    s.oversample = 4 * s.candidates;
    s.eta = preset == "robot" ? 0.5 : 0.25;
    s.weights.backend = WeightBackend::kMppi;
  } else {
    throw std::invalid_argument("unknown preset '" + preset + "' (known: sim-gpu, sim-cpu, robot)");
  }
}

void load_config_file(const std::filesystem::path& path, ExperimentConfig& config) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument("config: " + std::string(e.what()));
  }
  if (auto preset = tree.get_optional<std::string>("experiment.preset")) apply_preset(config, *preset);
  if (auto v = tree.get_optional<std::string>("experiment.env")) config.env = *v;
  if (auto v = tree.get_optional<std::string>("experiment.solver")) config.solver.variant = parse_solver_variant(*v);
  if (auto v = tree.get_optional<int>("experiment.episode_length")) config.episode_length = *v;
  if (auto v = tree.get_optional<std::string>("experiment.seeds")) config.seeds = parse_seed_list(*v);
  if (auto v = tree.get_optional<std::string>("experiment.output")) config.output_dir = *v;
  if (auto v = tree.get_optional<int>("experiment.jobs")) config.jobs = *v;

  SolverConfig& s = config.solver;
  if (auto v = tree.get_optional<long>("solver.horizon")) s.horizon = *v;
  if (auto v = tree.get_optional<std::size_t>("solver.candidates")) s.candidates = *v;
  if (auto v = tree.get_optional<std::size_t>("solver.oversample")) s.oversample = *v;
  if (auto v = tree.get_optional<double>("solver.alpha")) s.alpha = *v;
  if (auto v = tree.get_optional<double>("solver.gamma")) s.gamma = *v;
  if (auto v = tree.get_optional<double>("solver.eta")) s.eta = *v;
  if (auto v = tree.get_optional<double>("solver.kappa")) s.kappa = *v;
  if (auto v = tree.get_optional<double>("solver.deadline_ms")) s.deadline = *v / 1000.0;
  if (auto v = tree.get_optional<int>("solver.max_iterations")) s.max_iterations = *v;
  if (auto v = tree.get_optional<double>("solver.sigma_floor")) s.sigma_floor = *v;
  if (auto v = tree.get_optional<int>("solver.threads")) s.threads = *v;
  if (auto v = tree.get_optional<std::uint64_t>("solver.seed")) s.seed = *v;
  if (auto v = tree.get_optional<std::string>("weights.backend")) s.weights.backend = parse_backend(*v);
  if (auto v = tree.get_optional<double>("weights.lambda")) s.weights.lambda = *v;
  if (auto v = tree.get_optional<double>("weights.temperature")) s.weights.temperature = *v;
  if (auto v = tree.get_optional<double>("weights.beta")) s.weights.beta = *v;
}

std::filesystem::path default_output_dir() {
  if (const char* dir = std::getenv("RMPC_OUTPUT_DIR"); dir != nullptr && *dir != '\0') return dir;
  return "bench_out";
}

EpisodeRecord run_episode(const EnvSpec& env, const SolverConfig& solver, int episode_length,
                          std::uint64_t seed) {
  SolverConfig cfg = solver;
  cfg.seed = seed;
  EpisodeRecord record;
  record.seed = seed;
  record.rows.reserve(static_cast<std::size_t>(episode_length));

  Eigen::VectorXd x = env.initial_state;
  SolverState prev;
  bool have_prev = false;
  for (int t = 0; t < episode_length; ++t) {
    SolveOutput out = solve(env, x, have_prev ? &prev : nullptr, cfg);
    StepRow row;
    row.step = t;
    row.wall_time = out.result.wall_time;
    row.max_iteration_time = out.result.max_iteration_time;
    row.iterations = out.result.iterations;
    row.u = out.result.u;
    row.planned_cost = rollout_cost(env, x, out.state.plus.mu).cost;
    row.noise = out.result.final_noise;
    row.step_size = out.result.final_step;
    row.violation = env.constraint(x, row.u) > 0.0;
    row.stage_cost = realized_stage_cost(env, x, row.u);
    record.total_reward -= row.stage_cost;
    record.violation_steps += row.violation ? 1 : 0;
    record.rows.push_back(std::move(row));

    x = env.dynamics(x, record.rows.back().u);
    prev = std::move(out.state);
    have_prev = true;
  }
  const bool final_violation = env.constraint(x, Eigen::VectorXd::Zero(env.action_dim)) > 0.0;
  record.entered_violation = record.violation_steps > 0 || final_violation;
  return record;
}

std::vector<EpisodeRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const EnvSpec env = make_env(config.env);
  std::vector<EpisodeRecord> records(config.seeds.size());
  auto run_one = [&](std::size_t k) {
    records[k] = run_episode(env, config.solver, config.episode_length, config.seeds[k]);
  };
  if (config.jobs == 1) {
    for (std::size_t k = 0; k < records.size(); ++k) run_one(k);
  } else {
    tbb::task_arena arena(config.jobs);
    arena.execute([&] { tbb::parallel_for(std::size_t{0}, records.size(), run_one); });
  }
  return records;
}

NormalizedScores normalize_scores(const std::map<std::string, std::vector<double>>& totals) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& [method, values] : totals) {
    for (double v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  NormalizedScores out;
  out.degenerate = totals.size() < 2 || !(hi > lo);
  for (const auto& [method, values] : totals) {
    auto& dst = out.scores[method];
    dst.reserve(values.size());
    for (double v : values) dst.push_back(out.degenerate ? 0.5 : (v - lo) / (hi - lo));
  }
  return out;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<double> totals_of(const std::vector<EpisodeRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.total_reward);
  return out;
}

std::vector<SweepRow> ablation_sweep(const ExperimentConfig& base, const SweepSpec& sweep) {
  if (sweep.values.empty()) throw std::invalid_argument("sweep: no values given");
  std::vector<SweepRow> rows;
  for (double value : sweep.values) {
    ExperimentConfig cfg = base;
    set_parameter(cfg.solver, sweep.parameter, value);
    SweepRow row;
    row.value = value;
    row.records = run_experiment(cfg);
    row.totals = summarize(totals_of(row.records));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(9) << v;
  return os.str();
}

void write_episode_csv(std::ostream& os, const EpisodeRecord& record) {
  const Eigen::Index dims = record.rows.empty() ? 0 : record.rows.front().u.size();
  os << "step,iterations";
  for (Eigen::Index k = 0; k < dims; ++k) os << ",u" << k;
  os << ",planned_cost,noise,step_size,stage_cost,violation\n";
  for (const auto& row : record.rows) {
    os << row.step << ',' << row.iterations;
    for (Eigen::Index k = 0; k < dims; ++k) os << ',' << format_number(row.u[k]);
    os << ',' << format_number(row.planned_cost) << ',' << format_number(row.noise) << ','
       << format_number(row.step_size) << ',' << format_number(row.stage_cost) << ','
       << (row.violation ? 1 : 0) << '\n';
  }
}

void write_timing_csv(std::ostream& os, const EpisodeRecord& record) {
  os << "step,wall_time_s,max_iteration_s,iterations\n";
  for (const auto& row : record.rows) {
    os << row.step << ',' << format_number(row.wall_time) << ',' << format_number(row.max_iteration_time)
       << ',' << row.iterations << '\n';
  }
}

void write_episode_files(const std::filesystem::path& dir, const std::string& stem,
                         const std::vector<EpisodeRecord>& records) {
  std::filesystem::create_directories(dir);
  for (const auto& r : records) {
    const std::string base = stem + "_seed" + std::to_string(r.seed);
    std::ofstream steps(dir / (base + ".csv"));
    write_episode_csv(steps, r);
    std::ofstream timing(dir / (base + "_timing.csv"));
    write_timing_csv(timing, r);
  }
  std::ofstream totals(dir / (stem + "_totals.csv"));
  totals << "seed,total_reward,violation_steps,entered_violation\n";
  for (const auto& r : records) {
    totals << r.seed << ',' << format_number(r.total_reward) << ',' << r.violation_steps << ','
           << (r.entered_violation ? 1 : 0) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::string& key_name,
                       const std::vector<std::pair<std::string, Summary>>& rows) {
  os << key_name << ",mean,std,count\n";
  for (const auto& [key, s] : rows) {
    os << key << ',' << format_number(s.mean) << ',' << format_number(s.stddev) << ',' << s.count << '\n';
  }
}

void write_boxplot(const std::filesystem::path& dir, const std::string& stem, const std::string& title,
                   const NormalizedScores& scores) {
  std::filesystem::create_directories(dir);
  const std::string data_name = stem + "_boxplot.dat";
  std::size_t rows = 0;
  for (const auto& [m, v] : scores.scores) rows = std::max(rows, v.size());
  {
    std::ofstream data(dir / data_name);
    data << '#';
    for (const auto& [m, v] : scores.scores) data << ' ' << m;
    data << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
      bool first = true;
      for (const auto& [m, v] : scores.scores) {
        data << (first ? "" : " ") << (r < v.size() ? format_number(v[r]) : "NaN");
        first = false;
      }
      data << '\n';
    }
  }
  std::ofstream gp(dir / (stem + "_boxplot.gp"));
  gp << "set terminal pngcairo size 640,480\n"
     << "set output '" << stem << "_boxplot.png'\n"
     << "set title '" << title << "'\n"
     << "set style data boxplot\n"
     << "set style fill solid 0.3\n"
     << "set yrange [-0.05:1.05]\n"
     << "set ylabel 'normalized score'\n"
     << "unset key\n";
  gp << "set xtics (";
  int col = 1;
  for (const auto& [m, v] : scores.scores) {
    gp << (col > 1 ? ", " : "") << '\'' << m << "' " << col;
    ++col;
  }
  gp << ")\n";
  gp << "plot ";
  col = 1;
  for (std::size_t c = 0; c < scores.scores.size(); ++c, ++col) {
    gp << (c > 0 ? ", " : "") << '\'' << data_name << "' using (" << col << "):" << col;
  }
  gp << '\n';
}

}  // namespace rmpc::bench
