#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rmpc/envs.hpp"
#include "rmpc/gaussian_policy.hpp"
#include "rmpc/random.hpp"
#include "rmpc/weighting.hpp"

namespace rmpc {

enum class SolverVariant { kForward, kReverse, kReject, kAccel };

std::string to_string(SolverVariant v);
/// Accepts "forward", "reverse", "reject", "accel"; throws std::invalid_argument otherwise.
SolverVariant parse_solver_variant(const std::string& name);

struct SolverConfig {
  SolverVariant variant = SolverVariant::kAccel;
  std::size_t candidates = 32;   // N
  std::size_t oversample = 128;  // N~, only used by reject / accel
  Eigen::Index horizon = 12;
  double alpha = 0.05;
  double gamma = 0.5;   // slowdown gain
  double eta = 0.25;    // warm ratio
  double kappa = 1.0;   // complementary-distribution blend
  WeightConfig weights;
  double deadline = std::numeric_limits<double>::infinity();  // seconds per control step
  int max_iterations = 20;
  double sigma_floor = kDefaultSigmaFloor;
  double nonfinite_penalty = 1e3;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct CandidateBatch {
  std::vector<ActionSequence> sequences;
  CostVector costs;
  SignedWeightVector log_weights;
};

struct Gradient {
  Eigen::MatrixXd mu;
  Eigen::MatrixXd sigma;
};

/// Per-control-step optimizer state.
struct SolverState {
  PolicyParams plus;
  PolicyParams minus;
  PolicyParams tilde_plus;   // momentum points, accel only
  PolicyParams tilde_minus;
  double a = 0.0;            // a_i
  double A = 0.0;            // A_i = sum of a_k
  double sigma_max = 0.0;    // running max of per-iteration cost MAD
  int iteration = 0;         // iterations completed in the current step
  std::uint64_t step = 0;    // control step index
};

struct ControlResult {
  Eigen::VectorXd u;  // squashed first action
  int iterations = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  double wall_time = 0.0;
  double max_iteration_time = 0.0;
  double final_noise = 0.0;  // last s_i (accel)
  double final_step = 0.0;   // last a_i (accel)
  int nonfinite_costs = 0;
  int zero_weight_iterations = 0;  // forward: all weights vanished
  bool positive_cluster_empty = false;  // no positive update happened this step
  int negative_updates = 0;
};

/// Outcome of a single-policy update; `skipped` marks a no-information batch.
struct UpdateOutcome {
  PolicyParams params;
  bool skipped = false;
};

// ---------------------------------------------------------------- updates

/// Weighted-MLE Gaussian fit smoothed toward theta_i by alpha.
UpdateOutcome forward_update(const PolicyParams& theta_i, const std::vector<ActionSequence>& sequences,
                             const WeightVector& weights, double alpha,
                             double sigma_floor = kDefaultSigmaFloor);

/// g = (1/|C|) sum_{n in C} (-w_n) grad_theta ln pi(U_n; theta). Empty cluster -> nullopt.
std::optional<Gradient> md_gradient(const PolicyParams& theta, const std::vector<ActionSequence>& sequences,
                                    const std::vector<double>& weights,
                                    const std::vector<std::size_t>& cluster);

/// psi^{-1}(psi(point) - step * g) with both maps anchored at `anchor`.
PolicyParams mirror_step(const PolicyParams& point, const Gradient& g, double step,
                         const PolicyParams& anchor);

/// Mirror-descent step on the full batch with signed weights.
UpdateOutcome reverse_update(const PolicyParams& theta_i, const CandidateBatch& batch, double alpha,
                             double sigma_floor = kDefaultSigmaFloor);

struct RejectOutcome {
  SolverState state;
  bool plus_updated = false;
  bool minus_updated = false;
};

/// Decomposed update: theta+ over the positive cluster with ln H, theta- over
/// the negative cluster with |ln H|, each under its own mirror geometry.
RejectOutcome reject_update(const SolverState& state, const CandidateBatch& batch, double alpha,
                            double sigma_floor = kDefaultSigmaFloor);

/// Log of the unnormalized complementary score, -ln(pi-(U) + kappa pi+(mu-)).
double complementary_log_score(const PolicyParams& plus, const PolicyParams& minus,
                               const ActionSequence& u, double kappa);

/// Normalized selection probabilities from log scores (softmax).
std::vector<double> selection_probabilities(const std::vector<double>& log_scores);

/// Indices of the `count` selected candidates, ascending: top-`count` of
/// log score + standard Gumbel noise.
std::vector<std::size_t> select_without_replacement(const std::vector<double>& log_scores,
                                                    std::size_t count, const StreamKey& key);

/// Draws N~ candidates from pi+ and keeps N of them with probability
/// proportional to the complementary score.
std::vector<ActionSequence> compose_and_sample(const PolicyParams& plus, const PolicyParams& minus,
                                               std::size_t oversample, std::size_t count,
                                               double kappa, const StreamKey& key);

struct NoiseStrength {
  double s = 0.0;
  double sigma_max = 0.0;
  double sigma_std = 0.0;
  double sigma_mad = 0.0;
};

/// s = (1 - mad/std) * std / sigma_max in [0, 1], sigma_max the running max of
/// mad. Both scales use population normalization (divide by N).
NoiseStrength noise_strength(const CostVector& costs, double sigma_max_running);

struct StepSizes {
  double a = 0.0;
  double A = 0.0;
};

/// a' = a + alpha / (1 + 5 gamma s), A' = A + a'.
StepSizes step_size_advance(double a, double A, double s, double alpha, double gamma);

struct AccelStep {
  PolicyParams theta;  // theta_{i+1}
  PolicyParams tilde;  // theta~_i
};

/// One momentum step with an explicit mirror anchor:
///   tilde    = psi^{-1}(psi(tilde_prev) - a_i g)
///   theta'   = (A_i/A') theta + (a'/A') tilde + (a_i/A') (tilde - tilde_prev)
/// accel_update anchors at theta; tests freeze the anchor to check the
/// static-space equivalence with the textbook forms.
AccelStep accelerated_step(const PolicyParams& theta, const PolicyParams& tilde_prev, const Gradient& g,
                           const PolicyParams& anchor, double a_i, double A_i, double a_next,
                           double A_next, double sigma_floor = kDefaultSigmaFloor);

struct AccelOutcome {
  SolverState state;
  NoiseStrength noise;
  bool plus_updated = false;
  bool minus_updated = false;
};

AccelOutcome accel_update(const SolverState& state, const CandidateBatch& batch, const SolverConfig& config);

struct WarmStart {
  PolicyParams theta;
  double a = 0.0;
  double A = 0.0;
};

/// theta_1[:, 0:H-1] = (1 - eta) prior[:, 0:H-1] + eta theta*[:, 1:H], last
/// column from the prior; a_1 = (1 - eta) alpha + eta a_prv; A_1 = (a_1/2)(a_1/alpha + 1).
WarmStart warm_start(const PolicyParams& theta_star, const PolicyParams& prior, double a_prv, double eta,
                     double alpha);

// ---------------------------------------------------------------- loop

struct IterationTrace {
  int iteration = 0;  // 1-based, completed iterations
  const SolverState* state = nullptr;  // after the update
  const CandidateBatch* batch = nullptr;
  double noise = 0.0;
};

using IterationObserver = std::function<void(const IterationTrace&)>;

struct SolveOutput {
  ControlResult result;
  SolverState state;
};

/// One control step: warm start, then sample / evaluate / weight / update
/// until max_iterations or until another iteration would overrun the
/// deadline (estimated from the mean iteration time). At least one iteration
/// always runs.
SolveOutput solve(const EnvSpec& env, const Eigen::VectorXd& x, const SolverState* prev,
                  const SolverConfig& config, const IterationObserver& observer = {});

}  // namespace rmpc
