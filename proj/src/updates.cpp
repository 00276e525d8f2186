#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rmpc/solvers.hpp"

namespace rmpc {

namespace {

void require_batch(const std::vector<ActionSequence>& sequences, const std::vector<double>& weights) {
  if (sequences.size() != weights.size()) throw std::invalid_argument("batch: sequences and weights differ in length");
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

std::vector<double> negated(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return -x; });
  return out;
}

}  // namespace

std::string to_string(SolverVariant v) {
  switch (v) {
    case SolverVariant::kForward: return "forward";
    case SolverVariant::kReverse: return "reverse";
    case SolverVariant::kReject: return "reject";
    case SolverVariant::kAccel: return "accel";
  }
  return "unknown";
}

SolverVariant parse_solver_variant(const std::string& name) {
  if (name == "forward") return SolverVariant::kForward;
  if (name == "reverse") return SolverVariant::kReverse;
  if (name == "reject") return SolverVariant::kReject;
  if (name == "accel") return SolverVariant::kAccel;
  throw std::invalid_argument("unknown solver '" + name + "' (known: forward, reverse, reject, accel)");
}

void SolverConfig::validate() const {
  weights.validate();
  if (candidates < 2) throw std::invalid_argument("candidates must be >= 2");
  if (oversample < candidates) throw std::invalid_argument("oversample must be >= candidates");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  if (!(deadline >= 0.0)) throw std::invalid_argument("deadline must be >= 0");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(sigma_floor > 0.0)) throw std::invalid_argument("sigma_floor must be positive");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

UpdateOutcome forward_update(const PolicyParams& theta_i, const std::vector<ActionSequence>& sequences,
                             const WeightVector& weights, double alpha, double sigma_floor) {
  require_batch(sequences, weights);
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("forward_update: negative weight");
    total += w;
  }
  if (total <= 0.0) return {theta_i, true};

  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(theta_i.mu.rows(), theta_i.mu.cols());
  for (std::size_t n = 0; n < sequences.size(); ++n) mean += weights[n] * sequences[n];
  mean /= total;
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(mean.rows(), mean.cols());
  for (std::size_t n = 0; n < sequences.size(); ++n) {
    var += weights[n] * (sequences[n] - mean).cwiseAbs2();
  }
  var /= total;

  PolicyParams next((1.0 - alpha) * theta_i.mu + alpha * mean,
                    (1.0 - alpha) * theta_i.sigma + alpha * var.cwiseSqrt());
  next.floor_sigma(sigma_floor);
  return {std::move(next), false};
}

std::optional<Gradient> md_gradient(const PolicyParams& theta, const std::vector<ActionSequence>& sequences,
                                    const std::vector<double>& weights,
                                    const std::vector<std::size_t>& cluster) {
  require_batch(sequences, weights);
  if (cluster.empty()) return std::nullopt;
  const Eigen::ArrayXXd var = theta.sigma.array().square();
  const Eigen::ArrayXXd cube = var * theta.sigma.array();
  Eigen::ArrayXXd g_mu = Eigen::ArrayXXd::Zero(theta.mu.rows(), theta.mu.cols());
  Eigen::ArrayXXd g_sigma = Eigen::ArrayXXd::Zero(theta.mu.rows(), theta.mu.cols());
  for (std::size_t n : cluster) {
    const Eigen::ArrayXXd d = sequences.at(n).array() - theta.mu.array();
    g_mu -= weights[n] * d / var;
    g_sigma -= weights[n] * (d.square() - var) / cube;
  }
  const double inv = 1.0 / static_cast<double>(cluster.size());
  return Gradient{(g_mu * inv).matrix(), (g_sigma * inv).matrix()};
}

PolicyParams mirror_step(const PolicyParams& point, const Gradient& g, double step,
                         const PolicyParams& anchor) {
  MirrorPoint z = mirror_map(point, anchor);
  z.z_mu -= step * g.mu;
  z.z_sigma -= step * g.sigma;
  return mirror_inverse(z);
}

UpdateOutcome reverse_update(const PolicyParams& theta_i, const CandidateBatch& batch, double alpha,
                             double sigma_floor) {
  std::vector<std::size_t> all(batch.sequences.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto g = md_gradient(theta_i, batch.sequences, batch.log_weights, all);
  if (!g) return {theta_i, true};
  PolicyParams next = mirror_step(theta_i, *g, alpha, theta_i);
  next.floor_sigma(sigma_floor);
  return {std::move(next), false};
}

RejectOutcome reject_update(const SolverState& state, const CandidateBatch& batch, double alpha,
                            double sigma_floor) {
  RejectOutcome out;
  out.state = state;
  const Clusters clusters = partition_clusters(batch.log_weights);
  if (const auto g = md_gradient(state.plus, batch.sequences, batch.log_weights, clusters.positive)) {
    out.state.plus = mirror_step(state.plus, *g, alpha, state.plus);
    out.state.plus.floor_sigma(sigma_floor);
    out.plus_updated = true;
  }
  const std::vector<double> magnitude = negated(batch.log_weights);
  if (const auto g = md_gradient(state.minus, batch.sequences, magnitude, clusters.negative)) {
    out.state.minus = mirror_step(state.minus, *g, alpha, state.minus);
    out.state.minus.floor_sigma(sigma_floor);
    out.minus_updated = true;
  }
  return out;
}

double complementary_log_score(const PolicyParams& plus, const PolicyParams& minus,
                               const ActionSequence& u, double kappa) {
  const double bad = log_density(minus, u);
  const double offset = kappa > 0.0 ? std::log(kappa) + log_density(plus, minus.mu)
                                    : -std::numeric_limits<double>::infinity();
  return -log_add_exp(bad, offset);
}

std::vector<double> selection_probabilities(const std::vector<double>& log_scores) {
  if (log_scores.empty()) return {};
  const double hi = *std::max_element(log_scores.begin(), log_scores.end());
  std::vector<double> p(log_scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(log_scores[i] - hi);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

std::vector<std::size_t> select_without_replacement(const std::vector<double>& log_scores,
                                                    std::size_t count, const StreamKey& key) {
  if (count > log_scores.size()) throw std::invalid_argument("select: count exceeds pool size");
  std::vector<double> perturbed(log_scores.size());
  for (std::size_t i = 0; i < perturbed.size(); ++i) {
    auto engine = stream_for(key, i, StreamPurpose::kSelection);
    std::exponential_distribution<double> exponential(1.0);
    perturbed[i] = log_scores[i] - std::log(exponential(engine));
  }
  std::vector<std::size_t> order(log_scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return perturbed[a] != perturbed[b] ? perturbed[a] > perturbed[b] : a < b;
                    });
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<ActionSequence> compose_and_sample(const PolicyParams& plus, const PolicyParams& minus,
                                               std::size_t oversample, std::size_t count,
                                               double kappa, const StreamKey& key) {
  if (oversample < count) throw std::invalid_argument("compose_and_sample: oversample < count");
  std::vector<ActionSequence> pool = sample_batch(plus, oversample, key);
  std::vector<double> scores(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    scores[i] = complementary_log_score(plus, minus, pool[i], kappa);
  }
  std::vector<ActionSequence> picked;
  picked.reserve(count);
  for (std::size_t i : select_without_replacement(scores, count, key)) picked.push_back(std::move(pool[i]));
  return picked;
}

NoiseStrength noise_strength(const CostVector& costs, double sigma_max_running) {
  if (costs.size() < 2) throw std::invalid_argument("noise_strength: need at least two costs");
  const double n = static_cast<double>(costs.size());
  const double mean = std::accumulate(costs.begin(), costs.end(), 0.0) / n;
  double sq = 0.0;
  double abs_dev = 0.0;
  double dev_lo = std::numeric_limits<double>::infinity();
  double dev_hi = 0.0;
  for (double j : costs) {
    sq += (j - mean) * (j - mean);
    abs_dev += std::abs(j - mean);
    dev_lo = std::min(dev_lo, std::abs(j - mean));
    dev_hi = std::max(dev_hi, std::abs(j - mean));
  }
  NoiseStrength out;
  out.sigma_std = std::sqrt(sq / n);
  out.sigma_mad = abs_dev / n;
  out.sigma_max = std::max(sigma_max_running, out.sigma_mad);
  if (out.sigma_std == 0.0 || out.sigma_max == 0.0) return out;
  // Equal absolute deviations make mad == std analytically; rounding must not
  // turn that into a small positive s.
  if (dev_hi - dev_lo <= 1e-12 * dev_hi) return out;
  const double shape = std::max(0.0, 1.0 - out.sigma_mad / out.sigma_std);
  out.s = std::clamp(shape * out.sigma_std / out.sigma_max, 0.0, 1.0);
  return out;
}

StepSizes step_size_advance(double a, double A, double s, double alpha, double gamma) {
  if (!(a > 0.0)) throw std::invalid_argument("step_size_advance: a must be positive");
  StepSizes next;
  next.a = a + alpha / (1.0 + 5.0 * gamma * s);
  next.A = A + next.a;
  return next;
}

AccelStep accelerated_step(const PolicyParams& theta, const PolicyParams& tilde_prev, const Gradient& g,
                           const PolicyParams& anchor, double a_i, double A_i, double a_next,
                           double A_next, double sigma_floor) {
  AccelStep out;
  out.tilde = mirror_step(tilde_prev, g, a_i, anchor);
  out.tilde.floor_sigma(sigma_floor);
  const double keep = A_i / A_next;
  const double pull = a_next / A_next;
  const double momentum = a_i / A_next;
  out.theta = PolicyParams(keep * theta.mu + pull * out.tilde.mu + momentum * (out.tilde.mu - tilde_prev.mu),
                           keep * theta.sigma + pull * out.tilde.sigma +
                               momentum * (out.tilde.sigma - tilde_prev.sigma));
  out.theta.floor_sigma(sigma_floor);
  return out;
}

AccelOutcome accel_update(const SolverState& state, const CandidateBatch& batch, const SolverConfig& config) {
  AccelOutcome out;
  out.state = state;
  out.noise = noise_strength(batch.costs, state.sigma_max);
  const StepSizes next = step_size_advance(state.a, state.A, out.noise.s, config.alpha, config.gamma);
  const Clusters clusters = partition_clusters(batch.log_weights);

  if (const auto g = md_gradient(state.plus, batch.sequences, batch.log_weights, clusters.positive)) {
    AccelStep step = accelerated_step(state.plus, state.tilde_plus, *g, state.plus, state.a, state.A, next.a,
                                      next.A, config.sigma_floor);
    out.state.plus = std::move(step.theta);
    out.state.tilde_plus = std::move(step.tilde);
    out.plus_updated = true;
  }
  const std::vector<double> magnitude = negated(batch.log_weights);
  if (const auto g = md_gradient(state.minus, batch.sequences, magnitude, clusters.negative)) {
    AccelStep step = accelerated_step(state.minus, state.tilde_minus, *g, state.minus, state.a, state.A,
                                      next.a, next.A, config.sigma_floor);
    out.state.minus = std::move(step.theta);
    out.state.tilde_minus = std::move(step.tilde);
    out.minus_updated = true;
  }
  out.state.a = next.a;
  out.state.A = next.A;
  out.state.sigma_max = out.noise.sigma_max;
  return out;
}

WarmStart warm_start(const PolicyParams& theta_star, const PolicyParams& prior, double a_prv, double eta,
                     double alpha) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("warm_start: eta must lie in [0, 1]");
  if (theta_star.mu.rows() != prior.mu.rows() || theta_star.mu.cols() != prior.mu.cols()) {
    throw std::invalid_argument("warm_start: shape mismatch");
  }
  WarmStart out;
  out.theta = prior;
  const Eigen::Index shifted = prior.horizon() - 1;
  if (shifted > 0) {
    out.theta.mu.leftCols(shifted) =
        (1.0 - eta) * prior.mu.leftCols(shifted) + eta * theta_star.mu.rightCols(shifted);
    out.theta.sigma.leftCols(shifted) =
        (1.0 - eta) * prior.sigma.leftCols(shifted) + eta * theta_star.sigma.rightCols(shifted);
  }
  out.a = (1.0 - eta) * alpha + eta * a_prv;
  // a_1 (a_1 + alpha) / (2 alpha), grouped so that a_1 == alpha gives A_1 == alpha exactly.
  out.A = out.a * ((out.a + alpha) / (2.0 * alpha));
  return out;
}

}  // namespace rmpc
