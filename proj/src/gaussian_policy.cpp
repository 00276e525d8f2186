#include "rmpc/gaussian_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace rmpc {

namespace {

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

// sigma_i * sqrt(sigma_i^2 z^2 + 4), rewritten for large |sigma_i z|.
double scaled_root(double sigma_i, double z) {
  const double w = sigma_i * z;
  if (std::abs(w) > 1e6) {
    return sigma_i * std::abs(w) * std::sqrt(1.0 + 4.0 / (w * w));
  }
  return sigma_i * std::sqrt(w * w + 4.0);
}

}  // namespace

PolicyParams::PolicyParams(Eigen::MatrixXd mean, Eigen::MatrixXd scale)
    : mu(std::move(mean)), sigma(std::move(scale)) {
  require_same_shape(mu, sigma, "PolicyParams");
}

PolicyParams PolicyParams::standard(Eigen::Index action_dim, Eigen::Index horizon) {
  return {Eigen::MatrixXd::Zero(action_dim, horizon), Eigen::MatrixXd::Ones(action_dim, horizon)};
}

void PolicyParams::validate(double sigma_floor) const {
  require_same_shape(mu, sigma, "PolicyParams");
  if (mu.size() == 0) throw std::invalid_argument("PolicyParams: empty");
  if (!mu.allFinite()) throw std::invalid_argument("PolicyParams: non-finite mu");
  if (!sigma.allFinite()) throw std::invalid_argument("PolicyParams: non-finite sigma");
  if (sigma.minCoeff() < sigma_floor) throw std::invalid_argument("PolicyParams: sigma below floor");
}

void PolicyParams::floor_sigma(double sigma_floor) {
  sigma = sigma.cwiseMax(sigma_floor);
}

ActionBounds ActionBounds::symmetric(Eigen::Index dim, double limit) {
  return {Eigen::VectorXd::Constant(dim, -limit), Eigen::VectorXd::Constant(dim, limit)};
}

void ActionBounds::validate() const {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw std::invalid_argument("ActionBounds: dimension mismatch");
  }
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    if (!(lower[k] < upper[k])) throw std::invalid_argument("ActionBounds: lower must be < upper");
  }
}

ActionSequence sample_one(const PolicyParams& params, const StreamKey& key, std::size_t index) {
  auto engine = stream_for(key, index, StreamPurpose::kCandidate);
  std::normal_distribution<double> normal(0.0, 1.0);
  ActionSequence u(params.mu.rows(), params.mu.cols());
  // Column-major fill order fixes which noise value lands where.
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    u(j) = params.mu(j) + params.sigma(j) * normal(engine);
  }
  return u;
}

std::vector<ActionSequence> sample_batch(const PolicyParams& params, std::size_t count,
                                         const StreamKey& key) {
  if (count == 0) throw std::invalid_argument("sample_batch: count must be >= 1");
  std::vector<ActionSequence> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) out.push_back(sample_one(params, key, n));
  return out;
}

Eigen::MatrixXd squash(const Eigen::MatrixXd& u_raw, const ActionBounds& bounds) {
  if (u_raw.rows() != bounds.dim()) throw std::invalid_argument("squash: dimension mismatch");
  if (!u_raw.allFinite()) throw std::invalid_argument("squash: non-finite input");
  const Eigen::VectorXd mid = 0.5 * (bounds.lower + bounds.upper);
  const Eigen::VectorXd half = 0.5 * (bounds.upper - bounds.lower);
  Eigen::MatrixXd out = u_raw.array().tanh().matrix();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    out.row(r) = (out.row(r).array() * half[r] + mid[r]).matrix();
  }
  return out;
}

double log_density(const PolicyParams& params, const ActionSequence& u) {
  require_same_shape(params.mu, u, "log_density");
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double total = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    const double r = (u(k) - params.mu(k)) / params.sigma(k);
    total += -0.5 * r * r - std::log(params.sigma(k)) - half_log_2pi;
  }
  return total;
}

double kl_divergence(const PolicyParams& theta, const PolicyParams& theta_i) {
  require_same_shape(theta.mu, theta_i.mu, "kl_divergence");
  double total = 0.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double var = theta.sigma(k) * theta.sigma(k);
    const double var_i = theta_i.sigma(k) * theta_i.sigma(k);
    const double dmu = theta_i.mu(k) - theta.mu(k);
    total += std::log(var_i / var) + var / var_i + dmu * dmu / var_i - 1.0;
  }
  // Rounding can leave a tiny negative residue when theta == theta_i.
  return std::max(0.5 * total, 0.0);
}

MirrorPoint mirror_map(const PolicyParams& theta, const PolicyParams& theta_i) {
  require_same_shape(theta.mu, theta_i.mu, "mirror_map");
  const Eigen::ArrayXXd var_i = theta_i.sigma.array().square();
  MirrorPoint z;
  z.z_mu = (theta.mu.array() / var_i).matrix();
  z.z_sigma = (theta.sigma.array() / var_i - theta.sigma.array().inverse()).matrix();
  z.reference = theta_i;
  return z;
}

PolicyParams mirror_inverse(const MirrorPoint& z) {
  const auto& ref = z.reference;
  require_same_shape(z.z_mu, ref.mu, "mirror_inverse");
  require_same_shape(z.z_sigma, ref.mu, "mirror_inverse");
  PolicyParams theta(Eigen::MatrixXd(ref.mu.rows(), ref.mu.cols()),
                     Eigen::MatrixXd(ref.mu.rows(), ref.mu.cols()));
  for (Eigen::Index k = 0; k < ref.size(); ++k) {
    const double s_i = ref.sigma(k);
    const double zs = z.z_sigma(k);
    theta.mu(k) = s_i * s_i * z.z_mu(k);
    const double root = scaled_root(s_i, zs);
    if (zs >= 0.0) {
      theta.sigma(k) = 0.5 * (s_i * s_i * zs + root);
    } else {
      // Same value as the direct form, without cancelling two large terms:
      // (a + b) / 2 = 2 s_i^2 / (b - a) with a = s_i^2 z, b = s_i sqrt(s_i^2 z^2 + 4).
      theta.sigma(k) = 2.0 * s_i * s_i / (root - s_i * s_i * zs);
    }
  }
  return theta;
}

}  // namespace rmpc
