#include "rmpc/envs.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rmpc {

namespace {

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

double never_violated(const Eigen::VectorXd&, const Eigen::VectorXd&) { return -1.0; }

constexpr double kReacherDt = 0.1;
constexpr double kReacherForceGain = 2.0;

double wrap_angle(double a) {
  return std::remainder(a, 2.0 * std::numbers::pi);
}

}  // namespace

RolloutResult rollout_cost(const EnvSpec& env, const Eigen::VectorXd& x0, const ActionSequence& u_raw) {
  if (u_raw.rows() != env.action_dim) throw std::invalid_argument("rollout_cost: action dimension mismatch");
  if (x0.size() != env.state_dim) throw std::invalid_argument("rollout_cost: state dimension mismatch");
  const Eigen::MatrixXd u = squash(u_raw, env.bounds);
  const Eigen::Index horizon = u.cols();

  RolloutResult r;
  r.states.reserve(static_cast<std::size_t>(horizon) + 1);
  r.states.push_back(x0);
  Eigen::VectorXd x = x0;
  double total = 0.0;
  for (Eigen::Index t = 0; t < horizon; ++t) {
    const Eigen::VectorXd ut = u.col(t);
    total += env.stage_cost(x, ut);
    const double c = env.constraint(x, ut);
    if (c > 0.0) {
      total += env.constraint_penalty * c;
      ++r.violations;
    }
    x = env.dynamics(x, ut);
    r.states.push_back(x);
    if (!x.allFinite() || !std::isfinite(total)) {
      r.non_finite = true;
      break;
    }
  }
  if (!r.non_finite) {
    total += env.terminal_cost(x);
    r.non_finite = !std::isfinite(total);
  }
  r.cost = r.non_finite ? env.constraint_penalty * static_cast<double>(horizon + 1) : total;
  return r;
}

double rollout_cost_only(const EnvSpec& env, const Eigen::VectorXd& x0, const ActionSequence& u_raw) {
  return rollout_cost(env, x0, u_raw).cost;
}

double realized_stage_cost(const EnvSpec& env, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  const double c = env.constraint(x, u);
  return env.stage_cost(x, u) + (c > 0.0 ? env.constraint_penalty * c : 0.0);
}

EnvSpec make_quadratic(const QuadraticParams& p) {
  if (!(std::abs(p.target) < p.limit)) throw std::invalid_argument("quadratic: target outside bounds");
  EnvSpec env;
  env.name = "quadratic";
  env.state_dim = 1;
  env.action_dim = 1;
  env.bounds = ActionBounds::symmetric(1, p.limit);
  env.initial_state = scalar(0.0);
  env.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) { return x; };
  env.stage_cost = [p](const Eigen::VectorXd&, const Eigen::VectorXd& u) {
    const double d = u[0] - p.target;
    return p.weight * d * d;
  };
  env.terminal_cost = [](const Eigen::VectorXd&) { return 0.0; };
  env.constraint = never_violated;
  return env;
}

EnvSpec make_point_reacher() {
  const Eigen::Vector2d goal(1.0, 0.5);
  EnvSpec env;
  env.name = "point_reacher";
  env.state_dim = 4;  // px, py, vx, vy
  env.action_dim = 2;
  env.bounds = ActionBounds::symmetric(2, 1.0);
  env.dt = kReacherDt;
  env.initial_state = Eigen::VectorXd::Zero(4);
  env.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd next(4);
    next.tail<2>() = x.tail<2>() + kReacherDt * kReacherForceGain * u;
    next.head<2>() = x.head<2>() + kReacherDt * next.tail<2>();
    return next;
  };
  env.stage_cost = [goal](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return (x.head<2>() - goal).squaredNorm() + 0.1 * x.tail<2>().squaredNorm() + 0.01 * u.squaredNorm();
  };
  env.terminal_cost = [goal](const Eigen::VectorXd& x) {
    return 5.0 * (x.head<2>() - goal).squaredNorm() + 0.5 * x.tail<2>().squaredNorm();
  };
  env.constraint = never_violated;
  return env;
}

EnvSpec make_bimodal_valley(const BimodalParams& p) {
  EnvSpec env;
  env.name = "bimodal_valley";
  env.state_dim = 1;
  env.action_dim = 1;
  env.bounds = ActionBounds::symmetric(1, p.limit);
  env.initial_state = scalar(0.0);
  env.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) { return x; };
  env.stage_cost = [p](const Eigen::VectorXd&, const Eigen::VectorXd& u) {
    const double a = u[0] - p.left;
    const double b = u[0] - p.right;
    return p.curvature * std::min(a * a, b * b + p.depth_gap);
  };
  env.terminal_cost = [](const Eigen::VectorXd&) { return 0.0; };
  env.constraint = never_violated;
  return env;
}

bool in_trap(const TrapParams& p, double position) {
  return position >= p.trap_begin && position <= p.trap_end;
}

EnvSpec make_trap_corridor(const TrapParams& p) {
  if (!(p.trap_cost >= p.margin)) throw std::invalid_argument("trap_corridor: trap cost below margin");
  EnvSpec env;
  env.name = "trap_corridor";
  env.state_dim = 1;
  env.action_dim = 1;
  env.bounds = ActionBounds::symmetric(1, 1.0);
  env.dt = 0.1;
  env.initial_state = scalar(0.0);
  env.dynamics = [p, dt = env.dt](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return scalar(x[0] + dt * p.speed * u[0]);
  };
  env.stage_cost = [p](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    const double d = x[0] - p.goal;
    return d * d;
  };
  env.terminal_cost = [p](const Eigen::VectorXd& x) {
    const double d = x[0] - p.goal;
    return d * d + (in_trap(p, x[0]) ? p.trap_cost : 0.0);
  };
  // Unit violation inside the trap, so the penalty equals the trap cost.
  env.constraint = [p](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return in_trap(p, x[0]) ? 1.0 : -1.0;
  };
  env.constraint_penalty = p.trap_cost;
  return env;
}

bool in_band(const OverlapParams& p, double action) {
  const double d = std::abs(action - p.goal);
  return d >= p.band_offset && d <= p.band_offset + p.band_width;
}

EnvSpec make_overlap_trap(const OverlapParams& p) {
  EnvSpec env;
  env.name = "overlap_trap";
  env.state_dim = 1;
  env.action_dim = 1;
  env.bounds = ActionBounds::symmetric(1, 1.0);
  env.initial_state = scalar(0.0);
  env.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) { return x; };
  env.stage_cost = [p](const Eigen::VectorXd&, const Eigen::VectorXd& u) {
    const double d = u[0] - p.goal;
    return p.weight * d * d;
  };
  env.terminal_cost = [](const Eigen::VectorXd&) { return 0.0; };
  env.constraint = [p](const Eigen::VectorXd&, const Eigen::VectorXd& u) {
    return in_band(p, u[0]) ? 1.0 : -1.0;
  };
  env.constraint_penalty = p.band_cost;
  return env;
}

double pendulum_energy(const PendulumParams& p, const Eigen::VectorXd& x) {
  // Angle 0 is upright, so potential energy is m g l cos(theta).
  return 0.5 * p.mass * p.length * p.length * x[1] * x[1] + p.mass * p.gravity * p.length * std::cos(x[0]);
}

EnvSpec make_pendulum_swingup(const PendulumParams& p) {
  EnvSpec env;
  env.name = "pendulum_swingup";
  env.state_dim = 2;  // angle from upright, angular velocity
  env.action_dim = 1;
  env.bounds = ActionBounds::symmetric(1, p.max_torque);
  env.dt = 0.1;
  env.initial_state = Eigen::Vector2d(std::numbers::pi, 0.0);
  // Semi-implicit Euler on dt / substeps.
  env.dynamics = [p, dt = env.dt](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const double h = dt / p.substeps;
    const double inertia = p.mass * p.length * p.length;
    double angle = x[0];
    double rate = x[1];
    for (int s = 0; s < p.substeps; ++s) {
      const double acc = (p.gravity / p.length) * std::sin(angle) + (u[0] - p.damping * rate) / inertia;
      rate += h * acc;
      angle += h * rate;
    }
    return Eigen::VectorXd(Eigen::Vector2d(angle, rate));
  };
  env.stage_cost = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const double a = wrap_angle(x[0]);
    return a * a + 0.1 * x[1] * x[1] + 0.001 * u[0] * u[0];
  };
  env.terminal_cost = [](const Eigen::VectorXd& x) {
    const double a = wrap_angle(x[0]);
    return 2.0 * a * a + 0.2 * x[1] * x[1];
  };
  env.constraint = never_violated;
  return env;
}

std::vector<std::string> env_names() {
  return {"quadratic", "point_reacher", "bimodal_valley", "trap_corridor", "overlap_trap",
          "pendulum_swingup"};
}

EnvSpec make_env(const std::string& name) {
  if (name == "quadratic") return make_quadratic();
  if (name == "point_reacher") return make_point_reacher();
  if (name == "bimodal_valley") return make_bimodal_valley();
  if (name == "trap_corridor") return make_trap_corridor();
  if (name == "overlap_trap") return make_overlap_trap();
  if (name == "pendulum_swingup") return make_pendulum_swingup();
  std::string known;
  for (const auto& n : env_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown environment '" + name + "' (known: " + known + ")");
}

}  // namespace rmpc
