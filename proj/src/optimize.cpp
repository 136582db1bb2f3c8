#include "assembler/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "assembler/error.hpp"
#include "assembler/qp.hpp"

namespace assembler {

void validate(const OptimizerConfig& c) {
  if (!(c.w1 >= 0.0 && c.w2 >= 0.0)) throw InvalidArgument("objective weights must be non-negative");
  if (!(c.pose_tolerances.array() > 0.0).all()) throw InvalidArgument("pose tolerances must be positive");
  if (!(c.f_tension_max > 0.0 && c.f_compression_max > 0.0)) throw InvalidArgument("force bounds must be positive");
  if (c.max_iterations < 0) throw InvalidArgument("max_iterations must be non-negative");
  if (!(c.constraint_tolerance >= 0.0 && c.convergence_tolerance >= 0.0)) {
    throw InvalidArgument("tolerances must be non-negative");
  }
  if (!(c.gradient_step > 0.0 && c.initial_trust_radius > 0.0 && c.softmax_beta > 0.0)) {
    throw InvalidArgument("gradient_step, initial_trust_radius and softmax_beta must be positive");
  }
}

double ConstraintGroup::worst() const {
  return margins.size() == 0 ? std::numeric_limits<double>::infinity() : margins.minCoeff();
}

double ConstraintReport::worst() const {
  double w = std::numeric_limits<double>::infinity();
  for (const auto& g : groups) w = std::min(w, g.worst());
  return w;
}

bool ConstraintReport::satisfied(double tolerance) const { return worst() >= -tolerance; }

const ConstraintGroup& ConstraintReport::group(const std::string& name) const {
  for (const auto& g : groups) {
    if (g.name == name) return g;
  }
  throw InvalidArgument("no constraint group named " + name);
}

Eigen::VectorXd plate_deviation_angles(const AssemblerStack& stack, const StackPose& pose) {
  check_pose(stack, pose);
  Eigen::VectorXd lambda(static_cast<Eigen::Index>(stack.size()));
  for (std::size_t k = 1; k <= stack.size(); ++k) {
    const Vec3 step = pose.plates[k].translation - pose.plates[k - 1].translation;
    if (step.norm() < 1e-12) {
      throw DegenerateConfiguration("plates " + std::to_string(k - 1) + " and " + std::to_string(k) +
                                    " share an origin");
    }
    const Vec3 rest = pose.plates[k - 1].z_axis();
    lambda[static_cast<Eigen::Index>(k - 1)] = std::atan2(step.cross(rest).norm(), step.dot(rest));
  }
  return lambda;
}

namespace {

double soft_max(const ForceMatrix& forces, double beta) {
  const double m = forces.cwiseAbs().maxCoeff();
  return m + std::log((beta * (forces.array().abs() - m)).exp().sum()) / beta;
}

double force_term(const ForceMatrix& forces, const OptimizerConfig& config) {
  return config.smooth_max ? soft_max(forces, config.softmax_beta) : forces.cwiseAbs().maxCoeff();
}

// Everything the optimizer needs at one decision vector.
struct Sample {
  bool valid = false;
  ForceMatrix forces;
  double deviation_rss = 0.0;
  Eigen::VectorXd c;  // scaled smooth constraints, >= 0 feasible
};

class Problem {
 public:
  Problem(const AssemblerStack& stack, const MassModel& masses, const OptimizerConfig& config, const Transform& goal)
      : stack_(stack), masses_(masses), config_(config), goal_(goal), n_(stack.size()) {}

  Eigen::Index constraint_count() const { return static_cast<Eigen::Index>(6 * 6 * n_); }

  Sample evaluate(const DecisionVector& x) const {
    Sample s;
    s.c = Eigen::VectorXd::Constant(constraint_count(), -1.0);
    s.forces = ForceMatrix::Zero(6, static_cast<Eigen::Index>(n_));
    StackPose pose;
    try {
      pose = unpack_decision(stack_, x, goal_);
      s.forces = stack_leg_forces(stack_, pose, masses_);
      s.deviation_rss = plate_deviation_angles(stack_, pose).norm();
    } catch (const Error&) {
      return s;
    }
    const ZContinuity z = z_continuity(stack_, pose);
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < n_; ++k) {
      const PlatformGeometry& g = stack_.platforms[k];
      const PlatformState state = pose.platform(k);
      const AnchorPositions a = anchor_positions_global(g, state);
      const double span = g.leg_max - g.leg_min;
      const double cos_max = std::cos(g.theta_max);
      for (int i = 0; i < 6; ++i) {
        const Vec3 leg = a.top[i] - a.bottom[i];
        const double len = leg.norm();
        const Vec3 home =
            state.bottom.rotation * (g.home_top().apply(g.top_anchors[i]) - g.bottom_anchors[i]);
        const double f = s.forces(i, static_cast<Eigen::Index>(k));
        s.c[row++] = (len - g.leg_min) / span;
        s.c[row++] = (g.leg_max - len) / span;
        s.c[row++] = len > 0.0 ? leg.dot(home) / (len * home.norm()) - cos_max : -1.0;
        s.c[row++] = (config_.f_tension_max - f) / config_.f_tension_max;
        s.c[row++] = (f + config_.f_compression_max) / config_.f_compression_max;
        s.c[row++] = z.margins(i, static_cast<Eigen::Index>(k)) / g.home_height;
      }
    }
    s.valid = s.c.allFinite() && s.forces.allFinite();
    return s;
  }

  double objective(const Sample& s) const {
    if (!s.valid) return kSingularObjective;
    return config_.w1 * force_term(s.forces, config_) + config_.w2 * s.deviation_rss;
  }

 private:
  const AssemblerStack& stack_;
  const MassModel& masses_;
  const OptimizerConfig& config_;
  const Transform& goal_;
  std::size_t n_;
};

// Central-difference derivatives of one sample's quantities.
struct Linearization {
  Eigen::MatrixXd force_jacobian;       // 6n x dim, forces in column-major order
  Eigen::VectorXd rss_gradient;         // dim
  Eigen::VectorXd objective_gradient;   // dim, smooth-max mode only
  Eigen::MatrixXd constraint_jacobian;  // m x dim
};

Linearization linearize(const Problem& problem, const OptimizerConfig& config, const DecisionVector& x) {
  const Eigen::Index dim = x.size();
  Linearization lin;
  lin.force_jacobian.resize(problem.constraint_count() / 6, dim);
  lin.rss_gradient.resize(dim);
  lin.objective_gradient.resize(dim);
  lin.constraint_jacobian.resize(problem.constraint_count(), dim);
  const double h = config.gradient_step;
  for (Eigen::Index j = 0; j < dim; ++j) {
    DecisionVector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Sample sp = problem.evaluate(xp);
    const Sample sm = problem.evaluate(xm);
    const Eigen::Map<const Eigen::VectorXd> fp(sp.forces.data(), sp.forces.size());
    const Eigen::Map<const Eigen::VectorXd> fm(sm.forces.data(), sm.forces.size());
    lin.force_jacobian.col(j) = (fp - fm) / (2.0 * h);
    lin.rss_gradient[j] = (sp.deviation_rss - sm.deviation_rss) / (2.0 * h);
    lin.objective_gradient[j] = (problem.objective(sp) - problem.objective(sm)) / (2.0 * h);
    lin.constraint_jacobian.col(j) = (sp.c - sm.c) / (2.0 * h);
  }
  return lin;
}

// SQP state in the (x, tau) space. In plain-max mode tau is the epigraph
// variable max|F| / kForceScale; in smooth mode it is absent.
constexpr double kForceScale = 100.0;

struct Iterate {
  DecisionVector x;
  Sample sample;
  double objective = 0.0;
};

bool no_worse_feasibility(const Sample& trial, const Eigen::VectorXd& floor) {
  return trial.valid && (trial.c.array() >= floor.array()).all();
}

StackPose pose_of(const AssemblerStack& stack, const DecisionVector& x, const Transform& goal) {
  return unpack_decision(stack, x, goal);
}

}  // namespace

double objective(const AssemblerStack& stack, const MassModel& masses, const OptimizerConfig& config,
                 const StackPose& pose) {
  check_pose(stack, pose);
  try {
    const ForceMatrix forces = stack_leg_forces(stack, pose, masses);
    const double rss = plate_deviation_angles(stack, pose).norm();
    return config.w1 * force_term(forces, config) + config.w2 * rss;
  } catch (const SingularConfiguration&) {
    return kSingularObjective;
  } catch (const DegenerateConfiguration&) {
    return kSingularObjective;
  }
}

double objective(const AssemblerStack& stack, const MassModel& masses, const OptimizerConfig& config,
                 const DecisionVector& x, const Transform& goal) {
  return objective(stack, masses, config, unpack_decision(stack, x, goal));
}

Vec6 end_effector_error(const Transform& end_effector, const Transform& goal) {
  Vec6 e;
  e.head<3>() = end_effector.translation - goal.translation;
  e.tail<3>() = axis_angle_from_rotation(end_effector.rotation * goal.rotation.transpose());
  return e;
}

ConstraintReport constraints(const AssemblerStack& stack, const MassModel& masses, const OptimizerConfig& config,
                             const StackPose& pose, const Transform& goal) {
  check_pose(stack, pose);
  const std::size_t n = stack.size();
  const Eigen::Index count = static_cast<Eigen::Index>(6 * n);
  ConstraintGroup leg_min{"leg_min", Eigen::VectorXd(count)};
  ConstraintGroup leg_max{"leg_max", Eigen::VectorXd(count)};
  ConstraintGroup deviation{"deviation", Eigen::VectorXd(count)};
  ConstraintGroup tension{"force_tension", Eigen::VectorXd(count)};
  ConstraintGroup compression{"force_compression", Eigen::VectorXd(count)};
  ConstraintGroup ee{"ee_tolerance", Eigen::VectorXd(6)};
  ConstraintGroup zc{"z_continuity", Eigen::VectorXd(count)};

  const LegMatrix legs = stack_leg_matrix(stack, pose);
  for (std::size_t k = 0; k < n; ++k) {
    const PlatformGeometry& g = stack.platforms[k];
    const auto col = static_cast<Eigen::Index>(k);
    const auto seg = static_cast<Eigen::Index>(6 * k);
    leg_min.margins.segment<6>(seg) = legs.col(col).array() - g.leg_min;
    leg_max.margins.segment<6>(seg) = g.leg_max - legs.col(col).array();
    try {
      deviation.margins.segment<6>(seg) = g.theta_max - deviation_angles(g, pose.platform(k)).array();
    } catch (const DegenerateConfiguration&) {
      deviation.margins.segment<6>(seg).setConstant(-std::numbers::pi);
    }
  }

  try {
    const ForceMatrix forces = stack_leg_forces(stack, pose, masses);
    const Eigen::Map<const Eigen::VectorXd> f(forces.data(), forces.size());
    tension.margins = config.f_tension_max - f.array();
    compression.margins = f.array() + config.f_compression_max;
  } catch (const Error&) {
    tension.margins.setConstant(-kSingularObjective);
    compression.margins.setConstant(-kSingularObjective);
  }

  ee.margins = config.pose_tolerances.array() - end_effector_error(pose.end_effector(), goal).array().abs();

  const ZContinuity z = z_continuity(stack, pose);
  zc.margins = Eigen::Map<const Eigen::VectorXd>(z.margins.data(), z.margins.size());

  return {{leg_min, leg_max, deviation, tension, compression, ee, zc}};
}

ConstraintReport constraints(const AssemblerStack& stack, const MassModel& masses, const OptimizerConfig& config,
                             const DecisionVector& x, const Transform& goal) {
  return constraints(stack, masses, config, unpack_decision(stack, x, goal), goal);
}

OptimizationResult optimize_pose(const AssemblerStack& stack, const MassModel& masses, const OptimizerConfig& config,
                                 const Transform& goal, const InitResult& init) {
  validate(stack);
  validate(masses);
  validate(config);
  if (!init.feasible) throw InvalidArgument("optimize_pose needs a feasible initial pose");
  check_pose(stack, init.pose);

  const Problem problem(stack, masses, config, goal);
  const bool epigraph = !config.smooth_max;
  const Eigen::Index nx = static_cast<Eigen::Index>(decision_size(stack));
  const Eigen::Index dim = nx + (epigraph ? 1 : 0);
  const Eigen::Index nc = problem.constraint_count();
  const Eigen::Index nf = nc / 6;
  const Eigen::Index rows = nc + (epigraph ? 2 * nf : 0);

  OptimizationResult result;
  Iterate current;
  current.x = pack_decision(stack, init.pose);
  current.sample = problem.evaluate(current.x);
  current.objective = problem.objective(current.sample);
  result.objective_initial = objective(stack, masses, config, init.pose);

  // Accepted iterates may not fall below the start's margins where those are
  // already negative (within tolerance), nor below zero elsewhere.
  const Eigen::VectorXd floor = current.sample.c.cwiseMin(0.0);

  auto finish = [&](const Iterate& best, bool converged, int iterations) {
    result.pose = pose_of(stack, best.x, goal);
    if (best.objective >= result.objective_initial) result.pose = init.pose;
    result.leg_matrix = stack_leg_matrix(stack, result.pose);
    result.objective_final = objective(stack, masses, config, result.pose);
    try {
      result.forces = stack_leg_forces(stack, result.pose, masses);
    } catch (const Error&) {
      result.forces = ForceMatrix::Zero(6, static_cast<Eigen::Index>(stack.size()));
    }
    result.constraint_report = constraints(stack, masses, config, result.pose, goal);
    result.converged = converged;
    result.iterations = iterations;
    return result;
  };

  if (!current.sample.valid || config.max_iterations == 0) return finish(current, true, 0);

  // Linear model pieces at the current iterate.
  Eigen::VectorXd grad(dim);
  Eigen::MatrixXd jac(rows, dim);
  Eigen::VectorXd cval(rows);
  Linearization lin;
  auto build_model = [&](const Iterate& it) {
    lin = linearize(problem, config, it.x);
    jac.setZero();
    jac.topLeftCorner(nc, nx) = lin.constraint_jacobian;
    cval.head(nc) = it.sample.c;
    if (epigraph) {
      const Eigen::Map<const Eigen::VectorXd> f(it.sample.forces.data(), nf);
      const double tau = it.sample.forces.cwiseAbs().maxCoeff() / kForceScale;
      // tau - F/s >= 0 and tau + F/s >= 0
      jac.block(nc, 0, nf, nx) = -lin.force_jacobian / kForceScale;
      jac.block(nc, nx, nf, 1).setOnes();
      jac.block(nc + nf, 0, nf, nx) = lin.force_jacobian / kForceScale;
      jac.block(nc + nf, nx, nf, 1).setOnes();
      cval.segment(nc, nf) = tau - f.array() / kForceScale;
      cval.segment(nc + nf, nf) = tau + f.array() / kForceScale;
      grad.head(nx) = config.w2 * lin.rss_gradient;
      grad[nx] = config.w1 * kForceScale;
    } else {
      grad = lin.objective_gradient;
    }
  };
  auto lagrangian_gradient = [&](const Eigen::VectorXd& multipliers) -> Eigen::VectorXd {
    return grad - jac.transpose() * multipliers;
  };

  Eigen::MatrixXd hessian = Eigen::MatrixXd::Identity(dim, dim);
  double radius = config.initial_trust_radius;
  constexpr double kMaxRadius = 0.25;
  constexpr double kMinRadius = 1e-9;

  build_model(current);
  bool converged = false;
  constexpr int kStallLimit = 5;
  int stalled = 0;
  int iter = 0;
  for (; iter < config.max_iterations; ++iter) {
    // QP: min g'd + 0.5 d'Bd  s.t.  J d >= -max(c, 0),  |d_x| <= radius.
    QpProblem qp;
    qp.hessian = hessian;
    qp.gradient = grad;
    qp.constraint_matrix.resize(rows + 2 * nx, dim);
    qp.constraint_bound.resize(rows + 2 * nx);
    qp.constraint_matrix.topRows(rows) = jac;
    qp.constraint_bound.head(rows) = -cval.cwiseMax(0.0);
    qp.constraint_matrix.bottomRows(2 * nx).setZero();
    for (Eigen::Index j = 0; j < nx; ++j) {
      qp.constraint_matrix(rows + j, j) = 1.0;
      qp.constraint_matrix(rows + nx + j, j) = -1.0;
    }
    qp.constraint_bound.tail(2 * nx).setConstant(-radius);
    const QpSolution step = solve_qp(qp);
    if (!step.x.allFinite()) break;

    const Eigen::VectorXd d = step.x;
    const double predicted = -(grad.dot(d) + 0.5 * d.dot(hessian * d));
    if (predicted <= config.convergence_tolerance * 1e-3 * (1.0 + std::abs(current.objective))) {
      converged = true;
      break;
    }

    Iterate trial;
    trial.x = current.x + d.head(nx);
    trial.sample = problem.evaluate(trial.x);
    if (trial.sample.valid && !no_worse_feasibility(trial.sample, floor)) {
      // Second-order correction: pull the trial back onto the linearized
      // feasible set, reusing the current constraint Jacobian.
      QpProblem soc;
      soc.hessian = Eigen::MatrixXd::Identity(nx, nx);
      soc.gradient = Eigen::VectorXd::Zero(nx);
      soc.constraint_matrix = lin.constraint_jacobian;
      soc.constraint_bound = floor - trial.sample.c;
      soc.constraint_bound = (soc.constraint_bound.array() > 0.0).select(soc.constraint_bound.array() + 1e-9,
                                                                         soc.constraint_bound.array());
      const QpSolution corr = solve_qp(soc);
      if (corr.converged && corr.x.norm() < 0.5 * d.head(nx).norm() + 1e-12) {
        Iterate corrected;
        corrected.x = trial.x + corr.x;
        corrected.sample = problem.evaluate(corrected.x);
        trial = std::move(corrected);
      }
    }
    trial.objective = problem.objective(trial.sample);

    const double actual = current.objective - trial.objective;
    const bool accept = no_worse_feasibility(trial.sample, floor) && actual > 1e-4 * predicted;
    if (!accept) {
      radius *= 0.25;
      if (radius < kMinRadius) {
        converged = true;
        break;
      }
      continue;
    }

    const Eigen::VectorXd multipliers = step.multipliers.head(rows);
    const Eigen::VectorXd old_lagrangian = lagrangian_gradient(multipliers);
    Eigen::VectorXd s(dim);
    s.head(nx) = trial.x - current.x;
    if (epigraph) {
      s[nx] = (trial.sample.forces.cwiseAbs().maxCoeff() - current.sample.forces.cwiseAbs().maxCoeff()) /
              kForceScale;
    }
    const double ratio = actual / predicted;
    const double step_norm = d.head(nx).lpNorm<Eigen::Infinity>();
    const double change = actual;
    current = std::move(trial);
    build_model(current);
    const Eigen::VectorXd y0 = lagrangian_gradient(multipliers) - old_lagrangian;

    // Powell-damped BFGS keeps the model Hessian positive definite.
    const Eigen::VectorXd bs = hessian * s;
    const double sbs = s.dot(bs);
    const double sy = s.dot(y0);
    if (sbs > 1e-16) {
      const double theta = sy >= 0.2 * sbs ? 1.0 : 0.8 * sbs / (sbs - sy);
      const Eigen::VectorXd y = theta * y0 + (1.0 - theta) * bs;
      hessian += y * y.transpose() / s.dot(y) - bs * bs.transpose() / sbs;
    }

    if (ratio > 0.75 && step_norm > 0.9 * radius) radius = std::min(2.0 * radius, kMaxRadius);
    else if (ratio < 0.25) radius *= 0.5;
    stalled = change < config.convergence_tolerance * (1.0 + std::abs(current.objective)) ? stalled + 1 : 0;
    if (stalled >= kStallLimit) {
      converged = true;
      ++iter;
      break;
    }
  }
  return finish(current, converged, iter);
}

}  // namespace assembler
