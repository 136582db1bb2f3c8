#pragma once

#include <Eigen/Core>

namespace assembler {

// Dense convex QP:  min 0.5 x'Hx + g'x  subject to  G x >= h.
// H must be symmetric positive definite.
struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd constraint_matrix;
  Eigen::VectorXd constraint_bound;
};

struct QpOptions {
  int max_iterations = 100;
  double tolerance = 1e-10;
};

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // one per constraint row, >= 0
  bool converged = false;
  int iterations = 0;
};

// Mehrotra predictor-corrector interior point method.
QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {});

}  // namespace assembler
