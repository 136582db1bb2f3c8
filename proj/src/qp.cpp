#include "assembler/qp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "assembler/error.hpp"

namespace assembler {

namespace {

// Largest step in (0, 1] keeping v + step * dv > 0.
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double step = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) step = std::min(step, -v[i] / dv[i]);
  }
  return step;
}

}  // namespace

QpSolution solve_qp(const QpProblem& p, const QpOptions& options) {
  const Eigen::Index n = p.gradient.size();
  const Eigen::Index m = p.constraint_bound.size();
  if (p.hessian.rows() != n || p.hessian.cols() != n || p.constraint_matrix.rows() != m ||
      (m > 0 && p.constraint_matrix.cols() != n)) {
    throw InvalidArgument("QP dimensions do not agree");
  }
  const Eigen::MatrixXd& H = p.hessian;
  const Eigen::MatrixXd& G = p.constraint_matrix;
  const Eigen::VectorXd& h = p.constraint_bound;

  QpSolution sol;
  sol.x = Eigen::VectorXd::Zero(n);
  if (m == 0) {
    sol.x = H.ldlt().solve(-p.gradient);
    sol.multipliers.resize(0);
    sol.converged = sol.x.allFinite();
    return sol;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = (G * x - h).cwiseMax(1.0);
  Eigen::VectorXd z = Eigen::VectorXd::Ones(m);
  const double scale = 1.0 + std::max(p.gradient.lpNorm<Eigen::Infinity>(), h.lpNorm<Eigen::Infinity>());

  for (int it = 0; it < options.max_iterations; ++it) {
    sol.iterations = it + 1;
    const Eigen::VectorXd rd = H * x + p.gradient - G.transpose() * z;
    const Eigen::VectorXd rp = G * x - s - h;
    const double mu = s.dot(z) / static_cast<double>(m);
    if (rd.lpNorm<Eigen::Infinity>() <= options.tolerance * scale &&
        rp.lpNorm<Eigen::Infinity>() <= options.tolerance * scale && mu <= options.tolerance) {
      sol.converged = true;
      break;
    }

    const Eigen::VectorXd w = z.cwiseQuotient(s);
    const Eigen::MatrixXd K = H + G.transpose() * w.asDiagonal() * G;
    const Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) break;

    auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& ds,
                         Eigen::VectorXd& dz) {
      const Eigen::VectorXd rhs =
          -rd - G.transpose() * (rc + z.cwiseProduct(rp)).cwiseQuotient(s);
      dx = llt.solve(rhs);
      ds = G * dx + rp;
      dz = (-rc - z.cwiseProduct(ds)).cwiseQuotient(s);
    };

    Eigen::VectorXd dx, ds, dz;
    direction(s.cwiseProduct(z), dx, ds, dz);
    const double a_aff = std::min(max_step(s, ds), max_step(z, dz));
    const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / static_cast<double>(m);
    const double sigma = std::pow(mu_aff / mu, 3.0);

    const Eigen::VectorXd rc =
        s.cwiseProduct(z) + ds.cwiseProduct(dz) - Eigen::VectorXd::Constant(m, sigma * mu);
    direction(rc, dx, ds, dz);
    const double a = 0.99 * std::min(max_step(s, ds), max_step(z, dz));
    x += a * dx;
    s += a * ds;
    z += a * dz;
    if (!x.allFinite() || !s.allFinite() || !z.allFinite()) break;
  }
  sol.x = x;
  sol.multipliers = z;
  return sol;
}

}  // namespace assembler
