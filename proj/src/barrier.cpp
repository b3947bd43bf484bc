#include "uavflow/barrier.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "uavflow/errors.hpp"

namespace uavflow {

double ConcaveFunction::value(const Eigen::VectorXd& x) const {
  double v = constant + linear.dot(x);
  for (const LogTerm& term : logs) {
    const double arg = term.base + term.weights.dot(x);
    if (!(arg > 0.0)) return -std::numeric_limits<double>::infinity();
    v += term.coef * std::log(arg);
  }
  return v;
}

void ConcaveFunction::add_derivatives(const Eigen::VectorXd& x, double scale, Eigen::VectorXd& grad,
                                      Eigen::MatrixXd& hess) const {
  grad += scale * linear;
  for (const LogTerm& term : logs) {
    const double arg = term.base + term.weights.dot(x);
    grad += scale * term.coef / arg * term.weights;
    hess -= scale * term.coef / (arg * arg) * term.weights * term.weights.transpose();
  }
}

int first_violated(const BarrierProblem& problem, const Eigen::VectorXd& x) {
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    if (!(problem.constraints[k].f.value(x) > 0.0)) return static_cast<int>(k);
  }
  return -1;
}

namespace {

// phi_t(x) = -t * objective(x) - sum_k ln f_k(x); +inf outside the domain.
double barrier_value(const BarrierProblem& problem, const Eigen::VectorXd& x, double t) {
  double phi = -t * problem.objective.value(x);
  if (!std::isfinite(phi)) return std::numeric_limits<double>::infinity();
  for (const BarrierConstraint& c : problem.constraints) {
    const double fk = c.f.value(x);
    if (!(fk > 0.0)) return std::numeric_limits<double>::infinity();
    phi -= std::log(fk);
  }
  return phi;
}

void barrier_derivatives(const BarrierProblem& problem, const Eigen::VectorXd& x, double t,
                         Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  const Eigen::Index n = x.size();
  grad.setZero(n);
  hess.setZero(n, n);
  Eigen::VectorXd obj_grad = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd obj_hess = Eigen::MatrixXd::Zero(n, n);
  problem.objective.add_derivatives(x, 1.0, obj_grad, obj_hess);
  grad -= t * obj_grad;
  hess -= t * obj_hess;
  Eigen::VectorXd g(n);
  Eigen::MatrixXd h(n, n);
  for (const BarrierConstraint& c : problem.constraints) {
    g.setZero();
    h.setZero();
    c.f.add_derivatives(x, 1.0, g, h);
    const double fk = c.f.value(x);
    grad -= g / fk;
    hess += g * g.transpose() / (fk * fk) - h / fk;
  }
}

}  // namespace

BarrierResult maximize_barrier(const BarrierProblem& problem, const Eigen::VectorXd& x0,
                               const BarrierOptions& options) {
  const int violated = first_violated(problem, x0);
  if (violated >= 0) {
    throw Infeasible(problem.constraints[violated].family, "starting point is not strictly feasible");
  }
  const double m = static_cast<double>(std::max<std::size_t>(problem.constraints.size(), 1));
  BarrierResult result;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  double t = options.t0;
  Eigen::VectorXd last_centered = x0;

  for (int outer = 0; outer < options.max_outer; ++outer) {
    bool centered = false;
    for (int it = 0; it < options.max_newton; ++it) {
      barrier_derivatives(problem, x, t, grad, hess);
      // Every variable carries a barrier term, so the Hessian is positive
      // definite in exact arithmetic; fall back to a diagonal shift only when
      // the factorization says otherwise.
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        hess.diagonal().array() += 1e-12 * hess.diagonal().cwiseAbs().maxCoeff();
        ldlt.compute(hess);
      }
      const Eigen::VectorXd step = -ldlt.solve(grad);
      const double decrement_sq = -grad.dot(step);
      if (!std::isfinite(decrement_sq)) throw ConvergenceFailure("barrier Newton step is not finite");
      const double phi = barrier_value(problem, x, t);
      // Below this the predicted decrease is lost in the rounding of phi.
      const double noise = 1e-11 * (1.0 + std::abs(phi));
      if (0.5 * decrement_sq <= std::max(options.newton_tol, noise)) {
        centered = true;
        break;
      }
      double s = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 80; ++ls) {
        const Eigen::VectorXd trial = x + s * step;
        const double phi_trial = barrier_value(problem, trial, t);
        if (phi_trial <= phi - 0.25 * s * decrement_sq) {
          x = trial;
          accepted = true;
          break;
        }
        s *= 0.5;
      }
      ++result.newton_steps;
      // No representable descent left along the Newton direction.
      if (!accepted || (s < 1e-6 && 0.5 * decrement_sq < 1e-3)) {
        centered = true;
        break;
      }
    }
    if (!centered) {
      // Past the point where the duality gap is already tiny, a stalled
      // centering only reflects Hessian conditioning; keep the last iterate.
      if (outer > 0 && m / (t / options.mu) <= options.stall_gap) {
        t /= options.mu;
        x = last_centered;
        break;
      }
      throw ConvergenceFailure("barrier centering did not converge");
    }
    last_centered = x;
    if (m / t <= options.gap_tol) break;
    t *= options.mu;
  }

  barrier_derivatives(problem, x, t, grad, hess);
  result.x = x;
  result.objective = problem.objective.value(x);
  result.gap = m / t;
  result.kkt_residual = std::max(grad.norm() / t, result.gap);
  return result;
}

}  // namespace uavflow
