#pragma once

// Small dense log-barrier interior-point solver for problems of the form
//
//   maximize  c^T x + sum_l rho_l * ln(b_l + w_l^T x)
//   s.t.      f_k(x) >= 0,
//
// where every f_k is a sum of an affine part and nonnegatively weighted logs
// of affine functions. Both the objective and the constraints are concave.

#include <string>
#include <vector>

#include <Eigen/Core>

namespace uavflow {

/// coef * ln(base + weights^T x); concave for coef >= 0.
struct LogTerm {
  double coef = 0.0;
  double base = 0.0;
  Eigen::VectorXd weights;
};

/// constant + linear^T x + sum of LogTerms.
struct ConcaveFunction {
  double constant = 0.0;
  Eigen::VectorXd linear;
  std::vector<LogTerm> logs;

  explicit ConcaveFunction(Eigen::Index dim = 0) : linear(Eigen::VectorXd::Zero(dim)) {}

  /// Value, or -inf when a log argument is non-positive.
  double value(const Eigen::VectorXd& x) const;
  /// Gradient and (negative semidefinite) Hessian at x; adds into the outputs.
  void add_derivatives(const Eigen::VectorXd& x, double scale, Eigen::VectorXd& grad,
                       Eigen::MatrixXd& hess) const;
};

struct BarrierConstraint {
  std::string family;
  ConcaveFunction f;
};

struct BarrierProblem {
  ConcaveFunction objective;
  std::vector<BarrierConstraint> constraints;
};

struct BarrierOptions {
  double t0 = 1.0;
  double mu = 10.0;
  double gap_tol = 1e-8;        // m / t at termination
  double stall_gap = 1e-6;      // a stalled centering is accepted below this gap
  double newton_tol = 1e-8;     // half squared Newton decrement
  int max_newton = 200;
  int max_outer = 40;
};

struct BarrierResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double gap = 0.0;            // m / t of the final centering
  double kkt_residual = 0.0;   // max(stationarity, complementarity) of the final iterate
  int newton_steps = 0;
};

/// Returns the index of the first constraint with f_k(x) <= 0, or -1.
int first_violated(const BarrierProblem& problem, const Eigen::VectorXd& x);

/// Requires a strictly feasible x0. Throws ConvergenceFailure when a centering
/// step fails to converge.
BarrierResult maximize_barrier(const BarrierProblem& problem, const Eigen::VectorXd& x0,
                               const BarrierOptions& options = {});

}  // namespace uavflow
