#pragma once

// Weighted Laplacians, algebraic connectivity, exact Cheeger constants, and
// the spatial gradients that steer relays (ascent) and smart jammers (descent).

#include <vector>

#include <Eigen/Core>

#include "uavflow/flow_graph.hpp"
#include "uavflow/scenario.hpp"

namespace uavflow {

/// Strictly positive per-node weights.
class NodeWeights {
 public:
  explicit NodeWeights(std::vector<double> w);
  static NodeWeights uniform(int n, double value = 1.0);
  /// Role-based or explicit weights as configured in the scenario.
  static NodeWeights from_scenario(const Scenario& scenario);

  const Eigen::VectorXd& values() const { return w_; }
  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_[i]; }
  double min() const { return w_.minCoeff(); }

 private:
  Eigen::VectorXd w_;
};

struct WeightedLaplacian {
  LaplacianKind kind = LaplacianKind::Normalized;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd null_vector;  // unit norm
};

/// W^-1/2 D^-1/2 (D - A) D^-1/2 W^-1/2. Throws ZeroDegree on isolated nodes.
WeightedLaplacian weighted_laplacian(const CapacityGraph& g, const NodeWeights& w);

/// W^-1/2 (D - A) W^-1/2. Defined for any graph.
WeightedLaplacian combinatorial_laplacian(const CapacityGraph& g, const NodeWeights& w);

WeightedLaplacian make_laplacian(LaplacianKind kind, const CapacityGraph& g, const NodeWeights& w);

struct FiedlerPair {
  double lambda2 = 0.0;
  Eigen::VectorXd vector;  // unit norm, first non-negligible entry positive
  double lambda3 = 0.0;    // +inf for two-node graphs
  double residual = 0.0;   // ||L v - lambda2 v||
  bool near_crossing() const { return lambda3 - lambda2 < 1e-8; }
};

/// Dense symmetric eigendecomposition; throws ConvergenceFailure if the
/// residual exceeds 1e-8 ||L||.
FiedlerPair fiedler(const WeightedLaplacian& lap);

/// min over nonempty proper S of cut(S) / min(|S|_W, |S^c|_W). n <= 16.
double cheeger_exact(const CapacityGraph& g, const NodeWeights& w);

/// lambda2/2 <= h_W <= sqrt(2 delta_max lambda2 / w_min), with lambda2 taken
/// from the combinatorial weighted Laplacian W^-1/2 L W^-1/2 and delta_max the
/// largest generalized degree.
struct CheegerBounds {
  double lower = 0.0;
  double h_w = 0.0;
  double upper = 0.0;
  double lambda2 = 0.0;
  double delta_max = 0.0;
  double w_min = 0.0;

  bool holds(double tol = 1e-9) const { return lower <= h_w + tol && h_w <= upper + tol; }
};

CheegerBounds cheeger_bounds_check(const CapacityGraph& g, const NodeWeights& w);

/// Partial derivatives of a_{p,q} with respect to the position of every node
/// (`node`, size N) and every interferer (`interferer`, size M), bits/s per m.
struct CapacityGradients {
  std::vector<Eigen::Vector3d> node;
  std::vector<Eigen::Vector3d> interferer;
};

CapacityGradients edge_capacity_gradients(int p, int q, const NetworkState& state,
                                          const Scenario& scenario);

/// d a_{p,q} / d r_i for node i. Zero when p == q.
Eigen::Vector3d capacity_gradient(int p, int q, int i, const NetworkState& state,
                                  const Scenario& scenario);

/// d a_{p,q} / d r^J_m for interferer m.
Eigen::Vector3d capacity_gradient_interferer(int p, int q, int m, const NetworkState& state,
                                             const Scenario& scenario);

/// Frozen Fiedler coefficients c_pq = (v_p/sqrt(w_p) - v_q/sqrt(w_q))^2.
Eigen::MatrixXd fiedler_coefficients(const FiedlerPair& fp, const NodeWeights& w);

struct GradientVector {
  std::vector<int> index;  // node index (relays) or interferer index (jammers)
  std::vector<Eigen::Vector3d> grad;
};

/// sum_{p~q} c_pq d a_pq / d r_i for every relay i.
GradientVector connectivity_gradient(const NetworkState& state, const Scenario& scenario,
                                     const FiedlerPair& fp, const NodeWeights& w);

/// -sum_{p~q} c_pq d a_pq / d r^J_m for every interferer with a Smart policy:
/// the direction a jammer moves to lower the network's connectivity.
GradientVector jammer_gradient(const NetworkState& state, const Scenario& scenario,
                               const FiedlerPair& fp, const NodeWeights& w);

}  // namespace uavflow
