#include "uavflow/spectral.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "uavflow/errors.hpp"
#include "uavflow/radio.hpp"

namespace uavflow {

constexpr int kEnumerationLimit = 16;

NodeWeights::NodeWeights(std::vector<double> w) : w_(static_cast<Eigen::Index>(w.size())) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i])) {
      throw std::invalid_argument("node weight " + std::to_string(i) + " must be positive and finite");
    }
    w_[static_cast<Eigen::Index>(i)] = w[i];
  }
}

NodeWeights NodeWeights::uniform(int n, double value) {
  return NodeWeights(std::vector<double>(static_cast<std::size_t>(n), value));
}

NodeWeights NodeWeights::from_scenario(const Scenario& scenario) {
  const int n = scenario.node_count();
  if (!scenario.weights.values.empty()) {
    if (static_cast<int>(scenario.weights.values.size()) != n) {
      throw std::invalid_argument("explicit weights must have one entry per node");
    }
    return NodeWeights(scenario.weights.values);
  }
  std::vector<double> w(static_cast<std::size_t>(n), scenario.weights.relay);
  w.front() = scenario.weights.source;
  w.back() = scenario.weights.sink;
  return NodeWeights(std::move(w));
}

WeightedLaplacian weighted_laplacian(const CapacityGraph& g, const NodeWeights& w) {
  const DegreeLaplacian dl = degree_laplacian(g);
  Eigen::VectorXd scale(g.n);
  Eigen::VectorXd null(g.n);
  for (int i = 0; i < g.n; ++i) {
    const double beta = dl.degree(i, i);
    if (!(beta > 0.0)) throw ZeroDegree(i);
    scale[i] = 1.0 / std::sqrt(beta * w[i]);
    null[i] = std::sqrt(beta * w[i]);
  }
  WeightedLaplacian out;
  out.kind = LaplacianKind::Normalized;
  out.matrix = scale.asDiagonal() * dl.laplacian * scale.asDiagonal();
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  out.null_vector = null.normalized();
  return out;
}

WeightedLaplacian combinatorial_laplacian(const CapacityGraph& g, const NodeWeights& w) {
  const DegreeLaplacian dl = degree_laplacian(g);
  const Eigen::VectorXd scale = w.values().cwiseSqrt().cwiseInverse();
  WeightedLaplacian out;
  out.kind = LaplacianKind::Combinatorial;
  out.matrix = scale.asDiagonal() * dl.laplacian * scale.asDiagonal();
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  out.null_vector = w.values().cwiseSqrt().normalized();
  return out;
}

WeightedLaplacian make_laplacian(LaplacianKind kind, const CapacityGraph& g, const NodeWeights& w) {
  return kind == LaplacianKind::Normalized ? weighted_laplacian(g, w) : combinatorial_laplacian(g, w);
}

FiedlerPair fiedler(const WeightedLaplacian& lap) {
  const Eigen::Index n = lap.matrix.rows();
  if (n < 2) throw std::invalid_argument("fiedler pair needs at least two nodes");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap.matrix);
  if (solver.info() != Eigen::Success) throw ConvergenceFailure("symmetric eigensolver did not converge");

  const Eigen::VectorXd& values = solver.eigenvalues();
  FiedlerPair fp;
  fp.vector = solver.eigenvectors().col(1);
  fp.residual = (lap.matrix * fp.vector - values[1] * fp.vector).norm();
  const double scale = std::max(values.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if (fp.residual > 1e-8 * scale) {
    throw ConvergenceFailure("Fiedler residual " + std::to_string(fp.residual) + " above tolerance");
  }
  fp.lambda2 = std::max(values[1], 0.0);
  fp.lambda3 = n > 2 ? values[2] : std::numeric_limits<double>::infinity();

  const double tiny = 1e-12 * fp.vector.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(fp.vector[i]) > tiny) {
      if (fp.vector[i] < 0.0) fp.vector = -fp.vector;
      break;
    }
  }
  return fp;
}

double cheeger_exact(const CapacityGraph& g, const NodeWeights& w) {
  if (g.n > kEnumerationLimit) {
    throw TooLarge("exact Cheeger constant limited to " + std::to_string(kEnumerationLimit) + " nodes");
  }
  const double total = w.values().sum();
  double best = std::numeric_limits<double>::infinity();
  const unsigned full = (1u << g.n) - 1u;
  for (unsigned mask = 1; mask < full; ++mask) {
    double cut = 0.0;
    double weight_in = 0.0;
    for (int i = 0; i < g.n; ++i) {
      if (!(mask >> i & 1u)) continue;
      weight_in += w[i];
      for (int j = 0; j < g.n; ++j)
        if (!(mask >> j & 1u)) cut += g.a(i, j);
    }
    best = std::min(best, cut / std::min(weight_in, total - weight_in));
  }
  return best;
}

CheegerBounds cheeger_bounds_check(const CapacityGraph& g, const NodeWeights& w) {
  CheegerBounds b;
  b.lambda2 = fiedler(combinatorial_laplacian(g, w)).lambda2;
  b.delta_max = g.a.rowwise().sum().maxCoeff();
  b.w_min = w.min();
  b.h_w = cheeger_exact(g, w);
  b.lower = 0.5 * b.lambda2;
  b.upper = std::sqrt(2.0 * b.delta_max * b.lambda2 / b.w_min);
  return b;
}

namespace {

// Adds (B / 2 ln 2) * SIR/(1+SIR) * d ln SIR_{tx->rx} to the gradient buffers.
void accumulate_direction(int tx, int rx, const NetworkState& state, const Scenario& scenario,
                          CapacityGradients& out) {
  const SirParts parts = sir_parts(tx, rx, state, scenario);
  const double denom = parts.denominator();
  if (!(denom > 0.0)) {
    throw DegenerateDenominator("SIR " + std::to_string(tx) + "->" + std::to_string(rx) +
                                " has no interference or safety term");
  }
  const double s = parts.signal / denom;
  const double factor = 0.5 * scenario.channel.bandwidth_hz / std::numbers::ln2 * (s / (1.0 + s));
  if (factor == 0.0) return;

  const Position& r_tx = state.nodes[tx];
  const Position& r_rx = state.nodes[rx];
  const double d_link = (r_tx - r_rx).norm();
  if (!(d_link > 0.0)) throw DegenerateGeometry("coincident link endpoints");
  const double alpha_link = scenario.channel.alpha(classify_link(scenario.node_role(tx), scenario.node_role(rx)));

  // Own-link path loss.
  const Eigen::Vector3d dlog_gain_tx = -alpha_link * (r_tx - r_rx) / (d_link * d_link);
  out.node[tx] += factor * dlog_gain_tx;
  out.node[rx] -= factor * dlog_gain_tx;

  // Interference received at rx; moving either rx or the interferer changes it.
  const Entity rx_entity{EntityKind::Node, rx};
  const NodeRole rx_role = scenario.node_role(rx);
  for (int m = 0; m < scenario.interferer_count(); ++m) {
    const Position& r_m = state.interferers[m];
    const double d = (r_rx - r_m).norm();
    if (!(d > 0.0)) throw DegenerateGeometry("interferer coincides with node " + std::to_string(rx));
    const Entity jam{EntityKind::Interferer, m};
    const double alpha = scenario.channel.alpha(classify_link(scenario.interferers[m].role, rx_role));
    const double received = state.pj_w[m] * gain_sq(jam, rx_entity, state, scenario);
    const Eigen::Vector3d d_received_d_rx = -alpha * received * (r_rx - r_m) / (d * d);
    out.node[rx] -= factor * d_received_d_rx / denom;
    out.interferer[m] += factor * d_received_d_rx / denom;
  }

  // Safety term at rx: chi * sum_{k != tx, rx} u(d_{rx,k} / r_int).
  const SafetyParams& safety = scenario.safety;
  for (int k = 0; k < scenario.node_count(); ++k) {
    if (k == tx || k == rx) continue;
    const Eigen::Vector3d diff = r_rx - state.nodes[k];
    const double d = diff.norm();
    if (!(d > 0.0)) throw DegenerateGeometry("nodes " + std::to_string(rx) + " and " + std::to_string(k) + " coincide");
    const double du = safety.chi_w * smoothed_step_derivative(d / safety.r_int_m, safety);
    const Eigen::Vector3d d_safety_d_rx = du * diff / (safety.r_int_m * d);
    out.node[rx] -= factor * d_safety_d_rx / denom;
    out.node[k] += factor * d_safety_d_rx / denom;
  }
}

}  // namespace

CapacityGradients edge_capacity_gradients(int p, int q, const NetworkState& state,
                                          const Scenario& scenario) {
  CapacityGradients out;
  out.node.assign(static_cast<std::size_t>(scenario.node_count()), Eigen::Vector3d::Zero());
  out.interferer.assign(static_cast<std::size_t>(scenario.interferer_count()), Eigen::Vector3d::Zero());
  if (p == q) return out;
  accumulate_direction(p, q, state, scenario, out);
  accumulate_direction(q, p, state, scenario, out);
  return out;
}

Eigen::Vector3d capacity_gradient(int p, int q, int i, const NetworkState& state,
                                  const Scenario& scenario) {
  if (p == q) return Eigen::Vector3d::Zero();
  return edge_capacity_gradients(p, q, state, scenario).node.at(i);
}

Eigen::Vector3d capacity_gradient_interferer(int p, int q, int m, const NetworkState& state,
                                             const Scenario& scenario) {
  if (p == q) return Eigen::Vector3d::Zero();
  return edge_capacity_gradients(p, q, state, scenario).interferer.at(m);
}

Eigen::MatrixXd fiedler_coefficients(const FiedlerPair& fp, const NodeWeights& w) {
  const Eigen::Index n = fp.vector.size();
  const Eigen::VectorXd scaled = fp.vector.cwiseQuotient(w.values().cwiseSqrt());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q) c(p, q) = (scaled[p] - scaled[q]) * (scaled[p] - scaled[q]);
  return c;
}

namespace {

CapacityGradients surrogate_gradients(const NetworkState& state, const Scenario& scenario,
                                      const FiedlerPair& fp, const NodeWeights& w) {
  const Eigen::MatrixXd c = fiedler_coefficients(fp, w);
  CapacityGradients total;
  total.node.assign(static_cast<std::size_t>(scenario.node_count()), Eigen::Vector3d::Zero());
  total.interferer.assign(static_cast<std::size_t>(scenario.interferer_count()), Eigen::Vector3d::Zero());
  for (const auto& [p, q] : topology_edges(scenario.topology, scenario.node_count())) {
    if (c(p, q) == 0.0) continue;
    const CapacityGradients edge = edge_capacity_gradients(p, q, state, scenario);
    for (std::size_t i = 0; i < total.node.size(); ++i) total.node[i] += c(p, q) * edge.node[i];
    for (std::size_t m = 0; m < total.interferer.size(); ++m) total.interferer[m] += c(p, q) * edge.interferer[m];
  }
  return total;
}

}  // namespace

GradientVector connectivity_gradient(const NetworkState& state, const Scenario& scenario,
                                     const FiedlerPair& fp, const NodeWeights& w) {
  const CapacityGradients total = surrogate_gradients(state, scenario, fp, w);
  GradientVector out;
  for (int i = 0; i < scenario.node_count(); ++i) {
    if (!scenario.is_relay(i)) continue;
    out.index.push_back(i);
    out.grad.push_back(total.node[i]);
  }
  return out;
}

GradientVector jammer_gradient(const NetworkState& state, const Scenario& scenario,
                               const FiedlerPair& fp, const NodeWeights& w) {
  const CapacityGradients total = surrogate_gradients(state, scenario, fp, w);
  GradientVector out;
  for (int m = 0; m < scenario.interferer_count(); ++m) {
    if (scenario.interferers[m].policy.kind != PolicyKind::Smart) continue;
    out.index.push_back(m);
    out.grad.push_back(-total.interferer[m]);
  }
  return out;
}

}  // namespace uavflow
