#include "uavflow/flow_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <sstream>

#include "uavflow/errors.hpp"
#include "uavflow/radio.hpp"

namespace uavflow {

constexpr int kBruteForceLimit = 16;

std::vector<std::pair<int, int>> topology_edges(Topology topology, int node_count) {
  std::vector<std::pair<int, int>> edges;
  if (topology == Topology::Line) {
    for (int i = 0; i + 1 < node_count; ++i) edges.emplace_back(i, i + 1);
  } else {
    for (int i = 0; i < node_count; ++i)
      for (int j = i + 1; j < node_count; ++j) edges.emplace_back(i, j);
  }
  return edges;
}

double edge_capacity(int i, int j, const NetworkState& state, const Scenario& scenario) {
  const double forward = sir(i, j, state, scenario);
  const double backward = sir(j, i, state, scenario);
  return 0.5 * scenario.channel.bandwidth_hz *
         (std::log1p(forward) + std::log1p(backward)) / std::numbers::ln2;
}

CapacityGraph build_graph(const NetworkState& state, const Scenario& scenario) {
  CapacityGraph g;
  g.n = scenario.node_count();
  g.a = Eigen::MatrixXd::Zero(g.n, g.n);
  g.source = scenario.source();
  g.sink = scenario.sink();
  for (const auto& [i, j] : topology_edges(scenario.topology, g.n)) {
    const double c = edge_capacity(i, j, state, scenario);
    g.a(i, j) = c;
    g.a(j, i) = c;
  }
  return g;
}

DegreeLaplacian degree_laplacian(const CapacityGraph& g) {
  DegreeLaplacian out;
  out.degree = g.a.rowwise().sum().asDiagonal();
  out.laplacian = out.degree - g.a;
  return out;
}

FlowResult max_flow(const CapacityGraph& g) {
  const int n = g.n;
  FlowResult result;
  result.flow = Eigen::MatrixXd::Zero(n, n);
  const double eps = 1e-12 * std::max(g.a.maxCoeff(), 0.0);

  auto residual = [&](int i, int j) { return g.a(i, j) - result.flow(i, j); };

  std::vector<int> parent(n);
  while (true) {
    std::fill(parent.begin(), parent.end(), -1);
    parent[g.source] = g.source;
    std::deque<int> queue{g.source};
    while (!queue.empty() && parent[g.sink] < 0) {
      const int u = queue.front();
      queue.pop_front();
      for (int v = 0; v < n; ++v) {
        if (parent[v] < 0 && residual(u, v) > eps) {
          parent[v] = u;
          queue.push_back(v);
        }
      }
    }
    if (parent[g.sink] < 0) break;

    double bottleneck = std::numeric_limits<double>::infinity();
    for (int v = g.sink; v != g.source; v = parent[v]) bottleneck = std::min(bottleneck, residual(parent[v], v));
    for (int v = g.sink; v != g.source; v = parent[v]) {
      result.flow(parent[v], v) += bottleneck;
      result.flow(v, parent[v]) -= bottleneck;
    }
    result.value += bottleneck;
  }

  // The last BFS marked exactly the residual-reachable set.
  for (int v = 0; v < n; ++v)
    if (parent[v] >= 0) result.cut_set.push_back(v);
  return result;
}

double cut_capacity(const CapacityGraph& g, const std::vector<int>& side) {
  std::vector<bool> in(g.n, false);
  for (int v : side) in[v] = true;
  double total = 0.0;
  for (int i = 0; i < g.n; ++i) {
    if (!in[i]) continue;
    for (int j = 0; j < g.n; ++j)
      if (!in[j]) total += g.a(i, j);
  }
  return total;
}

double min_cut_bruteforce(const CapacityGraph& g) {
  if (g.n > kBruteForceLimit) {
    throw TooLarge("brute-force min cut limited to " + std::to_string(kBruteForceLimit) + " nodes");
  }
  double best = std::numeric_limits<double>::infinity();
  const unsigned full = 1u << g.n;
  for (unsigned mask = 0; mask < full; ++mask) {
    if (!(mask >> g.source & 1u) || (mask >> g.sink & 1u)) continue;
    double cut = 0.0;
    for (int i = 0; i < g.n; ++i) {
      if (!(mask >> i & 1u)) continue;
      for (int j = 0; j < g.n; ++j)
        if (!(mask >> j & 1u)) cut += g.a(i, j);
    }
    best = std::min(best, cut);
  }
  return best;
}

FlowValidation validate_flow(const CapacityGraph& g, const FlowResult& fr, double rel_tol) {
  FlowValidation report;
  const double tol = rel_tol * std::max(1.0, g.a.size() ? g.a.maxCoeff() : 0.0);
  auto fail = [&](const std::string& msg) {
    report.ok = false;
    report.violations.push_back(msg);
  };
  if (fr.flow.rows() != g.n || fr.flow.cols() != g.n) {
    fail("flow matrix dimension mismatch");
    return report;
  }
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      const double f = fr.flow(i, j);
      if (std::abs(f + fr.flow(j, i)) > tol) {
        std::ostringstream os;
        os << "flow not antisymmetric on (" << i << "," << j << ")";
        fail(os.str());
      }
      if (f > g.a(i, j) + tol) {
        std::ostringstream os;
        os << "capacity exceeded on (" << i << "," << j << "): " << f << " > " << g.a(i, j);
        fail(os.str());
      }
    }
  }
  for (int v = 0; v < g.n; ++v) {
    if (v == g.source || v == g.sink) continue;
    const double net = fr.flow.row(v).sum();
    if (std::abs(net) > tol) {
      std::ostringstream os;
      os << "conservation violated at node " << v << ": net outflow " << net;
      fail(os.str());
    }
  }
  const double out = fr.flow.row(g.source).sum();
  if (std::abs(out - fr.value) > tol) {
    std::ostringstream os;
    os << "source outflow " << out << " differs from reported value " << fr.value;
    fail(os.str());
  }
  return report;
}

}  // namespace uavflow
