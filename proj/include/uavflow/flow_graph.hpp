#pragma once

// Capacity graph of the relay network and the single-commodity max flow
// between the BS and the desired UE.

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "uavflow/scenario.hpp"

namespace uavflow {

/// Symmetric capacity matrix in bits/s. Zero diagonal, zero on non-edges.
struct CapacityGraph {
  int n = 0;
  Eigen::MatrixXd a;
  int source = 0;
  int sink = 0;
};

struct FlowResult {
  double value = 0.0;
  Eigen::MatrixXd flow;   // antisymmetric, flow(i,j) > 0 means i -> j
  std::vector<int> cut_set;  // source side of a minimum cut, sorted
};

struct FlowValidation {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Undirected node pairs (i < j) carrying capacity under `topology`.
std::vector<std::pair<int, int>> topology_edges(Topology topology, int node_count);

/// (B/2) (log2(1 + SIR_ij) + log2(1 + SIR_ji)).
double edge_capacity(int i, int j, const NetworkState& state, const Scenario& scenario);

CapacityGraph build_graph(const NetworkState& state, const Scenario& scenario);

struct DegreeLaplacian {
  Eigen::MatrixXd degree;
  Eigen::MatrixXd laplacian;
};

DegreeLaplacian degree_laplacian(const CapacityGraph& g);

/// Edmonds-Karp on real capacities. Each undirected edge is a pair of opposing
/// arcs with capacity a(i,j). Residuals at or below 1e-12 * max capacity are
/// treated as saturated. A disconnected graph yields value 0.
FlowResult max_flow(const CapacityGraph& g);

/// Minimum s-d cut by enumerating all 2^(n-2) separating subsets. n <= 16.
double min_cut_bruteforce(const CapacityGraph& g);

/// Capacity of the cut (S, complement) where S is given as a node list.
double cut_capacity(const CapacityGraph& g, const std::vector<int>& side);

/// Checks conservation at interior nodes, |f| <= a on every pair, and that the
/// net flow out of the source equals fr.value. Tolerances are `rel_tol`
/// times max(1, largest capacity).
FlowValidation validate_flow(const CapacityGraph& g, const FlowResult& fr, double rel_tol = 1e-12);

}  // namespace uavflow
