#pragma once

// Alternating optimization of relay positions and transmit powers, interferer
// motion policies, and parameter sweeps.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uavflow/power_alloc.hpp"
#include "uavflow/scenario.hpp"
#include "uavflow/spectral.hpp"

namespace uavflow {

struct TraceRecord {
  int t = 0;
  double flow_bps = 0.0;
  double lambda2 = 0.0;
  double eta_bps = 0.0;
  std::vector<Position> nodes;
  std::vector<double> p_w;
  std::vector<Position> interferers;
  std::vector<double> pj_w;
  double imax_slack_w = 0.0;  // +inf when no interference rows apply
  double qos_slack_bps = 0.0; // +inf when no QoS rows apply
  std::vector<std::pair<int, int>> cut_edges;

  bool operator==(const TraceRecord&) const = default;
};

struct TraceEvent {
  int t = 0;
  std::string what;

  bool operator==(const TraceEvent&) const = default;
};

struct SimulationTrace {
  std::uint64_t scenario_hash = 0;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;  // records[0] is the initial state
  bool converged = false;
  std::string error_family;          // empty on success
  std::string error;
  std::vector<TraceEvent> events;

  bool failed() const { return !error_family.empty(); }
  int iterations() const { return records.empty() ? 0 : static_cast<int>(records.size()) - 1; }
  double final_flow() const { return records.empty() ? 0.0 : records.back().flow_bps; }

  bool operator==(const SimulationTrace&) const = default;
};

/// Node positions from the scenario, P_max on every node, configured
/// interferer powers, t = 0.
NetworkState initial_state(const Scenario& scenario);

/// Moves every relay by dt * gradient on the enabled axes, clips the
/// displacement to max_step and clamps altitude at z_min.
NetworkState step_trajectory(const NetworkState& state, const Scenario& scenario,
                             const GradientVector& grad, const MotionConfig& cfg);

/// Applies each interferer's policy for iteration t.
NetworkState jammer_step(const NetworkState& state, const Scenario& scenario, int t);

/// Position reached after travelling `distance` from `start` along `waypoints`.
Position path_point(const Position& start, const std::vector<Position>& waypoints, double distance);

/// Flow, connectivity and slacks of `state` at its current powers.
TraceRecord evaluate_record(const NetworkState& state, const Scenario& scenario, double eta_bps);

SimulationTrace alternating_optimize(const Scenario& scenario);

struct SweepSpec {
  std::string field;
  std::vector<std::string> values;
};

struct SweepPoint {
  std::string value;
  SimulationTrace trace;
};

/// One independent run per value. A point whose scenario cannot be built is
/// returned with an error-marked empty trace.
std::vector<SweepPoint> run_sweep(const Scenario& scenario, const SweepSpec& spec);

}  // namespace uavflow
