#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uavflow/radio.hpp"

namespace uavflow {

enum class Mode { RecklessCooperative, RecklessNonCooperative, Smart };
enum class Topology { Line, Mesh };
enum class Axes { XY, XZ, YZ, XYZ };

/// Which weighted Laplacian drives the trajectory gradient. `Normalized` is
/// W^-1/2 D^-1/2 L D^-1/2 W^-1/2, `Combinatorial` is W^-1/2 L W^-1/2.
enum class LaplacianKind { Normalized, Combinatorial };

enum class PolicyKind { Naive, RecklessMobile, Smart };

struct InterfererPolicy {
  PolicyKind kind = PolicyKind::Naive;
  int tau = 1;                       // Smart: moves on iterations t with t % tau == 0
  std::vector<Position> waypoints;   // RecklessMobile: scripted path
  double speed_m = 1.0;              // RecklessMobile: distance per iteration

  bool operator==(const InterfererPolicy&) const = default;
};

struct InterfererSpec {
  Position position{0.0, 0.0, 20.0};
  double power_dbm = 30.0;
  NodeRole role = NodeRole::Ground;
  InterfererPolicy policy;

  bool operator==(const InterfererSpec&) const = default;
};

struct MotionConfig {
  double dt = 10.0;
  Axes dims = Axes::XYZ;
  double z_min_m = 1.0;
  double max_step_m = 5.0;

  bool operator==(const MotionConfig&) const = default;
};

/// Node weights for the weighted Cheeger constant. `values`, when non-empty,
/// overrides the role-based defaults and must have one entry per node.
struct WeightSpec {
  double source = 10.0;
  double sink = 10.0;
  double relay = 1.0;
  std::vector<double> values;

  bool operator==(const WeightSpec&) const = default;
};

struct PowerConfig {
  double p_max_dbm = 20.0;
  double i_max_dbm = -30.0;
  double r_th_bps = 0.0;

  bool operator==(const PowerConfig&) const = default;
};

struct SolverConfig {
  double eps_bps = 1.0;
  int max_iters = 500;
  double sca_eps_bps = 1.0e-3;
  int sca_max_iters = 100;

  bool operator==(const SolverConfig&) const = default;
};

/// Immutable problem description. Node indexing: 0 is the BS (flow source),
/// 1..K are the relays, K+1 is the desired UE (flow sink).
struct Scenario {
  int schema_version = 1;
  std::optional<std::uint64_t> seed;
  Mode mode = Mode::RecklessNonCooperative;
  Topology topology = Topology::Line;
  LaplacianKind laplacian = LaplacianKind::Combinatorial;

  Position bs{0.0, 0.0, 15.0};
  Position ue{200.0, 0.0, 25.0};
  NodeRole ue_role = NodeRole::Ground;
  std::vector<Position> relays;
  // Set when relays were laid out evenly on the BS-UE segment rather than
  // listed; the layout is regenerated whenever the endpoints change.
  std::optional<int> even_relay_count;

  std::vector<InterfererSpec> interferers;
  std::vector<Position> primary_ues;

  ChannelParams channel;
  bool eta_from_carrier = true;
  SafetyParams safety;
  FadingModel fading;
  WeightSpec weights;
  PowerConfig power;
  MotionConfig motion;
  SolverConfig solver;

  int relay_count() const { return static_cast<int>(relays.size()); }
  int node_count() const { return relay_count() + 2; }
  int interferer_count() const { return static_cast<int>(interferers.size()); }
  int primary_ue_count() const { return static_cast<int>(primary_ues.size()); }
  int source() const { return 0; }
  int sink() const { return node_count() - 1; }
  bool is_relay(int i) const { return i > 0 && i < sink(); }
  bool cooperative() const { return mode == Mode::RecklessCooperative; }

  bool operator==(const Scenario&) const = default;

  NodeRole node_role(int i) const;

  // Watt-valued views of the dBm configuration (defined in scenario_io.cpp).
  double p_max_w() const;
  double i_max_w() const;
  double interferer_power_w(int m) const;
};

/// Mutable per-iteration state. Powers are in watts.
struct NetworkState {
  std::vector<Position> nodes;
  std::vector<Position> interferers;
  std::vector<double> p_w;
  std::vector<double> pj_w;
  int t = 0;
};

}  // namespace uavflow
