#pragma once

// Physical layer: path loss, channel gains, the safety-augmented SIR of the
// relay network and the SINR/rate seen by primary-network users.

#include <cstdint>

#include <Eigen/Core>

namespace uavflow {

using Position = Eigen::Vector3d;

inline constexpr double kSpeedOfLight = 3.0e8;

enum class NodeRole { Ground, Aerial };

enum class LinkKind { AirToAir, AirToGround };

/// A2A only when both endpoints are aerial; any terrestrial endpoint makes the
/// link A2G (ground-ground links included).
constexpr LinkKind classify_link(NodeRole a, NodeRole b) {
  return (a == NodeRole::Aerial && b == NodeRole::Aerial) ? LinkKind::AirToAir
                                                          : LinkKind::AirToGround;
}

struct ChannelParams {
  double alpha_a2a = 2.05;
  double alpha_a2g = 2.32;
  double eta_a2a_db = 0.0;  // reference loss at 1 m
  double eta_a2g_db = 0.0;
  double carrier_hz = 2.0e9;
  double bandwidth_hz = 1.0e4;
  double noise_w = 1.0e-13;

  bool operator==(const ChannelParams&) const = default;

  double alpha(LinkKind kind) const {
    return kind == LinkKind::AirToAir ? alpha_a2a : alpha_a2g;
  }
  double eta_db(LinkKind kind) const {
    return kind == LinkKind::AirToAir ? eta_a2a_db : eta_a2g_db;
  }
};

/// Parameters of the smoothed-step safety penalty. `chi_w` carries watt units
/// so that it adds to received interference power.
struct SafetyParams {
  double chi_w = 1.0;
  double zeta = 1.0;
  double kappa = 10.0;
  double y0 = 1.0e-3;
  double r_int_m = 5.0;

  bool operator==(const SafetyParams&) const = default;
};

/// Small-scale fading. ComplexGaussian draws |g|^2 ~ Exp(1) once per unordered
/// endpoint pair from `seed`; the draw is a pure function of (seed, pair), so
/// gains are reciprocal and frozen for a run.
struct FadingModel {
  enum class Kind { Unit, ComplexGaussian };
  Kind kind = Kind::Unit;
  std::uint64_t seed = 0;

  bool operator==(const FadingModel&) const = default;
};

enum class EntityKind { Node, Interferer, PrimaryUe };

/// Any radio endpoint: a relay-network node, an interferer, or a primary UE.
struct Entity {
  EntityKind kind;
  int index;
};

struct Scenario;
struct NetworkState;

double reference_loss_db(double carrier_hz);

/// alpha * 10 log10(d) + eta. Throws DegenerateGeometry for d <= 0.
double path_loss_db(LinkKind kind, double distance_m, const ChannelParams& params);

double fading_gain_sq(const FadingModel& fading, Entity a, Entity b);

/// |g|^2 / PL_linear(d) for a link of the given kind.
double link_gain_sq(LinkKind kind, double distance_m, double fading_sq,
                    const ChannelParams& params);

double smoothed_step(double y, const SafetyParams& safety);
double smoothed_step_derivative(double y, const SafetyParams& safety);

Position entity_position(Entity e, const NetworkState& state, const Scenario& scenario);
NodeRole entity_role(Entity e, const Scenario& scenario);

/// |h_{a,b}|^2 between two endpoints at their current positions.
double gain_sq(Entity a, Entity b, const NetworkState& state, const Scenario& scenario);

/// Node-to-node shorthand.
inline double gain_sq(int i, int j, const NetworkState& state, const Scenario& scenario) {
  return gain_sq(Entity{EntityKind::Node, i}, Entity{EntityKind::Node, j}, state, scenario);
}

/// Terms of SIR_{i->j}. `interference` is the received interferer power at j,
/// `safety` is chi * sum_{k in N\{i,j}} u(d_{j,k}/r_int).
struct SirParts {
  double signal = 0.0;
  double interference = 0.0;
  double safety = 0.0;

  double denominator() const { return interference + safety; }
};

SirParts sir_parts(int i, int j, const NetworkState& state, const Scenario& scenario);

/// Safety-augmented SIR for transmission i -> j within the relay network.
/// Throws DegenerateDenominator when no interference and no safety term remain.
double sir(int i, int j, const NetworkState& state, const Scenario& scenario);

/// SINR at primary UE `u` served by interferer `m` while relay node `i` transmits.
double sinr_primary(int m, int u, int i, const NetworkState& state, const Scenario& scenario);

/// B log2(1 + SINR) in bits/s.
double primary_rate(int m, int u, int i, const NetworkState& state, const Scenario& scenario);

}  // namespace uavflow
