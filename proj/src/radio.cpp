#include "uavflow/radio.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "uavflow/errors.hpp"
#include "uavflow/scenario.hpp"

namespace uavflow {

namespace {

std::uint64_t entity_key(Entity e) {
  return (static_cast<std::uint64_t>(e.kind) << 32) | static_cast<std::uint32_t>(e.index);
}

// Logistic sigma(t) and 1 - sigma(t) without overflow for large |t|.
void logistic(double t, double& s, double& one_minus_s) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    s = 1.0 / (1.0 + e);
    one_minus_s = e / (1.0 + e);
  } else {
    const double e = std::exp(t);
    s = e / (1.0 + e);
    one_minus_s = 1.0 / (1.0 + e);
  }
}

double smoothed_step_arg(double y, const SafetyParams& safety) {
  return -safety.kappa * y - std::log(safety.y0);
}

}  // namespace

double reference_loss_db(double carrier_hz) {
  const double ratio = 4.0 * std::numbers::pi * carrier_hz / kSpeedOfLight;
  return 10.0 * std::log10(ratio * ratio);
}

double path_loss_db(LinkKind kind, double distance_m, const ChannelParams& params) {
  if (!(distance_m > 0.0)) {
    throw DegenerateGeometry("path loss at non-positive distance " + std::to_string(distance_m));
  }
  return params.alpha(kind) * 10.0 * std::log10(distance_m) + params.eta_db(kind);
}

double fading_gain_sq(const FadingModel& fading, Entity a, Entity b) {
  if (fading.kind == FadingModel::Kind::Unit) return 1.0;
  std::uint64_t ka = entity_key(a);
  std::uint64_t kb = entity_key(b);
  if (ka > kb) std::swap(ka, kb);
  std::seed_seq seq{static_cast<std::uint32_t>(fading.seed), static_cast<std::uint32_t>(fading.seed >> 32),
                    static_cast<std::uint32_t>(ka), static_cast<std::uint32_t>(ka >> 32),
                    static_cast<std::uint32_t>(kb), static_cast<std::uint32_t>(kb >> 32)};
  std::mt19937_64 rng(seq);
  // |g|^2 of a unit-variance circular complex Gaussian is Exp(1).
  std::exponential_distribution<double> dist(1.0);
  return dist(rng);
}

double link_gain_sq(LinkKind kind, double distance_m, double fading_sq,
                    const ChannelParams& params) {
  if (!(distance_m > 0.0)) {
    throw DegenerateGeometry("channel gain at non-positive distance " + std::to_string(distance_m));
  }
  return fading_sq * std::pow(distance_m, -params.alpha(kind)) *
         std::pow(10.0, -params.eta_db(kind) / 10.0);
}

double smoothed_step(double y, const SafetyParams& safety) {
  double s = 0.0;
  double one_minus_s = 0.0;
  logistic(smoothed_step_arg(y, safety), s, one_minus_s);
  return safety.zeta * s;
}

double smoothed_step_derivative(double y, const SafetyParams& safety) {
  double s = 0.0;
  double one_minus_s = 0.0;
  logistic(smoothed_step_arg(y, safety), s, one_minus_s);
  return -safety.kappa * safety.zeta * s * one_minus_s;
}

Position entity_position(Entity e, const NetworkState& state, const Scenario& scenario) {
  switch (e.kind) {
    case EntityKind::Node:
      return state.nodes.at(e.index);
    case EntityKind::Interferer:
      return state.interferers.at(e.index);
    case EntityKind::PrimaryUe:
      return scenario.primary_ues.at(e.index);
  }
  return Position::Zero();
}

NodeRole entity_role(Entity e, const Scenario& scenario) {
  switch (e.kind) {
    case EntityKind::Node:
      return scenario.node_role(e.index);
    case EntityKind::Interferer:
      return scenario.interferers.at(e.index).role;
    case EntityKind::PrimaryUe:
      return NodeRole::Ground;
  }
  return NodeRole::Ground;
}

double gain_sq(Entity a, Entity b, const NetworkState& state, const Scenario& scenario) {
  const double d = (entity_position(a, state, scenario) - entity_position(b, state, scenario)).norm();
  const LinkKind kind = classify_link(entity_role(a, scenario), entity_role(b, scenario));
  return link_gain_sq(kind, d, fading_gain_sq(scenario.fading, a, b), scenario.channel);
}

SirParts sir_parts(int i, int j, const NetworkState& state, const Scenario& scenario) {
  SirParts parts;
  const Entity rx{EntityKind::Node, j};
  parts.signal = state.p_w.at(i) * gain_sq(Entity{EntityKind::Node, i}, rx, state, scenario);
  for (int m = 0; m < scenario.interferer_count(); ++m) {
    parts.interference += state.pj_w.at(m) * gain_sq(Entity{EntityKind::Interferer, m}, rx, state, scenario);
  }
  const SafetyParams& safety = scenario.safety;
  double penalty = 0.0;
  for (int k = 0; k < scenario.node_count(); ++k) {
    if (k == i || k == j) continue;
    const double d = (state.nodes[j] - state.nodes[k]).norm();
    penalty += smoothed_step(d / safety.r_int_m, safety);
  }
  parts.safety = safety.chi_w * penalty;
  return parts;
}

double sir(int i, int j, const NetworkState& state, const Scenario& scenario) {
  const SirParts parts = sir_parts(i, j, state, scenario);
  const double denom = parts.denominator();
  if (!(denom > 0.0)) {
    throw DegenerateDenominator("SIR " + std::to_string(i) + "->" + std::to_string(j) +
                                " has no interference or safety term");
  }
  return parts.signal / denom;
}

double sinr_primary(int m, int u, int i, const NetworkState& state, const Scenario& scenario) {
  const Entity ue{EntityKind::PrimaryUe, u};
  const double wanted = state.pj_w.at(m) * gain_sq(Entity{EntityKind::Interferer, m}, ue, state, scenario);
  const double leaked = state.p_w.at(i) * gain_sq(Entity{EntityKind::Node, i}, ue, state, scenario);
  return wanted / (leaked + scenario.channel.noise_w);
}

double primary_rate(int m, int u, int i, const NetworkState& state, const Scenario& scenario) {
  return scenario.channel.bandwidth_hz * std::log2(1.0 + sinr_primary(m, u, i, state, scenario));
}

}  // namespace uavflow
