#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "uavflow/errors.hpp"
#include "uavflow/mission.hpp"
#include "uavflow/radio.hpp"
#include "uavflow/scenario_io.hpp"

using namespace uavflow;

namespace {

Scenario chain(std::vector<Position> relays) {
  Scenario s = default_scenario();
  s.seed = 1;
  s.even_relay_count.reset();
  s.relays = std::move(relays);
  finalize(s);
  return s;
}

}  // namespace

TEST_CASE("reference loss follows the free-space formula") {
  CHECK(std::abs(reference_loss_db(kSpeedOfLight / (4.0 * std::acos(-1.0)))) <= 1e-12);
  CHECK(std::abs(reference_loss_db(2e9) - 38.46) <= 0.01);
  CHECK(std::abs(reference_loss_db(20e9) - 58.46) <= 0.01);
}

TEST_CASE("path loss by link class") {
  ChannelParams p;
  p.eta_a2a_db = p.eta_a2g_db = 38.46;
  CHECK(path_loss_db(LinkKind::AirToAir, 1.0, p) == 38.46);
  CHECK(std::abs(path_loss_db(LinkKind::AirToAir, 100.0, p) - 79.46) <= 0.01);
  CHECK(std::abs(path_loss_db(LinkKind::AirToGround, 100.0, p) - 84.86) <= 0.01);
  CHECK_THROWS_AS(path_loss_db(LinkKind::AirToAir, 0.0, p), DegenerateGeometry);
  CHECK_THROWS_AS(path_loss_db(LinkKind::AirToAir, -1.0, p), DegenerateGeometry);
}

TEST_CASE("path loss grows with distance and A2G dominates A2A") {
  ChannelParams p;
  p.eta_a2a_db = 38.46;
  p.eta_a2g_db = 40.0;
  double prev = -std::numeric_limits<double>::infinity();
  for (double d = 0.5; d < 1000.0; d *= 1.7) {
    const double a2a = path_loss_db(LinkKind::AirToAir, d, p);
    CHECK(a2a > prev);
    CHECK(path_loss_db(LinkKind::AirToGround, d, p) >= a2a);
    prev = a2a;
  }
}

TEST_CASE("link classification is by role") {
  CHECK(classify_link(NodeRole::Aerial, NodeRole::Aerial) == LinkKind::AirToAir);
  CHECK(classify_link(NodeRole::Aerial, NodeRole::Ground) == LinkKind::AirToGround);
  CHECK(classify_link(NodeRole::Ground, NodeRole::Aerial) == LinkKind::AirToGround);
  CHECK(classify_link(NodeRole::Ground, NodeRole::Ground) == LinkKind::AirToGround);
}

TEST_CASE("unit-fading gains at reference distances") {
  ChannelParams p;
  p.eta_a2a_db = 38.46;
  CHECK(std::abs(link_gain_sq(LinkKind::AirToAir, 100.0, 1.0, p) - 1.133e-8) <= 1e-10);
  CHECK(std::abs(link_gain_sq(LinkKind::AirToAir, 1.0, 1.0, p) - 1.426e-4) <= 1e-6);
  CHECK_THROWS_AS(link_gain_sq(LinkKind::AirToAir, 0.0, 1.0, p), DegenerateGeometry);
}

TEST_CASE("gains are reciprocal under both fading models") {
  std::mt19937_64 rng(7);
  for (auto kind : {FadingModel::Kind::Unit, FadingModel::Kind::ComplexGaussian}) {
    for (int rep = 0; rep < 100; ++rep) {
      auto inst = oracle::random_instance(rng, 3, 1, 1);
      inst.scenario.fading.kind = kind;
      const int n = inst.scenario.node_count();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) REQUIRE(gain_sq(i, j, inst.state, inst.scenario) == gain_sq(j, i, inst.state, inst.scenario));
      const Entity jam{EntityKind::Interferer, 0};
      const Entity ue{EntityKind::PrimaryUe, 0};
      const Entity relay{EntityKind::Node, 1};
      CHECK(gain_sq(jam, relay, inst.state, inst.scenario) == gain_sq(relay, jam, inst.state, inst.scenario));
      CHECK(gain_sq(jam, ue, inst.state, inst.scenario) == gain_sq(ue, jam, inst.state, inst.scenario));
    }
  }
}

TEST_CASE("complex Gaussian fading is frozen per seed and has unit mean") {
  FadingModel f{FadingModel::Kind::ComplexGaussian, 42};
  const Entity a{EntityKind::Node, 0};
  const Entity b{EntityKind::Node, 3};
  CHECK(fading_gain_sq(f, a, b) == fading_gain_sq(f, a, b));
  FadingModel g{FadingModel::Kind::ComplexGaussian, 43};
  CHECK(fading_gain_sq(f, a, b) != fading_gain_sq(g, a, b));
  double sum = 0.0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) sum += fading_gain_sq(f, Entity{EntityKind::Node, k}, Entity{EntityKind::Interferer, k});
  CHECK(std::abs(sum / n - 1.0) < 0.05);
}

TEST_CASE("smoothed step values and shape") {
  SafetyParams s;
  CHECK(std::abs(smoothed_step(0.0, s) - 1000.0 / 1001.0) <= 1e-12);
  CHECK(std::abs(smoothed_step(0.0, s) - 0.99900) <= 1e-5);
  CHECK(std::abs(smoothed_step(1.0, s) - 0.0434) <= 1e-3);
  CHECK(smoothed_step(1e6, s) == doctest::Approx(0.0));
  CHECK(std::abs(smoothed_step(1e-12, s) - s.zeta / (1.0 + s.y0)) < 1e-9);
  double prev = smoothed_step(0.0, s);
  for (double y = 0.05; y < 4.0; y += 0.05) {
    const double u = smoothed_step(y, s);
    CHECK(u < prev);
    CHECK(u > 0.0);
    CHECK(u < s.zeta);
    prev = u;
  }
  const double h = 1e-6;
  for (double y : {0.0, 0.3, 0.69, 1.2}) {
    const double fd = (smoothed_step(y + h, s) - smoothed_step(y - h, s)) / (2 * h);
    CHECK(smoothed_step_derivative(y, s) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("SIR equals one when signal equals denominator") {
  Scenario s = chain({Position(100.0, 0.0, 20.0)});
  NetworkState st = initial_state(s);
  const SirParts parts = sir_parts(0, 1, st, s);
  st.p_w[0] *= parts.denominator() / parts.signal;
  CHECK(sir(0, 1, st, s) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("SIR without interference or safety term is degenerate") {
  Scenario s = chain({Position(100.0, 0.0, 20.0)});
  s.safety.chi_w = 0.0;
  const NetworkState st = initial_state(s);
  CHECK_THROWS_AS(sir(0, 1, st, s), DegenerateDenominator);
}

TEST_CASE("SIR on a 3-node chain with one interferer matches the quad-precision oracle") {
  Scenario s = chain({Position(100.0, 5.0, 20.0)});
  InterfererSpec jam;
  jam.position = Position(60.0, 30.0, 10.0);
  s.interferers.push_back(jam);
  finalize(s);
  const NetworkState st = initial_state(s);
  const oracle::QuadModel q(s, st);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) {
        const double ref = static_cast<double>(q.sir(i, j));
        CHECK(std::abs(sir(i, j, st, s) - ref) <= 1e-12 * ref);
      }
}

TEST_CASE("SIR is monotone in own and interferer power") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    auto inst = oracle::random_instance(rng, 3, 2);
    auto& st = inst.state;
    const double base = sir(1, 2, st, inst.scenario);
    st.p_w[1] *= 1.5;
    CHECK(sir(1, 2, st, inst.scenario) > base);
    st.p_w[1] /= 1.5;
    st.pj_w[0] *= 1.5;
    CHECK(sir(1, 2, st, inst.scenario) < base);
  }
}

TEST_CASE("primary SINR and rate") {
  // Geometry chosen so that |h_mu|^2 = 1e-8 and |h_iu|^2 = 1e-9.
  Scenario s = chain({Position(0.0, 0.0, 0.0)});
  s.eta_from_carrier = false;
  s.channel.alpha_a2g = 2.0;
  s.channel.eta_a2g_db = 0.0;
  s.channel.noise_w = 1e-13;
  s.bs = Position(-1.0, 0.0, 0.0);
  s.ue = Position(1.0, 0.0, 0.0);
  InterfererSpec jam;
  jam.position = Position(1e4, 0.0, 0.0);
  jam.power_dbm = 30.0;
  s.interferers.push_back(jam);
  s.primary_ues.push_back(Position(0.0, 0.0, 0.0));
  s.relays[0] = Position(0.0, std::sqrt(1e9), 0.0);
  finalize(s);
  NetworkState st = initial_state(s);
  st.p_w[1] = 0.1;
  CHECK(std::abs(sinr_primary(0, 0, 1, st, s) - 99.90) <= 0.01);
  CHECK(std::abs(primary_rate(0, 0, 1, st, s) - 66570.0) <= 50.0);

  st.p_w[1] = 0.0;
  const double noise_limited = 1.0 * gain_sq(Entity{EntityKind::Interferer, 0}, Entity{EntityKind::PrimaryUe, 0}, st, s) / 1e-13;
  CHECK(sinr_primary(0, 0, 1, st, s) == doctest::Approx(noise_limited).epsilon(1e-14));

  double prev_sinr = sinr_primary(0, 0, 1, st, s);
  double prev_rate = primary_rate(0, 0, 1, st, s);
  for (double p = 0.01; p < 1.0; p *= 2.0) {
    st.p_w[1] = p;
    CHECK(sinr_primary(0, 0, 1, st, s) < prev_sinr);
    CHECK(primary_rate(0, 0, 1, st, s) < prev_rate);
    prev_sinr = sinr_primary(0, 0, 1, st, s);
    prev_rate = primary_rate(0, 0, 1, st, s);
  }

  st.pj_w[0] = 0.0;
  CHECK(primary_rate(0, 0, 1, st, s) == 0.0);
}

TEST_CASE("primary rate at SINR one is exactly the bandwidth") {
  Scenario s = chain({Position(0.0, 0.0, 0.0)});
  s.eta_from_carrier = false;
  s.channel.alpha_a2g = 2.0;
  s.channel.eta_a2g_db = 0.0;
  s.channel.noise_w = 0.5;
  InterfererSpec jam;
  jam.position = Position(1.0, 0.0, 0.0);
  jam.power_dbm = 30.0;
  s.interferers.push_back(jam);
  s.primary_ues.push_back(Position(0.0, 0.0, 0.0));
  s.bs = Position(-5.0, 0.0, 0.0);
  s.ue = Position(5.0, 0.0, 0.0);
  s.relays[0] = Position(0.0, 1.0, 0.0);
  finalize(s);
  NetworkState st = initial_state(s);
  st.p_w[1] = 0.5;
  CHECK(sinr_primary(0, 0, 1, st, s) == 1.0);
  CHECK(primary_rate(0, 0, 1, st, s) == 10000.0);
}
