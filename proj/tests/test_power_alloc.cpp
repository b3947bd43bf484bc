#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "uavflow/errors.hpp"
#include "uavflow/flow_graph.hpp"
#include "uavflow/mission.hpp"
#include "uavflow/power_alloc.hpp"
#include "uavflow/scenario_io.hpp"

using namespace uavflow;

namespace {

PowerVector random_power(std::mt19937_64& rng, const Scenario& s) {
  PowerVector p;
  for (int i = 0; i < s.node_count(); ++i) p.p.push_back(oracle::uniform(rng, 1e-4, s.p_max_w()));
  for (int m = 0; m < s.interferer_count(); ++m) p.pj.push_back(oracle::uniform(rng, 0.0, s.interferer_power_w(m)));
  return p;
}

Scenario no_interferers(int relays) {
  Scenario s = default_scenario();
  s.seed = 5;
  s.even_relay_count = relays;
  // Tight spacing keeps the safety term in every SIR denominator.
  s.ue = Position(10.0 * (relays + 1), 0.0, 15.0);
  finalize(s);
  return s;
}

}  // namespace

TEST_CASE("constraint set in watts") {
  Scenario s = default_scenario();
  InterfererSpec jam;
  jam.power_dbm = 27.0;
  s.interferers = {jam, jam};
  s.power.r_th_bps = 100.0;
  s.mode = Mode::RecklessCooperative;
  const ConstraintSet cs = constraint_set(s);
  CHECK(cs.p_max_w == doctest::Approx(0.1));
  REQUIRE(cs.i_max_w.size() == 2);
  CHECK(cs.i_max_w[0] == doctest::Approx(1e-6));
  CHECK(cs.pj_max_w[1] == doctest::Approx(dbm_to_w(27.0)));
  CHECK(cs.cooperative);
  CHECK_FALSE(cs.qos_active(s));
  s.primary_ues.push_back(Position(50.0, 50.0, 0.0));
  CHECK(cs.qos_active(s));
  s.power.r_th_bps = 0.0;
  CHECK_FALSE(constraint_set(s).qos_active(s));
}

TEST_CASE("difference-of-concave split reproduces the capacity") {
  std::mt19937_64 rng(71);
  for (int rep = 0; rep < 200; ++rep) {
    auto inst = oracle::random_instance(rng, oracle::uniform_int(rng, 1, 4), oracle::uniform_int(rng, 0, 2));
    const auto& s = inst.scenario;
    const PowerVector p = random_power(rng, s);
    const NetworkState st = with_powers(inst.state, p);
    for (const auto& [i, j] : maxmin_links(s)) {
      const LinkDc link = dc_split(i, j, st, s);
      const double a = edge_capacity(i, j, st, s);
      CHECK(std::abs(link.capacity(p) - a) <= 1e-12 * a * std::max(1.0, std::abs(link.r(p)) / a));
    }
  }
}

TEST_CASE("subtracted part reduces to the safety sums without interferer power") {
  std::mt19937_64 rng(73);
  auto inst = oracle::random_instance(rng, 3, 2);
  PowerVector p = random_power(rng, inst.scenario);
  p.pj.assign(p.pj.size(), 0.0);
  const LinkDc link = dc_split(1, 2, inst.state, inst.scenario);
  const double b = inst.scenario.channel.bandwidth_hz;
  const double expected = 0.5 * b * (std::log2(link.safety_at_j()) + std::log2(link.safety_at_i()));
  CHECK(link.r(p) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(link.safety_at_j() == sir_parts(1, 2, inst.state, inst.scenario).safety);
}

TEST_CASE("both parts are concave along random segments") {
  std::mt19937_64 rng(79);
  for (int rep = 0; rep < 200; ++rep) {
    auto inst = oracle::random_instance(rng, 2, 2);
    const auto& s = inst.scenario;
    const LinkDc link = dc_split(0, 1, inst.state, s);
    const PowerVector a = random_power(rng, s);
    const PowerVector b = random_power(rng, s);
    PowerVector mid = a;
    for (std::size_t k = 0; k < mid.p.size(); ++k) mid.p[k] = 0.5 * (a.p[k] + b.p[k]);
    for (std::size_t k = 0; k < mid.pj.size(); ++k) mid.pj[k] = 0.5 * (a.pj[k] + b.pj[k]);
    const double tol = 1e-9 * std::abs(link.r(mid));
    CHECK(link.r(mid) >= 0.5 * (link.r(a) + link.r(b)) - tol);
    CHECK(link.v(mid) >= 0.5 * (link.v(a) + link.v(b)) - tol);
  }
}

TEST_CASE("tangent of the subtracted part") {
  std::mt19937_64 rng(83);
  for (int rep = 0; rep < 20; ++rep) {
    auto inst = oracle::random_instance(rng, 2, 2);
    const auto& s = inst.scenario;
    const LinkDc link = dc_split(1, 2, inst.state, s);
    const PowerVector p0 = random_power(rng, s);
    const AffineR rt = taylor_linearize_r(link, p0);
    CHECK(rt(p0) == link.r(p0));
    CHECK(approx_capacity(link, rt, p0) == link.capacity(p0));

    for (int k = 0; k < 50; ++k) {
      const PowerVector p = random_power(rng, s);
      CHECK(rt(p) >= link.r(p) - 1e-10 * std::abs(link.r(p)));
      CHECK(approx_capacity(link, rt, p) <= link.capacity(p) + 1e-10 * std::abs(link.r(p)));
    }

    const Eigen::VectorXd g = link.r_gradient(p0);
    for (int m = 0; m < s.interferer_count(); ++m) {
      const double h = 1e-6 * std::max(p0.pj[m], 1e-3);
      PowerVector up = p0;
      PowerVector down = p0;
      up.pj[m] += h;
      down.pj[m] -= h;
      const double fd = (link.r(up) - link.r(down)) / (2.0 * h);
      CHECK(std::abs(g[m] - fd) <= 1e-5 * std::abs(g[m]));
    }
  }
}

TEST_CASE("QoS linearization is a tight lower bound") {
  std::mt19937_64 rng(89);
  for (int rep = 0; rep < 20; ++rep) {
    auto inst = oracle::random_instance(rng, 2, 2, 2);
    const auto& s = inst.scenario;
    const PowerVector p0 = random_power(rng, s);
    const QosLinearization q = qos_linearize(1, 0, 2, inst.state, s, p0, 0.0);
    CHECK(q.approx(p0) == doctest::Approx(q.rate(p0)).epsilon(1e-12));
    CHECK(q.rate(p0) == doctest::Approx(primary_rate(1, 0, 2, with_powers(inst.state, p0), s)).epsilon(1e-12));
    for (int k = 0; k < 50; ++k) {
      PowerVector p = random_power(rng, s);
      CHECK(q.approx(p) <= q.rate(p) + 1e-9 * q.rate(p));
      p.p[2] = p0.p[2];
      CHECK(std::abs(q.approx(p) - q.rate(p)) <= 1e-12 * q.bandwidth());
    }
  }
}

TEST_CASE("QoS linearization refuses an infeasible expansion point") {
  std::mt19937_64 rng(97);
  auto inst = oracle::random_instance(rng, 2, 1, 1);
  const PowerVector p0 = powers_of(inst.state);
  const double rate = primary_rate(0, 0, 1, inst.state, inst.scenario);
  CHECK_NOTHROW(qos_linearize(0, 0, 1, inst.state, inst.scenario, p0, 0.5 * rate));
  CHECK_THROWS_AS(qos_linearize(0, 0, 1, inst.state, inst.scenario, p0, 2.0 * rate), InfeasibleExpansion);
}

TEST_CASE("power caps and feasible starting point") {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 20; ++rep) {
    auto inst = oracle::sca_instance(rng, 3, 2, 1, Mode::RecklessNonCooperative, true);
    const auto& s = inst.scenario;
    const std::vector<double> caps = power_caps(inst.state, s);
    for (int i = 0; i < s.node_count(); ++i) {
      double expected = s.p_max_w();
      for (int m = 0; m < s.interferer_count(); ++m)
        expected = std::min(expected, s.i_max_w() / gain_sq(Entity{EntityKind::Node, i}, Entity{EntityKind::Interferer, m}, inst.state, s));
      CHECK(caps[i] == expected);
    }
    const PowerVector p = feasible_initial_power(inst.state, s);
    const ConstraintSlacks slack = constraint_slacks(inst.state, s, p);
    CHECK(slack.feasible());
    CHECK(slack.interference_w > 0.0);
    CHECK(slack.qos_bps > 0.0);
    for (int m = 0; m < s.interferer_count(); ++m) CHECK(p.pj[m] == s.interferer_power_w(m));
  }
}

TEST_CASE("unreachable rate floor is infeasible") {
  std::mt19937_64 rng(103);
  auto inst = oracle::random_instance(rng, 2, 1, 1);
  inst.scenario.power.r_th_bps = 1e9;
  try {
    feasible_initial_power(inst.state, inst.scenario);
    FAIL("expected Infeasible");
  } catch (const Infeasible& e) {
    CHECK(e.family() == "qos");
  }
}

TEST_CASE("slack families without rows report infinity") {
  Scenario s = no_interferers(2);
  const NetworkState st = initial_state(s);
  const ConstraintSlacks slack = constraint_slacks(st, s, powers_of(st));
  CHECK(std::isinf(slack.interference_w));
  CHECK(std::isinf(slack.qos_bps));
  CHECK(slack.box_w == 0.0);
}

TEST_CASE("without interferers every node transmits at full power") {
  const Scenario s = no_interferers(3);
  const NetworkState st = initial_state(s);
  const PowerVector init = feasible_initial_power(st, s);
  for (double p : init.p) CHECK(p == doctest::Approx(0.9 * s.p_max_w()));
  const SubproblemResult sub = solve_subproblem(st, s, init);
  for (double p : sub.power.p) CHECK(p == doctest::Approx(s.p_max_w()).epsilon(1e-6));
  CHECK(sub.eta <= maxmin_value(st, s, sub.power) * (1.0 + 1e-7));

  const ScaResult sca = sca_loop(st, s, init, s.solver.sca_eps_bps);
  CHECK(sca.converged);
  REQUIRE(sca.history.size() >= 2);
  CHECK(sca.eta - sca.history[1] <= s.solver.sca_eps_bps);
  for (double p : sca.power.p) CHECK(p == doctest::Approx(s.p_max_w()).epsilon(1e-6));
}

TEST_CASE("single capped link reaches its analytic optimum") {
  const oracle::Instance inst = oracle::single_link_instance();
  const auto& s = inst.scenario;
  const std::vector<double> caps = power_caps(inst.state, s);
  REQUIRE(caps[0] < s.p_max_w());
  REQUIRE(caps[1] == s.p_max_w());
  const ScaResult sca = sca_loop(inst.state, s, powers_of(inst.state), s.solver.sca_eps_bps);
  CHECK(std::abs(sca.power.p[0] - caps[0]) <= 1e-6 * caps[0]);
  CHECK(std::abs(sca.power.p[1] - caps[1]) <= 1e-6 * caps[1]);
}

TEST_CASE("cooperative interferers allow a higher max-min rate") {
  std::mt19937_64 rng(107);
  for (int rep = 0; rep < 5; ++rep) {
    auto inst = oracle::sca_instance(rng, 2, 1, 1, Mode::RecklessNonCooperative, true);
    const PowerVector init = powers_of(inst.state);
    const ScaResult nc = sca_loop(inst.state, inst.scenario, init, inst.scenario.solver.sca_eps_bps);
    Scenario coop = inst.scenario;
    coop.mode = Mode::RecklessCooperative;
    const ScaResult co = sca_loop(inst.state, coop, init, coop.solver.sca_eps_bps);
    CHECK(co.eta > nc.eta);
    for (std::size_t m = 0; m < co.power.pj.size(); ++m) CHECK(co.power.pj[m] <= coop.interferer_power_w(static_cast<int>(m)));
  }
}

TEST_CASE("SCA is monotone, feasible and restart-stable") {
  std::mt19937_64 rng(109);
  const Mode modes[] = {Mode::RecklessNonCooperative, Mode::RecklessCooperative};
  for (int rep = 0; rep < 10; ++rep) {
    const Mode mode = modes[rep % 2];
    auto inst = oracle::sca_instance(rng, oracle::uniform_int(rng, 1, 4), oracle::uniform_int(rng, 1, 2), 1, mode,
                                     rep % 3 != 0);
    const auto& s = inst.scenario;
    const double eps = s.solver.sca_eps_bps;
    const ScaResult sca = sca_loop(inst.state, s, powers_of(inst.state), eps);
    CHECK(sca.converged);
    CHECK(sca.iterations <= 100);
    REQUIRE(sca.history.size() == sca.iterates.size());
    for (std::size_t k = 0; k < sca.history.size(); ++k) {
      if (k > 0) CHECK(sca.history[k] >= sca.history[k - 1] - 1e-9);
      CHECK(constraint_slacks(inst.state, s, sca.iterates[k]).feasible());
      CHECK(sca.history[k] == maxmin_value(inst.state, s, sca.iterates[k]));
    }
    const ScaResult again = sca_loop(inst.state, s, sca.power, eps);
    CHECK(std::abs(again.eta - sca.eta) <= eps);
  }
}
