#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "uavflow/errors.hpp"
#include "uavflow/mission.hpp"
#include "uavflow/scenario_io.hpp"

using namespace uavflow;

namespace {

Scenario small_scenario(const std::string& extra = "") {
  return parse_scenario(R"({"schema_version":1,"seed":7,"nodes":{"relay_count":3},
    "interferers":[{"position":[90,10,1]}])" + extra + "}");
}

GradientVector relay_gradient(const Scenario& s, const Eigen::Vector3d& g) {
  GradientVector grad;
  for (int i = 1; i <= s.relay_count(); ++i) {
    grad.index.push_back(i);
    grad.grad.push_back(g);
  }
  return grad;
}

Scenario smart_scenario(int tau) {
  return parse_scenario(R"({"schema_version":1,"seed":3,"mode":"smart","nodes":{"relay_count":4},
    "interferers":[{"position":[100,5,1],"policy":"smart","tau":)" + std::to_string(tau) + "}]}");
}

}  // namespace

TEST_CASE("zero gradient leaves the state unchanged") {
  const Scenario s = small_scenario();
  const NetworkState st = initial_state(s);
  const NetworkState next = step_trajectory(st, s, relay_gradient(s, Eigen::Vector3d::Zero()), s.motion);
  CHECK(next.nodes == st.nodes);
  CHECK(next.p_w == st.p_w);
}

TEST_CASE("unclipped step moves by exactly dt times the gradient") {
  const Scenario s = small_scenario();
  const NetworkState st = initial_state(s);
  MotionConfig cfg = s.motion;
  cfg.dt = 1.0;
  const Eigen::Vector3d g(0.5, 0.0, -0.2);
  const NetworkState next = step_trajectory(st, s, relay_gradient(s, g), cfg);
  for (int i = 1; i <= s.relay_count(); ++i) {
    CHECK(next.nodes[i].x() == st.nodes[i].x() + 0.5);
    CHECK(next.nodes[i].y() == st.nodes[i].y());
    CHECK(next.nodes[i].z() == st.nodes[i].z() - 0.2);
  }
}

TEST_CASE("disabled axes never move") {
  const Scenario s = small_scenario();
  const NetworkState st = initial_state(s);
  MotionConfig cfg = s.motion;
  cfg.dt = 1.0;
  const Eigen::Vector3d g(0.3, -0.4, 2.0);
  cfg.dims = Axes::XY;
  NetworkState next = step_trajectory(st, s, relay_gradient(s, g), cfg);
  for (int i = 1; i <= s.relay_count(); ++i) {
    CHECK(next.nodes[i].z() == st.nodes[i].z());
    CHECK(next.nodes[i].x() == doctest::Approx(st.nodes[i].x() + 0.3));
  }
  cfg.dims = Axes::YZ;
  next = step_trajectory(st, s, relay_gradient(s, g), cfg);
  for (int i = 1; i <= s.relay_count(); ++i) CHECK(next.nodes[i].x() == st.nodes[i].x());
  cfg.dims = Axes::XZ;
  next = step_trajectory(st, s, relay_gradient(s, g), cfg);
  for (int i = 1; i <= s.relay_count(); ++i) CHECK(next.nodes[i].y() == st.nodes[i].y());
}

TEST_CASE("steps are clipped to max_step and altitude to z_min") {
  const Scenario s = small_scenario();
  const NetworkState st = initial_state(s);
  MotionConfig cfg = s.motion;
  cfg.dt = 1.0;
  cfg.max_step_m = 5.0;
  cfg.z_min_m = 1.0;

  NetworkState next = step_trajectory(st, s, relay_gradient(s, {300.0, 400.0, 0.0}), cfg);
  for (int i = 1; i <= s.relay_count(); ++i) {
    const Eigen::Vector3d d = next.nodes[i] - st.nodes[i];
    CHECK(d.norm() == doctest::Approx(5.0));
    CHECK(d.x() == doctest::Approx(3.0));
    CHECK(d.y() == doctest::Approx(4.0));
  }

  cfg.max_step_m = 1e6;
  next = step_trajectory(st, s, relay_gradient(s, {0.0, 0.0, -1e4}), cfg);
  for (int i = 1; i <= s.relay_count(); ++i) CHECK(next.nodes[i].z() == 1.0);
}

TEST_CASE("BS and UE entries in a gradient are ignored") {
  const Scenario s = small_scenario();
  const NetworkState st = initial_state(s);
  GradientVector grad;
  grad.index = {s.source(), s.sink()};
  grad.grad = {Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(-1, 2, 0)};
  const NetworkState next = step_trajectory(st, s, grad, s.motion);
  CHECK(next.nodes == st.nodes);
}

TEST_CASE("path_point walks the waypoint polyline") {
  const Position start(0, 0, 1);
  const std::vector<Position> wp{{10, 0, 1}, {10, 20, 1}};
  CHECK((path_point(start, wp, 0.0) - start).norm() == 0.0);
  CHECK((path_point(start, wp, 4.0) - Position(4, 0, 1)).norm() < 1e-12);
  CHECK((path_point(start, wp, 15.0) - Position(10, 5, 1)).norm() < 1e-12);
  CHECK((path_point(start, wp, 1e3) - Position(10, 20, 1)).norm() == 0.0);
  CHECK((path_point(start, {}, 7.0) - start).norm() == 0.0);
}

TEST_CASE("naive interferers never move") {
  const Scenario s = small_scenario();
  const NetworkState st = initial_state(s);
  for (int t = 0; t < 12; ++t) CHECK(jammer_step(st, s, t).interferers == st.interferers);
}

TEST_CASE("reckless-mobile interferers follow their script") {
  Scenario s = small_scenario();
  s.interferers[0].policy.kind = PolicyKind::RecklessMobile;
  s.interferers[0].policy.waypoints = {Position(90, 40, 1)};
  s.interferers[0].policy.speed_m = 2.0;
  const NetworkState st = initial_state(s);
  for (int t = 0; t < 20; ++t) {
    const Position p = jammer_step(st, s, t).interferers[0];
    CHECK((p - Position(90, 10 + std::min(2.0 * t, 30.0), 1)).norm() < 1e-12);
  }
}

TEST_CASE("smart interferers move only on multiples of tau") {
  const Scenario s = smart_scenario(2);
  const NetworkState st = initial_state(s);
  for (int t = 1; t <= 8; ++t) {
    const bool moved = jammer_step(st, s, t).interferers != st.interferers;
    CHECK_MESSAGE(moved == (t % 2 == 0), "t = " << t);
  }
}

TEST_CASE("a small smart step lowers the frozen-coefficient surrogate") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = oracle::random_instance(rng, 4, 1);
    Scenario& s = inst.scenario;
    s.interferers[0].policy.tau = 1;
    const NodeWeights w = NodeWeights::from_scenario(s);
    const FiedlerPair fp = fiedler(make_laplacian(s.laplacian, build_graph(inst.state, s), w));
    const Eigen::MatrixXd c = fiedler_coefficients(fp, w);
    const GradientVector g = jammer_gradient(inst.state, s, fp, w);
    REQUIRE(g.index.size() == 1);
    const double norm = g.grad[0].norm();
    if (!(norm > 0.0)) continue;
    s.motion.dt = 1e-2 / norm;  // one centimetre along the descent direction
    s.motion.z_min_m = 0.0;

    const NetworkState next = jammer_step(inst.state, s, 1);
    const auto before = oracle::QuadModel(s, inst.state).surrogate(c);
    const auto after = oracle::QuadModel(s, next).surrogate(c);
    CHECK(static_cast<double>(after) < static_cast<double>(before));
  }
}

TEST_CASE("frozen positions without interferers give a constant flow") {
  Scenario s = parse_scenario(R"({"schema_version":1,"seed":2,"nodes":{"relay_count":4},"motion":{"dt":0}})");
  const SimulationTrace tr = alternating_optimize(s);
  REQUIRE_FALSE(tr.failed());
  REQUIRE(tr.records.size() >= 2);
  CHECK(tr.converged);
  for (std::size_t k = 2; k < tr.records.size(); ++k) CHECK(tr.records[k].flow_bps == tr.records[1].flow_bps);
}

TEST_CASE("recorded flows replay from recorded states") {
  const Scenario s = small_scenario(R"(,"solver":{"max_iters":25})");
  const SimulationTrace tr = alternating_optimize(s);
  REQUIRE_FALSE(tr.failed());
  for (const TraceRecord& r : tr.records) {
    NetworkState st;
    st.nodes = r.nodes;
    st.p_w = r.p_w;
    st.interferers = r.interferers;
    st.pj_w = r.pj_w;
    st.t = r.t;
    CHECK(std::abs(max_flow(build_graph(st, s)).value - r.flow_bps) <= 1e-9);
  }
}

TEST_CASE("endpoints stay put and relays stay above z_min") {
  const Scenario s = small_scenario(R"(,"solver":{"max_iters":40})");
  const SimulationTrace tr = alternating_optimize(s);
  REQUIRE_FALSE(tr.failed());
  CHECK(tr.records.size() == static_cast<std::size_t>(tr.iterations() + 1));
  for (const TraceRecord& r : tr.records) {
    CHECK(r.nodes.front() == s.bs);
    CHECK(r.nodes.back() == s.ue);
    for (const Position& p : r.nodes) CHECK(p.z() >= s.motion.z_min_m);
  }
}

TEST_CASE("every iterate respects the interference cap") {
  const Scenario s = small_scenario(R"(,"power":{"i_max_dbm":-45},"solver":{"max_iters":30})");
  const SimulationTrace tr = alternating_optimize(s);
  REQUIRE_FALSE(tr.failed());
  for (const TraceRecord& r : tr.records) CHECK(r.imax_slack_w >= 0.0);
}

TEST_CASE("smart mode transmits at full power and moves the jammer") {
  const Scenario s = smart_scenario(1);
  Scenario capped = s;
  capped.solver.max_iters = 5;
  const SimulationTrace tr = alternating_optimize(capped);
  REQUIRE_FALSE(tr.failed());
  for (std::size_t k = 1; k < tr.records.size(); ++k) {
    for (double p : tr.records[k].p_w) CHECK(p == s.p_max_w());
  }
  CHECK(tr.records.back().interferers != tr.records.front().interferers);
}

TEST_CASE("base scenario climbs steadily and converges") {
  const Scenario s = load_scenario(std::string(UAVFLOW_SCENARIO_DIR) + "/base.json");
  const SimulationTrace tr = alternating_optimize(s);
  REQUIRE_FALSE(tr.failed());
  CHECK(tr.converged);
  CHECK(tr.iterations() <= 300);
  int up = 0;
  for (std::size_t k = 1; k < tr.records.size(); ++k) up += tr.records[k].flow_bps >= tr.records[k - 1].flow_bps;
  CHECK(up >= 0.9 * tr.iterations());
  CHECK(tr.final_flow() > tr.records.front().flow_bps);
}

TEST_CASE("sweeps run every value and keep going past failures") {
  const Scenario s = small_scenario(R"(,"solver":{"max_iters":3})");
  const auto points = run_sweep(s, {"i_max_dbm", {"-50", "bogus", "-10"}});
  REQUIRE(points.size() == 3);
  CHECK_FALSE(points[0].trace.failed());
  CHECK(points[1].trace.failed());
  CHECK(points[1].trace.error_family == "schema");
  CHECK_FALSE(points[2].trace.failed());
  CHECK(points[2].value == "-10");
  CHECK(points[0].trace.seed == 7);
  CHECK(points[2].trace.seed == 7);
}

TEST_CASE("infeasible rate floors end the run with an error mark") {
  const Scenario s = small_scenario(R"(,"primary_ues":[[50,0,1]],"power":{"r_th_bps":1e9})");
  const SimulationTrace tr = alternating_optimize(s);
  CHECK(tr.failed());
  CHECK(tr.error_family == "qos");
}
