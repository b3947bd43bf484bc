#include "uavflow/mission.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "uavflow/errors.hpp"
#include "uavflow/flow_graph.hpp"
#include "uavflow/scenario_io.hpp"

namespace uavflow {

namespace {

Eigen::Vector3d axis_mask(Axes dims) {
  switch (dims) {
    case Axes::XY: return {1.0, 1.0, 0.0};
    case Axes::XZ: return {1.0, 0.0, 1.0};
    case Axes::YZ: return {0.0, 1.0, 1.0};
    case Axes::XYZ: break;
  }
  return {1.0, 1.0, 1.0};
}

Position clipped_move(const Position& from, Eigen::Vector3d step, const MotionConfig& cfg,
                      bool clamp_z) {
  const double len = step.norm();
  if (len > cfg.max_step_m) step *= cfg.max_step_m / len;
  Position to = from + step;
  if (clamp_z) to.z() = std::max(to.z(), cfg.z_min_m);
  return to;
}

std::string family_of(const std::exception& e) {
  if (const auto* inf = dynamic_cast<const Infeasible*>(&e)) return inf->family();
  if (dynamic_cast<const MaxIterations*>(&e)) return "max_iterations";
  if (dynamic_cast<const ConvergenceFailure*>(&e)) return "convergence";
  if (dynamic_cast<const DegenerateDenominator*>(&e)) return "degenerate_denominator";
  if (dynamic_cast<const DegenerateGeometry*>(&e)) return "degenerate_geometry";
  if (dynamic_cast<const ZeroDegree*>(&e)) return "zero_degree";
  if (dynamic_cast<const SchemaError*>(&e)) return "schema";
  return "error";
}

bool strictly_feasible(const NetworkState& state, const Scenario& scenario, const PowerVector& power) {
  const ConstraintSlacks s = constraint_slacks(state, scenario, power);
  return s.interference_w > 0.0 && s.qos_bps > 0.0 && s.box_w > 0.0;
}

}  // namespace

NetworkState initial_state(const Scenario& scenario) {
  NetworkState state;
  state.nodes.push_back(scenario.bs);
  for (const Position& r : scenario.relays) state.nodes.push_back(r);
  state.nodes.push_back(scenario.ue);
  state.p_w.assign(state.nodes.size(), scenario.p_max_w());
  for (int m = 0; m < scenario.interferer_count(); ++m) {
    state.interferers.push_back(scenario.interferers[m].position);
    state.pj_w.push_back(scenario.interferer_power_w(m));
  }
  return state;
}

NetworkState step_trajectory(const NetworkState& state, const Scenario& scenario,
                             const GradientVector& grad, const MotionConfig& cfg) {
  NetworkState next = state;
  const Eigen::Vector3d mask = axis_mask(cfg.dims);
  const bool moves_z = mask.z() != 0.0;
  for (std::size_t k = 0; k < grad.index.size(); ++k) {
    const int i = grad.index[k];
    if (!scenario.is_relay(i)) continue;
    const Eigen::Vector3d step = cfg.dt * grad.grad[k].cwiseProduct(mask);
    if (step.isZero(0.0)) continue;
    next.nodes[i] = clipped_move(state.nodes[i], step, cfg, moves_z);
  }
  return next;
}

Position path_point(const Position& start, const std::vector<Position>& waypoints, double distance) {
  Position at = start;
  for (const Position& target : waypoints) {
    const double leg = (target - at).norm();
    if (distance <= leg) {
      return leg > 0.0 ? Position(at + (target - at) * (distance / leg)) : at;
    }
    distance -= leg;
    at = target;
  }
  return at;
}

NetworkState jammer_step(const NetworkState& state, const Scenario& scenario, int t) {
  NetworkState next = state;
  bool smart_due = false;
  for (int m = 0; m < scenario.interferer_count(); ++m) {
    const InterfererSpec& spec = scenario.interferers[m];
    switch (spec.policy.kind) {
      case PolicyKind::Naive:
        break;
      case PolicyKind::RecklessMobile:
        next.interferers[m] = path_point(spec.position, spec.policy.waypoints, spec.policy.speed_m * t);
        break;
      case PolicyKind::Smart:
        smart_due = smart_due || t % spec.policy.tau == 0;
        break;
    }
  }
  if (!smart_due) return next;

  // The jammer sees the true network state and recomputes its own Fiedler pair.
  const NodeWeights w = NodeWeights::from_scenario(scenario);
  const CapacityGraph g = build_graph(state, scenario);
  const FiedlerPair fp = fiedler(make_laplacian(scenario.laplacian, g, w));
  const GradientVector grad = jammer_gradient(state, scenario, fp, w);
  for (std::size_t k = 0; k < grad.index.size(); ++k) {
    const int m = grad.index[k];
    if (t % scenario.interferers[m].policy.tau != 0) continue;
    const Eigen::Vector3d step = scenario.motion.dt * grad.grad[k];
    if (step.isZero(0.0)) continue;
    next.interferers[m] = clipped_move(state.interferers[m], step, scenario.motion, true);
  }
  return next;
}

TraceRecord evaluate_record(const NetworkState& state, const Scenario& scenario, double eta_bps) {
  TraceRecord rec;
  rec.t = state.t;
  const CapacityGraph g = build_graph(state, scenario);
  const FlowResult fr = max_flow(g);
  rec.flow_bps = fr.value;
  rec.lambda2 = fiedler(make_laplacian(scenario.laplacian, g, NodeWeights::from_scenario(scenario))).lambda2;
  rec.eta_bps = eta_bps;
  rec.nodes = state.nodes;
  rec.p_w = state.p_w;
  rec.interferers = state.interferers;
  rec.pj_w = state.pj_w;
  const ConstraintSlacks slacks = constraint_slacks(state, scenario, powers_of(state));
  rec.imax_slack_w = slacks.interference_w;
  rec.qos_slack_bps = slacks.qos_bps;
  std::vector<bool> source_side(static_cast<std::size_t>(g.n), false);
  for (int v : fr.cut_set) source_side[v] = true;
  for (const auto& [i, j] : topology_edges(scenario.topology, g.n)) {
    if (source_side[i] != source_side[j]) rec.cut_edges.emplace_back(i, j);
  }
  return rec;
}

SimulationTrace alternating_optimize(const Scenario& scenario) {
  SimulationTrace trace;
  trace.scenario_hash = scenario_hash(scenario);
  trace.seed = scenario.seed.value_or(0);

  const bool smart = scenario.mode == Mode::Smart;
  const NodeWeights w = NodeWeights::from_scenario(scenario);
  NetworkState state = initial_state(scenario);

  try {
    if (!smart) state = with_powers(state, feasible_initial_power(state, scenario));
    trace.records.push_back(evaluate_record(state, scenario, maxmin_value(state, scenario, powers_of(state))));

    for (int t = 1; t <= scenario.solver.max_iters; ++t) {
      const FiedlerPair fp = fiedler(make_laplacian(scenario.laplacian, build_graph(state, scenario), w));
      if (fp.near_crossing()) trace.events.push_back({t, "near-crossing lambda2/lambda3"});
      const GradientVector grad = connectivity_gradient(state, scenario, fp, w);

      NetworkState next = step_trajectory(state, scenario, grad, scenario.motion);
      next = jammer_step(next, scenario, t);
      next.t = t;

      double eta = 0.0;
      if (smart) {
        std::fill(next.p_w.begin(), next.p_w.end(), scenario.p_max_w());
        eta = maxmin_value(next, scenario, powers_of(next));
      } else {
        // warm start, pulled under caps that shrank with the move
        PowerVector start = powers_of(next);
        const std::vector<double> caps = power_caps(next, scenario);
        for (std::size_t i = 0; i < caps.size(); ++i) start.p[i] = std::min(start.p[i], 0.999 * caps[i]);
        if (!strictly_feasible(next, scenario, start)) start = feasible_initial_power(next, scenario);
        const ScaResult sca = sca_loop(next, scenario, start, scenario.solver.sca_eps_bps);
        next = with_powers(next, sca.power);
        eta = sca.eta;
      }
      state = next;
      trace.records.push_back(evaluate_record(state, scenario, eta));

      const std::size_t k = trace.records.size();
      if (t >= 2 && std::abs(trace.records[k - 1].flow_bps - trace.records[k - 2].flow_bps) <= scenario.solver.eps_bps) {
        trace.converged = true;
        break;
      }
    }
  } catch (const Error& e) {
    trace.error_family = family_of(e);
    trace.error = e.what();
  }
  return trace;
}

std::vector<SweepPoint> run_sweep(const Scenario& scenario, const SweepSpec& spec) {
  std::vector<SweepPoint> points;
  for (const std::string& value : spec.values) {
    SweepPoint point;
    point.value = value;
    try {
      point.trace = alternating_optimize(apply_override(scenario, spec.field, value));
    } catch (const Error& e) {
      point.trace.error_family = family_of(e);
      point.trace.error = e.what();
    }
    points.push_back(std::move(point));
  }
  return points;
}

}  // namespace uavflow
