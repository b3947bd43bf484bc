#include "uavflow/power_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "uavflow/barrier.hpp"
#include "uavflow/errors.hpp"
#include "uavflow/flow_graph.hpp"
#include "uavflow/radio.hpp"

namespace uavflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Weight of the sum-of-links tie-break relative to the max-min objective. It
// only decides among allocations with the same bottleneck value.
constexpr double kTieBreak = 1e-6;
// Relative distance kept from the boundary when a power is pushed to its limit.
constexpr double kInteriorMargin = 1e-9;
constexpr double kMaxExtrapolation = 1024.0;

Entity node(int i) { return Entity{EntityKind::Node, i}; }
Entity jammer(int m) { return Entity{EntityKind::Interferer, m}; }
Entity primary(int u) { return Entity{EntityKind::PrimaryUe, u}; }

// Substitutes x = scale .* y.
void rescale(ConcaveFunction& f, const Eigen::VectorXd& scale) {
  f.linear = f.linear.cwiseProduct(scale);
  for (LogTerm& term : f.logs) term.weights = term.weights.cwiseProduct(scale);
}

}  // namespace

PowerVector powers_of(const NetworkState& state) { return PowerVector{state.p_w, state.pj_w}; }

NetworkState with_powers(NetworkState state, const PowerVector& power) {
  state.p_w = power.p;
  state.pj_w = power.pj;
  return state;
}

bool ConstraintSet::qos_active(const Scenario& scenario) const {
  return r_th_bps > 0.0 && scenario.interferer_count() > 0 && scenario.primary_ue_count() > 0;
}

ConstraintSet constraint_set(const Scenario& scenario) {
  ConstraintSet cs;
  cs.p_max_w = scenario.p_max_w();
  cs.i_max_w.assign(static_cast<std::size_t>(scenario.interferer_count()), scenario.i_max_w());
  for (int m = 0; m < scenario.interferer_count(); ++m) cs.pj_max_w.push_back(scenario.interferer_power_w(m));
  cs.r_th_bps = scenario.power.r_th_bps;
  cs.cooperative = scenario.cooperative();
  return cs;
}

// ---------------------------------------------------------------------------
// DC split

LinkDc::LinkDc(int i, int j, const NetworkState& state, const Scenario& scenario)
    : i_(i),
      j_(j),
      half_bw_over_ln2_(0.5 * scenario.channel.bandwidth_hz / std::numbers::ln2),
      gain_ij_(gain_sq(i, j, state, scenario)),
      g_mj_(scenario.interferer_count()),
      g_mi_(scenario.interferer_count()),
      safety_j_(sir_parts(i, j, state, scenario).safety),
      safety_i_(sir_parts(j, i, state, scenario).safety) {
  for (int m = 0; m < scenario.interferer_count(); ++m) {
    g_mj_[m] = gain_sq(jammer(m), node(j), state, scenario);
    g_mi_[m] = gain_sq(jammer(m), node(i), state, scenario);
  }
}

double LinkDc::interference_at_j(const PowerVector& power) const {
  double total = safety_j_;
  for (Eigen::Index m = 0; m < g_mj_.size(); ++m) total += power.pj[m] * g_mj_[m];
  return total;
}

double LinkDc::interference_at_i(const PowerVector& power) const {
  double total = safety_i_;
  for (Eigen::Index m = 0; m < g_mi_.size(); ++m) total += power.pj[m] * g_mi_[m];
  return total;
}

double LinkDc::v(const PowerVector& power) const {
  return half_bw_over_ln2_ * (std::log(power.p[i_] * gain_ij_ + interference_at_j(power)) +
                              std::log(power.p[j_] * gain_ij_ + interference_at_i(power)));
}

double LinkDc::r(const PowerVector& power) const {
  return half_bw_over_ln2_ * (std::log(interference_at_j(power)) + std::log(interference_at_i(power)));
}

Eigen::VectorXd LinkDc::r_gradient(const PowerVector& power) const {
  return half_bw_over_ln2_ * (g_mj_ / interference_at_j(power) + g_mi_ / interference_at_i(power));
}

LinkDc dc_split(int i, int j, const NetworkState& state, const Scenario& scenario) {
  return LinkDc(i, j, state, scenario);
}

double AffineR::operator()(const PowerVector& power) const {
  double out = value0;
  for (Eigen::Index m = 0; m < grad.size(); ++m) out += grad[m] * (power.pj[m] - pj0[m]);
  return out;
}

AffineR taylor_linearize_r(const LinkDc& link, const PowerVector& expansion) {
  return AffineR{link.r(expansion), link.r_gradient(expansion), expansion.pj};
}

double approx_capacity(const LinkDc& link, const AffineR& r_tilde, const PowerVector& power) {
  return link.v(power) - r_tilde(power);
}

// ---------------------------------------------------------------------------
// QoS

QosLinearization::QosLinearization(int m, int u, int i, const NetworkState& state,
                                   const Scenario& scenario, const PowerVector& expansion)
    : m_(m),
      u_(u),
      i_(i),
      bandwidth_(scenario.channel.bandwidth_hz),
      g_mu_(gain_sq(jammer(m), primary(u), state, scenario)),
      g_iu_(gain_sq(node(i), primary(u), state, scenario)),
      noise_(scenario.channel.noise_w),
      p0_(expansion.p[i]) {}

double QosLinearization::rate(const PowerVector& power) const {
  const double leak = power.p[i_] * g_iu_ + noise_;
  return bandwidth_ * std::log2(1.0 + power.pj[m_] * g_mu_ / leak);
}

double QosLinearization::approx(const PowerVector& power) const {
  const double c0 = p0_ * g_iu_ + noise_;
  const double total = power.pj[m_] * g_mu_ + power.p[i_] * g_iu_ + noise_;
  return bandwidth_ * (std::log2(total) - std::log2(c0) - g_iu_ * (power.p[i_] - p0_) / (c0 * std::numbers::ln2));
}

QosLinearization qos_linearize(int m, int u, int i, const NetworkState& state,
                               const Scenario& scenario, const PowerVector& expansion,
                               double r_th_bps) {
  QosLinearization q(m, u, i, state, scenario, expansion);
  const double rate = q.rate(expansion);
  if (rate < r_th_bps) {
    throw InfeasibleExpansion("primary rate " + std::to_string(rate) + " bit/s at expansion is below threshold");
  }
  return q;
}

// ---------------------------------------------------------------------------
// Constraint bookkeeping

std::vector<std::pair<int, int>> maxmin_links(const Scenario& scenario) {
  return topology_edges(scenario.topology, scenario.node_count());
}

double maxmin_value(const NetworkState& state, const Scenario& scenario, const PowerVector& power) {
  const NetworkState s = with_powers(state, power);
  double best = kInf;
  for (const auto& [i, j] : maxmin_links(scenario)) best = std::min(best, edge_capacity(i, j, s, scenario));
  return best;
}

std::vector<double> power_caps(const NetworkState& state, const Scenario& scenario) {
  const ConstraintSet cs = constraint_set(scenario);
  std::vector<double> caps(static_cast<std::size_t>(scenario.node_count()), cs.p_max_w);
  if (scenario.mode == Mode::Smart) return caps;
  for (int i = 0; i < scenario.node_count(); ++i) {
    for (int m = 0; m < scenario.interferer_count(); ++m) {
      caps[i] = std::min(caps[i], cs.i_max_w[m] / gain_sq(node(i), jammer(m), state, scenario));
    }
  }
  return caps;
}

ConstraintSlacks constraint_slacks(const NetworkState& state, const Scenario& scenario,
                                   const PowerVector& power) {
  const ConstraintSet cs = constraint_set(scenario);
  ConstraintSlacks slack{kInf, kInf, kInf};
  for (int i = 0; i < scenario.node_count(); ++i) {
    slack.box_w = std::min({slack.box_w, power.p[i], cs.p_max_w - power.p[i]});
  }
  if (cs.cooperative) {
    for (int m = 0; m < scenario.interferer_count(); ++m) {
      slack.box_w = std::min({slack.box_w, power.pj[m], cs.pj_max_w[m] - power.pj[m]});
    }
  }
  if (scenario.mode == Mode::Smart) return slack;

  for (int i = 0; i < scenario.node_count(); ++i) {
    for (int m = 0; m < scenario.interferer_count(); ++m) {
      const double received = power.p[i] * gain_sq(node(i), jammer(m), state, scenario);
      slack.interference_w = std::min(slack.interference_w, cs.i_max_w[m] - received);
    }
  }
  if (cs.qos_active(scenario)) {
    const NetworkState s = with_powers(state, power);
    for (int m = 0; m < scenario.interferer_count(); ++m)
      for (int u = 0; u < scenario.primary_ue_count(); ++u)
        for (int i = 0; i < scenario.node_count(); ++i)
          slack.qos_bps = std::min(slack.qos_bps, primary_rate(m, u, i, s, scenario) - cs.r_th_bps);
  }
  return slack;
}

PowerVector feasible_initial_power(const NetworkState& state, const Scenario& scenario) {
  const ConstraintSet cs = constraint_set(scenario);
  PowerVector power;
  power.pj = cs.pj_max_w;
  const std::vector<double> caps = power_caps(state, scenario);
  power.p.resize(caps.size());
  for (std::size_t i = 0; i < caps.size(); ++i) power.p[i] = 0.9 * caps[i];
  if (!cs.qos_active(scenario)) return power;

  for (int i = 0; i < scenario.node_count(); ++i) {
    auto worst_rate = [&](double p_i) {
      PowerVector trial = power;
      trial.p[i] = p_i;
      const NetworkState s = with_powers(state, trial);
      double worst = kInf;
      for (int m = 0; m < scenario.interferer_count(); ++m)
        for (int u = 0; u < scenario.primary_ue_count(); ++u)
          worst = std::min(worst, primary_rate(m, u, i, s, scenario));
      return worst;
    };
    if (worst_rate(power.p[i]) > cs.r_th_bps) continue;
    if (!(worst_rate(0.0) > cs.r_th_bps)) {
      throw Infeasible("qos", "primary rate floor unreachable even with node " + std::to_string(i) + " silent");
    }
    double lo = 0.0;
    double hi = power.p[i];
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (worst_rate(mid) > cs.r_th_bps ? lo : hi) = mid;
    }
    power.p[i] = 0.9 * lo;
  }
  return power;
}

// ---------------------------------------------------------------------------
// Convex subproblem

namespace {

// Every link capacity is nondecreasing in each node's own power, so a node can
// move up to the largest power its true constraints allow without lowering the
// max-min value. The barrier leaves such non-bottleneck nodes short of it.
void raise_to_limits(const NetworkState& state, const Scenario& scenario, PowerVector& power) {
  const ConstraintSet cs = constraint_set(scenario);
  const std::vector<double> caps = power_caps(state, scenario);
  const bool qos = scenario.mode != Mode::Smart && cs.qos_active(scenario);
  const double floor = cs.r_th_bps + kInteriorMargin * std::max(cs.r_th_bps, 1.0);
  for (int i = 0; i < scenario.node_count(); ++i) {
    const double hi = caps[i] * (1.0 - kInteriorMargin);
    if (!(hi > power.p[i])) continue;
    auto qos_ok = [&](double p_i) {
      if (!qos) return true;
      PowerVector trial = power;
      trial.p[i] = p_i;
      const NetworkState s = with_powers(state, trial);
      for (int m = 0; m < scenario.interferer_count(); ++m)
        for (int u = 0; u < scenario.primary_ue_count(); ++u)
          if (primary_rate(m, u, i, s, scenario) < floor) return false;
      return true;
    };
    if (qos_ok(hi)) {
      power.p[i] = hi;
      continue;
    }
    if (!qos_ok(power.p[i])) continue;
    double lo = power.p[i];
    double top = hi;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + top);
      (qos_ok(mid) ? lo : top) = mid;
    }
    power.p[i] = lo;
  }
}

}  // namespace

SubproblemResult solve_subproblem(const NetworkState& state, const Scenario& scenario,
                                  const PowerVector& expansion) {
  const ConstraintSet cs = constraint_set(scenario);
  const int n_nodes = scenario.node_count();
  const int n_jam = scenario.interferer_count();
  const bool qos = scenario.mode != Mode::Smart && cs.qos_active(scenario);
  // Without rate floors nothing bounds cooperative interferers from below and
  // every capacity decreases in their power, so the optimum switches them off.
  const bool silenced = cs.cooperative && n_jam > 0 && !qos;
  const bool coop = cs.cooperative && n_jam > 0 && qos;
  PowerVector base = expansion;
  if (silenced) base.pj.assign(static_cast<std::size_t>(n_jam), 0.0);
  const Eigen::Index dim = n_nodes + (coop ? n_jam : 0) + 1;
  const Eigen::Index eta_idx = dim - 1;
  auto pj_idx = [&](int m) { return static_cast<Eigen::Index>(n_nodes + m); };

  // Strictly interior start: the configured interferer power is itself the
  // upper bound of its box in cooperative mode.
  PowerVector start = base;
  if (coop) {
    for (int m = 0; m < n_jam; ++m) start.pj[m] = std::min(start.pj[m], cs.pj_max_w[m] * (1.0 - 1e-9));
  }

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < n_nodes; ++i) x0[i] = start.p[i];
  if (coop) {
    for (int m = 0; m < n_jam; ++m) x0[pj_idx(m)] = start.pj[m];
  }

  // v - r~ for one link, written relative to the interference at the
  // expansion point: h ln(1 + (P_tx g + dI) / I0) - h dI / I0 per direction.
  // This keeps the huge, nearly cancelling log terms of v and r~ out of
  // floating point.
  std::vector<ConcaveFunction> a_tilde;
  std::vector<double> a_start;
  for (const auto& [i, j] : maxmin_links(scenario)) {
    const LinkDc link(i, j, state, scenario);
    const double h = link.half_bw_over_ln2();
    ConcaveFunction f(dim);
    auto direction = [&](int tx, const Eigen::VectorXd& g_rx, double safety_rx) {
      double i0 = safety_rx;
      for (int m = 0; m < n_jam; ++m) i0 += base.pj[m] * g_rx[m];
      if (!(i0 > 0.0)) {
        throw DegenerateDenominator("link " + std::to_string(link.i()) + "-" + std::to_string(link.j()) +
                                    " has no interference or safety term");
      }
      LogTerm term{h, 1.0, Eigen::VectorXd::Zero(dim)};
      term.weights[tx] = link.gain() / i0;
      if (coop) {
        term.base = safety_rx / i0;
        for (int m = 0; m < n_jam; ++m) {
          term.weights[pj_idx(m)] = g_rx[m] / i0;
          f.linear[pj_idx(m)] -= h * g_rx[m] / i0;
          f.constant += h * g_rx[m] * expansion.pj[m] / i0;
        }
      }
      f.logs.push_back(std::move(term));
    };
    direction(link.i(), link.interferer_gain_at_j(), link.safety_at_j());
    direction(link.j(), link.interferer_gain_at_i(), link.safety_at_i());
    a_start.push_back(f.value(x0));
    a_tilde.push_back(std::move(f));
  }
  const double eta_scale = *std::min_element(a_start.begin(), a_start.end());
  if (!(eta_scale > 0.0)) throw Infeasible("link", "non-positive link capacity at the expansion point");

  BarrierProblem problem;
  problem.objective = ConcaveFunction(dim);
  problem.objective.linear[eta_idx] = 1.0;

  auto add = [&](std::string family, ConcaveFunction f) {
    problem.constraints.push_back(BarrierConstraint{std::move(family), std::move(f)});
  };

  for (std::size_t k = 0; k < a_tilde.size(); ++k) {
    // Tie-break: prefer larger non-bottleneck capacities, each relative to its
    // starting value so that no link outweighs the max-min term.
    const double w = kTieBreak / a_start[k];
    problem.objective.constant += w * a_tilde[k].constant;
    problem.objective.linear += w * a_tilde[k].linear;
    for (LogTerm term : a_tilde[k].logs) {
      term.coef *= w;
      problem.objective.logs.push_back(std::move(term));
    }
    ConcaveFunction f = std::move(a_tilde[k]);
    f.constant /= eta_scale;
    f.linear /= eta_scale;
    for (LogTerm& term : f.logs) term.coef /= eta_scale;
    f.linear[eta_idx] -= 1.0;
    add("link", std::move(f));
  }

  {
    ConcaveFunction f(dim);
    f.linear[eta_idx] = 1.0;
    add("link", std::move(f));
  }

  for (int i = 0; i < n_nodes; ++i) {
    ConcaveFunction lower(dim);
    lower.linear[i] = 1.0 / cs.p_max_w;
    add("box", std::move(lower));
    ConcaveFunction upper(dim);
    upper.constant = 1.0;
    upper.linear[i] = -1.0 / cs.p_max_w;
    add("box", std::move(upper));
    if (scenario.mode == Mode::Smart) continue;
    for (int m = 0; m < n_jam; ++m) {
      ConcaveFunction cap(dim);
      cap.constant = 1.0;
      cap.linear[i] = -gain_sq(node(i), jammer(m), state, scenario) / cs.i_max_w[m];
      add("interference", std::move(cap));
    }
  }

  if (coop) {
    for (int m = 0; m < n_jam; ++m) {
      ConcaveFunction lower(dim);
      lower.linear[pj_idx(m)] = 1.0 / cs.pj_max_w[m];
      add("box", std::move(lower));
      ConcaveFunction upper(dim);
      upper.constant = 1.0;
      upper.linear[pj_idx(m)] = -1.0 / cs.pj_max_w[m];
      add("box", std::move(upper));
    }
  }

  if (qos) {
    const double inv_ln2 = 1.0 / std::numbers::ln2;
    for (int m = 0; m < n_jam; ++m) {
      for (int u = 0; u < scenario.primary_ue_count(); ++u) {
        for (int i = 0; i < n_nodes; ++i) {
          const QosLinearization q = qos_linearize(m, u, i, state, scenario, expansion, cs.r_th_bps);
          const double c0 = q.p0() * q.gain_iu() + q.noise();
          // (R^ - R^th) / B >= 0
          ConcaveFunction f(dim);
          LogTerm term{inv_ln2, q.noise(), Eigen::VectorXd::Zero(dim)};
          term.weights[i] = q.gain_iu();
          if (coop) {
            term.weights[pj_idx(m)] = q.gain_mu();
          } else {
            term.base += expansion.pj[m] * q.gain_mu();
          }
          f.logs.push_back(std::move(term));
          f.constant = -inv_ln2 * std::log(c0) + inv_ln2 * q.gain_iu() * q.p0() / c0 - cs.r_th_bps / q.bandwidth();
          f.linear[i] = -inv_ln2 * q.gain_iu() / c0;
          add("qos", std::move(f));
        }
      }
    }
  }

  // Solve in units of each variable's upper bound so that Newton systems stay
  // well conditioned when interference caps force tiny powers.
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(dim);
  const std::vector<double> caps = power_caps(state, scenario);
  for (int i = 0; i < n_nodes; ++i) scale[i] = caps[i];
  if (coop) {
    for (int m = 0; m < n_jam; ++m) scale[pj_idx(m)] = cs.pj_max_w[m];
  }
  rescale(problem.objective, scale);
  for (BarrierConstraint& c : problem.constraints) rescale(c.f, scale);

  x0 = x0.cwiseQuotient(scale);
  x0[eta_idx] = 0.99;

  const BarrierResult solved = maximize_barrier(problem, x0);
  const Eigen::VectorXd x = solved.x.cwiseProduct(scale);

  SubproblemResult out;
  out.power.p.assign(x.data(), x.data() + n_nodes);
  out.power.pj = base.pj;
  if (coop) {
    for (int m = 0; m < n_jam; ++m) out.power.pj[m] = x[pj_idx(m)];
  }
  raise_to_limits(state, scenario, out.power);
  out.eta = x[eta_idx] * eta_scale;
  out.kkt_residual = solved.kkt_residual;
  out.newton_steps = solved.newton_steps;
  return out;
}

namespace {

bool strictly_feasible(const ConstraintSlacks& s) {
  return s.interference_w > 0.0 && s.qos_bps > 0.0 && s.box_w > 0.0;
}

// from + gamma (to - from), projected into the interior of the power boxes.
PowerVector extrapolate(const PowerVector& from, const PowerVector& to, double gamma,
                        const std::vector<double>& caps, const ConstraintSet& cs) {
  PowerVector out = to;
  for (std::size_t i = 0; i < out.p.size(); ++i) {
    const double hi = caps[i] * (1.0 - kInteriorMargin);
    out.p[i] = std::clamp(from.p[i] + gamma * (to.p[i] - from.p[i]), 0.0, hi);
  }
  if (cs.cooperative) {
    for (std::size_t m = 0; m < out.pj.size(); ++m) {
      const double hi = cs.pj_max_w[m] * (1.0 - kInteriorMargin);
      out.pj[m] = std::clamp(from.pj[m] + gamma * (to.pj[m] - from.pj[m]), 0.0, hi);
    }
  }
  return out;
}

}  // namespace

ScaResult sca_loop(const NetworkState& state, const Scenario& scenario, const PowerVector& init,
                   double eps) {
  ScaResult out;
  out.power = init;
  out.eta = maxmin_value(state, scenario, init);
  out.history.push_back(out.eta);
  out.iterates.push_back(init);

  const int cap = scenario.solver.sca_max_iters;
  const ConstraintSet cs = constraint_set(scenario);
  const std::vector<double> caps = power_caps(state, scenario);
  for (int t = 1; t <= cap; ++t) {
    const SubproblemResult sub = solve_subproblem(state, scenario, out.power);
    ++out.iterations;
    double candidate = maxmin_value(state, scenario, sub.power);
    if (!(candidate > out.eta) || !constraint_slacks(state, scenario, sub.power).feasible()) {
      out.converged = true;
      return out;
    }
    if (candidate - out.eta <= eps) {
      out.power = sub.power;
      out.eta = candidate;
      out.history.push_back(candidate);
      out.iterates.push_back(sub.power);
      out.converged = true;
      return out;
    }
    // The convexified model is much more curved than the true rates along
    // directions where a binding constraint couples node and interferer
    // powers, so steps come out short. Stretch the step while the true
    // objective keeps improving.
    PowerVector next = sub.power;
    for (double gamma = 2.0; gamma <= kMaxExtrapolation; gamma *= 2.0) {
      const PowerVector trial = extrapolate(out.power, sub.power, gamma, caps, cs);
      if (!strictly_feasible(constraint_slacks(state, scenario, trial))) break;
      const double value = maxmin_value(state, scenario, trial);
      if (!(value > candidate)) break;
      candidate = value;
      next = trial;
    }
    out.power = next;
    out.eta = candidate;
    out.history.push_back(candidate);
    out.iterates.push_back(next);
  }
  throw MaxIterations("SCA did not converge in " + std::to_string(cap) + " iterations");
}

}  // namespace uavflow
