#pragma once

// Max-min power allocation over the relay chain by difference-of-concave
// decomposition and successive convex approximation.

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "uavflow/scenario.hpp"

namespace uavflow {

struct PowerVector {
  std::vector<double> p;   // relay-network nodes, watts
  std::vector<double> pj;  // interferers, watts

  bool operator==(const PowerVector&) const = default;
};

PowerVector powers_of(const NetworkState& state);
NetworkState with_powers(NetworkState state, const PowerVector& power);

struct ConstraintSet {
  double p_max_w = 0.0;
  std::vector<double> i_max_w;   // per interferer
  std::vector<double> pj_max_w;  // configured interferer powers (upper bounds)
  double r_th_bps = 0.0;
  bool cooperative = false;

  /// QoS rows are imposed only when there is something to protect.
  bool qos_active(const Scenario& scenario) const;
};

ConstraintSet constraint_set(const Scenario& scenario);

/// a_ij = v(P_i, P_j, P^J) - r(P^J) for one link, with geometry frozen at
/// construction. Both parts are concave.
class LinkDc {
 public:
  LinkDc(int i, int j, const NetworkState& state, const Scenario& scenario);

  int i() const { return i_; }
  int j() const { return j_; }

  double v(const PowerVector& power) const;
  double r(const PowerVector& power) const;
  double capacity(const PowerVector& power) const { return v(power) - r(power); }
  /// dr / dP^J.
  Eigen::VectorXd r_gradient(const PowerVector& power) const;

  double half_bw_over_ln2() const { return half_bw_over_ln2_; }
  double gain() const { return gain_ij_; }
  const Eigen::VectorXd& interferer_gain_at_j() const { return g_mj_; }
  const Eigen::VectorXd& interferer_gain_at_i() const { return g_mi_; }
  double safety_at_j() const { return safety_j_; }
  double safety_at_i() const { return safety_i_; }

 private:
  double interference_at_j(const PowerVector& power) const;
  double interference_at_i(const PowerVector& power) const;

  int i_;
  int j_;
  double half_bw_over_ln2_;
  double gain_ij_;
  Eigen::VectorXd g_mj_;
  Eigen::VectorXd g_mi_;
  double safety_j_;
  double safety_i_;
};

LinkDc dc_split(int i, int j, const NetworkState& state, const Scenario& scenario);

/// First-order expansion of r around a fixed interferer power vector. Since r is
/// concave, the tangent overestimates it everywhere.
struct AffineR {
  double value0 = 0.0;
  Eigen::VectorXd grad;
  std::vector<double> pj0;

  double operator()(const PowerVector& power) const;
};

AffineR taylor_linearize_r(const LinkDc& link, const PowerVector& expansion);

/// v - r~, a concave minorant of a_ij that is tight at the expansion point.
double approx_capacity(const LinkDc& link, const AffineR& r_tilde, const PowerVector& power);

/// Conservative concave approximation of the primary rate R_{m,u} with only
/// the -B log2(P_i |h_iu|^2 + sigma^2) term linearized around P_i^0.
class QosLinearization {
 public:
  QosLinearization(int m, int u, int i, const NetworkState& state, const Scenario& scenario,
                   const PowerVector& expansion);

  int m() const { return m_; }
  int u() const { return u_; }
  int i() const { return i_; }
  double rate(const PowerVector& power) const;
  double approx(const PowerVector& power) const;

  double bandwidth() const { return bandwidth_; }
  double gain_mu() const { return g_mu_; }
  double gain_iu() const { return g_iu_; }
  double noise() const { return noise_; }
  double p0() const { return p0_; }

 private:
  int m_;
  int u_;
  int i_;
  double bandwidth_;
  double g_mu_;
  double g_iu_;
  double noise_;
  double p0_;
};

/// Throws InfeasibleExpansion when the true rate at `expansion` is below `r_th_bps`.
QosLinearization qos_linearize(int m, int u, int i, const NetworkState& state,
                               const Scenario& scenario, const PowerVector& expansion,
                               double r_th_bps);

/// Links whose capacities enter the max-min objective.
std::vector<std::pair<int, int>> maxmin_links(const Scenario& scenario);

/// min over max-min links of the true capacity a_ij at `power`.
double maxmin_value(const NetworkState& state, const Scenario& scenario, const PowerVector& power);

/// Smallest slack per constraint family at `power` (true, non-linearized).
/// Families without rows report +inf.
struct ConstraintSlacks {
  double interference_w = 0.0;  // min_{i,m} I^max_m - P_i |h_im|^2
  double qos_bps = 0.0;         // min_{m,u,i} R_mu - R^th
  double box_w = 0.0;           // min over P_i, P_max - P_i, P^J_m, P^J_max - P^J_m

  bool feasible(double tol = 0.0) const {
    return interference_w >= -tol && qos_bps >= -tol && box_w >= -tol;
  }
};

ConstraintSlacks constraint_slacks(const NetworkState& state, const Scenario& scenario,
                                   const PowerVector& power);

/// Per-node upper bound min(P_max, min_m I^max_m / |h_im|^2).
std::vector<double> power_caps(const NetworkState& state, const Scenario& scenario);

/// 0.9 of the per-node cap, lowered by bisection until every QoS row holds with
/// margin; interferers at their configured powers. Throws Infeasible.
PowerVector feasible_initial_power(const NetworkState& state, const Scenario& scenario);

struct SubproblemResult {
  PowerVector power;
  double eta = 0.0;           // optimal auxiliary value of the convexified problem
  double kkt_residual = 0.0;  // in units where eta is normalized to its starting value
  int newton_steps = 0;
};

/// One convexified max-min problem around `expansion`, solved with a log-barrier
/// interior-point method. In non-cooperative mode P^J stays fixed.
SubproblemResult solve_subproblem(const NetworkState& state, const Scenario& scenario,
                                  const PowerVector& expansion);

struct ScaResult {
  PowerVector power;
  double eta = 0.0;
  std::vector<double> history;        // eta[0] is the value at `init`
  std::vector<PowerVector> iterates;  // iterates[k] realizes history[k]
  int iterations = 0;
  bool converged = false;
};

/// Repeats solve_subproblem until |eta[t] - eta[t-1]| <= eps. eta is the true
/// max-min capacity, so the history is nondecreasing; a candidate that does not
/// improve on the current point ends the loop. Throws MaxIterations.
ScaResult sca_loop(const NetworkState& state, const Scenario& scenario, const PowerVector& init,
                   double eps);

}  // namespace uavflow
