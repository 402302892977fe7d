#pragma once

// Greedy operator policy. At Decision 1 (t_rep steps before projected
// propellant depletion) the operator compares the equivalent-annuity
// utility of Replacement against the best OOR extension; at Decision 2
// (t_oor steps before depletion) it picks the extension length k.
//
// Utilities follow the operator's expectation model: expected revenue uses
// the expected market factor from the current level, survival comes from the
// satellite's reliability law, and every branch is annuitized over its own
// horizon so that alternatives with different horizons compare fairly.

#include <vector>

#include "oorarch/scenario.hpp"
#include "oorarch/stochastics.hpp"
#include "oorarch/vehicle.hpp"

namespace oorarch {

struct SatelliteState {
  int t_launch = 0;  // step at which operation began
  int t_tech = 0;    // technology reference step (= t_launch)
  int t_life = 0;    // design life, steps
  double m_dry = 0.0;
  double m_p_rem = 0.0;
  double isp = 0.0;
};

enum class Choice { kReplace, kRefuel };

struct DecisionOutcome {
  Choice choice = Choice::kReplace;
  int k = 0;              // extension steps (Refuel only)
  double m_p_oor = 0.0;   // kg (Refuel only)
  double c_oor = 0.0;     // $M (Refuel only)
  double utility = 0.0;   // chosen alternative
  double u_replace = 0.0;
  double u_refuel = 0.0;  // best OOR utility; -inf when no extension is feasible
};

enum class DecisionKind {
  kReplaceOrRefuel,  // Decision 1: lead t_rep, EP over t_rep
  kRefuelAmount,     // Decision 2: lead t_oor, EP over t_oor
};

/// Everything about one design that the policy needs, precomputed once and
/// shared (read-only) by every replicate of that design.
class PolicyContext {
 public:
  PolicyContext(const ScenarioParams& p, const DesignPoint& x);

  const ScenarioParams& params() const { return *p_; }
  const TimeGrid& grid() const { return grid_; }
  const ReliabilityLaw& law() const { return law_; }
  const MassCostBreakdown& design() const { return design_; }
  double p_rep() const { return p_rep_; }
  double r_step() const { return r_step_; }

  double discount(int n) const;     // exp(-r n)
  double annuity(int n) const;      // A/P over n steps, n >= 1
  double obsolescence(int elapsed) const;
  double market_expectation(int n) const;

 private:
  const ScenarioParams* p_;
  TimeGrid grid_;
  ReliabilityLaw law_;
  MassCostBreakdown design_;
  double p_rep_;
  double r_step_;
  std::vector<double> discount_, annuity_, obs_, emf_;
};

/// Equivalent-annuity factor e^{rn}(e^r - 1)/(e^{rn} - 1) for a per-step
/// rate r; tends to 1/n as r -> 0.
double ea_factor(double r_step, int n);

/// Operator's expectation at step t of the revenue booked at step s >= t by
/// a satellite with technology reference t_tech, given the current market
/// level phi(t).
double expected_revenue(const PolicyContext& ctx, int t, int s, int t_tech, double phi_t);

/// Expected discounted net revenue over the next `horizon` steps for the
/// satellite operating at t, conditional on it being alive at t.
double expected_profit_to_action(const PolicyContext& ctx, int t, const SatelliteState& sat,
                                 int horizon, const MarketState& market);

/// 1 - (1 - p_lau) P[dV_ot <= dV_des] with half-normal injection error.
double replacement_failure_prob(const ScenarioParams& p, const MassCostBreakdown& b);

/// Probability that the next event for a satellite launched at relative
/// step `launch` (in-orbit failure or propellant depletion) occurs at t1.
double next_event_prob(const PolicyContext& ctx, int t1, int launch);

double utility_replacement(const PolicyContext& ctx, int t, const SatelliteState& sat,
                           const MarketState& market);

/// Propellant that extends operation by k steps when delivered `lead` steps
/// after t.
double refuel_mass(int k, int t, const SatelliteState& sat, const ScenarioParams& p, int lead);

/// Feasible extensions {1, ..., k_max}: refuel mass within the service
/// capacity and the extension within the remaining design life. k_max = 0
/// means the set is empty.
struct ExtensionSet {
  int k_max = 0;
  bool empty() const { return k_max <= 0; }
  std::vector<int> values() const;
};

ExtensionSet feasible_extension_steps(int t, const SatelliteState& sat, const ScenarioParams& p,
                                      int lead);

struct OorChoice {
  int k = 0;
  double utility = 0.0;
  double m_p_oor = 0.0;
  double c_oor = 0.0;
};

/// u_oor(k) for every k in the feasible set, index k-1. Throws
/// std::invalid_argument when the set is empty.
std::vector<double> oor_utilities(const PolicyContext& ctx, int t, const SatelliteState& sat,
                                  const MarketState& market, DecisionKind kind);

/// argmax_k u_oor(k); ties resolve to the smaller k.
OorChoice utility_oor(const PolicyContext& ctx, int t, const SatelliteState& sat,
                      const MarketState& market, DecisionKind kind);

/// Last step up to which station keeping can be sustained from m_p_rem;
/// the satellite can fly (t, depletion] but not beyond.
int depletion_step(int t, const SatelliteState& sat, const ScenarioParams& p);

/// Decision 1. Replace wins exact ties; an empty extension set forces Replace.
DecisionOutcome decide_replace_or_refuel(const PolicyContext& ctx, int t, const SatelliteState& sat,
                                         const MarketState& market);

/// Decision 2. Returns Replace only when no extension is feasible any more.
DecisionOutcome decide_refuel_amount(const PolicyContext& ctx, int t, const SatelliteState& sat,
                                     const MarketState& market);

}  // namespace oorarch
