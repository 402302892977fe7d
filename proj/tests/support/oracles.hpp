#pragma once

// Independent reference evaluations used by the unit and acceptance tests.
//
// Everything here is written from the model definitions directly, in long
// double, without calling the library's own helpers for the quantity under
// test. Expectations over failure times, injection errors and service
// outcomes are computed by enumerating the event tree branch by branch.

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "oorarch/policy.hpp"
#include "oorarch/scenario.hpp"

namespace oorarch::oracle {

using real = long double;

std::filesystem::path scenario_path(const std::string& file);
ScenarioParams chemical();
ScenarioParams electric();

/// |got - want| <= rel |want| + abs_floor.
bool close(real got, real want, real rel = 1e-9L, real abs_floor = 1e-14L);
real rel_error(real got, real want);

struct Vehicle {
  real m_base, m_pl, m_ps, m_str, m_adcs, m_serv, m_dry, m_wet;
  real c_sat, c_lau, c_ioc, dv_des;
};
Vehicle vehicle(const ScenarioParams& p, const DesignPoint& x);

real rocket_propellant(real m0, real dv, real isp, real g0);
real half_normal_cdf(real margin, real sigma);
real obsolescence(real elapsed_yr, real theta_obs);
real reliability(const ScenarioParams& p, real t_life_yr, int elapsed);
int life_steps(const ScenarioParams& p, real t_life_yr);
real failure_mass(const ScenarioParams& p, real t_life_yr, int elapsed);

/// Annuity that has the same present value as 1 paid now, over n steps:
/// 1 / sum_{i=1..n} e^{-r i}.
real annuity(real r_step, int n);

/// Expected revenue at step s, seen from t, for technology reference t_tech.
real expected_revenue(const ScenarioParams& p, int t, int s, int t_tech, real phi_t);

/// Expected discounted net revenue over `horizon` steps, by enumerating the
/// satellite's failure step conditional on survival to t.
real expected_profit(const ScenarioParams& p, const DesignPoint& x, int t, const SatelliteState& sat,
                     int horizon, real phi_t);

real replacement_failure(const ScenarioParams& p, const DesignPoint& x);

/// P[next event of a fresh satellite is n steps after launch], by
/// enumerating the coverage count of the injected tank and the failure step.
real next_event(const ScenarioParams& p, const DesignPoint& x, int n);

real refuel_mass(const ScenarioParams& p, const SatelliteState& sat, int lead, int k);
int k_max(const ScenarioParams& p, const SatelliteState& sat, int t, int lead);

/// Replacement utility as an expectation over the full event tree: launch
/// outcome, injection-error bucket, failure step of the new satellite.
real utility_replacement(const ScenarioParams& p, const DesignPoint& x, int t,
                         const SatelliteState& sat, real phi_t);

/// OOR utilities for k = 1..k_max as an expectation over service outcome and
/// the satellite's failure step (counted from its launch).
std::vector<real> utility_oor(const ScenarioParams& p, const DesignPoint& x, int t,
                              const SatelliteState& sat, real phi_t, bool decision1);

struct ToyCase {
  ScenarioParams p;
  DesignPoint x;
  SatelliteState sat;
  int t = 0;
  double phi = 1.0;
};

/// Random small configuration: dt = 1 yr, lead times of two or three steps,
/// at most five event steps past the action and at most three extensions.
ToyCase make_toy_case(std::mt19937_64& rng);

/// Baseline scenario with every stochastic source switched off: no market
/// volatility, no injection error, no launch or service failure, certain
/// survival within the design life, and no service capacity.
ScenarioParams deterministic(ScenarioParams p);

/// NPV of one lifecycle under deterministic(p), replayed launch by launch.
real deterministic_npv(const ScenarioParams& p, const DesignPoint& x);

}  // namespace oorarch::oracle
