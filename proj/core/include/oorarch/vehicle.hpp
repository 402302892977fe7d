#pragma once

// Mass and cost estimating relationships for a satellite sized by its
// design lifetime and design propellant mass, plus rocket-equation helpers.

#include "oorarch/scenario.hpp"

namespace oorarch {

struct MassCostBreakdown {
  // kg
  double m_base = 0.0;
  double m_pl = 0.0;
  double m_ps = 0.0;
  double m_str = 0.0;
  double m_adcs = 0.0;
  double m_serv = 0.0;
  double m_dry = 0.0;
  double m_p_des = 0.0;
  double m_wet = 0.0;
  // $M
  double c_sat = 0.0;
  double c_lau = 0.0;
  double c_ioc = 0.0;
  // m/s of capability with a full tank
  double dv_des = 0.0;
};

/// Subsystem masses. m_str and m_adcs are proportional to m_dry, which
/// contains them; the linear fixed point is solved in closed form, so
/// m_dry = (m_base + m_pl + m_ps + m_serv) / (1 - alpha_str - alpha_adcs).
/// Cost fields are left at zero.
MassCostBreakdown size_vehicle(const ScenarioParams& p, const DesignPoint& x);

/// Fills c_sat (USCM8 unmanned vehicle model, scaled to current dollars by
/// cpi_ratio), c_lau and c_ioc. Throws std::domain_error when the bus mass
/// m_dry - m_pl - m_serv is not positive.
MassCostBreakdown cost_vehicle(const ScenarioParams& p, MassCostBreakdown b);

/// size_vehicle followed by cost_vehicle.
MassCostBreakdown design_vehicle(const ScenarioParams& p, const DesignPoint& x);

/// Linear OOR pricing: c_oor_v * m + c_oor_f. Throws std::domain_error when
/// m is negative or exceeds the service capacity.
double oor_service_cost(const ScenarioParams& p, double m_p_oor);

/// Propellant burned to deliver dv from gross mass m0.
double propellant_for_dv(double m0, double dv, double isp, double g0 = kStandardGravity);

/// Ideal velocity change available when burning from m_wet down to m_dry.
double dv_capacity(double m_wet, double m_dry, double isp, double g0 = kStandardGravity);

/// Propellant that covers the ideal orbital transfer plus station keeping
/// over the whole design life, with the dry mass re-sized for that load.
double full_life_propellant(const ScenarioParams& p, double t_life_yr);

}  // namespace oorarch
