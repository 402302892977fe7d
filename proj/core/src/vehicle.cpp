#include "oorarch/vehicle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace oorarch {

MassCostBreakdown size_vehicle(const ScenarioParams& p, const DesignPoint& x) {
  MassCostBreakdown b;
  const double growth = (1.0 + p.kappa * (x.t_life_yr - 3.0)) / (1.0 + p.kappa * (p.t_ref_yr - 3.0));
  b.m_base = p.m_base_ref * growth;
  b.m_pl = p.m_pl_ref * growth;
  b.m_ps = p.a_prop * std::cbrt(x.m_p_des * x.m_p_des) + p.b_prop;
  b.m_serv = p.m_serv;

  const double fixed = b.m_base + b.m_pl + b.m_ps + b.m_serv;
  const double dry = fixed / (1.0 - p.alpha_str - p.alpha_adcs);
  b.m_str = p.alpha_str * dry;
  b.m_adcs = p.alpha_adcs * dry;
  b.m_dry = b.m_base + b.m_pl + b.m_ps + b.m_str + b.m_adcs + b.m_serv;
  b.m_p_des = x.m_p_des;
  b.m_wet = b.m_dry + x.m_p_des;
  b.dv_des = dv_capacity(b.m_wet, b.m_dry, p.isp, p.g0);

  if (!std::isfinite(b.m_dry) || !std::isfinite(b.dv_des) || b.m_base < 0.0 || b.m_dry <= 0.0) {
    throw std::domain_error("size_vehicle: non-finite or non-positive mass (check design point)");
  }
  return b;
}

MassCostBreakdown cost_vehicle(const ScenarioParams& p, MassCostBreakdown b) {
  const double bus = b.m_dry - b.m_pl - b.m_serv;
  if (!(bus > 0.0)) throw std::domain_error("cost_vehicle: bus mass m_dry - m_pl - m_serv <= 0");
  // USCM8 in FY2010 $K; the 1.124 and 1.234 multipliers are part of the model.
  const double uscm8 = 283.5 * std::pow(bus, 0.716) + 189.0 * b.m_pl + p.c_serv;
  b.c_sat = 1.124 * 1.234 * uscm8 * p.cpi_ratio / 1000.0;
  b.c_lau = p.c_lau * b.m_wet;
  b.c_ioc = (1.0 + p.alpha_ins) * b.c_sat + b.c_lau;
  return b;
}

MassCostBreakdown design_vehicle(const ScenarioParams& p, const DesignPoint& x) {
  return cost_vehicle(p, size_vehicle(p, x));
}

double oor_service_cost(const ScenarioParams& p, double m_p_oor) {
  if (m_p_oor < 0.0) throw std::domain_error("oor_service_cost: negative propellant mass");
  if (m_p_oor > p.m_oor_cap) {
    throw std::domain_error("oor_service_cost: " + std::to_string(m_p_oor) +
                            " kg exceeds service capacity " + std::to_string(p.m_oor_cap) + " kg");
  }
  return p.c_oor_v * m_p_oor + p.c_oor_f;
}

double propellant_for_dv(double m0, double dv, double isp, double g0) {
  return -m0 * std::expm1(-dv / (g0 * isp));
}

double dv_capacity(double m_wet, double m_dry, double isp, double g0) {
  return g0 * isp * std::log(m_wet / m_dry);
}

double full_life_propellant(const ScenarioParams& p, double t_life_yr) {
  const double dv = p.dv_ot_ideal + p.dv_stk_yr * t_life_yr;
  const double ratio = std::expm1(dv / p.exhaust_velocity());
  // m_p = m_dry(m_p) * ratio; m_dry grows like m_p^(2/3), so plain
  // iteration contracts quickly from the propellant-free dry mass.
  double m_p = size_vehicle(p, {t_life_yr, 0.0}).m_dry * ratio;
  for (int i = 0; i < 200; ++i) {
    const double next = size_vehicle(p, {t_life_yr, m_p}).m_dry * ratio;
    if (std::abs(next - m_p) <= 1e-12 * std::max(1.0, m_p)) return next;
    m_p = next;
  }
  return m_p;
}

}  // namespace oorarch
