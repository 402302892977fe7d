#pragma once

// Scenario parameters, design space and the discretized time grid.
//
// A scenario file is a flat JSON object whose keys are the snake-cased
// nomenclature symbols (see docs/scenario_format.md). ScenarioParams is
// immutable after loading and is shared freely across simulation workers.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace oorarch {

inline constexpr double kStandardGravity = 9.80665;  // m/s^2

/// Raised for any scenario load or validation problem. key() names the
/// offending scenario key (empty for pure parse errors).
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class MarketModel {
  kAdditive,        // phi(t+1) = phi(t) + mu dT + sigma eps sqrt(dT)
  kMultiplicative,  // phi(t+1) = phi(t) (1 + mu dT + sigma eps sqrt(dT))
};

struct ReliabilityParams {
  double alpha_rel = 0.0;
  double beta_rel_1 = 0.0;
  double beta_rel_2 = 0.0;
  double theta_rel_1 = 0.0;  // yr
  double theta_rel_2 = 0.0;  // yr
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
  double width() const { return hi - lo; }
};

struct DesignPoint {
  double t_life_yr = 0.0;
  double m_p_des = 0.0;  // kg
};

struct DesignSpace {
  Interval t_life_yr;
  Interval m_p_kg;
  // Full-factorial grid increments; zero means "not specified".
  double t_life_step_yr = 0.0;
  double m_p_step_kg = 0.0;

  bool contains(const DesignPoint& x) const {
    return t_life_yr.contains(x.t_life_yr) && m_p_kg.contains(x.m_p_des);
  }
  DesignPoint clamp(DesignPoint x) const;
};

struct ScenarioParams {
  std::string name;

  double a_prop = 0.0;      // kg^(1/3)
  double b_prop = 0.0;      // kg
  double c_serv = 0.0;      // $M
  double c_lau = 0.0;       // $M/kg
  double c_oor_f = 0.0;     // $M
  double c_oor_v = 0.0;     // $M/kg
  double isp = 0.0;         // s
  double m_oor_cap = 0.0;   // kg
  double m_pl_ref = 0.0;    // kg
  double m_base_ref = 0.0;  // kg
  double m_serv = 0.0;      // kg
  double p_lau = 0.0;
  double p_oor = 0.0;
  double r0 = 0.0;          // $M/yr
  double rf = 0.0;          // 1/yr, continuously compounded
  double t_oor_yr = 0.0;
  double t_rep_yr = 0.0;
  double t_ref_yr = 0.0;
  double t_sim_yr = 0.0;
  double dt_yr = 0.0;
  double dv_ot_ideal = 0.0;  // m/s
  double dv_stk_yr = 0.0;    // m/s/yr
  double alpha_adcs = 0.0;
  double alpha_ins = 0.0;
  double alpha_op = 0.0;
  double alpha_str = 0.0;
  ReliabilityParams rel;
  double theta_obs = 0.0;  // yr
  double kappa = 0.0;
  double mu_mar = 0.0;     // 1/yr
  double sigma_mar = 0.0;  // 1/sqrt(yr)
  double sigma_oi = 0.0;   // m/s
  double cpi_ratio = 0.0;
  double g0 = kStandardGravity;
  MarketModel market_model = MarketModel::kAdditive;

  DesignSpace design_space;

  /// Effective exhaust velocity g0 * Isp.
  double exhaust_velocity() const { return g0 * isp; }
};

struct TimeGrid {
  int t_sim = 0;  // steps
  int t_rep = 0;
  int t_oor = 0;
  double dv_stk_step = 0.0;  // m/s per step
};

/// Throws ScenarioError naming the first violated invariant.
void validate(const ScenarioParams& p);

ScenarioParams load_scenario(const std::filesystem::path& path);
ScenarioParams parse_scenario(const std::string& json_text);

/// Serializes every field at round-trip precision; parse_scenario() of the
/// result reproduces the input bit-exactly.
std::string dump_scenario(const ScenarioParams& p);
void save_scenario(const ScenarioParams& p, const std::filesystem::path& path);

/// Stable 64-bit FNV-1a digest of dump_scenario(p), as 16 hex digits.
std::string scenario_hash(const ScenarioParams& p);

/// Converts a duration in years to an integral step count. Throws if the
/// duration is not an integer multiple of dt (to within 1e-6 steps).
int steps_exact(double years, double dt_yr, const std::string& key);

TimeGrid discretize(const ScenarioParams& p);

/// Design-lifetime step count; design variables are continuous, so this
/// rounds to nearest without the exactness check.
int life_steps(const ScenarioParams& p, double t_life_yr);

}  // namespace oorarch
