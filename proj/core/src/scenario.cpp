#include "oorarch/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string_view>

#include "json.hpp"

#include "oorarch/csv.hpp"

namespace oorarch {

namespace {

using nlohmann::json;

struct ScalarKey {
  const char* key;
  double ScenarioParams::*field;
};

struct RelKey {
  const char* key;
  double ReliabilityParams::*field;
};

constexpr ScalarKey kScalarKeys[] = {
    {"a_prop", &ScenarioParams::a_prop},
    {"b_prop", &ScenarioParams::b_prop},
    {"c_serv", &ScenarioParams::c_serv},
    {"c_lau", &ScenarioParams::c_lau},
    {"c_oor_f", &ScenarioParams::c_oor_f},
    {"c_oor_v", &ScenarioParams::c_oor_v},
    {"isp", &ScenarioParams::isp},
    {"m_oor_cap", &ScenarioParams::m_oor_cap},
    {"m_pl_ref", &ScenarioParams::m_pl_ref},
    {"m_base_ref", &ScenarioParams::m_base_ref},
    {"m_serv", &ScenarioParams::m_serv},
    {"p_lau", &ScenarioParams::p_lau},
    {"p_oor", &ScenarioParams::p_oor},
    {"r0", &ScenarioParams::r0},
    {"rf", &ScenarioParams::rf},
    {"t_oor_yr", &ScenarioParams::t_oor_yr},
    {"t_rep_yr", &ScenarioParams::t_rep_yr},
    {"t_ref_yr", &ScenarioParams::t_ref_yr},
    {"t_sim_yr", &ScenarioParams::t_sim_yr},
    {"dt_yr", &ScenarioParams::dt_yr},
    {"dv_ot_ideal", &ScenarioParams::dv_ot_ideal},
    {"dv_stk_yr", &ScenarioParams::dv_stk_yr},
    {"alpha_adcs", &ScenarioParams::alpha_adcs},
    {"alpha_ins", &ScenarioParams::alpha_ins},
    {"alpha_op", &ScenarioParams::alpha_op},
    {"alpha_str", &ScenarioParams::alpha_str},
    {"theta_obs", &ScenarioParams::theta_obs},
    {"kappa", &ScenarioParams::kappa},
    {"mu_mar", &ScenarioParams::mu_mar},
    {"sigma_mar", &ScenarioParams::sigma_mar},
    {"sigma_oi", &ScenarioParams::sigma_oi},
    {"cpi_ratio", &ScenarioParams::cpi_ratio},
};

constexpr RelKey kRelKeys[] = {
    {"alpha_rel", &ReliabilityParams::alpha_rel},
    {"beta_rel_1", &ReliabilityParams::beta_rel_1},
    {"beta_rel_2", &ReliabilityParams::beta_rel_2},
    {"theta_rel_1", &ReliabilityParams::theta_rel_1},
    {"theta_rel_2", &ReliabilityParams::theta_rel_2},
};

constexpr std::string_view kOptionalKeys[] = {"name", "g0", "market_model", "design_space"};

[[noreturn]] void fail(const std::string& key, const std::string& msg) {
  throw ScenarioError(key, key.empty() ? msg : "scenario key '" + key + "': " + msg);
}

double read_number(const json& doc, const std::string& key) {
  auto it = doc.find(key);
  if (it == doc.end()) fail(key, "missing required key");
  if (!it->is_number()) fail(key, "expected a number");
  return it->get<double>();
}

Interval read_interval(const json& ds, const std::string& key) {
  auto it = ds.find(key);
  if (it == ds.end()) fail("design_space." + key, "missing required key");
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
    fail("design_space." + key, "expected [lo, hi]");
  return {(*it)[0].get<double>(), (*it)[1].get<double>()};
}

DesignSpace read_design_space(const json& ds) {
  if (!ds.is_object()) fail("design_space", "expected an object");
  static const std::set<std::string> known = {"t_life_yr", "m_p_des_kg", "t_life_step_yr",
                                              "m_p_step_kg"};
  for (const auto& [k, v] : ds.items()) {
    if (!known.count(k)) fail("design_space." + k, "unknown key");
  }
  DesignSpace out;
  out.t_life_yr = read_interval(ds, "t_life_yr");
  out.m_p_kg = read_interval(ds, "m_p_des_kg");
  if (ds.contains("t_life_step_yr")) out.t_life_step_yr = read_number(ds, "t_life_step_yr");
  if (ds.contains("m_p_step_kg")) out.m_p_step_kg = read_number(ds, "m_p_step_kg");
  return out;
}

void require(bool ok, const char* key, const char* msg) {
  if (!ok) fail(key, msg);
}

}  // namespace

DesignPoint DesignSpace::clamp(DesignPoint x) const {
  x.t_life_yr = std::min(std::max(x.t_life_yr, t_life_yr.lo), t_life_yr.hi);
  x.m_p_des = std::min(std::max(x.m_p_des, m_p_kg.lo), m_p_kg.hi);
  return x;
}

void validate(const ScenarioParams& p) {
  for (const auto& k : kScalarKeys) {
    require(std::isfinite(p.*(k.field)), k.key, "must be finite");
  }
  for (const auto& k : kRelKeys) {
    require(std::isfinite(p.rel.*(k.field)), k.key, "must be finite");
  }
  for (const char* key : {"a_prop", "b_prop", "c_serv", "c_lau", "c_oor_f", "c_oor_v", "m_oor_cap",
                          "m_pl_ref", "m_base_ref", "m_serv", "r0", "t_oor_yr", "t_rep_yr",
                          "t_sim_yr", "dv_ot_ideal", "dv_stk_yr", "sigma_oi", "alpha_adcs",
                          "alpha_ins", "alpha_str", "kappa", "sigma_mar", "rf"}) {
    for (const auto& k : kScalarKeys) {
      if (std::string_view(k.key) == key) require(p.*(k.field) >= 0.0, key, "must be >= 0");
    }
  }
  require(p.isp > 0.0, "isp", "must be > 0");
  require(p.g0 > 0.0 && std::isfinite(p.g0), "g0", "must be > 0");
  require(p.dt_yr > 0.0, "dt_yr", "must be > 0");
  require(p.t_sim_yr >= p.dt_yr, "t_sim_yr", "must be >= dt_yr");
  require(p.t_ref_yr > 0.0, "t_ref_yr", "must be > 0");
  require(p.theta_obs > 0.0, "theta_obs", "must be > 0");
  require(p.cpi_ratio > 0.0, "cpi_ratio", "must be > 0");
  require(p.p_lau >= 0.0 && p.p_lau <= 1.0, "p_lau", "must lie in [0, 1]");
  require(p.p_oor >= 0.0 && p.p_oor <= 1.0, "p_oor", "must lie in [0, 1]");
  require(p.alpha_op >= 0.0 && p.alpha_op < 1.0, "alpha_op", "must lie in [0, 1)");
  require(p.alpha_str + p.alpha_adcs < 1.0, "alpha_str",
          "alpha_str + alpha_adcs must be < 1 (dry-mass fixed point is non-positive)");
  require(p.t_oor_yr < p.t_rep_yr, "t_oor_yr", "must be < t_rep_yr");
  require(p.rel.alpha_rel >= 0.0 && p.rel.alpha_rel <= 1.0, "alpha_rel", "must lie in [0, 1]");
  require(p.rel.beta_rel_1 > 0.0 && p.rel.beta_rel_1 < 1.0, "beta_rel_1", "must lie in (0, 1)");
  require(p.rel.beta_rel_2 > 1.0, "beta_rel_2", "must be > 1");
  require(p.rel.theta_rel_1 > 0.0, "theta_rel_1", "must be > 0");
  require(p.rel.theta_rel_2 > 0.0, "theta_rel_2", "must be > 0");

  const auto& ds = p.design_space;
  require(std::isfinite(ds.t_life_yr.lo) && std::isfinite(ds.t_life_yr.hi) &&
              ds.t_life_yr.lo <= ds.t_life_yr.hi && ds.t_life_yr.lo > 0.0,
          "design_space.t_life_yr", "expected 0 < lo <= hi");
  require(std::isfinite(ds.m_p_kg.lo) && std::isfinite(ds.m_p_kg.hi) &&
              ds.m_p_kg.lo <= ds.m_p_kg.hi && ds.m_p_kg.lo >= 0.0,
          "design_space.m_p_des_kg", "expected 0 <= lo <= hi");
  require(ds.t_life_step_yr >= 0.0, "design_space.t_life_step_yr", "must be >= 0");
  require(ds.m_p_step_kg >= 0.0, "design_space.m_p_step_kg", "must be >= 0");

  // Step counts must be exact multiples of dt; this throws with the key name.
  const TimeGrid g = discretize(p);
  require(g.t_oor >= 1, "t_oor_yr", "must be at least one time step");
}

ScenarioParams parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail("", std::string("scenario parse error: ") + e.what());
  }
  if (!doc.is_object()) fail("", "scenario document must be a JSON object");

  std::set<std::string> known;
  for (const auto& k : kScalarKeys) known.insert(k.key);
  for (const auto& k : kRelKeys) known.insert(k.key);
  for (auto k : kOptionalKeys) known.insert(std::string(k));
  for (const auto& [k, v] : doc.items()) {
    if (!known.count(k)) fail(k, "unknown key");
  }

  ScenarioParams p;
  for (const auto& k : kScalarKeys) p.*(k.field) = read_number(doc, k.key);
  for (const auto& k : kRelKeys) p.rel.*(k.field) = read_number(doc, k.key);
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) fail("name", "expected a string");
    p.name = doc["name"].get<std::string>();
  }
  if (doc.contains("g0")) p.g0 = read_number(doc, "g0");
  if (doc.contains("market_model")) {
    const auto& mm = doc["market_model"];
    if (mm == "additive") {
      p.market_model = MarketModel::kAdditive;
    } else if (mm == "multiplicative") {
      p.market_model = MarketModel::kMultiplicative;
    } else {
      fail("market_model", "expected \"additive\" or \"multiplicative\"");
    }
  }
  if (!doc.contains("design_space")) fail("design_space", "missing required key");
  p.design_space = read_design_space(doc["design_space"]);

  validate(p);
  return p;
}

ScenarioParams load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("", "cannot open scenario file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_scenario(text);
}

std::string dump_scenario(const ScenarioParams& p) {
  json doc = json::object();
  if (!p.name.empty()) doc["name"] = p.name;
  for (const auto& k : kScalarKeys) doc[k.key] = p.*(k.field);
  for (const auto& k : kRelKeys) doc[k.key] = p.rel.*(k.field);
  doc["g0"] = p.g0;
  doc["market_model"] = p.market_model == MarketModel::kAdditive ? "additive" : "multiplicative";
  json ds = json::object();
  ds["t_life_yr"] = {p.design_space.t_life_yr.lo, p.design_space.t_life_yr.hi};
  ds["m_p_des_kg"] = {p.design_space.m_p_kg.lo, p.design_space.m_p_kg.hi};
  ds["t_life_step_yr"] = p.design_space.t_life_step_yr;
  ds["m_p_step_kg"] = p.design_space.m_p_step_kg;
  doc["design_space"] = ds;
  return doc.dump(2) + "\n";
}

void save_scenario(const ScenarioParams& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << dump_scenario(p);
}

std::string scenario_hash(const ScenarioParams& p) {
  return hex64(fnv1a64(dump_scenario(p)));
}

int steps_exact(double years, double dt_yr, const std::string& key) {
  const double exact = years / dt_yr;
  const double rounded = std::round(exact);
  if (std::abs(rounded - exact) > 1e-6) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.17g yr is not an integer multiple of dt_yr (%.17g steps)",
                  years, exact);
    fail(key, buf);
  }
  return static_cast<int>(rounded);
}

TimeGrid discretize(const ScenarioParams& p) {
  TimeGrid g;
  g.t_sim = steps_exact(p.t_sim_yr, p.dt_yr, "t_sim_yr");
  g.t_rep = steps_exact(p.t_rep_yr, p.dt_yr, "t_rep_yr");
  g.t_oor = steps_exact(p.t_oor_yr, p.dt_yr, "t_oor_yr");
  g.dv_stk_step = p.dv_stk_yr * p.dt_yr;
  return g;
}

int life_steps(const ScenarioParams& p, double t_life_yr) {
  return static_cast<int>(std::lround(t_life_yr / p.dt_yr));
}

}  // namespace oorarch
