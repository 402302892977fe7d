#include "oorarch/policy.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oorarch {

namespace {

// Depletion is effectively never reached when no station keeping is needed.
constexpr int kNoDepletion = INT_MAX / 4;

}  // namespace

double ea_factor(double r_step, int n) {
  if (n < 1) throw std::invalid_argument("ea_factor: n must be >= 1");
  if (r_step == 0.0) return 1.0 / n;
  return std::expm1(r_step) / -std::expm1(-r_step * n);
}

PolicyContext::PolicyContext(const ScenarioParams& p, const DesignPoint& x)
    : p_(&p),
      grid_(discretize(p)),
      law_(p, x.t_life_yr),
      design_(design_vehicle(p, x)),
      p_rep_(replacement_failure_prob(p, design_)),
      r_step_(p.rf * p.dt_yr) {
  const int n = 2 * (grid_.t_rep + law_.t_life_steps()) + 8;
  discount_.resize(static_cast<std::size_t>(n));
  annuity_.resize(static_cast<std::size_t>(n));
  obs_.resize(static_cast<std::size_t>(n));
  emf_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    discount_[u] = std::exp(-r_step_ * i);
    annuity_[u] = i >= 1 ? ea_factor(r_step_, i) : 0.0;
    obs_[u] = obsolescence_factor(i, 0, p.dt_yr, p.theta_obs);
    emf_[u] = expected_market_factor(i, p.dt_yr, p.mu_mar, p.market_model);
  }
}

double PolicyContext::discount(int n) const {
  if (n >= 0 && n < static_cast<int>(discount_.size())) return discount_[static_cast<std::size_t>(n)];
  return std::exp(-r_step_ * n);
}

double PolicyContext::annuity(int n) const {
  if (n >= 1 && n < static_cast<int>(annuity_.size())) return annuity_[static_cast<std::size_t>(n)];
  return ea_factor(r_step_, n);
}

double PolicyContext::obsolescence(int elapsed) const {
  if (elapsed >= 0 && elapsed < static_cast<int>(obs_.size())) return obs_[static_cast<std::size_t>(elapsed)];
  return obsolescence_factor(elapsed, 0, p_->dt_yr, p_->theta_obs);
}

double PolicyContext::market_expectation(int n) const {
  if (n >= 0 && n < static_cast<int>(emf_.size())) return emf_[static_cast<std::size_t>(n)];
  return expected_market_factor(n, p_->dt_yr, p_->mu_mar, p_->market_model);
}

double expected_revenue(const PolicyContext& ctx, int t, int s, int t_tech, double phi_t) {
  const auto& p = ctx.params();
  return p.r0 * p.dt_yr * phi_t * ctx.market_expectation(s - t) * ctx.obsolescence(s - t_tech);
}

double expected_profit_to_action(const PolicyContext& ctx, int t, const SatelliteState& sat,
                                 int horizon, const MarketState& market) {
  const auto& law = ctx.law();
  const double alive = law.at(t - sat.t_launch);
  if (horizon <= 0 || alive <= 0.0) return 0.0;
  const double net = 1.0 - ctx.params().alpha_op;
  double ep = 0.0;
  for (int i = 1; i <= horizon; ++i) {
    const double survival = law.at(t + i - sat.t_launch) / alive;
    ep += net * expected_revenue(ctx, t, t + i, sat.t_tech, market.phi_mar) * survival *
          ctx.discount(i);
  }
  return ep;
}

double replacement_failure_prob(const ScenarioParams& p, const MassCostBreakdown& b) {
  const double transfer_ok = half_normal_cdf(b.dv_des - p.dv_ot_ideal, p.sigma_oi);
  return 1.0 - (1.0 - p.p_lau) * transfer_ok;
}

double next_event_prob(const PolicyContext& ctx, int t1, int launch) {
  const auto& p = ctx.params();
  const auto& law = ctx.law();
  const double dv_step = ctx.grid().dv_stk_step;
  const double dv_des = ctx.design().dv_des;
  const int n = t1 - launch;
  // P[dV_ot + m dV_stk <= dV_des]: the tank still covers m steps.
  auto covers = [&](int m) { return half_normal_cdf(dv_des - p.dv_ot_ideal - m * dv_step, p.sigma_oi); };
  // The next event is min(failure step, last covered step + 1). A failure
  // at n coinciding with depletion at n counts once.
  const double ok_through_prev = covers(n - 1);
  const double depletes_at_n = ok_through_prev - covers(n);
  return ok_through_prev * law.failure_mass(n) + depletes_at_n * law.at(n);
}

double utility_replacement(const PolicyContext& ctx, int t, const SatelliteState& sat,
                           const MarketState& market) {
  const auto& p = ctx.params();
  const int lead = ctx.grid().t_rep;
  const int life = ctx.law().t_life_steps();
  const double ep = expected_profit_to_action(ctx, t, sat, lead, market);

  const double u_fail = ctx.p_rep() * ctx.annuity(lead) * ep;

  const double base = ep - ctx.design().c_ioc * ctx.discount(lead);
  const int t_tech_new = t + lead;
  double revenue_acc = 0.0;  // sum_{t2 = lead+1}^{t1-1} E[R(t+t2)] e^{-r t2}
  double u_ok = 0.0;
  for (int t1 = lead + 1; t1 <= lead + life + 1; ++t1) {
    u_ok += next_event_prob(ctx, t1, lead) * ctx.annuity(t1) * (base + revenue_acc);
    revenue_acc += expected_revenue(ctx, t, t + t1, t_tech_new, market.phi_mar) * ctx.discount(t1);
  }
  return u_fail + (1.0 - p.p_lau) * u_ok;
}

double refuel_mass(int k, int t, const SatelliteState& sat, const ScenarioParams& p, int lead) {
  (void)t;
  const double c = p.g0 * sat.isp;
  const double dv = p.dv_stk_yr * p.dt_yr;
  const double at_service = (sat.m_dry + sat.m_p_rem) * std::exp(-dv * lead / c);
  return at_service * -std::expm1(-dv * k / c);
}

std::vector<int> ExtensionSet::values() const {
  std::vector<int> out;
  for (int k = 1; k <= k_max; ++k) out.push_back(k);
  return out;
}

ExtensionSet feasible_extension_steps(int t, const SatelliteState& sat, const ScenarioParams& p,
                                      int lead) {
  const int life_left = sat.t_launch + sat.t_life - (t + lead);
  if (life_left <= 0) return {0};
  const double c = p.g0 * sat.isp;
  const double dv = p.dv_stk_yr * p.dt_yr;
  const double at_service = (sat.m_dry + sat.m_p_rem) * std::exp(-dv * lead / c);
  if (dv <= 0.0 || p.m_oor_cap >= at_service) return {life_left};

  double estimate = -std::log1p(-p.m_oor_cap / at_service) * c / dv;
  int k = static_cast<int>(std::min<double>(std::floor(estimate), life_left + 1.0));
  while (k < life_left && refuel_mass(k + 1, t, sat, p, lead) <= p.m_oor_cap) ++k;
  while (k > 0 && refuel_mass(k, t, sat, p, lead) > p.m_oor_cap) --k;
  return {std::min(k, life_left)};
}

std::vector<double> oor_utilities(const PolicyContext& ctx, int t, const SatelliteState& sat,
                                  const MarketState& market, DecisionKind kind) {
  const auto& p = ctx.params();
  const auto& law = ctx.law();
  const bool first = kind == DecisionKind::kReplaceOrRefuel;
  const int lead = first ? ctx.grid().t_rep : ctx.grid().t_oor;

  const ExtensionSet ks = feasible_extension_steps(t, sat, p, lead);
  if (ks.empty()) throw std::invalid_argument("oor_utilities: no feasible extension");
  const int k_max = ks.k_max;

  const double ep = expected_profit_to_action(ctx, t, sat, lead, market);
  const double u_fail = p.p_oor * ctx.annuity(lead) * ep;

  // rev[j] = sum_{t2 = lead+1}^{lead+j} E[R(t+t2)] e^{-r t2}
  std::vector<double> rev(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (int j = 1; j <= k_max; ++j) {
    rev[j] = rev[j - 1] +
             expected_revenue(ctx, t, t + lead + j, sat.t_tech, market.phi_mar) * ctx.discount(lead + j);
  }
  // Failure after a successful service at t1 = lead + j, annuitized over t1 - 1.
  auto weight = [&](int j) {
    return law.failure_mass(t + lead + j - sat.t_launch) * ctx.annuity(lead + j - 1);
  };

  std::vector<double> out(static_cast<std::size_t>(k_max));
  double w_sum = 0.0, wr_sum = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    if (first) {
      // t1 in [lead+1, lead+k], revenue through t1
      const double w = weight(k);
      w_sum += w;
      wr_sum += w * rev[k];
    } else if (k >= 2) {
      // t1 in [lead+1, lead+k-1], revenue through t1-1
      const double w = weight(k - 1);
      w_sum += w;
      wr_sum += w * rev[k - 2];
    }
    const double m = refuel_mass(k, t, sat, p, lead);
    const double base = ep - (p.c_oor_v * m + p.c_oor_f) * ctx.discount(lead);
    const double u_fail_later = (1.0 - p.p_oor) * (base * w_sum + wr_sum);
    const double survive = law.at(t + lead + k - sat.t_launch);
    const double u_survive = (1.0 - p.p_oor) * survive * ctx.annuity(lead + k) * (base + rev[k]);
    out[static_cast<std::size_t>(k - 1)] = u_fail + u_fail_later + u_survive;
  }
  return out;
}

OorChoice utility_oor(const PolicyContext& ctx, int t, const SatelliteState& sat,
                      const MarketState& market, DecisionKind kind) {
  const auto u = oor_utilities(ctx, t, sat, market, kind);
  std::size_t best = 0;
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (u[i] > u[best]) best = i;
  }
  const auto& p = ctx.params();
  const int lead = kind == DecisionKind::kReplaceOrRefuel ? ctx.grid().t_rep : ctx.grid().t_oor;
  OorChoice c;
  c.k = static_cast<int>(best) + 1;
  c.utility = u[best];
  c.m_p_oor = refuel_mass(c.k, t, sat, p, lead);
  c.c_oor = p.c_oor_v * c.m_p_oor + p.c_oor_f;
  return c;
}

int depletion_step(int t, const SatelliteState& sat, const ScenarioParams& p) {
  if (sat.m_p_rem <= 0.0) return t;
  const double dv = p.dv_stk_yr * p.dt_yr;
  if (dv <= 0.0) return kNoDepletion;
  const double steps = std::log1p(sat.m_p_rem / sat.m_dry) * p.g0 * sat.isp / dv;
  if (steps >= kNoDepletion) return kNoDepletion;
  return t + static_cast<int>(std::floor(steps));
}

DecisionOutcome decide_replace_or_refuel(const PolicyContext& ctx, int t, const SatelliteState& sat,
                                         const MarketState& market) {
  DecisionOutcome d;
  d.u_replace = utility_replacement(ctx, t, sat, market);
  d.u_refuel = -std::numeric_limits<double>::infinity();
  if (!feasible_extension_steps(t, sat, ctx.params(), ctx.grid().t_rep).empty()) {
    const OorChoice oor = utility_oor(ctx, t, sat, market, DecisionKind::kReplaceOrRefuel);
    d.u_refuel = oor.utility;
    if (oor.utility > d.u_replace) {
      d.choice = Choice::kRefuel;
      d.k = oor.k;
      d.m_p_oor = oor.m_p_oor;
      d.c_oor = oor.c_oor;
      d.utility = oor.utility;
      return d;
    }
  }
  d.choice = Choice::kReplace;
  d.utility = d.u_replace;
  return d;
}

DecisionOutcome decide_refuel_amount(const PolicyContext& ctx, int t, const SatelliteState& sat,
                                     const MarketState& market) {
  DecisionOutcome d;
  d.u_refuel = -std::numeric_limits<double>::infinity();
  if (feasible_extension_steps(t, sat, ctx.params(), ctx.grid().t_oor).empty()) {
    d.choice = Choice::kReplace;
    return d;
  }
  const OorChoice oor = utility_oor(ctx, t, sat, market, DecisionKind::kRefuelAmount);
  d.choice = Choice::kRefuel;
  d.k = oor.k;
  d.m_p_oor = oor.m_p_oor;
  d.c_oor = oor.c_oor;
  d.utility = d.u_refuel = oor.utility;
  return d;
}

}  // namespace oorarch
