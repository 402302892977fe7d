#include "oorarch/stochastics.hpp"

#include <algorithm>
#include <cmath>

namespace oorarch {

namespace {

std::seed_seq make_seed_seq(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffULL); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  return std::seed_seq{lo(a), hi(a), lo(b), hi(b), lo(c), hi(c), 0x6f6f7261U};
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t experiment_index,
                     std::uint64_t replicate_index)
    : seed_(master_seed), experiment_(experiment_index), replicate_(replicate_index) {
  auto seq = make_seed_seq(master_seed, experiment_index, replicate_index);
  engine_.seed(seq);
}

MarketState market_advance(MarketState s, double eps, double dt_yr, double mu_mar,
                           double sigma_mar, MarketModel model) {
  const double increment = mu_mar * dt_yr + sigma_mar * eps * std::sqrt(dt_yr);
  const double next = model == MarketModel::kAdditive ? s.phi_mar + increment
                                                      : s.phi_mar * (1.0 + increment);
  return {std::max(0.0, next), s.step + 1};
}

MarketState market_step(MarketState s, double dt_yr, double mu_mar, double sigma_mar, RngStream& rng,
                        MarketModel model) {
  return market_advance(s, rng.normal(), dt_yr, mu_mar, sigma_mar, model);
}

double expected_market_factor(int n_steps, double dt_yr, double mu_mar, MarketModel model) {
  if (model == MarketModel::kAdditive) return 1.0 + mu_mar * n_steps * dt_yr;
  return std::pow(1.0 + mu_mar * dt_yr, n_steps);
}

double obsolescence_factor(int t, int t_tech, double dt_yr, double theta_obs) {
  const double x = (t - t_tech) * dt_yr / theta_obs;
  return std::exp(-x * x);
}

double revenue(int t, int t_tech, const MarketState& market, const ScenarioParams& p) {
  return p.r0 * p.dt_yr * market.phi_mar * obsolescence_factor(t, t_tech, p.dt_yr, p.theta_obs);
}

ReliabilityLaw::ReliabilityLaw(const ReliabilityParams& rel, int t_life_steps, double t_life_yr,
                               double t_ref_yr, double dt_yr)
    : t_life_(std::max(0, t_life_steps)), table_(static_cast<std::size_t>(t_life_) + 1) {
  for (int e = 0; e <= t_life_; ++e) {
    table_[static_cast<std::size_t>(e)] = evaluate(rel, e * dt_yr, t_life_yr, t_ref_yr);
  }
}

ReliabilityLaw::ReliabilityLaw(const ScenarioParams& p, double t_life_yr)
    : ReliabilityLaw(p.rel, life_steps(p, t_life_yr), t_life_yr, p.t_ref_yr, p.dt_yr) {}

double ReliabilityLaw::evaluate(const ReliabilityParams& rel, double elapsed_yr, double t_life_yr,
                                double t_ref_yr) {
  const double scaled = elapsed_yr * t_ref_yr / t_life_yr;
  const double infant = std::exp(-std::pow(scaled / rel.theta_rel_1, rel.beta_rel_1));
  const double wearout = std::exp(-std::pow(scaled / rel.theta_rel_2, rel.beta_rel_2));
  return rel.alpha_rel * infant + (1.0 - rel.alpha_rel) * wearout;
}

double reliability(int t, int t_launch, const ReliabilityLaw& law) { return law.at(t - t_launch); }

double in_orbit_failure_mass(int t, int t_launch, const ReliabilityLaw& law) {
  return law.failure_mass(t - t_launch);
}

double conditional_failure_prob(int t, int t_launch, const ReliabilityLaw& law) {
  return law.conditional(t - t_launch);
}

double half_normal_cdf(double margin, double sigma) {
  if (margin < 0.0) return 0.0;
  if (sigma <= 0.0) return 1.0;
  return std::erf(margin / (sigma * std::sqrt(2.0)));
}

double sample_injection_error(RngStream& rng, double sigma_oi) {
  return std::abs(sigma_oi * rng.normal());
}

}  // namespace oorarch
