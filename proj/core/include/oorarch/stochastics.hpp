#pragma once

// Random processes and probability laws of the lifecycle model: market
// factor, technology obsolescence, the two-component Weibull reliability
// law with its discrete failure probabilities, and injection-error sampling.

#include <cstdint>
#include <random>
#include <vector>

#include "oorarch/scenario.hpp"

namespace oorarch {

/// Reproducible random stream. (master_seed, experiment, replicate) fully
/// determines the sequence; distinct triples give unrelated streams.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t experiment_index,
            std::uint64_t replicate_index);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t experiment_index() const { return experiment_; }
  std::uint64_t replicate_index() const { return replicate_; }

 private:
  std::uint64_t seed_, experiment_, replicate_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

struct MarketState {
  double phi_mar = 1.0;
  int step = 0;
};

/// One market update driven by a given standard-normal draw. The result is
/// floored at zero so revenue never turns negative.
MarketState market_advance(MarketState s, double eps, double dt_yr, double mu_mar, double sigma_mar,
                           MarketModel model = MarketModel::kAdditive);

MarketState market_step(MarketState s, double dt_yr, double mu_mar, double sigma_mar, RngStream& rng,
                        MarketModel model = MarketModel::kAdditive);

/// E[phi(t + n) / phi(t)] under the chosen update rule (ignoring the floor):
/// 1 + mu n dT for the additive rule, (1 + mu dT)^n for the multiplicative one.
double expected_market_factor(int n_steps, double dt_yr, double mu_mar,
                              MarketModel model = MarketModel::kAdditive);

/// exp(-(((t - t_tech) dT) / theta_obs)^2).
double obsolescence_factor(int t, int t_tech, double dt_yr, double theta_obs);

/// Revenue booked at step t for operation over (t-1, t].
double revenue(int t, int t_tech, const MarketState& market, const ScenarioParams& p);

/// Two-component Weibull reliability for one satellite design, tabulated by
/// elapsed steps since the start of operation. Time is stretched by
/// T_life / T_ref and the law is truncated to zero past the design life.
class ReliabilityLaw {
 public:
  ReliabilityLaw(const ReliabilityParams& rel, int t_life_steps, double t_life_yr, double t_ref_yr,
                 double dt_yr);
  ReliabilityLaw(const ScenarioParams& p, double t_life_yr);

  int t_life_steps() const { return t_life_; }

  /// Rel at `elapsed` steps after launch; 1 for elapsed <= 0.
  double at(int elapsed) const {
    if (elapsed <= 0) return 1.0;
    if (elapsed > t_life_) return 0.0;
    return table_[static_cast<std::size_t>(elapsed)];
  }
  /// Probability that the failure falls in (elapsed-1, elapsed]; elapsed >= 1.
  double failure_mass(int elapsed) const { return at(elapsed - 1) - at(elapsed); }
  /// Failure probability in (elapsed-1, elapsed] given survival to elapsed-1.
  /// Resolves 0/0 past the truncation to 1.
  double conditional(int elapsed) const {
    const double prev = at(elapsed - 1);
    if (prev <= 0.0) return 1.0;
    return failure_mass(elapsed) / prev;
  }

  /// Untabulated evaluation at a continuous elapsed time in years.
  static double evaluate(const ReliabilityParams& rel, double elapsed_yr, double t_life_yr,
                         double t_ref_yr);

 private:
  int t_life_;
  std::vector<double> table_;
};

double reliability(int t, int t_launch, const ReliabilityLaw& law);
double in_orbit_failure_mass(int t, int t_launch, const ReliabilityLaw& law);
double conditional_failure_prob(int t, int t_launch, const ReliabilityLaw& law);

/// P[|N(0, sigma^2)| <= margin]; a degenerate sigma = 0 gives a step at 0.
double half_normal_cdf(double margin, double sigma);

/// |N(0, sigma_oi^2)|, drawn once per launch.
double sample_injection_error(RngStream& rng, double sigma_oi);

}  // namespace oorarch
