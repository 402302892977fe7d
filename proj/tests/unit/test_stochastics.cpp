#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "oorarch/stochastics.hpp"

using namespace oorarch;
using doctest::Approx;

TEST_SUITE("stochastics") {
  TEST_CASE("market without drift or volatility stays at one") {
    RngStream rng(1, 0, 0);
    MarketState s;
    for (int i = 0; i < 100; ++i) s = market_step(s, 1.0 / 52.0, 0.0, 0.0, rng);
    CHECK(s.phi_mar == 1.0);
    CHECK(s.step == 100);
  }

  TEST_CASE("52 deterministic weekly increments of 3% drift reach 1.03") {
    RngStream rng(1, 0, 0);
    MarketState s;
    for (int i = 0; i < 52; ++i) s = market_step(s, 1.0 / 52.0, 0.03, 0.0, rng);
    CHECK(s.phi_mar == Approx(1.03).epsilon(1e-12));
  }

  TEST_CASE("the market update is the printed additive rule with a zero floor") {
    const MarketState s{1.2, 7};
    const double eps = -0.37, dt = 1.0 / 52.0;
    CHECK(market_advance(s, eps, dt, 0.03, 0.1).phi_mar ==
          Approx(1.2 + 0.03 * dt + 0.1 * eps * std::sqrt(dt)).epsilon(1e-15));
    CHECK(market_advance(s, eps, dt, 0.03, 0.1, MarketModel::kMultiplicative).phi_mar ==
          Approx(1.2 * (1.0 + 0.03 * dt + 0.1 * eps * std::sqrt(dt))).epsilon(1e-15));
    CHECK(market_advance({0.01, 0}, -10.0, dt, 0.0, 1.0).phi_mar == 0.0);
  }

  TEST_CASE("sample mean of the market factor matches its drift") {
    const int streams = 100000, steps = 52;
    const double dt = 1.0 / 52.0, mu = 0.03, sigma = 0.1;
    double sum = 0.0, sum_sq = 0.0;
    for (int j = 0; j < streams; ++j) {
      RngStream rng(11, 0, static_cast<std::uint64_t>(j));
      MarketState s;
      for (int i = 0; i < steps; ++i) s = market_step(s, dt, mu, sigma, rng);
      sum += s.phi_mar;
      sum_sq += s.phi_mar * s.phi_mar;
    }
    const double mean = sum / streams;
    const double se = std::sqrt((sum_sq / streams - mean * mean) / streams);
    CHECK(std::abs(mean - expected_market_factor(steps, dt, mu)) < 3.0 * se);
    CHECK(expected_market_factor(steps, dt, mu) == Approx(1.0 + mu * steps * dt));
  }

  TEST_CASE("obsolescence factor") {
    CHECK(obsolescence_factor(10, 10, 1.0 / 52.0, 20.0) == 1.0);
    CHECK(obsolescence_factor(52 * 20, 0, 1.0 / 52.0, 20.0) == Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(obsolescence_factor(520, 0, 1.0 / 52.0, 20.0) == Approx(std::exp(-0.25)).epsilon(1e-12));
  }

  TEST_CASE("revenue") {
    ScenarioParams p = oracle::chemical();
    CHECK(revenue(5, 5, {1.0, 5}, p) == Approx(70.0 / 52.0).epsilon(1e-14));
    CHECK(revenue(5, 0, {0.0, 5}, p) == 0.0);
    p.theta_obs = 1.0 / 52.0 / std::sqrt(std::log(2.0));
    CHECK(revenue(1, 0, {1.1, 1}, p) == Approx(70.0 * 1.1 * 0.5 / 52.0).epsilon(1e-12));
  }

  TEST_CASE("reliability boundaries and the pinned mid-life value") {
    const ScenarioParams p = oracle::chemical();
    const ReliabilityLaw law(p, 15.0);
    CHECK(law.t_life_steps() == 780);
    CHECK(reliability(100, 100, law) == 1.0);
    CHECK(reliability(100 + 781, 100, law) == 0.0);
    CHECK(law.at(5 * 52) == Approx(0.9806984006400654859).epsilon(1e-13));
  }

  TEST_CASE("reliability is non-increasing and zero past the design life") {
    const ScenarioParams p = oracle::chemical();
    for (double life : {5.0, 8.0, 15.0}) {
      const ReliabilityLaw law(p, life);
      for (int e = 1; e <= law.t_life_steps() + 5; ++e) CHECK(law.at(e) <= law.at(e - 1));
      CHECK(law.at(law.t_life_steps() + 1) == 0.0);
    }
  }

  TEST_CASE("doubling the design life halves the effective age") {
    const ScenarioParams p = oracle::chemical();
    for (double y : {0.5, 2.0, 4.0, 7.0}) {
      CHECK(ReliabilityLaw::evaluate(p.rel, 2.0 * y, 2.0 * p.t_ref_yr, p.t_ref_yr) ==
            Approx(ReliabilityLaw::evaluate(p.rel, y, p.t_ref_yr, p.t_ref_yr)).epsilon(1e-14));
    }
  }

  TEST_CASE("failure masses sum to one and conditionals lie in [0, 1]") {
    const ScenarioParams p = oracle::chemical();
    for (double life : {5.0, 10.0, 15.0}) {
      const ReliabilityLaw law(p, life);
      double total = 0.0;
      for (int t = 1; t <= law.t_life_steps() + 3; ++t) {
        const double m = in_orbit_failure_mass(t + 3, 3, law);
        CHECK(m >= 0.0);
        total += m;
        const double c = conditional_failure_prob(t + 3, 3, law);
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
      }
      CHECK(total == Approx(1.0).epsilon(1e-12));
      CHECK(law.conditional(law.t_life_steps() + 1) == 1.0);
      CHECK(law.conditional(law.t_life_steps() + 2) == 1.0);
    }
  }

  TEST_CASE("injection error") {
    RngStream zero(3, 0, 0);
    CHECK(sample_injection_error(zero, 0.0) == 0.0);

    const int n = 1000000;
    const double sigma = 25.0;
    RngStream rng(5, 0, 0);
    double sum = 0.0, sum_sq = 0.0;
    int within = 0, negative = 0;
    for (int i = 0; i < n; ++i) {
      const double e = sample_injection_error(rng, sigma);
      negative += e < 0.0;
      sum += e;
      sum_sq += e * e;
      within += e <= 25.0;
    }
    CHECK(negative == 0);
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    CHECK(std::abs(mean - 19.947114020071634) < 3.0 * se);
    const double frac = static_cast<double>(within) / n;
    const double p = 0.6826894921370859;
    CHECK(std::abs(frac - p) < 3.0 * std::sqrt(p * (1.0 - p) / n));
  }

  TEST_CASE("half-normal distribution function") {
    CHECK(half_normal_cdf(-1.0, 25.0) == 0.0);
    CHECK(half_normal_cdf(0.0, 25.0) == 0.0);
    CHECK(half_normal_cdf(25.0, 25.0) == Approx(0.6826894921370859).epsilon(1e-14));
    CHECK(half_normal_cdf(0.0, 0.0) == 1.0);
  }

  TEST_CASE("streams are reproducible and distinct") {
    auto draw = [](std::uint64_t s, std::uint64_t i, std::uint64_t j) {
      RngStream r(s, i, j);
      std::vector<double> v;
      for (int k = 0; k < 8; ++k) v.push_back(r.normal());
      return v;
    };
    CHECK(draw(1, 2, 3) == draw(1, 2, 3));
    CHECK(draw(1, 2, 3) != draw(1, 2, 4));
    CHECK(draw(1, 2, 3) != draw(1, 3, 3));
    CHECK(draw(1, 2, 3) != draw(2, 2, 3));
    CHECK(draw(1, 2, 3) != draw(1, 3, 2));
  }
}
