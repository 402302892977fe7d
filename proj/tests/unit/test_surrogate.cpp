#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oorarch/surrogate.hpp"

using namespace oorarch;
using doctest::Approx;

namespace {

constexpr Kernel kAll[] = {Kernel::kMatern32, Kernel::kMatern52, Kernel::kSquaredExponential};

double radical_inverse(unsigned i, unsigned base) {
  double f = 1.0, r = 0.0;
  for (; i > 0; i /= base) {
    f /= base;
    r += f * static_cast<double>(i % base);
  }
  return r;
}

double wave(const DesignPoint& x) { return std::sin(x.t_life_yr) + x.m_p_des * x.m_p_des; }

// Halton points on [0, 3]^2.
TrainingSet wave_set(int n, unsigned offset = 1) {
  TrainingSet ts;
  for (int i = 0; i < n; ++i) {
    const unsigned k = static_cast<unsigned>(i) + offset;
    const DesignPoint x{3.0 * radical_inverse(k, 2), 3.0 * radical_inverse(k, 3)};
    ts.add(x, wave(x));
  }
  return ts;
}

TrainingSet random_set(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  TrainingSet ts;
  for (int i = 0; i < n; ++i) {
    const DesignPoint x{u(rng), u(rng)};
    ts.add(x, wave(x));
  }
  return ts;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "oorarch_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("surrogate") {
  TEST_CASE("kernel names round-trip and roughness order") {
    for (Kernel k : kAll) CHECK(kernel_from_string(to_string(k)) == k);
    CHECK_THROWS(kernel_from_string("rbf"));
    CHECK(roughness_rank(Kernel::kMatern32) < roughness_rank(Kernel::kMatern52));
    CHECK(roughness_rank(Kernel::kMatern52) < roughness_rank(Kernel::kSquaredExponential));
  }

  TEST_CASE("kernel at zero distance equals the signal variance") {
    const Hyperparams th{std::log(2.5), std::log(0.3), std::log(0.7), std::log(1e-4)};
    const Eigen::Vector2d a(0.2, 0.9);
    for (Kernel k : kAll) {
      CHECK(kernel_value(k, th, a, a) == Approx(2.5).epsilon(1e-14));
      const Eigen::Vector2d b(0.5, 0.1);
      CHECK(kernel_value(k, th, a, b) == Approx(kernel_value(k, th, b, a)).epsilon(1e-15));
      CHECK(kernel_value(k, th, a, b) < 2.5);
      CHECK(kernel_value(k, th, a, b) > 0.0);
    }
  }

  TEST_CASE("kernel matrices are positive semi-definite") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Eigen::Vector2d> pts(25);
    for (auto& p : pts) p = {u(rng), u(rng)};
    for (Kernel k : kAll) {
      for (double ell : {0.05, 0.4, 3.0}) {
        const Hyperparams th{0.0, std::log(ell), std::log(ell * 1.7), -10.0};
        Eigen::MatrixXd K(25, 25);
        for (int i = 0; i < 25; ++i)
          for (int j = 0; j < 25; ++j) K(i, j) = kernel_value(k, th, pts[i], pts[j]);
        const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues();
        CHECK(ev.minCoeff() > -1e-10);
      }
    }
  }

  TEST_CASE("training set validation") {
    TrainingSet ts;
    ts.add({1.0, 2.0}, 3.0);
    ts.add({1.0, 2.0}, 4.0);
    CHECK_THROWS_AS(ts.validate(), std::invalid_argument);
    TrainingSet nan;
    nan.add({1.0, 2.0}, std::nan(""));
    CHECK_THROWS_AS(nan.validate(), std::invalid_argument);
    TrainingSet mismatch;
    mismatch.inputs.push_back({1.0, 1.0});
    CHECK_THROWS_AS(mismatch.validate(), std::invalid_argument);
    TrainingSet one;
    one.add({1.0, 2.0}, 3.0);
    CHECK_THROWS_AS(fit(one, Kernel::kMatern52), std::invalid_argument);
  }

  TEST_CASE("unfitted model refuses to predict or save") {
    SurrogateModel m;
    CHECK_FALSE(m.fitted());
    CHECK_THROWS_AS(m.predict({1.0, 1.0}), SurrogateError);
    CHECK_THROWS_AS(m.predict_mean({1.0, 1.0}), SurrogateError);
    CHECK_THROWS_AS(save_model(m, scratch("unfitted.json")), SurrogateError);
  }

  TEST_CASE("likelihood gradient matches central differences") {
    const TrainingSet ts = random_set(15, 3);
    const Hyperparams th{std::log(1.3), std::log(0.35), std::log(0.6), std::log(1e-3)};
    for (Kernel k : kAll) {
      Hyperparams g{};
      const double f0 = log_marginal_likelihood(ts, k, th, &g);
      CHECK(f0 == Approx(log_marginal_likelihood(ts, k, th)).epsilon(1e-14));
      for (int d = 0; d < 4; ++d) {
        const double h = 1e-5;
        Hyperparams lo = th, hi = th;
        lo[d] -= h;
        hi[d] += h;
        const double fd = (log_marginal_likelihood(ts, k, hi) - log_marginal_likelihood(ts, k, lo)) / (2 * h);
        INFO("kernel " << to_string(k) << " dim " << d);
        CHECK(std::abs(g[d] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
      }
    }
  }

  TEST_CASE("constant target") {
    TrainingSet ts;
    for (int i = 0; i < 10; ++i) ts.add({1.0 + i, 100.0 * (i % 3) + 7.0 * i}, 42.0);
    for (Kernel k : kAll) {
      const SurrogateModel m = fit(ts, k);
      CHECK(m.predict_mean({3.3, 120.0}) == Approx(42.0).epsilon(1e-9));
      CHECK(m.predict({3.3, 120.0}).variance >= 0.0);
    }
  }

  TEST_CASE("smooth function is recovered from fifty points") {
    const TrainingSet train = wave_set(50);
    const TrainingSet test = random_set(200, 11);
    const SurrogateModel m = fit(train, Kernel::kSquaredExponential);
    double ss = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const double e = m.predict_mean(test.inputs[i]) - test.targets[i];
      ss += e * e;
    }
    CHECK(std::sqrt(ss / static_cast<double>(test.size())) < 1e-2);
    CHECK(r_squared(m, test) > 0.999);
    for (Kernel k : {Kernel::kMatern32, Kernel::kMatern52}) CHECK(r_squared(fit(train, k), test) > 0.99);
  }

  TEST_CASE("near-noiseless model interpolates its training data") {
    const TrainingSet ts = random_set(20, 5);
    const Hyperparams th{0.0, std::log(0.3), std::log(0.3), std::log(1e-10)};
    for (Kernel k : kAll) {
      const auto m = SurrogateModel::from_hyperparams(ts, k, th);
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const Prediction pr = m.predict(ts.inputs[i]);
        CHECK(pr.mean == Approx(ts.targets[i]).epsilon(1e-6).scale(1.0));
        CHECK(pr.variance < 1e-6);
        CHECK(m.predict_mean(ts.inputs[i]) == Approx(pr.mean).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("far from the data the prediction reverts to the prior") {
    const TrainingSet ts = random_set(20, 9);
    double mean = 0.0, ss = 0.0;
    for (double v : ts.targets) mean += v;
    mean /= 20.0;
    for (double v : ts.targets) ss += (v - mean) * (v - mean);
    const double scale2 = ss / 20.0;
    const Hyperparams th{std::log(1.7), std::log(0.2), std::log(0.2), std::log(1e-4)};
    for (Kernel k : kAll) {
      const auto m = SurrogateModel::from_hyperparams(ts, k, th);
      const Prediction pr = m.predict({1e4, -1e4});
      CHECK(pr.mean == Approx(mean).epsilon(1e-9));
      CHECK(pr.variance == Approx(1.7 * scale2).epsilon(1e-9));
      CHECK(m.signal_variance() == Approx(1.7).epsilon(1e-14));
      CHECK(m.length_scale(1) == Approx(0.2).epsilon(1e-14));
      CHECK(m.noise_variance() == Approx(1e-4 + 1e-8 * 1.7).epsilon(1e-12));
    }
  }

  TEST_CASE("predictive variance is never negative") {
    const TrainingSet ts = wave_set(30);
    for (Kernel k : kAll) {
      const SurrogateModel m = fit(ts, k);
      int negative = 0;
      for (int i = 0; i <= 40; ++i)
        for (int j = 0; j <= 40; ++j)
          if (m.predict({-0.5 + 0.1 * i, -0.5 + 0.1 * j}).variance < 0.0) ++negative;
      CHECK(negative == 0);
    }
  }

  TEST_CASE("affine target transform carries through the predictions") {
    const TrainingSet ts = random_set(18, 21);
    TrainingSet tt = ts;
    const double a = -3.5, b = 1234.0;
    for (double& v : tt.targets) v = a * v + b;
    const Hyperparams th{std::log(0.8), std::log(0.4), std::log(0.5), std::log(1e-3)};
    for (Kernel k : kAll) {
      const auto m = SurrogateModel::from_hyperparams(ts, k, th);
      const auto n = SurrogateModel::from_hyperparams(tt, k, th);
      for (const DesignPoint x : {DesignPoint{0.3, 2.2}, DesignPoint{2.9, 0.1}, DesignPoint{4.0, 4.0}}) {
        CHECK(n.predict(x).mean == Approx(a * m.predict(x).mean + b).epsilon(1e-10));
        CHECK(n.predict(x).variance == Approx(a * a * m.predict(x).variance).epsilon(1e-9).scale(1e-12));
      }
    }
    const SurrogateModel f = fit(ts, Kernel::kMatern52), g = fit(tt, Kernel::kMatern52);
    CHECK(g.predict_mean({1.5, 1.5}) == Approx(a * f.predict_mean({1.5, 1.5}) + b).epsilon(1e-6));
  }

  TEST_CASE("affine input transform leaves predictions unchanged") {
    const TrainingSet ts = random_set(18, 23);
    TrainingSet tt = ts;
    for (auto& x : tt.inputs) x = {10.0 + 4.0 * x.t_life_yr, 2000.0 + 300.0 * x.m_p_des};
    const Hyperparams th{std::log(0.8), std::log(0.4), std::log(0.5), std::log(1e-3)};
    const auto m = SurrogateModel::from_hyperparams(ts, Kernel::kMatern32, th);
    const auto n = SurrogateModel::from_hyperparams(tt, Kernel::kMatern32, th);
    CHECK(n.predict({10.0 + 4.0 * 1.1, 2000.0 + 300.0 * 0.7}).mean ==
          Approx(m.predict({1.1, 0.7}).mean).epsilon(1e-10));
  }

  TEST_CASE("coefficient of determination") {
    const TrainingSet ts = wave_set(40);
    const SurrogateModel m = fit(ts, Kernel::kSquaredExponential);
    TrainingSet exact;
    for (std::size_t i = 0; i < 5; ++i) exact.add(ts.inputs[i], m.predict_mean(ts.inputs[i]));
    CHECK(r_squared(m, exact) == Approx(1.0).epsilon(1e-15));

    // Targets arranged so the model's predictions equal their mean.
    TrainingSet flat_pred;
    const DesignPoint x{1.0, 1.0};
    const double yhat = m.predict_mean(x);
    flat_pred.add(x, yhat + 1.0);
    flat_pred.add({1.0 + 1e-13, 1.0}, yhat - 1.0);
    CHECK(r_squared(m, flat_pred) == Approx(0.0).epsilon(1e-9).scale(1.0));

    TrainingSet constant;
    constant.add({1.0, 1.0}, 5.0);
    constant.add({2.0, 1.0}, 5.0);
    CHECK_THROWS_AS(r_squared(m, constant), std::invalid_argument);
    CHECK_THROWS_AS(r_squared(m, TrainingSet{}), std::invalid_argument);
  }

  TEST_CASE("model selection by held-out score") {
    const TrainingSet ts = random_set(10, 31);
    const Hyperparams th{0.0, std::log(0.4), std::log(0.4), std::log(1e-3)};
    auto mk = [&](Kernel k, double r2) { return ScoredModel{SurrogateModel::from_hyperparams(ts, k, th), r2}; };
    CHECK(select_model({mk(Kernel::kMatern32, 0.94), mk(Kernel::kMatern52, 0.961),
                        mk(Kernel::kSquaredExponential, 0.963)}) == 2);
    CHECK(select_model({mk(Kernel::kMatern52, 0.5)}) == 0);
    CHECK(select_model({mk(Kernel::kSquaredExponential, 0.9), mk(Kernel::kMatern52, 0.9),
                        mk(Kernel::kMatern32, 0.9)}) == 2);
    CHECK(select_model({mk(Kernel::kSquaredExponential, 0.9), mk(Kernel::kMatern52, 0.9)}) == 1);
    CHECK_THROWS_AS(select_model(std::vector<ScoredModel>{}), std::invalid_argument);

    const TrainingSet test = random_set(30, 32);
    std::vector<SurrogateModel> models;
    for (Kernel k : kAll) models.push_back(fit(wave_set(40), k));
    const SurrogateModel best = select_model(models, test);
    for (const auto& m : models) CHECK(r_squared(best, test) >= r_squared(m, test));
  }

  TEST_CASE("refitting is deterministic") {
    const TrainingSet ts = wave_set(25);
    for (Kernel k : kAll) {
      const SurrogateModel a = fit(ts, k), b = fit(ts, k);
      CHECK(a.theta() == b.theta());
      CHECK(a.log_marginal_likelihood() == b.log_marginal_likelihood());
      CHECK(a.predict_mean({1.234, 2.345}) == b.predict_mean({1.234, 2.345}));
      CHECK(a.log_marginal_likelihood() == log_marginal_likelihood(ts, k, a.theta()));
    }
  }

  TEST_CASE("save and load reproduce predictions bit for bit") {
    const TrainingSet ts = wave_set(25);
    const Provenance prov{"abc123", 99, "test"};
    for (Kernel k : kAll) {
      const SurrogateModel m = fit(ts, k);
      const auto path = scratch(std::string("model_") + to_string(k) + ".json");
      save_model(m, path, &prov);
      const SurrogateModel n = load_model(path);
      CHECK(n.kernel() == k);
      CHECK(n.theta() == m.theta());
      CHECK(n.training_size() == m.training_size());
      for (int i = 0; i < 10; ++i) {
        const DesignPoint x{0.31 * i, 3.0 - 0.27 * i};
        CHECK(n.predict(x).mean == m.predict(x).mean);
        CHECK(n.predict(x).variance == m.predict(x).variance);
      }
    }
    const auto bad = scratch("bad.json");
    std::ofstream(bad) << R"({"format":"something-else","version":1})";
    CHECK_THROWS_AS(load_model(bad), SurrogateError);
    const auto future = scratch("future.json");
    std::ofstream(future) << R"({"format":"oorarch-gp","version":2})";
    CHECK_THROWS_AS(load_model(future), SurrogateError);
  }
}
