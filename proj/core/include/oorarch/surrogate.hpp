#pragma once

// Gaussian-process regression surrogates over the two design variables.
//
// Inputs are min-max scaled to [0,1]^2 using the training-input bounds and
// targets are standardized, so hyperparameters live on a fixed scale:
//   theta = [log s^2, log l_1, log l_2, log sn^2]
// with noise variance sn^2 + 1e-8 s^2 (the jitter floor).

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oorarch/csv.hpp"
#include "oorarch/scenario.hpp"

namespace oorarch {

enum class Kernel { kMatern32, kMatern52, kSquaredExponential };

const char* to_string(Kernel k);
/// Accepts "matern32", "matern52", "se".
Kernel kernel_from_string(const std::string& s);
/// 0 for the roughest kernel; used to break R^2 ties.
int roughness_rank(Kernel k);

class SurrogateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainingSet {
  std::vector<DesignPoint> inputs;
  std::vector<double> targets;

  void add(const DesignPoint& x, double y) {
    inputs.push_back(x);
    targets.push_back(y);
  }
  std::size_t size() const { return inputs.size(); }
  /// Throws std::invalid_argument on size mismatch, duplicate inputs or
  /// non-finite targets.
  void validate() const;
};

using Hyperparams = std::array<double, 4>;

/// Kernel value between scaled inputs, without the noise term.
double kernel_value(Kernel k, const Hyperparams& theta, const Eigen::Vector2d& a,
                    const Eigen::Vector2d& b);

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;  // latent function variance, target units squared
};

struct FitOptions {
  int starts = 8;
  int max_iterations = 200;
};

class SurrogateModel {
 public:
  SurrogateModel() = default;

  Kernel kernel() const { return kernel_; }
  const Hyperparams& theta() const { return theta_; }
  double signal_variance() const;  // standardized units
  double length_scale(int d) const;  // scaled-input units
  double noise_variance() const;  // standardized units, including the jitter floor
  double log_marginal_likelihood() const { return lml_; }
  bool fitted() const { return alpha_.size() > 0; }
  std::size_t training_size() const { return static_cast<std::size_t>(x_.rows()); }

  Prediction predict(const DesignPoint& x) const;
  double predict_mean(const DesignPoint& x) const;

  /// Rebuilds a model from stored data and hyperparameters; no optimization.
  static SurrogateModel from_hyperparams(const TrainingSet& ts, Kernel k, const Hyperparams& theta);

 private:
  friend SurrogateModel fit(const TrainingSet&, Kernel, const FitOptions&);
  friend void save_model(const SurrogateModel&, const std::filesystem::path&, const Provenance*);

  Eigen::Vector2d scale(const DesignPoint& x) const;
  void factorize();

  Kernel kernel_ = Kernel::kMatern32;
  Hyperparams theta_{};
  Eigen::Vector2d x_lo_ = Eigen::Vector2d::Zero();
  Eigen::Vector2d x_span_ = Eigen::Vector2d::Ones();
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Eigen::MatrixX2d x_;       // scaled inputs
  Eigen::VectorXd y_;        // standardized targets
  Eigen::MatrixXd chol_;     // lower Cholesky factor of K + noise I
  Eigen::VectorXd alpha_;    // (K + noise I)^{-1} y
  double lml_ = 0.0;
  std::vector<double> raw_targets_;
  std::vector<DesignPoint> raw_inputs_;
};

/// Log marginal likelihood of the standardized targets at theta, with the
/// same input scaling fit() uses. Fills grad (d/dtheta) when non-null.
double log_marginal_likelihood(const TrainingSet& ts, Kernel k, const Hyperparams& theta,
                               Hyperparams* grad = nullptr);

/// Multi-start quasi-Newton maximization of the marginal likelihood.
/// Throws SurrogateError if no start yields a positive-definite system.
SurrogateModel fit(const TrainingSet& ts, Kernel k, const FitOptions& opt = {});

/// 1 - SS_res / SS_tot. Throws std::invalid_argument for zero-variance targets.
double r_squared(const SurrogateModel& m, const TrainingSet& test);

struct ScoredModel {
  SurrogateModel model;
  double r2 = 0.0;
};

/// Highest R^2 wins; exact ties go to the rougher kernel.
std::size_t select_model(const std::vector<ScoredModel>& candidates);
SurrogateModel select_model(const std::vector<SurrogateModel>& candidates, const TrainingSet& test);

/// JSON text layout, tagged "oorarch-gp" version 1. The training data is
/// stored alongside the hyperparameters so a loaded model predicts exactly
/// as the saved one did.
void save_model(const SurrogateModel& m, const std::filesystem::path& path,
                const Provenance* prov = nullptr);
SurrogateModel load_model(const std::filesystem::path& path);

}  // namespace oorarch
