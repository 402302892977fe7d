#include "oorarch/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace oorarch {

namespace {

constexpr double kJitterFloor = 1e-8;  // relative to signal variance
constexpr int kDim = 4;

// Optimization box in log space.
const Hyperparams kLower = {std::log(1e-2), std::log(1e-2), std::log(1e-2), std::log(1e-10)};
const Hyperparams kUpper = {std::log(1e3), std::log(1e3), std::log(1e3), std::log(1.0)};
// Region sampled by the quasi-random starts.
const Hyperparams kStartLower = {std::log(0.2), std::log(0.05), std::log(0.05), std::log(1e-6)};
const Hyperparams kStartUpper = {std::log(5.0), std::log(2.0), std::log(2.0), std::log(0.3)};

struct Problem {
  Eigen::MatrixX2d x;
  Eigen::VectorXd y;
  Eigen::Vector2d lo = Eigen::Vector2d::Zero();
  Eigen::Vector2d span = Eigen::Vector2d::Ones();
  double y_mean = 0.0;
  double y_scale = 1.0;
};

Problem make_problem(const TrainingSet& ts) {
  ts.validate();
  if (ts.size() < 2) throw std::invalid_argument("training set needs at least two points");
  const auto n = static_cast<Eigen::Index>(ts.size());
  Problem pr;
  Eigen::Vector2d hi;
  pr.lo << ts.inputs[0].t_life_yr, ts.inputs[0].m_p_des;
  hi = pr.lo;
  for (const auto& x : ts.inputs) {
    pr.lo = pr.lo.cwiseMin(Eigen::Vector2d(x.t_life_yr, x.m_p_des));
    hi = hi.cwiseMax(Eigen::Vector2d(x.t_life_yr, x.m_p_des));
  }
  pr.span = hi - pr.lo;
  for (int d = 0; d < 2; ++d)
    if (!(pr.span[d] > 0.0)) pr.span[d] = 1.0;
  pr.x.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = ts.inputs[static_cast<std::size_t>(i)];
    pr.x(i, 0) = (p.t_life_yr - pr.lo[0]) / pr.span[0];
    pr.x(i, 1) = (p.m_p_des - pr.lo[1]) / pr.span[1];
  }
  double mean = 0.0;
  for (double v : ts.targets) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : ts.targets) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  pr.y_mean = mean;
  pr.y_scale = sd > 0.0 ? sd : 1.0;
  pr.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    pr.y[i] = (ts.targets[static_cast<std::size_t>(i)] - mean) / pr.y_scale;
  return pr;
}

// Kernel value and the common factor g with dk/dlog(l_d) = g * q_d, where
// q_d = (delta_d / l_d)^2.
struct KernelTerms {
  double k;
  double g;
};

KernelTerms kernel_terms(Kernel kind, double s2, double r2) {
  switch (kind) {
    case Kernel::kSquaredExponential: {
      const double k = s2 * std::exp(-0.5 * r2);
      return {k, k};
    }
    case Kernel::kMatern32: {
      const double a = std::sqrt(3.0 * r2);
      const double e = std::exp(-a);
      return {s2 * (1.0 + a) * e, 3.0 * s2 * e};
    }
    case Kernel::kMatern52: {
      const double a = std::sqrt(5.0 * r2);
      const double e = std::exp(-a);
      return {s2 * (1.0 + a + a * a / 3.0) * e, (5.0 / 3.0) * s2 * (1.0 + a) * e};
    }
  }
  return {0.0, 0.0};
}

double noise_of(const Hyperparams& th) { return std::exp(th[3]) + kJitterFloor * std::exp(th[0]); }

// Returns -inf when the system is not positive definite.
double evaluate(const Problem& pr, Kernel kind, const Hyperparams& th, Hyperparams* grad) {
  const Eigen::Index n = pr.x.rows();
  const double s2 = std::exp(th[0]);
  const double il0 = std::exp(-2.0 * th[1]);
  const double il1 = std::exp(-2.0 * th[2]);
  const double noise = noise_of(th);

  Eigen::MatrixXd kf(n, n);
  Eigen::MatrixXd dl0, dl1;
  if (grad) {
    dl0.resize(n, n);
    dl1.resize(n, n);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double d0 = pr.x(i, 0) - pr.x(j, 0);
      const double d1 = pr.x(i, 1) - pr.x(j, 1);
      const double q0 = d0 * d0 * il0;
      const double q1 = d1 * d1 * il1;
      const KernelTerms t = kernel_terms(kind, s2, q0 + q1);
      kf(i, j) = kf(j, i) = t.k;
      if (grad) {
        dl0(i, j) = dl0(j, i) = t.g * q0;
        dl1(i, j) = dl1(j, i) = t.g * q1;
      }
    }
  }
  Eigen::MatrixXd k = kf;
  k.diagonal().array() += noise;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd alpha = llt.solve(pr.y);
  const auto& l = llt.matrixLLT();
  double log_det_half = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(l(i, i) > 0.0)) return -std::numeric_limits<double>::infinity();
    log_det_half += std::log(l(i, i));
  }
  const double lml = -0.5 * pr.y.dot(alpha) - log_det_half -
                     0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (grad) {
    Eigen::MatrixXd w = llt.solve(Eigen::MatrixXd::Identity(n, n));
    w = alpha * alpha.transpose() - w;
    // dK/dlog s^2 includes the jitter floor, which scales with s^2.
    const double jitter = kJitterFloor * s2;
    (*grad)[0] = 0.5 * ((w.cwiseProduct(kf)).sum() + jitter * w.trace());
    (*grad)[1] = 0.5 * (w.cwiseProduct(dl0)).sum();
    (*grad)[2] = 0.5 * (w.cwiseProduct(dl1)).sum();
    (*grad)[3] = 0.5 * std::exp(th[3]) * w.trace();
  }
  return lml;
}

double radical_inverse(unsigned i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

Hyperparams clamp_box(Hyperparams th) {
  for (int d = 0; d < kDim; ++d) th[d] = std::clamp(th[d], kLower[d], kUpper[d]);
  return th;
}

using Vec4 = Eigen::Matrix<double, 4, 1>;

Vec4 to_vec(const Hyperparams& a) { return Vec4(a[0], a[1], a[2], a[3]); }
Hyperparams to_arr(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

struct LocalResult {
  Hyperparams theta{};
  double lml = -std::numeric_limits<double>::infinity();
};

// Projected BFGS on f = -lml within the box.
LocalResult maximize_from(const Problem& pr, Kernel kind, Hyperparams start, int max_iter) {
  Hyperparams x = clamp_box(start);
  Hyperparams ga{};
  double lml = evaluate(pr, kind, x, &ga);
  if (!std::isfinite(lml)) return {};
  double f = -lml;
  Vec4 g = -to_vec(ga);
  Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
  int stalls = 0;

  auto free_direction = [&](Vec4 d) {
    for (int i = 0; i < kDim; ++i)
      if ((x[i] <= kLower[i] && d[i] < 0.0) || (x[i] >= kUpper[i] && d[i] > 0.0)) d[i] = 0.0;
    return d;
  };

  for (int it = 0; it < max_iter; ++it) {
    Vec4 pg;
    for (int i = 0; i < kDim; ++i)
      pg[i] = x[i] - std::clamp(x[i] - g[i], kLower[i], kUpper[i]);
    if (pg.lpNorm<Eigen::Infinity>() < 1e-7) break;

    Vec4 d = free_direction(-h * g);
    if (g.dot(d) >= 0.0) {
      h.setIdentity();
      d = free_direction(-g);
      if (g.dot(d) >= 0.0) break;
    }
    const double longest = d.lpNorm<Eigen::Infinity>();
    if (longest > 2.0) d *= 2.0 / longest;

    bool accepted = false;
    Hyperparams xn{};
    Hyperparams gn_arr{};
    double fn = 0.0;
    for (double step = 1.0; step > 1e-10; step *= 0.5) {
      xn = clamp_box(to_arr(to_vec(x) + step * d));
      const double l = evaluate(pr, kind, xn, nullptr);
      if (!std::isfinite(l)) continue;
      fn = -l;
      if (fn <= f + 1e-4 * g.dot(to_vec(xn) - to_vec(x))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    evaluate(pr, kind, xn, &gn_arr);

    const Vec4 s = to_vec(xn) - to_vec(x);
    const Vec4 gn = -to_vec(gn_arr);
    const Vec4 yv = gn - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix4d id = Eigen::Matrix4d::Identity();
      h = (id - rho * s * yv.transpose()) * h * (id - rho * yv * s.transpose()) +
          rho * s * s.transpose();
    }
    stalls = (std::abs(f - fn) < 1e-10 * (1.0 + std::abs(f))) ? stalls + 1 : 0;
    x = xn;
    f = fn;
    g = gn;
    if (stalls >= 3) break;
  }
  return {x, -f};
}

}  // namespace

const char* to_string(Kernel k) {
  switch (k) {
    case Kernel::kMatern32: return "matern32";
    case Kernel::kMatern52: return "matern52";
    case Kernel::kSquaredExponential: return "se";
  }
  return "?";
}

Kernel kernel_from_string(const std::string& s) {
  if (s == "matern32") return Kernel::kMatern32;
  if (s == "matern52") return Kernel::kMatern52;
  if (s == "se") return Kernel::kSquaredExponential;
  throw std::invalid_argument("unknown kernel '" + s + "'");
}

int roughness_rank(Kernel k) {
  switch (k) {
    case Kernel::kMatern32: return 0;
    case Kernel::kMatern52: return 1;
    case Kernel::kSquaredExponential: return 2;
  }
  return 3;
}

void TrainingSet::validate() const {
  if (inputs.size() != targets.size())
    throw std::invalid_argument("training set: inputs and targets differ in length");
  std::set<std::pair<double, double>> seen;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!std::isfinite(targets[i])) throw std::invalid_argument("training set: non-finite target");
    if (!seen.emplace(inputs[i].t_life_yr, inputs[i].m_p_des).second)
      throw std::invalid_argument("training set: duplicate input");
  }
}

double kernel_value(Kernel k, const Hyperparams& theta, const Eigen::Vector2d& a,
                    const Eigen::Vector2d& b) {
  // Same arithmetic as the likelihood so a rebuilt model reproduces it exactly.
  const double d0 = a[0] - b[0];
  const double d1 = a[1] - b[1];
  const double r2 = d0 * d0 * std::exp(-2.0 * theta[1]) + d1 * d1 * std::exp(-2.0 * theta[2]);
  return kernel_terms(k, std::exp(theta[0]), r2).k;
}

double SurrogateModel::signal_variance() const { return std::exp(theta_[0]); }
double SurrogateModel::length_scale(int d) const { return std::exp(theta_[1 + d]); }
double SurrogateModel::noise_variance() const { return noise_of(theta_); }

Eigen::Vector2d SurrogateModel::scale(const DesignPoint& x) const {
  return {(x.t_life_yr - x_lo_[0]) / x_span_[0], (x.m_p_des - x_lo_[1]) / x_span_[1]};
}

void SurrogateModel::factorize() {
  const Eigen::Index n = x_.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i)
      k(i, j) = k(j, i) = kernel_value(kernel_, theta_, x_.row(i).transpose(), x_.row(j).transpose());
  const double s2 = signal_variance();
  double extra = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd kn = k;
    kn.diagonal().array() += noise_variance() + extra;
    Eigen::LLT<Eigen::MatrixXd> llt(kn);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      alpha_ = llt.solve(y_);
      double log_det_half = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) log_det_half += std::log(chol_(i, i));
      lml_ = -0.5 * y_.dot(alpha_) - log_det_half -
             0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
      return;
    }
    extra = extra == 0.0 ? 1e-10 * s2 : extra * 10.0;
  }
  throw SurrogateError("kernel matrix is not positive definite after jitter escalation");
}

SurrogateModel SurrogateModel::from_hyperparams(const TrainingSet& ts, Kernel k,
                                                const Hyperparams& theta) {
  const Problem pr = make_problem(ts);
  SurrogateModel m;
  m.kernel_ = k;
  m.theta_ = theta;
  m.x_lo_ = pr.lo;
  m.x_span_ = pr.span;
  m.y_mean_ = pr.y_mean;
  m.y_scale_ = pr.y_scale;
  m.x_ = pr.x;
  m.y_ = pr.y;
  m.raw_inputs_ = ts.inputs;
  m.raw_targets_ = ts.targets;
  m.factorize();
  return m;
}

Prediction SurrogateModel::predict(const DesignPoint& x) const {
  if (!fitted()) throw SurrogateError("predict on an unfitted model");
  const Eigen::Vector2d z = scale(x);
  const Eigen::Index n = x_.rows();
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks[i] = kernel_value(kernel_, theta_, z, x_.row(i).transpose());
  const double mean = ks.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(ks);
  const double var = std::max(0.0, signal_variance() - v.squaredNorm());
  return {y_mean_ + y_scale_ * mean, y_scale_ * y_scale_ * var};
}

double SurrogateModel::predict_mean(const DesignPoint& x) const {
  if (!fitted()) throw SurrogateError("predict on an unfitted model");
  const Eigen::Vector2d z = scale(x);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x_.rows(); ++i)
    acc += kernel_value(kernel_, theta_, z, x_.row(i).transpose()) * alpha_[i];
  return y_mean_ + y_scale_ * acc;
}

double log_marginal_likelihood(const TrainingSet& ts, Kernel k, const Hyperparams& theta,
                               Hyperparams* grad) {
  const Problem pr = make_problem(ts);
  const double v = evaluate(pr, k, theta, grad);
  if (!std::isfinite(v)) throw SurrogateError("kernel matrix is not positive definite");
  return v;
}

SurrogateModel fit(const TrainingSet& ts, Kernel k, const FitOptions& opt) {
  const Problem pr = make_problem(ts);
  LocalResult best;
  static constexpr unsigned kBases[kDim] = {2, 3, 5, 7};
  for (int s = 0; s < std::max(1, opt.starts); ++s) {
    Hyperparams start{};
    for (int d = 0; d < kDim; ++d) {
      const double u = radical_inverse(static_cast<unsigned>(s + 1), kBases[d]);
      start[d] = kStartLower[d] + u * (kStartUpper[d] - kStartLower[d]);
    }
    const LocalResult r = maximize_from(pr, k, start, opt.max_iterations);
    if (r.lml > best.lml) best = r;
  }
  if (!std::isfinite(best.lml))
    throw SurrogateError("no hyperparameter start produced a positive-definite kernel matrix");
  return SurrogateModel::from_hyperparams(ts, k, best.theta);
}

double r_squared(const SurrogateModel& m, const TrainingSet& test) {
  if (test.size() == 0 || test.inputs.size() != test.targets.size())
    throw std::invalid_argument("r_squared: empty or malformed test set");
  double mean = 0.0;
  for (double v : test.targets) mean += v;
  mean /= static_cast<double>(test.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double e = test.targets[i] - m.predict_mean(test.inputs[i]);
    ss_res += e * e;
    ss_tot += (test.targets[i] - mean) * (test.targets[i] - mean);
  }
  if (!(ss_tot > 0.0)) throw std::invalid_argument("r_squared: test targets have zero variance");
  return 1.0 - ss_res / ss_tot;
}

std::size_t select_model(const std::vector<ScoredModel>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_model: no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto& b = candidates[best];
    if (c.r2 > b.r2 ||
        (c.r2 == b.r2 && roughness_rank(c.model.kernel()) < roughness_rank(b.model.kernel())))
      best = i;
  }
  return best;
}

SurrogateModel select_model(const std::vector<SurrogateModel>& candidates, const TrainingSet& test) {
  if (candidates.size() == 1) return candidates.front();
  std::vector<ScoredModel> scored;
  scored.reserve(candidates.size());
  for (const auto& c : candidates) scored.push_back({c, r_squared(c, test)});
  return scored[select_model(scored)].model;
}

void save_model(const SurrogateModel& m, const std::filesystem::path& path, const Provenance* prov) {
  if (!m.fitted()) throw SurrogateError("save of an unfitted model");
  nlohmann::json j;
  j["format"] = "oorarch-gp";
  j["version"] = 1;
  if (prov) {
    j["scenario_hash"] = prov->scenario_hash;
    j["seed"] = prov->seed;
    j["tool_version"] = prov->tool_version;
  }
  j["kernel"] = to_string(m.kernel_);
  j["theta"] = m.theta_;
  nlohmann::json xs = nlohmann::json::array();
  for (const auto& x : m.raw_inputs_) xs.push_back({x.t_life_yr, x.m_p_des});
  j["inputs"] = std::move(xs);
  j["targets"] = m.raw_targets_;
  j["log_marginal_likelihood"] = m.lml_;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(1) << '\n';
}

SurrogateModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw SurrogateError("model file " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "oorarch-gp" || j.value("version", 0) != 1)
    throw SurrogateError("model file " + path.string() + ": unsupported format or version");
  TrainingSet ts;
  for (const auto& x : j.at("inputs")) ts.add({x.at(0).get<double>(), x.at(1).get<double>()}, 0.0);
  ts.targets = j.at("targets").get<std::vector<double>>();
  return SurrogateModel::from_hyperparams(ts, kernel_from_string(j.at("kernel").get<std::string>()),
                                          j.at("theta").get<Hyperparams>());
}

}  // namespace oorarch
