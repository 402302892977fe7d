#include "oorarch/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "oorarch/parallel.hpp"
#include "oorarch/vehicle.hpp"

namespace oorarch {

void MooConfig::validate() const {
  if (population < 4 || population % 2 != 0)
    throw std::invalid_argument("population must be even and >= 4");
  if (generations < 0) throw std::invalid_argument("generations must be >= 0");
  if (crossover_prob < 0.0 || crossover_prob > 1.0)
    throw std::invalid_argument("crossover_prob must lie in [0, 1]");
  if (mutation_rate < 0.0 || mutation_rate > 1.0)
    throw std::invalid_argument("mutation_rate must lie in [0, 1]");
  if (!(eta_crossover >= 0.0) || !(eta_mutation >= 0.0))
    throw std::invalid_argument("distribution indices must be >= 0");
}

namespace {

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return false;
    if (a[i] > b[i]) strict = true;
  }
  return strict;
}

class Variation {
 public:
  Variation(const std::vector<double>& lo, const std::vector<double>& hi, const MooConfig& cfg)
      : lo_(lo), hi_(hi), cfg_(cfg), engine_(cfg.seed) {
    rate_ = cfg.mutation_rate > 0.0 ? cfg.mutation_rate : 1.0 / static_cast<double>(lo.size());
  }

  double uniform() { return unit_(engine_); }
  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

  std::vector<double> random_point() {
    std::vector<double> x(lo_.size());
    for (std::size_t d = 0; d < x.size(); ++d) x[d] = lo_[d] + uniform() * (hi_[d] - lo_[d]);
    return x;
  }

  // Simulated binary crossover with bounds.
  void crossover(std::vector<double>& a, std::vector<double>& b) {
    if (uniform() > cfg_.crossover_prob) return;
    const double eta = cfg_.eta_crossover;
    for (std::size_t d = 0; d < a.size(); ++d) {
      if (uniform() > 0.5) continue;
      if (std::abs(a[d] - b[d]) <= 1e-14) continue;
      const double lb = lo_[d], ub = hi_[d];
      const double y1 = std::min(a[d], b[d]);
      const double y2 = std::max(a[d], b[d]);
      const double r = uniform();
      auto spread = [&](double beta) {
        const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
        return r <= 1.0 / alpha ? std::pow(r * alpha, 1.0 / (eta + 1.0))
                                : std::pow(1.0 / (2.0 - r * alpha), 1.0 / (eta + 1.0));
      };
      const double bq1 = spread(1.0 + 2.0 * (y1 - lb) / (y2 - y1));
      const double bq2 = spread(1.0 + 2.0 * (ub - y2) / (y2 - y1));
      double c1 = std::clamp(0.5 * ((y1 + y2) - bq1 * (y2 - y1)), lb, ub);
      double c2 = std::clamp(0.5 * ((y1 + y2) + bq2 * (y2 - y1)), lb, ub);
      if (uniform() < 0.5) std::swap(c1, c2);
      a[d] = c1;
      b[d] = c2;
    }
  }

  // Bounded polynomial mutation.
  void mutate(std::vector<double>& x) {
    const double eta = cfg_.eta_mutation;
    const double pw = 1.0 / (eta + 1.0);
    for (std::size_t d = 0; d < x.size(); ++d) {
      if (uniform() >= rate_) continue;
      const double lb = lo_[d], ub = hi_[d];
      if (!(ub > lb)) continue;
      const double d1 = (x[d] - lb) / (ub - lb);
      const double d2 = (ub - x[d]) / (ub - lb);
      const double r = uniform();
      double dq;
      if (r < 0.5) {
        const double v = 2.0 * r + (1.0 - 2.0 * r) * std::pow(1.0 - d1, eta + 1.0);
        dq = std::pow(v, pw) - 1.0;
      } else {
        const double v = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * std::pow(1.0 - d2, eta + 1.0);
        dq = 1.0 - std::pow(v, pw);
      }
      x[d] = std::clamp(x[d] + dq * (ub - lb), lb, ub);
    }
  }

 private:
  const std::vector<double>& lo_;
  const std::vector<double>& hi_;
  const MooConfig& cfg_;
  double rate_ = 0.5;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

void evaluate_all(std::vector<Individual>& pop, std::size_t from, const ObjectiveFn& fn,
                  unsigned workers) {
  parallel_for(pop.size() - from, workers, [&](std::size_t i) {
    Individual& ind = pop[from + i];
    ind.f = fn(ind.x);
  });
}

// Assigns rank and crowding in place and returns the fronts.
std::vector<std::vector<std::size_t>> assign_rank_crowding(std::vector<Individual>& pop) {
  std::vector<std::vector<double>> f;
  f.reserve(pop.size());
  for (const auto& ind : pop) f.push_back(ind.f);
  auto fronts = non_dominated_sort(f);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    const auto cd = crowding_distance(f, fronts[r]);
    for (std::size_t k = 0; k < fronts[r].size(); ++k) {
      pop[fronts[r][k]].rank = static_cast<int>(r);
      pop[fronts[r][k]].crowding = cd[k];
    }
  }
  return fronts;
}

bool crowded_better(const Individual& a, const Individual& b) {
  if (a.rank != b.rank) return a.rank < b.rank;
  return a.crowding > b.crowding;
}

}  // namespace

std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<std::vector<double>>& f) {
  const std::size_t n = f.size();
  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<int> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (dominates(f[p], f[q])) {
        dominated_by_me[p].push_back(q);
        ++count[q];
      } else if (dominates(f[q], f[p])) {
        dominated_by_me[q].push_back(p);
        ++count[p];
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p)
    if (count[p] == 0) fronts[0].push_back(p);
  for (std::size_t r = 0; !fronts[r].empty(); ++r) {
    std::vector<std::size_t> next;
    for (std::size_t p : fronts[r])
      for (std::size_t q : dominated_by_me[p])
        if (--count[q] == 0) next.push_back(q);
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<std::vector<double>>& f,
                                      const std::vector<std::size_t>& front) {
  const std::size_t m = front.size();
  std::vector<double> cd(m, 0.0);
  if (m == 0) return cd;
  if (m <= 2) {
    std::fill(cd.begin(), cd.end(), std::numeric_limits<double>::infinity());
    return cd;
  }
  const std::size_t n_obj = f[front[0]].size();
  std::vector<std::size_t> order(m);
  for (std::size_t o = 0; o < n_obj; ++o) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return f[front[a]][o] < f[front[b]][o]; });
    const double lo = f[front[order.front()]][o];
    const double hi = f[front[order.back()]][o];
    cd[order.front()] = cd[order.back()] = std::numeric_limits<double>::infinity();
    if (!(hi > lo)) continue;
    for (std::size_t k = 1; k + 1 < m; ++k)
      cd[order[k]] += (f[front[order[k + 1]]][o] - f[front[order[k - 1]]][o]) / (hi - lo);
  }
  return cd;
}

std::vector<Individual> nsga2(const std::vector<double>& lo, const std::vector<double>& hi,
                              const ObjectiveFn& objectives, const MooConfig& cfg,
                              const GenerationCallback& on_generation) {
  cfg.validate();
  if (lo.empty() || lo.size() != hi.size()) throw std::invalid_argument("nsga2: bad bounds");
  for (std::size_t d = 0; d < lo.size(); ++d)
    if (!(hi[d] >= lo[d])) throw std::invalid_argument("nsga2: bounds out of order");

  const auto n = static_cast<std::size_t>(cfg.population);
  Variation var(lo, hi, cfg);
  std::vector<Individual> pop(n);
  for (auto& ind : pop) ind.x = var.random_point();
  evaluate_all(pop, 0, objectives, cfg.workers);
  assign_rank_crowding(pop);
  if (on_generation) on_generation(0, pop);

  auto tournament = [&]() -> const Individual& {
    const Individual& a = pop[var.index(n)];
    const Individual& b = pop[var.index(n)];
    return crowded_better(b, a) ? b : a;
  };

  for (int gen = 1; gen <= cfg.generations; ++gen) {
    std::vector<Individual> combined = pop;
    combined.reserve(2 * n);
    while (combined.size() < 2 * n) {
      Individual c1{tournament().x, {}, 0, 0.0};
      Individual c2{tournament().x, {}, 0, 0.0};
      var.crossover(c1.x, c2.x);
      var.mutate(c1.x);
      var.mutate(c2.x);
      combined.push_back(std::move(c1));
      combined.push_back(std::move(c2));
    }
    evaluate_all(combined, n, objectives, cfg.workers);
    const auto fronts = assign_rank_crowding(combined);

    std::vector<Individual> next;
    next.reserve(n);
    for (const auto& front : fronts) {
      if (next.size() + front.size() <= n) {
        for (std::size_t i : front) next.push_back(combined[i]);
        continue;
      }
      std::vector<std::size_t> last = front;
      std::stable_sort(last.begin(), last.end(), [&](std::size_t a, std::size_t b) {
        return combined[a].crowding > combined[b].crowding;
      });
      for (std::size_t k = 0; next.size() < n; ++k) next.push_back(combined[last[k]]);
      break;
    }
    pop = std::move(next);
    assign_rank_crowding(pop);
    if (on_generation) on_generation(gen, pop);
  }
  return pop;
}

std::vector<Individual> first_front(const std::vector<Individual>& population) {
  std::vector<Individual> out;
  for (const auto& ind : population) {
    if (ind.rank != 0) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Individual& o) { return o.x == ind.x; });
    if (!dup) out.push_back(ind);
  }
  return out;
}

std::vector<std::size_t> non_dominated(const std::vector<Objectives>& points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].j1 != points[b].j1) return points[a].j1 > points[b].j1;
    return points[a].j2 > points[b].j2;
  });
  std::vector<std::size_t> keep;
  double best_j2_above = -std::numeric_limits<double>::infinity();  // over strictly larger j1
  for (std::size_t i = 0; i < order.size();) {
    std::size_t end = i;
    while (end < order.size() && points[order[end]].j1 == points[order[i]].j1) ++end;
    const double group_max = points[order[i]].j2;
    std::vector<std::size_t> group;
    for (std::size_t k = i; k < end; ++k) {
      const auto& pt = points[order[k]];
      if (pt.j2 == group_max && !(best_j2_above >= pt.j2)) group.push_back(order[k]);
    }
    std::sort(group.begin(), group.end());
    keep.insert(keep.end(), group.begin(), group.end());
    best_j2_above = std::max(best_j2_above, group_max);
    i = end;
  }
  return keep;
}

const char* to_string(ArchClass c) {
  return c == ArchClass::kPropellantReduced ? "propellant_reduced" : "conventional";
}

ArchClass classify(const ScenarioParams& p, const DesignPoint& x) {
  return x.m_p_des < 0.9 * full_life_propellant(p, x.t_life_yr) ? ArchClass::kPropellantReduced
                                                                 : ArchClass::kConventional;
}

void normalize_front(std::vector<ParetoSolution>& front) {
  if (front.empty()) return;
  auto [lo1, hi1] = std::minmax_element(front.begin(), front.end(),
                                        [](const auto& a, const auto& b) { return a.j1 < b.j1; });
  auto [lo2, hi2] = std::minmax_element(front.begin(), front.end(),
                                        [](const auto& a, const auto& b) { return a.j2 < b.j2; });
  const double a1 = lo1->j1, s1 = hi1->j1 - lo1->j1;
  const double a2 = lo2->j2, s2 = hi2->j2 - lo2->j2;
  for (auto& s : front) {
    s.j1_norm = s1 > 0.0 ? (s.j1 - a1) / s1 : 1.0;
    s.j2_norm = s2 > 0.0 ? (s.j2 - a2) / s2 : 1.0;
  }
}

std::vector<ParetoSolution> optimize(const SurrogateModel& j1, const SurrogateModel& j2,
                                     const DesignSpace& space, const MooConfig& cfg) {
  const std::vector<double> lo = {space.t_life_yr.lo, space.m_p_kg.lo};
  const std::vector<double> hi = {space.t_life_yr.hi, space.m_p_kg.hi};
  const ObjectiveFn fn = [&](const std::vector<double>& x) {
    const DesignPoint p{x[0], x[1]};
    return std::vector<double>{j1.predict_mean(p), j2.predict_mean(p)};
  };
  const auto front = first_front(nsga2(lo, hi, fn, cfg));

  std::vector<Objectives> objs;
  objs.reserve(front.size());
  for (const auto& ind : front) objs.push_back({ind.f[0], ind.f[1]});
  std::vector<ParetoSolution> out;
  for (std::size_t i : non_dominated(objs)) {
    const auto& ind = front[i];
    ParetoSolution s;
    s.x = space.clamp({ind.x[0], ind.x[1]});
    s.j1 = ind.f[0];
    s.j2 = ind.f[1];
    out.push_back(s);
  }
  normalize_front(out);
  return out;
}

void label_front(const ScenarioParams& p, std::vector<ParetoSolution>& front) {
  for (auto& s : front) s.label = classify(p, s.x);
}

double hypervolume(const std::vector<Objectives>& points, const Objectives& ref) {
  std::vector<Objectives> inside;
  for (const auto& q : points)
    if (q.j1 > ref.j1 && q.j2 > ref.j2) inside.push_back(q);
  double area = 0.0;
  double prev_j2 = ref.j2;
  for (std::size_t i : non_dominated(inside)) {
    const auto& q = inside[i];
    if (q.j2 <= prev_j2) continue;
    area += (q.j1 - ref.j1) * (q.j2 - prev_j2);
    prev_j2 = q.j2;
  }
  return area;
}

double generational_distance(const std::vector<Objectives>& points,
                             const std::vector<Objectives>& reference) {
  if (points.empty() || reference.empty())
    throw std::invalid_argument("generational_distance: empty input");
  double sum = 0.0;
  for (const auto& q : points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : reference) best = std::min(best, std::hypot(q.j1 - r.j1, q.j2 - r.j2));
    sum += best;
  }
  return sum / static_cast<double>(points.size());
}

}  // namespace oorarch
