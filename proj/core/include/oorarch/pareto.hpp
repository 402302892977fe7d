#pragma once

// Bi-objective search over the surrogates with a real-coded NSGA-II, plus
// the front utilities used by the reports: non-domination filtering,
// min-max normalization, hypervolume and generational distance.
//
// Every objective is maximized.

#include <cstdint>
#include <functional>
#include <vector>

#include "oorarch/scenario.hpp"
#include "oorarch/surrogate.hpp"

namespace oorarch {

struct MooConfig {
  int population = 100;
  int generations = 200;
  double crossover_prob = 0.9;
  double eta_crossover = 15.0;
  double mutation_rate = 0.0;  // per variable; 0 means 1 / dimension
  double eta_mutation = 20.0;
  std::uint64_t seed = 1;
  unsigned workers = 1;  // objective evaluations within a generation

  /// Throws std::invalid_argument unless population is even and >= 4,
  /// generations >= 0 and rates lie in [0, 1].
  void validate() const;
};

struct Individual {
  std::vector<double> x;
  std::vector<double> f;  // objectives, maximized
  int rank = 0;
  double crowding = 0.0;
};

using ObjectiveFn = std::function<std::vector<double>(const std::vector<double>&)>;
/// Called with the generation number (0 = initial population) and the
/// current population after survivor selection.
using GenerationCallback = std::function<void(int, const std::vector<Individual>&)>;

/// Fronts of a fast non-dominated sort; fronts[0] is rank 0. Indices within
/// a front are ascending.
std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<std::vector<double>>& f);

/// Crowding distance of each member of one front (boundary members get +inf).
std::vector<double> crowding_distance(const std::vector<std::vector<double>>& f,
                                      const std::vector<std::size_t>& front);

/// Generic NSGA-II over the box [lo, hi]. Returns the final population.
std::vector<Individual> nsga2(const std::vector<double>& lo, const std::vector<double>& hi,
                              const ObjectiveFn& objectives, const MooConfig& cfg,
                              const GenerationCallback& on_generation = {});

/// Rank-0 members of a population, duplicates (identical x) removed.
std::vector<Individual> first_front(const std::vector<Individual>& population);

struct Objectives {
  double j1 = 0.0;
  double j2 = 0.0;
};

/// Indices of the non-dominated points, ordered by j1 descending (input
/// order among equal j1).
std::vector<std::size_t> non_dominated(const std::vector<Objectives>& points);

enum class ArchClass { kConventional, kPropellantReduced };

const char* to_string(ArchClass c);

/// Propellant-reduced when m_p,des is below 90% of the full-life propellant
/// at the point's design lifetime.
ArchClass classify(const ScenarioParams& p, const DesignPoint& x);

struct ParetoSolution {
  DesignPoint x;
  double j1 = 0.0;
  double j2 = 0.0;
  double j1_norm = 0.0;
  double j2_norm = 0.0;
  ArchClass label = ArchClass::kConventional;
};

/// Min-max normalizes j1 and j2 over the front in place. An objective with
/// no spread (including a single-point front) normalizes to 1. The utopia
/// point is (1, 1) in normalized space.
void normalize_front(std::vector<ParetoSolution>& front);
inline constexpr Objectives kUtopia{1.0, 1.0};

/// Runs NSGA-II on (j1 mean, j2 mean) over the design box and returns the
/// deduplicated rank-0 front, ordered by j1 descending and normalized.
/// Labels are left conventional; use label_front() with scenario data.
std::vector<ParetoSolution> optimize(const SurrogateModel& j1, const SurrogateModel& j2,
                                     const DesignSpace& space, const MooConfig& cfg);

void label_front(const ScenarioParams& p, std::vector<ParetoSolution>& front);

/// Area dominated by the points and bounded below by ref (maximization).
/// Points not strictly better than ref in both objectives contribute nothing.
double hypervolume(const std::vector<Objectives>& points, const Objectives& ref);

/// Mean Euclidean distance from each point to its nearest reference point.
double generational_distance(const std::vector<Objectives>& points,
                             const std::vector<Objectives>& reference);

}  // namespace oorarch
