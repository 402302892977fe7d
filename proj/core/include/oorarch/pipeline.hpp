#pragma once

// Experiment orchestration: full-factorial Monte Carlo campaign, surrogate
// training and selection, front search, reporting, and the parametric
// service-performance sweeps.
//
// Output directory layout (one per scenario):
//   scenario.json  d1.csv  d2.csv  test.csv  models/  front.csv
//   heatmap_j1.csv  heatmap_j2.csv  report.txt

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "oorarch/pareto.hpp"
#include "oorarch/scenario.hpp"
#include "oorarch/surrogate.hpp"

namespace oorarch {

/// Experiment index offset for the random test points, keeping their
/// replicate streams apart from the grid's.
inline constexpr std::uint64_t kTestExperimentOffset = 1'000'000;

struct ExperimentPlan {
  ScenarioParams scenario;
  double t_life_step_yr = 1.0;
  double m_p_step_kg = 100.0;
  int replicates = 400;
  int test_points = 30;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;
  unsigned workers = 0;  // 0 = hardware concurrency
  MooConfig moo;
  int heatmap_resolution = 101;

  /// Grid steps from the scenario's design space; the fast profile uses
  /// N = 100, population 50 and 100 generations.
  static ExperimentPlan make(const ScenarioParams& p, bool fast);
  void validate() const;
};

/// Lifetime-major full-factorial grid; both interval ends are included.
std::vector<DesignPoint> full_factorial(const DesignSpace& space, double t_life_step_yr,
                                        double m_p_step_kg);

/// Uniform random points in the design space, drawn from a dedicated stream.
std::vector<DesignPoint> random_test_points(const DesignSpace& space, int count, std::uint64_t seed);

/// Applies key=value numeric overrides to a scenario by name, re-validating.
ScenarioParams with_overrides(const ScenarioParams& base, const std::map<std::string, double>& kv);

struct DataRow {
  DesignPoint x;
  double mean = 0.0;
  double std = 0.0;
  int n = 0;
};

struct SimulateResult {
  std::vector<DataRow> rows;
  std::size_t d2_excluded = 0;  // zero-spread points left out of D2
};

struct KernelScore {
  Kernel kernel = Kernel::kMatern32;
  double r2 = 0.0;
  double lml = 0.0;
};

struct TrainResult {
  std::vector<KernelScore> j1_scores;
  std::vector<KernelScore> j2_scores;
  Kernel j1_selected = Kernel::kMatern32;
  Kernel j2_selected = Kernel::kMatern32;
};

struct OptimizeResult {
  std::vector<ParetoSolution> front;
  bool emergence = false;  // any propellant-reduced member
};

/// Monte Carlo campaign over the grid; writes d1.csv and d2.csv.
SimulateResult simulate(const ExperimentPlan& plan);

/// Simulates the random test set (test.csv), trains every kernel on D1 and
/// D2, scores each on the test set, and saves all candidates plus the
/// selected j1.json / j2.json under models/ with a scorecard.csv.
TrainResult train(const ExperimentPlan& plan);

/// Loads the selected models, runs NSGA-II and writes front.csv and the
/// two heatmap files.
OptimizeResult optimize(const ExperimentPlan& plan);

/// Summarizes the files in out_dir into report.txt and returns its text.
std::string report(const ExperimentPlan& plan);

/// simulate -> train -> optimize -> report.
OptimizeResult run_pipeline(const ExperimentPlan& plan);

enum class SweepFamily { kChemical, kElectric };

struct SweepCase {
  SweepFamily family = SweepFamily::kChemical;
  int capacity_index = 1;  // chemical only
  int cost_index = 1;
  double m_oor_cap = 0.0;  // 0 keeps the base scenario's capacity
  double c_oor_f = 0.0;
  double c_oor_v = 0.0;

  std::string label() const;
};

/// Capacity index 1..4 and cost index 1..5 of the chemical study.
SweepCase chemical_case(int capacity_index, int cost_index);
/// Cost index 1..10 of the electric study: 2.0x down to 0.2x the baseline
/// service price in steps of 0.2; capacity stays at the baseline.
SweepCase electric_case(int cost_index);

ScenarioParams apply_case(const ScenarioParams& base, const SweepCase& c);

struct SweepSpec {
  std::vector<SweepCase> cases;

  static SweepSpec chemical_full();
  static SweepSpec electric_full();
};

struct SweepRow {
  SweepCase c;
  std::size_t front_size = 0;
  std::size_t propellant_reduced = 0;
  bool emergence = false;
  double t_life_min = 0.0, t_life_max = 0.0;
  double m_p_min = 0.0, m_p_max = 0.0;
};

/// Runs the full pipeline per case under out_dir/<label>/ and writes
/// emergence.csv and summary.txt under out_dir.
std::vector<SweepRow> sweep(const ExperimentPlan& base, const SweepSpec& spec);

}  // namespace oorarch
