#include "oorarch/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "oorarch/csv.hpp"
#include "oorarch/parallel.hpp"
#include "oorarch/simulator.hpp"
#include "oorarch/stochastics.hpp"

namespace oorarch {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTestDrawExperiment = std::numeric_limits<std::uint64_t>::max();
constexpr Kernel kKernels[] = {Kernel::kMatern32, Kernel::kMatern52, Kernel::kSquaredExponential};

Provenance provenance(const ExperimentPlan& plan) {
  return {scenario_hash(plan.scenario), plan.seed, tool_version()};
}

std::string meta_value(const CsvTable& t, const std::string& key) {
  for (const auto& [k, v] : t.meta)
    if (k == key) return v;
  return {};
}

// Reads a dataset file and checks it belongs to this plan.
CsvTable read_dataset(const ExperimentPlan& plan, const fs::path& path) {
  if (!fs::exists(path)) throw std::runtime_error("missing " + path.string() + " (run simulate first)");
  CsvTable t = read_csv(path);
  const Provenance prov = provenance(plan);
  if (meta_value(t, "scenario_hash") != prov.scenario_hash)
    throw std::runtime_error(path.string() + " was produced for a different scenario");
  if (meta_value(t, "seed") != std::to_string(prov.seed))
    throw std::runtime_error(path.string() + " was produced with a different seed");
  return t;
}

TrainingSet training_set(const CsvTable& t, const std::string& target) {
  const std::size_t ct = t.column("t_life_yr");
  const std::size_t cm = t.column("m_p_des_kg");
  const std::size_t cy = t.column(target);
  TrainingSet ts;
  for (const auto& row : t.rows)
    ts.add({std::stod(row.at(ct)), std::stod(row.at(cm))}, std::stod(row.at(cy)));
  return ts;
}

std::vector<DataRow> run_campaign(const ExperimentPlan& plan, const std::vector<DesignPoint>& xs,
                                  std::uint64_t index_offset) {
  std::vector<DataRow> rows(xs.size());
  parallel_for(xs.size(), plan.workers, [&](std::size_t i) {
    const McEstimate e = mc_estimate(plan.scenario, xs[i], plan.replicates, plan.seed,
                                     index_offset + i, 1);
    rows[i] = {xs[i], e.mean, e.std, e.n};
  });
  return rows;
}

void write_rows(const fs::path& path, const Provenance& prov, const std::vector<DataRow>& rows) {
  CsvWriter w(path, prov, {"t_life_yr", "m_p_des_kg", "mean_npv", "std_npv", "ratio", "n"});
  for (const auto& r : rows) {
    w.field(r.x.t_life_yr).field(r.x.m_p_des).field(r.mean).field(r.std);
    if (r.std > 0.0)
      w.field(r.mean / r.std);
    else
      w.field(std::string_view{});
    w.field(r.n);
    w.end_row();
  }
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  if (n > 1) v.back() = hi;
  return v;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

ExperimentPlan ExperimentPlan::make(const ScenarioParams& p, bool fast) {
  ExperimentPlan plan;
  plan.scenario = p;
  const auto& ds = p.design_space;
  plan.t_life_step_yr = ds.t_life_step_yr > 0.0 ? ds.t_life_step_yr : 1.0;
  plan.m_p_step_kg = ds.m_p_step_kg > 0.0 ? ds.m_p_step_kg : ds.m_p_kg.width() / 20.0;
  if (fast) {
    plan.replicates = 100;
    plan.moo.population = 50;
    plan.moo.generations = 100;
  }
  return plan;
}

void ExperimentPlan::validate() const {
  oorarch::validate(scenario);
  if (replicates < 2) throw std::invalid_argument("replicates must be >= 2");
  if (test_points < 2) throw std::invalid_argument("test set needs at least two points");
  if (heatmap_resolution < 2) throw std::invalid_argument("heatmap resolution must be >= 2");
  if (!(t_life_step_yr > 0.0) || !(m_p_step_kg > 0.0))
    throw std::invalid_argument("grid steps must be > 0");
  if (out_dir.empty()) throw std::invalid_argument("output directory not set");
  moo.validate();
}

std::vector<DesignPoint> full_factorial(const DesignSpace& space, double t_step, double m_step) {
  if (!(t_step > 0.0) || !(m_step > 0.0)) throw std::invalid_argument("grid steps must be > 0");
  auto levels = [](const Interval& iv, double step) {
    const auto n = static_cast<int>(std::floor(iv.width() / step + 1e-9)) + 1;
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(std::min(iv.hi, iv.lo + i * step));
    return v;
  };
  std::vector<DesignPoint> out;
  for (double t : levels(space.t_life_yr, t_step))
    for (double m : levels(space.m_p_kg, m_step)) out.push_back({t, m});
  return out;
}

std::vector<DesignPoint> random_test_points(const DesignSpace& space, int count, std::uint64_t seed) {
  RngStream rng(seed, kTestDrawExperiment, 0);
  std::vector<DesignPoint> out;
  for (int i = 0; i < count; ++i) {
    const double t = space.t_life_yr.lo + rng.uniform() * space.t_life_yr.width();
    const double m = space.m_p_kg.lo + rng.uniform() * space.m_p_kg.width();
    out.push_back({t, m});
  }
  return out;
}

ScenarioParams with_overrides(const ScenarioParams& base, const std::map<std::string, double>& kv) {
  nlohmann::json j = nlohmann::json::parse(dump_scenario(base));
  for (const auto& [key, value] : kv) {
    if (!j.contains(key) || !j[key].is_number())
      throw ScenarioError(key, "override: '" + key + "' is not a numeric scenario key");
    j[key] = value;
  }
  return parse_scenario(j.dump());
}

SimulateResult simulate(const ExperimentPlan& plan) {
  plan.validate();
  const auto grid = full_factorial(plan.scenario.design_space, plan.t_life_step_yr, plan.m_p_step_kg);
  for (const auto& x : grid)
    if (!plan.scenario.design_space.contains(x)) throw std::invalid_argument("grid leaves the design space");
  fs::create_directories(plan.out_dir);
  save_scenario(plan.scenario, plan.out_dir / "scenario.json");

  SimulateResult res;
  res.rows = run_campaign(plan, grid, 0);
  const Provenance prov = provenance(plan);
  {
    CsvWriter w(plan.out_dir / "d1.csv", prov, {"t_life_yr", "m_p_des_kg", "mean_npv", "std_npv", "n"});
    for (const auto& r : res.rows)
      w.field(r.x.t_life_yr).field(r.x.m_p_des).field(r.mean).field(r.std).field(r.n).end_row();
  }
  {
    CsvWriter w(plan.out_dir / "d2.csv", prov, {"t_life_yr", "m_p_des_kg", "ratio", "n"});
    for (const auto& r : res.rows) {
      if (!(r.std > 0.0)) {
        ++res.d2_excluded;
        continue;
      }
      w.field(r.x.t_life_yr).field(r.x.m_p_des).field(r.mean / r.std).field(r.n).end_row();
    }
  }
  return res;
}

TrainResult train(const ExperimentPlan& plan) {
  plan.validate();
  const TrainingSet d1 = training_set(read_dataset(plan, plan.out_dir / "d1.csv"), "mean_npv");
  const TrainingSet d2 = training_set(read_dataset(plan, plan.out_dir / "d2.csv"), "ratio");
  if (d1.size() < 2 || d2.size() < 2) throw std::runtime_error("datasets have fewer than two usable rows");

  const Provenance prov = provenance(plan);
  const auto test_x = random_test_points(plan.scenario.design_space, plan.test_points, plan.seed);
  const auto test_rows = run_campaign(plan, test_x, kTestExperimentOffset);
  write_rows(plan.out_dir / "test.csv", prov, test_rows);
  TrainingSet t1, t2;
  for (const auto& r : test_rows) {
    t1.add(r.x, r.mean);
    if (r.std > 0.0) t2.add(r.x, r.mean / r.std);
  }

  struct Job {
    const TrainingSet* data;
    Kernel kernel;
    SurrogateModel model;
  };
  std::vector<Job> jobs;
  for (Kernel k : kKernels) jobs.push_back({&d1, k, {}});
  for (Kernel k : kKernels) jobs.push_back({&d2, k, {}});
  parallel_for(jobs.size(), plan.workers, [&](std::size_t i) { jobs[i].model = fit(*jobs[i].data, jobs[i].kernel); });

  const fs::path models = plan.out_dir / "models";
  fs::create_directories(models);
  TrainResult res;
  CsvWriter card(models / "scorecard.csv", prov,
                 {"objective", "kernel", "r2", "log_marginal_likelihood", "selected"});
  for (int obj = 0; obj < 2; ++obj) {
    const TrainingSet& test = obj == 0 ? t1 : t2;
    const std::string name = obj == 0 ? "j1" : "j2";
    std::vector<ScoredModel> scored;
    for (int k = 0; k < 3; ++k) {
      const auto& m = jobs[static_cast<std::size_t>(obj * 3 + k)].model;
      scored.push_back({m, r_squared(m, test)});
      save_model(m, models / (name + "_" + to_string(m.kernel()) + ".json"), &prov);
    }
    const std::size_t best = select_model(scored);
    save_model(scored[best].model, models / (name + ".json"), &prov);
    auto& scores = obj == 0 ? res.j1_scores : res.j2_scores;
    for (std::size_t k = 0; k < scored.size(); ++k) {
      const auto& s = scored[k];
      scores.push_back({s.model.kernel(), s.r2, s.model.log_marginal_likelihood()});
      card.field(name).field(to_string(s.model.kernel())).field(s.r2)
          .field(s.model.log_marginal_likelihood()).field(k == best ? 1 : 0).end_row();
    }
    (obj == 0 ? res.j1_selected : res.j2_selected) = scored[best].model.kernel();
  }
  return res;
}

OptimizeResult optimize(const ExperimentPlan& plan) {
  plan.validate();
  const fs::path models = plan.out_dir / "models";
  if (!fs::exists(models / "j1.json") || !fs::exists(models / "j2.json"))
    throw std::runtime_error("missing models under " + models.string() + " (run train first)");
  const SurrogateModel j1 = load_model(models / "j1.json");
  const SurrogateModel j2 = load_model(models / "j2.json");
  const DesignSpace& space = plan.scenario.design_space;

  OptimizeResult res;
  res.front = optimize(j1, j2, space, plan.moo);
  label_front(plan.scenario, res.front);
  res.emergence = std::any_of(res.front.begin(), res.front.end(), [](const ParetoSolution& s) {
    return s.label == ArchClass::kPropellantReduced;
  });

  const Provenance prov = provenance(plan);
  {
    CsvWriter w(plan.out_dir / "front.csv", prov,
                {"t_life_yr", "m_p_des_kg", "j1", "j2", "j1_norm", "j2_norm", "class_label"});
    for (const auto& s : res.front)
      w.field(s.x.t_life_yr).field(s.x.m_p_des).field(s.j1).field(s.j2).field(s.j1_norm)
          .field(s.j2_norm).field(to_string(s.label)).end_row();
  }
  const auto ts = linspace(space.t_life_yr.lo, space.t_life_yr.hi, plan.heatmap_resolution);
  const auto ms = linspace(space.m_p_kg.lo, space.m_p_kg.hi, plan.heatmap_resolution);
  for (int obj = 0; obj < 2; ++obj) {
    const SurrogateModel& m = obj == 0 ? j1 : j2;
    std::vector<double> values(ts.size() * ms.size());
    parallel_for(ts.size(), plan.workers, [&](std::size_t i) {
      for (std::size_t k = 0; k < ms.size(); ++k) values[i * ms.size() + k] = m.predict_mean({ts[i], ms[k]});
    });
    CsvWriter w(plan.out_dir / (obj == 0 ? "heatmap_j1.csv" : "heatmap_j2.csv"), prov,
                {"t_life_yr", "m_p_des_kg", "value"});
    for (std::size_t i = 0; i < ts.size(); ++i)
      for (std::size_t k = 0; k < ms.size(); ++k) w.field(ts[i]).field(ms[k]).field(values[i * ms.size() + k]).end_row();
  }
  return res;
}

std::string report(const ExperimentPlan& plan) {
  plan.validate();
  const Provenance prov = provenance(plan);
  const CsvTable d1 = read_dataset(plan, plan.out_dir / "d1.csv");
  const CsvTable d2 = read_dataset(plan, plan.out_dir / "d2.csv");
  const CsvTable card = read_dataset(plan, plan.out_dir / "models" / "scorecard.csv");
  const CsvTable front = read_dataset(plan, plan.out_dir / "front.csv");

  std::ostringstream o;
  o << "# scenario_hash=" << prov.scenario_hash << "\n";
  o << "# seed=" << prov.seed << "\n";
  o << "# tool_version=" << prov.tool_version << "\n";
  o << "scenario: " << (plan.scenario.name.empty() ? "(unnamed)" : plan.scenario.name) << "\n";
  o << "grid points: " << d1.rows.size() << " (D2 rows: " << d2.rows.size() << ")\n";
  if (!d1.rows.empty()) o << "replicates per point: " << d1.rows.front().at(d1.column("n")) << "\n";
  o << "\nsurrogate test R^2 (" << plan.test_points << " random points)\n";
  o << "objective  kernel    R^2      selected\n";
  const std::size_t c_obj = card.column("objective"), c_k = card.column("kernel");
  const std::size_t c_r2 = card.column("r2"), c_sel = card.column("selected");
  for (const auto& row : card.rows) {
    std::string k = row.at(c_k);
    k.resize(std::max<std::size_t>(k.size(), 9), ' ');
    o << (row.at(c_obj) == "j1" ? "J1         " : "J2         ") << k << ' '
      << fixed(std::stod(row.at(c_r2)), 4) << "   " << (row.at(c_sel) == "1" ? "*" : "") << "\n";
  }

  const std::size_t ft = front.column("t_life_yr"), fm = front.column("m_p_des_kg");
  const std::size_t fl = front.column("class_label");
  double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin, mmin = tmin, mmax = -tmin;
  std::size_t reduced = 0;
  for (const auto& row : front.rows) {
    const double t = std::stod(row.at(ft)), m = std::stod(row.at(fm));
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
    mmin = std::min(mmin, m);
    mmax = std::max(mmax, m);
    if (row.at(fl) == to_string(ArchClass::kPropellantReduced)) ++reduced;
  }
  o << "\npareto front: " << front.rows.size() << " solutions\n";
  if (!front.rows.empty()) {
    o << "t_life_yr range: [" << fixed(tmin, 3) << ", " << fixed(tmax, 3) << "]\n";
    o << "m_p_des_kg range: [" << fixed(mmin, 1) << ", " << fixed(mmax, 1) << "]\n";
  }
  o << "propellant-reduced members: " << reduced << "\n";
  o << "propellant-reduced emergence: " << (reduced > 0 ? "yes" : "no") << "\n";

  const std::string text = o.str();
  std::ofstream f(plan.out_dir / "report.txt", std::ios::binary);
  if (!f) throw std::runtime_error("cannot write report.txt");
  f << text;
  return text;
}

OptimizeResult run_pipeline(const ExperimentPlan& plan) {
  simulate(plan);
  train(plan);
  OptimizeResult res = optimize(plan);
  report(plan);
  return res;
}

std::string SweepCase::label() const {
  if (family == SweepFamily::kChemical)
    return "chemical_cap" + std::to_string(capacity_index) + "_cost" + std::to_string(cost_index);
  return "electric_cost" + std::to_string(cost_index);
}

SweepCase chemical_case(int capacity_index, int cost_index) {
  if (capacity_index < 1 || capacity_index > 4) throw std::out_of_range("capacity index must be 1..4");
  if (cost_index < 1 || cost_index > 5) throw std::out_of_range("chemical cost index must be 1..5");
  static constexpr double kCapacity[] = {100.0, 400.0, 700.0, 1000.0};
  static constexpr double kFixed[] = {4.0, 3.2, 2.4, 1.6, 0.8};
  static constexpr double kVariable[] = {0.16, 0.128, 0.096, 0.064, 0.032};
  SweepCase c;
  c.family = SweepFamily::kChemical;
  c.capacity_index = capacity_index;
  c.cost_index = cost_index;
  c.m_oor_cap = kCapacity[capacity_index - 1];
  c.c_oor_f = kFixed[cost_index - 1];
  c.c_oor_v = kVariable[cost_index - 1];
  return c;
}

SweepCase electric_case(int cost_index) {
  if (cost_index < 1 || cost_index > 10) throw std::out_of_range("electric cost index must be 1..10");
  // Multipliers 2.0, 1.8, ..., 0.2 applied to the 4 $M + 0.16 $M/kg baseline.
  const int tenths = 20 - 2 * (cost_index - 1);
  SweepCase c;
  c.family = SweepFamily::kElectric;
  c.capacity_index = 0;
  c.cost_index = cost_index;
  c.c_oor_f = 4.0 * tenths / 10.0;
  c.c_oor_v = 0.16 * tenths / 10.0;
  return c;
}

ScenarioParams apply_case(const ScenarioParams& base, const SweepCase& c) {
  ScenarioParams p = base;
  if (c.m_oor_cap > 0.0) p.m_oor_cap = c.m_oor_cap;
  p.c_oor_f = c.c_oor_f;
  p.c_oor_v = c.c_oor_v;
  p.name = (base.name.empty() ? std::string("scenario") : base.name) + "/" + c.label();
  validate(p);
  return p;
}

SweepSpec SweepSpec::chemical_full() {
  SweepSpec s;
  for (int cap = 1; cap <= 4; ++cap)
    for (int cost = 1; cost <= 5; ++cost) s.cases.push_back(chemical_case(cap, cost));
  return s;
}

SweepSpec SweepSpec::electric_full() {
  SweepSpec s;
  for (int cost = 1; cost <= 10; ++cost) s.cases.push_back(electric_case(cost));
  return s;
}

std::vector<SweepRow> sweep(const ExperimentPlan& base, const SweepSpec& spec) {
  base.validate();
  std::vector<SweepRow> rows;
  for (const auto& c : spec.cases) {
    ExperimentPlan plan = base;
    plan.scenario = apply_case(base.scenario, c);
    plan.out_dir = base.out_dir / c.label();
    const OptimizeResult r = run_pipeline(plan);
    SweepRow row;
    row.c = c;
    row.front_size = r.front.size();
    row.emergence = r.emergence;
    row.t_life_min = row.m_p_min = std::numeric_limits<double>::infinity();
    row.t_life_max = row.m_p_max = -std::numeric_limits<double>::infinity();
    for (const auto& s : r.front) {
      if (s.label == ArchClass::kPropellantReduced) ++row.propellant_reduced;
      row.t_life_min = std::min(row.t_life_min, s.x.t_life_yr);
      row.t_life_max = std::max(row.t_life_max, s.x.t_life_yr);
      row.m_p_min = std::min(row.m_p_min, s.x.m_p_des);
      row.m_p_max = std::max(row.m_p_max, s.x.m_p_des);
    }
    rows.push_back(row);
  }

  fs::create_directories(base.out_dir);
  const Provenance prov = provenance(base);
  CsvWriter w(base.out_dir / "emergence.csv", prov,
              {"case", "capacity_index", "cost_index", "m_oor_cap_kg", "c_oor_f", "c_oor_v",
               "front_size", "propellant_reduced", "emergence", "t_life_min", "t_life_max",
               "m_p_des_min", "m_p_des_max"});
  std::ostringstream summary;
  summary << "# scenario_hash=" << prov.scenario_hash << "\n# seed=" << prov.seed
          << "\n# tool_version=" << prov.tool_version << "\n";
  summary << "cases: " << rows.size() << "\nemergence at:";
  std::size_t flagged = 0;
  for (const auto& r : rows) {
    const double cap = r.c.m_oor_cap > 0.0 ? r.c.m_oor_cap : base.scenario.m_oor_cap;
    w.field(r.c.label()).field(r.c.capacity_index).field(r.c.cost_index).field(cap)
        .field(r.c.c_oor_f).field(r.c.c_oor_v).field(r.front_size).field(r.propellant_reduced)
        .field(r.emergence ? 1 : 0).field(r.t_life_min).field(r.t_life_max).field(r.m_p_min)
        .field(r.m_p_max).end_row();
    if (r.emergence) {
      summary << ' ' << r.c.label();
      ++flagged;
    }
  }
  if (flagged == 0) summary << " none";
  summary << "\n";
  std::ofstream f(base.out_dir / "summary.txt", std::ios::binary);
  f << summary.str();
  return rows;
}

}  // namespace oorarch
