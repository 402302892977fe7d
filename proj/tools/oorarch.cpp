// oorarch: command-line driver for the satellite architecting pipeline.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oorarch/csv.hpp"
#include "oorarch/pipeline.hpp"
#include "oorarch/simulator.hpp"

namespace {

using namespace oorarch;

struct Common {
  std::string scenario;
  std::string out;
  std::uint64_t seed = 1;
  std::optional<int> replicates;
  std::optional<int> test_points;
  std::optional<int> population;
  std::optional<int> generations;
  unsigned threads = 0;
  bool fast = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory")->required();
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--replicates", c.replicates, "Monte Carlo replicates per design point")
      ->check(CLI::Range(2, 1000000));
  cmd->add_option("--test-points", c.test_points, "Random test-set size")->check(CLI::Range(2, 100000));
  cmd->add_option("--population", c.population, "NSGA-II population (even, >= 4)");
  cmd->add_option("--generations", c.generations, "NSGA-II generations");
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  cmd->add_flag("--fast", c.fast, "CI profile: N=100, population 50, 100 generations");
  cmd->add_option("--set", c.overrides, "Scenario override key=value (repeatable)");
}

ExperimentPlan make_plan(const Common& c) {
  ScenarioParams p = load_scenario(c.scenario);
  if (!c.overrides.empty()) {
    std::map<std::string, double> kv;
    for (const auto& s : c.overrides) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
      kv[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
    }
    p = with_overrides(p, kv);
  }
  ExperimentPlan plan = ExperimentPlan::make(p, c.fast);
  plan.out_dir = c.out;
  plan.seed = c.seed;
  plan.workers = c.threads;
  if (c.replicates) plan.replicates = *c.replicates;
  if (c.test_points) plan.test_points = *c.test_points;
  if (c.population) plan.moo.population = *c.population;
  if (c.generations) plan.moo.generations = *c.generations;
  plan.moo.seed = c.seed;
  plan.validate();
  return plan;
}

void print_scores(const char* name, const std::vector<KernelScore>& scores, Kernel selected) {
  for (const auto& s : scores)
    std::printf("%s %-9s R^2=%.4f%s\n", name, to_string(s.kernel), s.r2, s.kernel == selected ? "  *" : "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Satellite architecting with on-orbit refueling: simulate, train, optimize, sweep"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  Common sim_o, train_o, opt_o, rep_o, sweep_o;
  std::vector<double> trace;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo campaign over the design grid (d1.csv, d2.csv)");
  add_common(sim, sim_o);
  sim->add_option("--trace", trace, "Also write trace.csv: event log of replicate 0 at T_LIFE M_P")
      ->expected(2);
  auto* trn = app.add_subcommand("train", "Fit GP surrogates and score them on a random test set");
  add_common(trn, train_o);
  auto* opt = app.add_subcommand("optimize", "NSGA-II over the selected surrogates (front, heatmaps)");
  add_common(opt, opt_o);
  auto* rep = app.add_subcommand("report", "Summarize an output directory into report.txt");
  add_common(rep, rep_o);

  std::string family = "chemical";
  std::vector<std::string> cases;
  auto* swp = app.add_subcommand("sweep", "Service cost/capacity parametric study");
  add_common(swp, sweep_o);
  swp->add_option("--family", family, "chemical or electric")->check(CLI::IsMember({"chemical", "electric"}));
  swp->add_option("--cases", cases,
                  "Cases to run: CAP,COST for chemical or COST for electric (default: all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const ExperimentPlan plan = make_plan(sim_o);
      const SimulateResult r = simulate(plan);
      std::printf("simulated %zu design points x %d replicates -> %s\n", r.rows.size(), plan.replicates,
                  plan.out_dir.string().c_str());
      if (r.d2_excluded > 0)
        std::fprintf(stderr, "warning: %zu zero-spread points excluded from d2.csv\n", r.d2_excluded);
      if (!trace.empty()) {
        RngStream rng(plan.seed, 0, 0);
        const SimOutcome o = run_lifecycle(plan.scenario, {trace[0], trace[1]}, rng);
        write_event_log(o, plan.out_dir / "trace.csv");
        std::printf("trace NPV %.6f $M -> trace.csv\n", o.npv);
      }
    } else if (trn->parsed()) {
      const TrainResult r = train(make_plan(train_o));
      print_scores("J1", r.j1_scores, r.j1_selected);
      print_scores("J2", r.j2_scores, r.j2_selected);
    } else if (opt->parsed()) {
      const OptimizeResult r = optimize(make_plan(opt_o));
      std::printf("front: %zu solutions; propellant-reduced emergence: %s\n", r.front.size(),
                  r.emergence ? "yes" : "no");
    } else if (rep->parsed()) {
      std::cout << report(make_plan(rep_o));
    } else if (swp->parsed()) {
      const ExperimentPlan plan = make_plan(sweep_o);
      SweepSpec spec;
      const bool chemical = family == "chemical";
      if (cases.empty()) {
        spec = chemical ? SweepSpec::chemical_full() : SweepSpec::electric_full();
      } else {
        for (const auto& s : cases) {
          if (chemical) {
            const auto comma = s.find(',');
            if (comma == std::string::npos) throw std::invalid_argument("chemical case must be CAP,COST");
            spec.cases.push_back(chemical_case(std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))));
          } else {
            spec.cases.push_back(electric_case(std::stoi(s)));
          }
        }
      }
      for (const auto& row : sweep(plan, spec))
        std::printf("%-24s front=%3zu reduced=%3zu emergence=%s\n", row.c.label().c_str(), row.front_size,
                    row.propellant_reduced, row.emergence ? "yes" : "no");
    }
  } catch (const ScenarioError& e) {
    std::fprintf(stderr, "scenario error%s%s: %s\n", e.key().empty() ? "" : " at ", e.key().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
