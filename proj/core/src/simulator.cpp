#include "oorarch/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>

#include "oorarch/csv.hpp"
#include "oorarch/parallel.hpp"

namespace oorarch {

const char* to_string(CashKind k) {
  switch (k) {
    case CashKind::kRevenue: return "revenue";
    case CashKind::kOpCost: return "opcost";
    case CashKind::kIoc: return "ioc";
    case CashKind::kOor: return "oor";
    case CashKind::kNone: return "none";
  }
  return "?";
}

const char* to_string(EventTag e) {
  switch (e) {
    case EventTag::kStart: return "start";
    case EventTag::kLaunchSuccess: return "launch_success";
    case EventTag::kLaunchFailure: return "launch_failure";
    case EventTag::kTransferFailure: return "transfer_failure";
    case EventTag::kInOrbitFailure: return "in_orbit_failure";
    case EventTag::kDepletion: return "depletion";
    case EventTag::kRetire: return "retire";
    case EventTag::kDecisionReplace: return "decision1_replace";
    case EventTag::kDecisionRefuel: return "decision1_refuel";
    case EventTag::kDecisionAmount: return "decision2_amount";
    case EventTag::kOorSuccess: return "oor_success";
    case EventTag::kOorFailure: return "oor_failure";
    case EventTag::kExpired: return "action_expired";
    case EventTag::kEnd: return "end";
  }
  return "?";
}

double npv_from_ledger(const std::vector<LedgerEntry>& ledger, double rf, double dt_yr) {
  double v = 0.0;
  for (const auto& e : ledger) v += e.amount * std::exp(-rf * e.step * dt_yr);
  return v;
}

namespace {

enum class Plan { kNone, kAwaitAmount, kAwaitService };

class Lifecycle {
 public:
  Lifecycle(const PolicyContext& ctx, RngStream& rng, SimOptions opt)
      : ctx_(ctx), p_(ctx.params()), g_(ctx.grid()), rng_(rng), opt_(opt) {
    burn_fraction_ = -std::expm1(-g_.dv_stk_step / p_.exhaust_velocity());
  }

  SimOutcome run() {
    note(0, EventTag::kStart);
    replace_at_ = 0;
    for (int t = 0; t <= g_.t_sim; ++t) {
      discount_ = std::exp(-p_.rf * t * p_.dt_yr);
      if (t >= 1) market_ = market_step(market_, p_.dt_yr, p_.mu_mar, p_.sigma_mar, rng_, p_.market_model);
      check_failure_and_book_revenue(t);
      run_actions(t);
      if (t < g_.t_sim) run_decisions(t);
      burn(t);
    }
    // Actions scheduled past the horizon are logged at the horizon with
    // their scheduled step as the value.
    if (replace_at_ && *replace_at_ > g_.t_sim) note(g_.t_sim, EventTag::kExpired, *replace_at_);
    if (plan_ == Plan::kAwaitService && plan_step_ > g_.t_sim) note(g_.t_sim, EventTag::kExpired, plan_step_);
    note(g_.t_sim, EventTag::kEnd);
    out_.npv = npv_;
    return std::move(out_);
  }

 private:
  void book(int t, double amount, CashKind kind) {
    npv_ += amount * discount_;
    if (opt_.record) out_.ledger.push_back({t, amount, kind});
  }
  void note(int t, EventTag tag, double value = 0.0) {
    if (opt_.record) out_.events.push_back({t, tag, value});
  }

  void schedule_replacement(int s) { replace_at_ = replace_at_ ? std::min(*replace_at_, s) : s; }

  void lose_satellite(int t) {
    alive_ = false;
    plan_ = Plan::kNone;
    schedule_replacement(t + g_.t_rep);
  }

  void check_failure_and_book_revenue(int t) {
    if (!alive_ || t <= sat_.t_launch) return;
    if (rng_.uniform() < ctx_.law().conditional(t - sat_.t_launch)) {
      note(t, EventTag::kInOrbitFailure);
      lose_satellite(t);
      return;
    }
    const double r = revenue(t, sat_.t_tech, market_, p_);
    book(t, r, CashKind::kRevenue);
    book(t, -p_.alpha_op * r, CashKind::kOpCost);
  }

  void run_actions(int t) {
    if (replace_at_ && *replace_at_ == t) {
      replace_at_.reset();
      if (alive_) note(t, EventTag::kRetire);
      alive_ = false;
      plan_ = Plan::kNone;
      launch(t);
    }
    if (alive_ && plan_ == Plan::kAwaitService && plan_step_ == t) {
      plan_ = Plan::kNone;
      if (rng_.bernoulli(p_.p_oor)) {
        note(t, EventTag::kOorFailure, planned_mass_);
        lose_satellite(t);
      } else {
        book(t, -planned_cost_, CashKind::kOor);
        sat_.m_p_rem += planned_mass_;
        depletion_ = depletion_step(t, sat_, p_);
        note(t, EventTag::kOorSuccess, planned_mass_);
      }
    }
  }

  void launch(int t) {
    const auto& b = ctx_.design();
    const bool launch_failed = rng_.bernoulli(p_.p_lau);
    const double dv_err = sample_injection_error(rng_, p_.sigma_oi);
    if (launch_failed) {
      note(t, EventTag::kLaunchFailure);
      schedule_replacement(t + g_.t_rep);
      return;
    }
    const double m_transfer = propellant_for_dv(b.m_wet, p_.dv_ot_ideal + dv_err, p_.isp, p_.g0);
    if (m_transfer > b.m_p_des) {
      note(t, EventTag::kTransferFailure, dv_err);
      schedule_replacement(t + g_.t_rep);
      return;
    }
    book(t, -b.c_ioc, CashKind::kIoc);
    sat_ = SatelliteState{t, t, ctx_.law().t_life_steps(), b.m_dry, b.m_p_des - m_transfer, p_.isp};
    alive_ = true;
    depletion_ = depletion_step(t, sat_, p_);
    note(t, EventTag::kLaunchSuccess, dv_err);
  }

  void run_decisions(int t) {
    if (!alive_ || replace_at_) return;
    if (plan_ == Plan::kNone && depletion_ - t <= g_.t_rep) {
      const DecisionOutcome d = decide_replace_or_refuel(ctx_, t, sat_, market_);
      if (d.choice == Choice::kReplace) {
        note(t, EventTag::kDecisionReplace, d.utility);
        schedule_replacement(t + g_.t_rep);
        return;
      }
      note(t, EventTag::kDecisionRefuel, d.utility);
      plan_ = Plan::kAwaitAmount;
      plan_step_ = std::max(t, depletion_ - g_.t_oor);
    }
    if (plan_ == Plan::kAwaitAmount && plan_step_ == t) {
      const DecisionOutcome d = decide_refuel_amount(ctx_, t, sat_, market_);
      if (d.choice == Choice::kReplace) {
        note(t, EventTag::kDecisionReplace, d.utility);
        plan_ = Plan::kNone;
        schedule_replacement(t + g_.t_rep);
        return;
      }
      note(t, EventTag::kDecisionAmount, d.k);
      plan_ = Plan::kAwaitService;
      plan_step_ = t + g_.t_oor;
      planned_mass_ = d.m_p_oor;
      planned_cost_ = d.c_oor;
    }
  }

  void burn(int t) {
    if (!alive_) return;
    if (t >= depletion_) {
      note(t, EventTag::kDepletion);
      lose_satellite(t);
      return;
    }
    sat_.m_p_rem = std::max(0.0, sat_.m_p_rem - (sat_.m_dry + sat_.m_p_rem) * burn_fraction_);
  }

  const PolicyContext& ctx_;
  const ScenarioParams& p_;
  const TimeGrid& g_;
  RngStream& rng_;
  SimOptions opt_;
  double burn_fraction_ = 0.0;

  SimOutcome out_;
  double npv_ = 0.0;
  double discount_ = 1.0;
  MarketState market_;
  bool alive_ = false;
  SatelliteState sat_;
  int depletion_ = 0;
  std::optional<int> replace_at_;
  Plan plan_ = Plan::kNone;
  int plan_step_ = 0;
  double planned_mass_ = 0.0;
  double planned_cost_ = 0.0;
};

}  // namespace

SimOutcome run_lifecycle(const PolicyContext& ctx, RngStream& rng, SimOptions opt) {
  return Lifecycle(ctx, rng, opt).run();
}

SimOutcome run_lifecycle(const ScenarioParams& p, const DesignPoint& x, RngStream& rng,
                         SimOptions opt) {
  const PolicyContext ctx(p, x);
  return run_lifecycle(ctx, rng, opt);
}

double McEstimate::ratio() const {
  if (std == 0.0) {
    if (mean == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return mean > 0.0 ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
  }
  return mean / std;
}

McEstimate summarize(const std::vector<double>& npvs) {
  if (npvs.size() < 2) throw std::invalid_argument("summarize: need at least two replicates");
  McEstimate e;
  e.n = static_cast<int>(npvs.size());
  double sum = 0.0;
  for (double v : npvs) sum += v;
  e.mean = sum / e.n;
  double ss = 0.0;
  for (double v : npvs) ss += (v - e.mean) * (v - e.mean);
  e.std = std::sqrt(ss / (e.n - 1));
  return e;
}

McEstimate mc_estimate(const ScenarioParams& p, const DesignPoint& x, int n,
                       std::uint64_t master_seed, std::uint64_t experiment_index, unsigned workers) {
  if (n < 2) throw std::invalid_argument("mc_estimate: n must be >= 2");
  const PolicyContext ctx(p, x);
  std::vector<double> npvs(static_cast<std::size_t>(n));
  parallel_for(npvs.size(), workers, [&](std::size_t j) {
    RngStream rng(master_seed, experiment_index, j);
    npvs[j] = run_lifecycle(ctx, rng, SimOptions{false}).npv;
  });
  return summarize(npvs);
}

void write_event_log(const SimOutcome& out, const std::filesystem::path& path) {
  struct Row {
    int step;
    std::string event;
    double cash;
  };
  std::vector<Row> rows;
  for (const auto& e : out.events) rows.push_back({e.step, to_string(e.tag), 0.0});
  for (const auto& l : out.ledger) rows.push_back({l.step, to_string(l.kind), l.amount});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.step < b.step; });
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "step,event,cash\r\n";
  for (const auto& r : rows) f << r.step << ',' << csv_escape(r.event) << ',' << format_double(r.cash) << "\r\n";
}

}  // namespace oorarch
