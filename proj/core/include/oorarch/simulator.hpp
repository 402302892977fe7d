#pragma once

// Discrete-time satellite lifecycle simulation and its Monte Carlo estimator.
//
// One replicate walks steps 0..t_sim. Within a step the order is fixed:
//   market update -> in-orbit failure check for (t-1, t] and revenue booking
//   -> scheduled actions (replacement launch, OOR service) -> decisions
//   -> station-keeping burn for (t, t+1].
// Revenue for (t-1, t] is booked at t only if the satellite survived it.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oorarch/policy.hpp"
#include "oorarch/scenario.hpp"
#include "oorarch/stochastics.hpp"

namespace oorarch {

enum class CashKind { kRevenue, kOpCost, kIoc, kOor, kNone };

enum class EventTag {
  kStart,
  kLaunchSuccess,
  kLaunchFailure,
  kTransferFailure,
  kInOrbitFailure,
  kDepletion,
  kRetire,
  kDecisionReplace,
  kDecisionRefuel,
  kDecisionAmount,
  kOorSuccess,
  kOorFailure,
  kExpired,
  kEnd,
};

const char* to_string(CashKind k);
const char* to_string(EventTag e);

struct LedgerEntry {
  int step = 0;
  double amount = 0.0;  // $M, signed
  CashKind kind = CashKind::kNone;
};

struct EventRecord {
  int step = 0;
  EventTag tag = EventTag::kStart;
  // Detail: injection error (m/s) for launches, utility for Decision 1, k for
  // Decision 2, kg for services, the scheduled step for expired actions.
  double value = 0.0;
};

struct SimOutcome {
  double npv = 0.0;
  std::vector<LedgerEntry> ledger;
  std::vector<EventRecord> events;
};

struct SimOptions {
  bool record = true;  // keep ledger and events; off for bulk Monte Carlo
};

/// Discounted sum of a ledger at the continuously compounded rate.
double npv_from_ledger(const std::vector<LedgerEntry>& ledger, double rf, double dt_yr);

SimOutcome run_lifecycle(const PolicyContext& ctx, RngStream& rng, SimOptions opt = {});
SimOutcome run_lifecycle(const ScenarioParams& p, const DesignPoint& x, RngStream& rng,
                         SimOptions opt = {});

struct McEstimate {
  int n = 0;
  double mean = 0.0;
  double std = 0.0;
  /// mean / std; +/-inf for a degenerate (zero-spread) estimate.
  double ratio() const;
  bool degenerate() const { return std == 0.0; }
};

/// Sample mean and (n-1)-denominator standard deviation of n replicate NPVs.
McEstimate summarize(const std::vector<double>& npvs);

/// Replicate j uses RngStream(master_seed, experiment_index, j). Results are
/// aggregated in replicate order, so any worker count gives identical output.
McEstimate mc_estimate(const ScenarioParams& p, const DesignPoint& x, int n,
                       std::uint64_t master_seed, std::uint64_t experiment_index,
                       unsigned workers = 1);

/// Writes "step,event,cash" rows for one replicate.
void write_event_log(const SimOutcome& out, const std::filesystem::path& path);

}  // namespace oorarch
