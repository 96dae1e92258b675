#pragma once

// Discrete-event Monte Carlo of the warehouse. Replenishment cycles are i.i.d.
// regeneration cycles, so every long-run metric is a renewal-reward ratio
// estimated with batch means.

#include <cstdint>
#include <functional>
#include <span>

#include "consolidate/policy_metrics.hpp"

namespace consolidate {

inline constexpr long kMinSimCycles = 100;
inline constexpr long kDefaultBatches = 100;

struct SimConfig {
  SystemConfig system;
  long n_cycles = 100000;        // replenishment cycles
  std::uint64_t seed = 1;
  long batch_size = 0;           // 0: n_cycles / kDefaultBatches
  Delay delay = Delay::linear;   // which waiting penalty enters the cost
  unsigned threads = 0;          // 0: hardware concurrency, capped by CONSOLIDATE_THREADS
};

/// Effective batch size after defaulting; throws ConfigError on invalid
/// combinations.
long resolved_batch_size(const SimConfig& cfg);
void validate(const SimConfig& cfg);

struct SimEstimate {
  double mean = 0.0;
  double se = 0.0;
  long n = 0;
};

struct SimReport {
  SimEstimate ac;
  SimEstimate aod;
  SimEstimate aosd;
  SimEstimate air;
  SimEstimate e_lc;
  SimEstimate e_lr;
  SimEstimate e_k;
  SimEstimate e_n;
  SimEstimate dispatch_rate;  // units dispatched per unit time
  long batches = 0;
};

/// One replenishment cycle, as written to the CSV trace.
struct CycleRecord {
  long cycle_index = 0;
  double length = 0.0;
  long k_cycles = 0;
  double cost = 0.0;
  double sum_delay = 0.0;
  double sum_sq_delay = 0.0;
  double inventory_integral = 0.0;
  long orders = 0;
  long replenished = 0;
};

using TraceSink = std::function<void(const CycleRecord&)>;

/// Runs the simulation. Deterministic for a given config, independent of the
/// thread count. When `trace` is set it receives every cycle in index order.
SimReport simulate(const SimConfig& cfg, const TraceSink& trace = {});

struct DelaySums {
  double linear = 0.0;
  double squared = 0.0;
};

/// Sum over orders of (dispatch - arrival) and its square, for arrival epochs
/// measured from the cycle start. The linear sum is cross-checked against the
/// area under the order-count path; a mismatch throws InternalError.
DelaySums per_order_delays(std::span<const double> arrivals, double dispatch);

/// Worker cap from CONSOLIDATE_THREADS (0 when unset or invalid).
unsigned thread_cap_from_env();

}  // namespace consolidate
