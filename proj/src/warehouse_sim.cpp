#include "consolidate/warehouse_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "consolidate/error.hpp"

namespace consolidate {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Exponential gaps from a 53-bit uniform, avoiding the library-specific
// algorithms behind std::exponential_distribution.
class ArrivalClock {
 public:
  ArrivalClock(std::uint64_t seed, double lambda) : rng_(seed), rate_(lambda) {}

  double next_gap() {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return -std::log1p(-u) / rate_;
  }

 private:
  std::mt19937_64 rng_;
  double rate_;
};

struct BatchSums {
  double cost = 0.0;
  double length = 0.0;
  double k = 0.0;
  double orders = 0.0;
  double linear = 0.0;
  double squared = 0.0;
  double holding = 0.0;
  long cycles = 0;
};

struct Dispatch {
  int quantity;  // 0 means no quantity trigger
  double time;   // +inf means no time trigger
};

Dispatch dispatch_rule(const Policy& policy) {
  if (const auto* p = std::get_if<QuantityPolicy>(&policy)) {
    return {p->q, std::numeric_limits<double>::infinity()};
  }
  if (const auto* p = std::get_if<TimePolicy>(&policy)) return {0, p->T};
  const auto& p = std::get<HybridPolicy>(policy);
  return {p.q, p.T};
}

class BatchRunner {
 public:
  BatchRunner(const SimConfig& cfg, std::uint64_t stream_seed)
      : cfg_(cfg), rule_(dispatch_rule(cfg.system.policy)), clock_(stream_seed, cfg.system.lambda) {}

  BatchSums run(long first_index, long count, std::vector<CycleRecord>* trace) {
    BatchSums sums;
    for (long c = 0; c < count; ++c) {
      const CycleRecord rec = replenishment_cycle(first_index + c);
      sums.cost += rec.cost;
      sums.length += rec.length;
      sums.k += static_cast<double>(rec.k_cycles);
      sums.orders += static_cast<double>(rec.orders);
      sums.linear += rec.sum_delay;
      sums.squared += rec.sum_sq_delay;
      sums.holding += rec.inventory_integral;
      ++sums.cycles;
      if (trace) trace->push_back(rec);
    }
    return sums;
  }

 private:
  // Arrival epochs of one consolidation cycle (relative to its start) and the
  // dispatch epoch. The quantity trigger wins a tie with the time limit.
  double consolidation_cycle() {
    arrivals_.clear();
    double t = 0.0;
    for (;;) {
      const double next = t + clock_.next_gap();
      if (next > rule_.time) return rule_.time;
      t = next;
      arrivals_.push_back(t);
      if (rule_.quantity > 0 && static_cast<int>(arrivals_.size()) == rule_.quantity) return t;
    }
  }

  CycleRecord replenishment_cycle(long index) {
    const CostParams& costs = cfg_.system.costs;
    const long Q = cfg_.system.Q;
    long inventory = Q;
    CycleRecord rec;
    rec.cycle_index = index;
    for (;;) {
      const double dispatch = consolidation_cycle();
      const long load = static_cast<long>(arrivals_.size());
      const DelaySums delays = per_order_delays(arrivals_, dispatch);
      rec.length += dispatch;
      rec.inventory_integral += static_cast<double>(inventory) * dispatch;
      rec.sum_delay += delays.linear;
      rec.sum_sq_delay += delays.squared;
      rec.orders += load;
      ++rec.k_cycles;
      if (inventory < load) {
        // Replenish up to Q plus the shortfall, then ship the whole load.
        rec.replenished = Q + load - inventory;
        inventory = Q;
        if (rec.replenished != rec.orders) {
          throw InternalError("flow conservation violated in replenishment cycle " + std::to_string(index));
        }
        break;
      }
      inventory -= load;
      if (inventory < 0 || inventory > Q) {
        throw InternalError("inventory left [0, Q] in replenishment cycle " + std::to_string(index));
      }
    }
    const double waiting = cfg_.delay == Delay::linear ? costs.wait_linear * rec.sum_delay
                                                       : costs.wait_squared * rec.sum_sq_delay;
    rec.cost = costs.replenish_fixed + costs.replenish_unit * static_cast<double>(rec.replenished) +
               costs.holding * rec.inventory_integral + costs.dispatch_fixed * static_cast<double>(rec.k_cycles) +
               costs.dispatch_unit * static_cast<double>(rec.orders) + waiting;
    return rec;
  }

  const SimConfig& cfg_;
  Dispatch rule_;
  ArrivalClock clock_;
  std::vector<double> arrivals_;
};

// Overall ratio of sums as the point estimate, spread of per-batch ratios for
// the standard error.
template <class Num, class Den>
SimEstimate ratio_estimate(const std::vector<BatchSums>& batches, long n, Num num, Den den) {
  double total_num = 0.0;
  double total_den = 0.0;
  std::vector<double> ratios;
  ratios.reserve(batches.size());
  for (const BatchSums& b : batches) {
    total_num += num(b);
    total_den += den(b);
    if (den(b) > 0.0) ratios.push_back(num(b) / den(b));
  }
  SimEstimate est;
  est.n = n;
  est.mean = total_den > 0.0 ? total_num / total_den : 0.0;
  if (ratios.size() >= 2) {
    double mean = 0.0;
    for (double r : ratios) mean += r;
    mean /= static_cast<double>(ratios.size());
    double ss = 0.0;
    for (double r : ratios) ss += (r - mean) * (r - mean);
    const double var = ss / static_cast<double>(ratios.size() - 1);
    est.se = std::sqrt(var / static_cast<double>(ratios.size()));
  }
  return est;
}

unsigned worker_count(const SimConfig& cfg, long batches) {
  unsigned n = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  if (const unsigned cap = thread_cap_from_env(); cap != 0) n = std::min(n, cap);
  return static_cast<unsigned>(std::min<long>(n, batches));
}

}  // namespace

unsigned thread_cap_from_env() {
  const char* raw = std::getenv("CONSOLIDATE_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const unsigned long v = std::strtoul(raw, &end, 10);
  if (end == raw || *end != '\0') return 0;
  return static_cast<unsigned>(std::min<unsigned long>(v, 1024));
}

long resolved_batch_size(const SimConfig& cfg) {
  if (cfg.n_cycles < kMinSimCycles) {
    throw ConfigError("simulation needs at least " + std::to_string(kMinSimCycles) + " replenishment cycles, got " +
                      std::to_string(cfg.n_cycles));
  }
  long size = cfg.batch_size;
  if (size == 0) {
    if (cfg.n_cycles % kDefaultBatches != 0) {
      throw ConfigError("cycle count " + std::to_string(cfg.n_cycles) + " is not a multiple of " +
                        std::to_string(kDefaultBatches) + " (default batch count); set batch_size explicitly");
    }
    size = cfg.n_cycles / kDefaultBatches;
  }
  if (size < 1 || cfg.n_cycles % size != 0) {
    throw ConfigError("batch size " + std::to_string(size) + " must divide the cycle count " +
                      std::to_string(cfg.n_cycles));
  }
  if (cfg.n_cycles / size < 2) throw ConfigError("batch means need at least two batches");
  return size;
}

void validate(const SimConfig& cfg) {
  try {
    validate(cfg.system);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  resolved_batch_size(cfg);
}

DelaySums per_order_delays(std::span<const double> arrivals, double dispatch) {
  DelaySums out;
  for (double a : arrivals) {
    const double wait = dispatch - a;
    out.linear += wait;
    out.squared += wait * wait;
  }
  // Same quantity as the integral of N(t) over the cycle.
  double area = 0.0;
  for (std::size_t j = 0; j < arrivals.size(); ++j) {
    const double next = j + 1 < arrivals.size() ? arrivals[j + 1] : dispatch;
    area += static_cast<double>(j + 1) * (next - arrivals[j]);
  }
  const double scale = std::max(1.0, std::abs(out.linear)) * static_cast<double>(arrivals.size() + 1);
  if (std::abs(area - out.linear) > 1e-12 * scale) {
    throw InternalError("per-order delay sum disagrees with the order-count area");
  }
  return out;
}

SimReport simulate(const SimConfig& cfg, const TraceSink& trace) {
  validate(cfg);
  const long batch_size = resolved_batch_size(cfg);
  const long n_batches = cfg.n_cycles / batch_size;
  std::vector<BatchSums> sums(static_cast<std::size_t>(n_batches));
  std::vector<std::vector<CycleRecord>> traces(trace ? sums.size() : 0);

  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const long b = next.fetch_add(1);
      if (b >= n_batches) return;
      try {
        BatchRunner runner(cfg, splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(b))));
        sums[b] = runner.run(b * batch_size, batch_size, trace ? &traces[b] : nullptr);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_batches);
        return;
      }
    }
  };
  const unsigned workers = worker_count(cfg, n_batches);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  if (trace) {
    for (const auto& batch : traces) {
      for (const CycleRecord& rec : batch) trace(rec);
    }
  }

  const long n = cfg.n_cycles;
  const double cycles_per_batch = static_cast<double>(batch_size);
  SimReport r;
  r.batches = n_batches;
  r.ac = ratio_estimate(sums, n, [](const BatchSums& b) { return b.cost; }, [](const BatchSums& b) { return b.length; });
  r.aod = ratio_estimate(sums, n, [](const BatchSums& b) { return b.linear; }, [](const BatchSums& b) { return b.orders; });
  r.aosd = ratio_estimate(sums, n, [](const BatchSums& b) { return b.squared; }, [](const BatchSums& b) { return b.orders; });
  r.air = ratio_estimate(sums, n, [](const BatchSums& b) { return b.holding; }, [](const BatchSums& b) { return b.length; });
  r.e_lc = ratio_estimate(sums, n, [](const BatchSums& b) { return b.length; }, [](const BatchSums& b) { return b.k; });
  r.e_n = ratio_estimate(sums, n, [](const BatchSums& b) { return b.orders; }, [](const BatchSums& b) { return b.k; });
  r.e_lr = ratio_estimate(sums, n, [](const BatchSums& b) { return b.length; },
                          [cycles_per_batch](const BatchSums&) { return cycles_per_batch; });
  r.e_k = ratio_estimate(sums, n, [](const BatchSums& b) { return b.k; },
                         [cycles_per_batch](const BatchSums&) { return cycles_per_batch; });
  r.dispatch_rate =
      ratio_estimate(sums, n, [](const BatchSums& b) { return b.orders; }, [](const BatchSums& b) { return b.length; });
  return r;
}

}  // namespace consolidate
