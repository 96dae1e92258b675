#include <cmath>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "consolidate/error.hpp"
#include "consolidate/policy_metrics.hpp"
#include "consolidate/warehouse_sim.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace consolidate;
using doctest::Approx;

namespace {

bool within_se(const SimEstimate& e, double truth, double k) {
  // Quantities that are deterministic per cycle have se == 0; allow rounding.
  return std::abs(e.mean - truth) <= k * e.se + 1e-9 * std::max(1.0, std::abs(truth));
}

bool identical(const SimEstimate& a, const SimEstimate& b) {
  return std::memcmp(&a.mean, &b.mean, sizeof(double)) == 0 && std::memcmp(&a.se, &b.se, sizeof(double)) == 0 &&
         a.n == b.n;
}

bool identical(const SimReport& a, const SimReport& b) {
  return identical(a.ac, b.ac) && identical(a.aod, b.aod) && identical(a.aosd, b.aosd) && identical(a.air, b.air) &&
         identical(a.e_lc, b.e_lc) && identical(a.e_lr, b.e_lr) && identical(a.e_k, b.e_k) &&
         identical(a.e_n, b.e_n) && identical(a.dispatch_rate, b.dispatch_rate) && a.batches == b.batches;
}

const CostParams kCosts{25.0, 1.0, 0.4, 15.0, 1.0, 0.8, 0.3};

}  // namespace

TEST_CASE("per_order_delays examples") {
  const std::vector<double> one{1.0};
  DelaySums d = per_order_delays(one, 3.0);
  CHECK(d.linear == 2.0);
  CHECK(d.squared == 4.0);

  const std::vector<double> two{0.5, 1.0};
  d = per_order_delays(two, 1.0);
  CHECK(d.linear == 0.5);
  CHECK(d.squared == 0.25);

  const std::vector<double> none;
  d = per_order_delays(none, 2.0);
  CHECK(d.linear == 0.0);

  oracle::Gen gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> arrivals;
    double t = 0.0;
    const long n = gen.integer(0, 30);
    for (long i = 0; i < n; ++i) arrivals.push_back(t += gen.uniform(0.0, 1.0));
    const double dispatch = t + gen.uniform(0.0, 1.0);
    double lin = 0.0, sq = 0.0;
    for (double a : arrivals) {
      lin += dispatch - a;
      sq += (dispatch - a) * (dispatch - a);
    }
    d = per_order_delays(arrivals, dispatch);
    CHECK(d.linear == Approx(lin).epsilon(1e-14));
    CHECK(d.squared == Approx(sq).epsilon(1e-14));
  }
}

TEST_CASE("simulation config validation") {
  SimConfig cfg;
  cfg.system = SystemConfig::hybrid(1.0, 3, 2.0, 5, kCosts);
  cfg.n_cycles = 99;
  CHECK_THROWS_AS(simulate(cfg), ConfigError);
  cfg.n_cycles = 150;  // not a multiple of 100 default batches
  CHECK_THROWS_AS(simulate(cfg), ConfigError);
  cfg.batch_size = 50;
  CHECK(resolved_batch_size(cfg) == 50);
  cfg.batch_size = 150;  // one batch only
  CHECK_THROWS_AS(simulate(cfg), ConfigError);
  cfg.batch_size = 7;
  CHECK_THROWS_AS(simulate(cfg), ConfigError);
  cfg.batch_size = 0;
  cfg.n_cycles = 1000;
  cfg.system.lambda = -1.0;
  CHECK_THROWS_AS(simulate(cfg), ConfigError);
}

TEST_CASE("seed determinism and thread independence") {
  SimConfig cfg;
  cfg.system = SystemConfig::hybrid(1.0, 6, 5.9199, 14, kCosts);
  cfg.n_cycles = 20000;
  cfg.seed = 7;
  cfg.threads = 1;
  const SimReport a = simulate(cfg);
  const SimReport b = simulate(cfg);
  CHECK(identical(a, b));
  cfg.threads = 4;
  CHECK(identical(a, simulate(cfg)));
  cfg.seed = 8;
  CHECK_FALSE(identical(a, simulate(cfg)));
}

TEST_CASE("trace emits every cycle in order and matches the report") {
  SimConfig cfg;
  cfg.system = SystemConfig::time(2.0, 1.5, 8, kCosts);
  cfg.n_cycles = 5000;
  cfg.threads = 3;
  std::vector<CycleRecord> records;
  const SimReport r = simulate(cfg, [&](const CycleRecord& rec) { records.push_back(rec); });
  REQUIRE(records.size() == 5000);
  double cost = 0, length = 0, k = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].cycle_index == static_cast<long>(i));
    CHECK(records[i].orders == records[i].replenished);
    CHECK(records[i].k_cycles >= 1);
    cost += records[i].cost;
    length += records[i].length;
    k += static_cast<double>(records[i].k_cycles);
  }
  CHECK(r.ac.mean == Approx(cost / length).epsilon(1e-12));
  CHECK(r.e_k.mean == Approx(k / 5000.0).epsilon(1e-12));
}

TEST_CASE("QP with q = 1 dispatches every order immediately") {
  SimConfig cfg;
  cfg.system = SystemConfig::quantity(1.0, 1, 1, CostParams{0, 0, 0, 4.0, 0, 0, 0});
  cfg.n_cycles = 100000;
  cfg.seed = 3;
  const SimReport r = simulate(cfg);
  CHECK(r.aod.mean == 0.0);
  CHECK(r.aosd.mean == 0.0);
  CHECK(within_se(r.ac, 4.0, 3.0));
  CHECK(r.e_n.mean == 1.0);
  CHECK(r.e_n.se == 0.0);
}

TEST_CASE("simulation agrees with the exact analytics within 3 SE") {
  struct Case {
    SystemConfig system;
    Delay delay;
    std::uint64_t seed;
  };
  const std::vector<Case> cases{
      {SystemConfig::hybrid(1.0, 6, 5.9199, 14, kCosts), Delay::linear, 101},
      {SystemConfig::time(2.0, 1.5, 8, kCosts), Delay::linear, 102},
      {SystemConfig::hybrid(1.0, 3, 2.0, 8, kCosts), Delay::squared, 103},
      {SystemConfig::quantity(1.5, 4, 3, kCosts), Delay::linear, 104},
      {SystemConfig::time(1.0, 2.0, 9, kCosts), Delay::squared, 105},
  };
  for (const Case& c : cases) {
    SimConfig cfg;
    cfg.system = c.system;
    cfg.n_cycles = 200000;
    cfg.seed = c.seed;
    cfg.delay = c.delay;
    const SimReport r = simulate(cfg);
    const Evaluation ev = average_cost(c.system, Mode::exact, c.delay);
    INFO(label(kind_of(c.system.policy)) << " seed " << c.seed);
    CHECK(within_se(r.ac, ev.ac, 3.0));
    CHECK(within_se(r.aod, ev.aod, 3.0));
    CHECK(within_se(r.aosd, ev.aosd, 3.0));
    CHECK(within_se(r.air, ev.air, 3.0));
    CHECK(within_se(r.e_lc, ev.cycle.e_lc, 3.0));
    CHECK(within_se(r.e_lr, ev.replenish.e_lr, 3.0));
    CHECK(within_se(r.e_k, ev.replenish.e_k, 3.0));
    CHECK(within_se(r.e_n, ev.cycle.e_n, 3.0));
    // Flow conservation in the long run and the martingale identity.
    CHECK(within_se(r.dispatch_rate, c.system.lambda, 4.0));
  }
}

TEST_CASE("simulated inventory-time per cycle matches the renewal holding sum") {
  SimConfig cfg;
  cfg.system = SystemConfig::hybrid(1.0, 3, 2.0, 8, kCosts);
  cfg.n_cycles = 200000;
  cfg.seed = 41;
  std::vector<double> batch(100, 0.0);
  const long per_batch = cfg.n_cycles / 100;
  simulate(cfg, [&](const CycleRecord& rec) { batch[rec.cycle_index / per_batch] += rec.inventory_integral; });
  double mean = 0.0;
  for (double& b : batch) mean += (b /= static_cast<double>(per_batch));
  mean /= 100.0;
  double ss = 0.0;
  for (double b : batch) ss += (b - mean) * (b - mean);
  const double se = std::sqrt(ss / 99.0 / 100.0);
  const double exact = replenish_metrics_exact(cfg.system).e_h;
  CHECK(std::abs(mean - exact) <= 3.0 * se);
}

TEST_CASE("thread cap from environment") {
  ::setenv("CONSOLIDATE_THREADS", "2", 1);
  CHECK(thread_cap_from_env() == 2);
  ::setenv("CONSOLIDATE_THREADS", "abc", 1);
  CHECK(thread_cap_from_env() == 0);
  ::unsetenv("CONSOLIDATE_THREADS");
  CHECK(thread_cap_from_env() == 0);
}
