#pragma once

// Analytic performance of the integrated replenishment/dispatch system under
// quantity-based (QP), time-based (TP) and hybrid (HP) consolidation.

#include <string>
#include <variant>

#include "consolidate/renewal_engine.hpp"

namespace consolidate {

/// Dispatch once q orders have accumulated.
struct QuantityPolicy {
  int q = 1;
};

/// Dispatch every T time units.
struct TimePolicy {
  double T = 1.0;
};

/// Dispatch at the q-th order or T after the previous dispatch, whichever
/// comes first.
struct HybridPolicy {
  int q = 1;
  double T = 1.0;
};

using Policy = std::variant<QuantityPolicy, TimePolicy, HybridPolicy>;

enum class PolicyKind { quantity, time, hybrid };

PolicyKind kind_of(const Policy& policy);
const char* label(PolicyKind kind);  // "QP", "TP", "HP"
void validate(const Policy& policy);

struct CostParams {
  double replenish_fixed = 0.0;  // A_R
  double replenish_unit = 0.0;   // c_R
  double holding = 0.0;          // h
  double dispatch_fixed = 0.0;   // A_D
  double dispatch_unit = 0.0;    // c_D
  double wait_linear = 0.0;      // omega
  double wait_squared = 0.0;     // omega'
};

void validate(const CostParams& costs);

/// For QP the order-up-to level is (n - 1) q, where n is the number of
/// dispatches per replenishment cycle; use SystemConfig::quantity to build it.
struct SystemConfig {
  double lambda = 1.0;
  Policy policy = QuantityPolicy{};
  long Q = 0;
  CostParams costs;

  static SystemConfig quantity(double lambda, int q, long n, CostParams costs = {});
  static SystemConfig time(double lambda, double T, long Q, CostParams costs = {});
  static SystemConfig hybrid(double lambda, int q, double T, long Q, CostParams costs = {});

  /// Dispatches per replenishment cycle for QP (Q / q + 1).
  long dispatches_per_cycle() const;
};

void validate(const SystemConfig& cfg);

enum class Mode { exact, approx };
enum class Delay { linear, squared };

const char* to_string(Mode mode);
const char* to_string(Delay delay);

/// Per consolidation cycle expectations.
struct CycleMetrics {
  double e_lc = 0.0;    // E[L^C], cycle length
  double e_n = 0.0;     // E[N], orders per cycle
  double e_w = 0.0;     // E[W], cumulative linear wait
  double e_wsq = 0.0;   // E[W'], cumulative squared wait
};

/// Per replenishment cycle expectations.
struct ReplenishMetrics {
  double e_k = 0.0;   // E[K], dispatches per replenishment cycle
  double e_lr = 0.0;  // E[L^R]
  double e_h = 0.0;   // E[H], inventory-time carried
  Mode mode = Mode::exact;
};

struct ServiceMetrics {
  double aod = 0.0;
  double aosd = 0.0;
  double air = 0.0;
};

struct CostBreakdown {
  double replenish = 0.0;
  double holding = 0.0;
  double dispatch = 0.0;
  double waiting = 0.0;
};

struct Evaluation {
  double ac = 0.0;
  CostBreakdown components;
  double aod = 0.0;
  double aosd = 0.0;
  double air = 0.0;
  CycleMetrics cycle;
  ReplenishMetrics replenish;
};

CycleMetrics cycle_metrics(double lambda, const Policy& policy);

/// Exact renewal-based metrics. HP/TP go through renewal_engine; QP is
/// deterministic.
ReplenishMetrics replenish_metrics_exact(const SystemConfig& cfg);

/// Continuous-K approximation E[K] ~ (Q + 1) / E[N]. QP has no approximation
/// error and returns its exact values.
ReplenishMetrics replenish_metrics_approx(const SystemConfig& cfg);

ReplenishMetrics replenish_metrics(const SystemConfig& cfg, Mode mode);

ServiceMetrics service_metrics(const SystemConfig& cfg, Mode mode = Mode::exact);

/// Long-run average cost per unit time with its four components. Under
/// Delay::squared the waiting component is omega' * lambda * AOSD.
Evaluation average_cost(const SystemConfig& cfg, Mode mode = Mode::exact, Delay delay = Delay::linear);

/// Same as average_cost but reads E[K] and the holding sum from a prebuilt
/// renewal table whose range covers cfg.Q (HP/TP only).
Evaluation average_cost_with_table(const SystemConfig& cfg, const RenewalTable& table, Delay delay);

/// The renewal increment a policy induces (HP: truncated Poisson, TP:
/// Poisson, QP: point mass at q).
IncrementDist increment_for(double lambda, const Policy& policy);

/// T_H such that E[min(Poisson(lambda T_H), q_H)] = lambda * target_elc.
/// Throws InfeasibleError when lambda * target_elc >= q_H.
double match_consolidation_cycle(double lambda, double target_elc, int q_h);

}  // namespace consolidate
