#include "consolidate/policy_metrics.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "consolidate/error.hpp"
#include "consolidate/poisson_truncation.hpp"

namespace consolidate {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double value, const std::string& name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(name + " must be positive and finite, got " + std::to_string(value));
  }
}

// Falling factorial moments of Y_q with the orders the lemma excludes
// (k > q) mapped to zero: min(X, q) < k makes the product vanish.
double truncated_moment_or_zero(double mu, int q, int k) {
  if (k > q) return 0.0;
  return trunc_factorial_moment(mu, q, k);
}

// Renewal tables keyed by increment identity and order-up-to level. Readers
// share the lock; a miss builds outside the lock and inserts under the
// exclusive lock.
class TableCache {
 public:
  std::shared_ptr<const RenewalTable> get(double lambda, const Policy& policy, long Q) {
    const Key key = make_key(lambda, policy, Q);
    {
      std::shared_lock lock(mutex_);
      if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    }
    auto table = std::make_shared<const RenewalTable>(renewal_table(increment_for(lambda, policy), Q));
    std::unique_lock lock(mutex_);
    if (tables_.size() >= kCapacity) tables_.clear();
    tables_.emplace(key, table);
    return table;
  }

 private:
  static constexpr std::size_t kCapacity = 256;

  struct Key {
    int kind;
    int q;
    std::uint64_t mu_bits;
    long Q;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = k.mu_bits;
      h ^= (static_cast<std::uint64_t>(k.q) << 32) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h ^= static_cast<std::uint64_t>(k.Q) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h ^= static_cast<std::uint64_t>(k.kind);
      return static_cast<std::size_t>(h);
    }
  };

  static Key make_key(double lambda, const Policy& policy, long Q) {
    return std::visit(Overloaded{
                          [&](const QuantityPolicy& p) { return Key{0, p.q, 0, Q}; },
                          [&](const TimePolicy& p) { return Key{1, 0, std::bit_cast<std::uint64_t>(lambda * p.T), Q}; },
                          [&](const HybridPolicy& p) {
                            return Key{2, p.q, std::bit_cast<std::uint64_t>(lambda * p.T), Q};
                          },
                      },
                      policy);
  }

  std::shared_mutex mutex_;
  std::unordered_map<Key, std::shared_ptr<const RenewalTable>, KeyHash> tables_;
};

TableCache& table_cache() {
  static TableCache cache;
  return cache;
}

ServiceMetrics service_from(const CycleMetrics& c, const ReplenishMetrics& r) {
  return ServiceMetrics{c.e_w / c.e_n, c.e_wsq / c.e_n, r.e_h / r.e_lr};
}

Evaluation assemble(const SystemConfig& cfg, const CycleMetrics& c, const ReplenishMetrics& r, Delay delay) {
  const CostParams& k = cfg.costs;
  const double lambda = cfg.lambda;
  const ServiceMetrics s = service_from(c, r);

  Evaluation ev;
  ev.cycle = c;
  ev.replenish = r;
  ev.aod = s.aod;
  ev.aosd = s.aosd;
  ev.air = s.air;
  ev.components.replenish = lambda * k.replenish_unit + lambda * k.replenish_fixed / (r.e_k * c.e_n);
  ev.components.dispatch = lambda * k.dispatch_unit + lambda * k.dispatch_fixed / c.e_n;
  ev.components.holding = k.holding * s.air;
  ev.components.waiting =
      delay == Delay::linear ? k.wait_linear * lambda * s.aod : k.wait_squared * lambda * s.aosd;
  ev.ac = ev.components.replenish + ev.components.holding + ev.components.dispatch + ev.components.waiting;
  return ev;
}

ReplenishMetrics quantity_replenish(const SystemConfig& cfg) {
  const int q = std::get<QuantityPolicy>(cfg.policy).q;
  const double n = static_cast<double>(cfg.dispatches_per_cycle());
  ReplenishMetrics r;
  r.e_k = n;
  r.e_lr = n * q / cfg.lambda;
  r.e_h = n * (n - 1.0) * q * q / (2.0 * cfg.lambda);
  return r;
}

ReplenishMetrics from_table(const SystemConfig& cfg, const CycleMetrics& c, const RenewalTable& table) {
  ReplenishMetrics r;
  r.e_k = expected_k(table, cfg.Q);
  r.e_lr = r.e_k * c.e_lc;
  r.e_h = c.e_lc * holding_sum(table, cfg.Q);
  r.mode = Mode::exact;
  return r;
}

}  // namespace

PolicyKind kind_of(const Policy& policy) {
  return std::visit(Overloaded{
                        [](const QuantityPolicy&) { return PolicyKind::quantity; },
                        [](const TimePolicy&) { return PolicyKind::time; },
                        [](const HybridPolicy&) { return PolicyKind::hybrid; },
                    },
                    policy);
}

const char* label(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::quantity: return "QP";
    case PolicyKind::time: return "TP";
    case PolicyKind::hybrid: return "HP";
  }
  return "?";
}

const char* to_string(Mode mode) { return mode == Mode::exact ? "exact" : "approx"; }
const char* to_string(Delay delay) { return delay == Delay::linear ? "linear" : "squared"; }

void validate(const Policy& policy) {
  std::visit(Overloaded{
                 [](const QuantityPolicy& p) {
                   if (p.q < 1) throw DomainError("QP dispatch quantity must be >= 1");
                 },
                 [](const TimePolicy& p) { require_positive(p.T, "TP dispatch interval"); },
                 [](const HybridPolicy& p) {
                   if (p.q < 1) throw DomainError("HP dispatch quantity must be >= 1");
                   require_positive(p.T, "HP time limit");
                 },
             },
             policy);
}

void validate(const CostParams& c) {
  const double values[] = {c.replenish_fixed, c.replenish_unit, c.holding,     c.dispatch_fixed,
                           c.dispatch_unit,   c.wait_linear,    c.wait_squared};
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("cost coefficients must be finite and >= 0");
  }
}

SystemConfig SystemConfig::quantity(double lambda, int q, long n, CostParams costs) {
  if (n < 1) throw DomainError("QP dispatch count n must be >= 1, got " + std::to_string(n));
  if (q < 1) throw DomainError("QP dispatch quantity must be >= 1");
  return SystemConfig{lambda, QuantityPolicy{q}, (n - 1) * static_cast<long>(q), costs};
}

SystemConfig SystemConfig::time(double lambda, double T, long Q, CostParams costs) {
  return SystemConfig{lambda, TimePolicy{T}, Q, costs};
}

SystemConfig SystemConfig::hybrid(double lambda, int q, double T, long Q, CostParams costs) {
  return SystemConfig{lambda, HybridPolicy{q, T}, Q, costs};
}

long SystemConfig::dispatches_per_cycle() const {
  const auto* qp = std::get_if<QuantityPolicy>(&policy);
  if (qp == nullptr) throw DomainError("dispatch count is fixed only under QP");
  return Q / qp->q + 1;
}

void validate(const SystemConfig& cfg) {
  require_positive(cfg.lambda, "demand rate");
  validate(cfg.policy);
  validate(cfg.costs);
  if (cfg.Q < 0) throw DomainError("order-up-to level must be >= 0");
  if (const auto* qp = std::get_if<QuantityPolicy>(&cfg.policy); qp && cfg.Q % qp->q != 0) {
    throw DomainError("QP order-up-to level must be a multiple of q");
  }
}

IncrementDist increment_for(double lambda, const Policy& policy) {
  return std::visit(Overloaded{
                        [](const QuantityPolicy& p) {
                          IncrementDist inc;
                          inc.masses.assign(static_cast<std::size_t>(p.q) + 1, 0.0);
                          inc.masses[p.q] = 1.0;
                          return inc;
                        },
                        [&](const TimePolicy& p) { return build_increment_tp(lambda, p.T); },
                        [&](const HybridPolicy& p) { return build_increment_hp(lambda, p.q, p.T); },
                    },
                    policy);
}

CycleMetrics cycle_metrics(double lambda, const Policy& policy) {
  require_positive(lambda, "demand rate");
  validate(policy);
  return std::visit(Overloaded{
                        [&](const QuantityPolicy& p) {
                          const double q = p.q;
                          return CycleMetrics{q / lambda, q, q * (q - 1.0) / (2.0 * lambda),
                                              (q * q * q - q) / (3.0 * lambda * lambda)};
                        },
                        [&](const TimePolicy& p) {
                          const double T = p.T;
                          return CycleMetrics{T, lambda * T, lambda * T * T / 2.0, lambda * T * T * T / 3.0};
                        },
                        [&](const HybridPolicy& p) {
                          const double mu = lambda * p.T;
                          const double mean = trunc_factorial_moment(mu, p.q, 1);
                          return CycleMetrics{mean / lambda, mean,
                                              truncated_moment_or_zero(mu, p.q, 2) / (2.0 * lambda),
                                              truncated_moment_or_zero(mu, p.q + 1, 3) / (3.0 * lambda * lambda)};
                        },
                    },
                    policy);
}

ReplenishMetrics replenish_metrics_exact(const SystemConfig& cfg) {
  validate(cfg);
  if (kind_of(cfg.policy) == PolicyKind::quantity) return quantity_replenish(cfg);
  const CycleMetrics c = cycle_metrics(cfg.lambda, cfg.policy);
  const auto table = table_cache().get(cfg.lambda, cfg.policy, cfg.Q);
  return from_table(cfg, c, *table);
}

ReplenishMetrics replenish_metrics_approx(const SystemConfig& cfg) {
  validate(cfg);
  if (kind_of(cfg.policy) == PolicyKind::quantity) {
    ReplenishMetrics r = quantity_replenish(cfg);
    r.mode = Mode::approx;
    return r;
  }
  const CycleMetrics c = cycle_metrics(cfg.lambda, cfg.policy);
  const double Q = static_cast<double>(cfg.Q);
  ReplenishMetrics r;
  r.e_k = (Q + 1.0) / c.e_n;
  r.e_lr = (Q + 1.0) / cfg.lambda;
  r.e_h = c.e_n * Q / cfg.lambda + Q * (Q + 1.0) / (2.0 * cfg.lambda);
  r.mode = Mode::approx;
  return r;
}

ReplenishMetrics replenish_metrics(const SystemConfig& cfg, Mode mode) {
  return mode == Mode::exact ? replenish_metrics_exact(cfg) : replenish_metrics_approx(cfg);
}

ServiceMetrics service_metrics(const SystemConfig& cfg, Mode mode) {
  const CycleMetrics c = cycle_metrics(cfg.lambda, cfg.policy);
  return service_from(c, replenish_metrics(cfg, mode));
}

Evaluation average_cost(const SystemConfig& cfg, Mode mode, Delay delay) {
  const ReplenishMetrics r = replenish_metrics(cfg, mode);
  return assemble(cfg, cycle_metrics(cfg.lambda, cfg.policy), r, delay);
}

Evaluation average_cost_with_table(const SystemConfig& cfg, const RenewalTable& table, Delay delay) {
  validate(cfg);
  if (kind_of(cfg.policy) == PolicyKind::quantity) {
    throw DomainError("QP is evaluated in closed form, not from a renewal table");
  }
  const CycleMetrics c = cycle_metrics(cfg.lambda, cfg.policy);
  return assemble(cfg, c, from_table(cfg, c, table), delay);
}

double match_consolidation_cycle(double lambda, double target_elc, int q_h) {
  require_positive(lambda, "demand rate");
  require_positive(target_elc, "target consolidation cycle length");
  if (q_h < 1) throw DomainError("HP dispatch quantity must be >= 1");
  const double target = lambda * target_elc;
  if (target >= static_cast<double>(q_h)) {
    throw InfeasibleError("E[min(Poisson, " + std::to_string(q_h) + ")] < " + std::to_string(q_h) +
                          " cannot reach lambda * E[L^C] = " + std::to_string(target));
  }
  auto excess = [&](double mu) { return trunc_factorial_moment(mu, q_h, 1) - target; };

  double lo = 1e-8;
  double hi = 50.0 * std::max(1.0, target);
  if (excess(lo) > 0.0) {
    throw ToleranceError("target consolidation load " + std::to_string(target) + " below the search bracket");
  }
  for (int grow = 0; excess(hi) < 0.0; ++grow) {
    if (grow >= 60) throw ToleranceError("could not bracket the matching time limit");
    lo = hi;
    hi *= 2.0;
  }
  double best = lo;
  double best_gap = std::abs(excess(lo));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f = excess(mid);
    if (std::abs(f) < best_gap) {
      best = mid;
      best_gap = std::abs(f);
    }
    if (f == 0.0) break;
    (f < 0.0 ? lo : hi) = mid;
  }
  if (best_gap > 1e-9) {
    throw ToleranceError("matching residual " + std::to_string(best_gap) + " above 1e-9");
  }
  return best / lambda;
}

}  // namespace consolidate
