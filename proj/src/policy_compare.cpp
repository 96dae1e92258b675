#include "consolidate/policy_compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <tuple>

#include "consolidate/error.hpp"

namespace consolidate {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_integer(double x, long& rounded) {
  rounded = std::lround(x);
  return std::abs(x - static_cast<double>(rounded)) <= 1e-9;
}

std::string hp_label(int q_h) { return "HP(q=" + std::to_string(q_h) + ")"; }

void fill_metrics(ComparisonRow& row, double lambda, const Policy& policy, const MatchSpec& spec,
                  const std::optional<CostParams>& costs) {
  const CycleMetrics c = cycle_metrics(lambda, policy);
  row.e_lc = c.e_lc;
  row.aod = c.e_w / c.e_n;
  row.aosd = c.e_wsq / c.e_n;
  if (!spec.target_elr) return;

  SystemConfig cfg{lambda, policy, row.Q, costs.value_or(CostParams{})};
  const Evaluation approx = average_cost(cfg, Mode::approx, Delay::linear);
  row.air_approx = approx.air;
  if (costs) row.ac_approx = approx.ac;
  try {
    const Evaluation exact = average_cost(cfg, Mode::exact, Delay::linear);
    row.air_exact = exact.air;
    row.e_lr_exact = exact.replenish.e_lr;
    if (costs) row.ac_exact = exact.ac;
  } catch (const Error& e) {
    row.note += (row.note.empty() ? "" : "; ") + std::string("exact evaluation failed: ") + e.what();
  }
}

ComparisonRow infeasible_row(PolicyKind kind, std::string label, std::string note) {
  ComparisonRow row;
  row.kind = kind;
  row.label = std::move(label);
  row.feasible = false;
  row.note = std::move(note);
  row.e_lc = row.aod = row.aosd = kNaN;
  return row;
}

}  // namespace

Comparison compare_matched(const MatchSpec& spec, const std::optional<CostParams>& costs,
                           const std::vector<int>& qh_list) {
  if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda)) throw DomainError("demand rate must be positive");
  if (!(spec.target_elc > 0.0) || !std::isfinite(spec.target_elc)) {
    throw DomainError("target consolidation cycle length must be positive");
  }
  if (spec.target_elr && !(*spec.target_elr >= spec.target_elc)) {
    throw DomainError("target replenishment cycle length must be >= the consolidation cycle length");
  }
  if (costs) validate(*costs);

  Comparison out;
  out.spec = spec;
  const double lambda = spec.lambda;
  const double load = lambda * spec.target_elc;

  long Q = 0;
  double Q_rounding = 0.0;
  if (spec.target_elr) {
    const double raw = lambda * *spec.target_elr - 1.0;
    Q = std::max(0L, std::lround(raw));
    Q_rounding = static_cast<double>(Q) - raw;
  }

  // QP
  long q_int = 0;
  if (is_integer(load, q_int) && q_int >= 1) {
    ComparisonRow row;
    row.kind = PolicyKind::quantity;
    row.label = "QP";
    row.q = static_cast<int>(q_int);
    if (spec.target_elr) {
      const double n_raw = lambda * *spec.target_elr / static_cast<double>(q_int);
      row.n = std::max(1L, std::lround(n_raw));
      row.Q = (row.n - 1) * q_int;
      if (std::abs(n_raw - static_cast<double>(row.n)) > 1e-9) {
        row.approximate = true;
        row.note = "n rounded from " + std::to_string(n_raw);
      }
    }
    fill_metrics(row, lambda, QuantityPolicy{row.q}, spec, costs);
    out.rows.push_back(std::move(row));
  } else {
    out.rows.push_back(infeasible_row(PolicyKind::quantity, "QP",
                                      "lambda * E[L^C] = " + std::to_string(load) + " is not a positive integer"));
  }

  // TP
  {
    ComparisonRow row;
    row.kind = PolicyKind::time;
    row.label = "TP";
    row.T = spec.target_elc;
    row.Q = Q;
    row.Q_rounding = Q_rounding;
    row.approximate = spec.target_elr && std::abs(Q_rounding) > 1e-9;
    fill_metrics(row, lambda, TimePolicy{row.T}, spec, costs);
    out.rows.push_back(std::move(row));
  }

  // HP
  for (int q_h : qh_list) {
    if (q_h < 1 || static_cast<double>(q_h) <= load) {
      out.rows.push_back(infeasible_row(PolicyKind::hybrid, hp_label(q_h),
                                        "q_H must exceed lambda * E[L^C] = " + std::to_string(load)));
      continue;
    }
    ComparisonRow row;
    row.kind = PolicyKind::hybrid;
    row.label = hp_label(q_h);
    row.q = q_h;
    row.T = match_consolidation_cycle(lambda, spec.target_elc, q_h);
    row.Q = Q;
    row.Q_rounding = Q_rounding;
    row.approximate = spec.target_elr && std::abs(Q_rounding) > 1e-9;
    fill_metrics(row, lambda, HybridPolicy{q_h, row.T}, spec, costs);
    out.rows.push_back(std::move(row));
  }

  const ComparisonRow& qp = out.rows[0];
  const ComparisonRow& tp = out.rows[1];
  ComparisonVerdicts& v = out.verdicts;
  if (qp.feasible) v.aosd_vs_tp = qp.aosd < tp.aosd;
  const bool with_air = spec.target_elr.has_value();
  const bool with_ac = with_air && costs.has_value();
  if (with_air) v.air_order = true;
  if (with_ac) v.ac_order = true;
  for (std::size_t i = 2; i < out.rows.size(); ++i) {
    const ComparisonRow& hp = out.rows[i];
    if (!hp.feasible) continue;
    if (qp.feasible) {
      v.aod_order = v.aod_order && qp.aod < hp.aod;
      if (hp.aosd < qp.aosd) ++v.aosd_hp_below_qp;
      if (hp.aosd > qp.aosd) ++v.aosd_hp_above_qp;
    }
    v.aod_order = v.aod_order && hp.aod < tp.aod;
    v.aosd_vs_tp = v.aosd_vs_tp && hp.aosd < tp.aosd;
    if (with_air) {
      const double rel = std::abs(*tp.air_approx - *hp.air_approx) / *tp.air_approx;
      bool ok = rel <= kAirRelativeTolerance;
      if (qp.feasible) ok = ok && *hp.air_approx >= *qp.air_approx;
      *v.air_order = *v.air_order && ok;
    }
    if (with_ac) {
      bool ok = *hp.ac_approx <= *tp.ac_approx + kAcOrderSlack;
      if (qp.feasible) ok = ok && *qp.ac_approx <= *hp.ac_approx + kAcOrderSlack;
      *v.ac_order = *v.ac_order && ok;
    }
  }
  return out;
}

VerifyReport verify_theorems(const VerifyGrid& grid) {
  validate(grid.costs);
  VerifyReport report;
  report.t4_min_margin = std::numeric_limits<double>::infinity();
  auto violation = [&](const char* theorem, double lambda, int q, int q_h, long ratio, std::string detail) {
    report.violations.push_back(Violation{theorem, lambda, q, q_h, ratio, std::move(detail)});
  };

  for (double lambda : grid.lambdas) {
    for (int q : grid.q_values) {
      const double elc = q / lambda;
      const CycleMetrics qp = cycle_metrics(lambda, QuantityPolicy{q});
      const CycleMetrics tp = cycle_metrics(lambda, TimePolicy{elc});
      const double aod_qp = qp.e_w / qp.e_n, aod_tp = tp.e_w / tp.e_n;
      const double aosd_qp = qp.e_wsq / qp.e_n, aosd_tp = tp.e_wsq / tp.e_n;

      ++report.t2_checks;
      if (!(aosd_qp < aosd_tp)) {
        ++report.t2_violations;
        violation("T2", lambda, q, 0, 0, "AOSD_QP >= AOSD_TP");
      }

      for (int offset : grid.qh_offsets) {
        const int q_h = q + offset;
        const double T_h = match_consolidation_cycle(lambda, elc, q_h);
        const HybridPolicy hp_policy{q_h, T_h};
        const CycleMetrics hp = cycle_metrics(lambda, hp_policy);
        const double aod_hp = hp.e_w / hp.e_n, aosd_hp = hp.e_wsq / hp.e_n;

        ++report.t1_checks;
        if (!(aod_qp < aod_hp && aod_hp < aod_tp)) {
          ++report.t1_violations;
          std::ostringstream os;
          os.precision(17);
          os << "AOD QP=" << aod_qp << " HP=" << aod_hp << " TP=" << aod_tp;
          violation("T1", lambda, q, q_h, 0, os.str());
        }
        ++report.t2_checks;
        if (!(aosd_hp < aosd_tp)) {
          ++report.t2_violations;
          violation("T2", lambda, q, q_h, 0, "AOSD_HP >= AOSD_TP");
        }
        if (aosd_hp < aosd_qp) ++report.t2_hp_below_qp;
        if (aosd_hp > aosd_qp) ++report.t2_hp_above_qp;

        for (long ratio : grid.elr_ratios) {
          const long n = ratio;
          const long Q = n * q - 1;  // lambda E[L^R] - 1 with E[L^R] = ratio * E[L^C]
          const SystemConfig qp_cfg = SystemConfig::quantity(lambda, q, n, grid.costs);
          const SystemConfig tp_cfg = SystemConfig::time(lambda, elc, Q, grid.costs);
          const SystemConfig hp_cfg = SystemConfig::hybrid(lambda, q_h, T_h, Q, grid.costs);
          const Evaluation qp_e = average_cost(qp_cfg, Mode::approx, Delay::linear);
          const Evaluation tp_e = average_cost(tp_cfg, Mode::approx, Delay::linear);
          const Evaluation hp_e = average_cost(hp_cfg, Mode::approx, Delay::linear);

          ++report.t3_checks;
          const double rel = std::abs(tp_e.air - hp_e.air) / tp_e.air;
          report.t3_max_rel_diff_approx = std::max(report.t3_max_rel_diff_approx, rel);
          if (!(rel <= kAirRelativeTolerance && hp_e.air >= qp_e.air)) {
            ++report.t3_violations;
            violation("T3", lambda, q, q_h, ratio, "AIR ordering outside tolerance");
          }
          const double air_tp_exact = service_metrics(tp_cfg, Mode::exact).air;
          const double air_hp_exact = service_metrics(hp_cfg, Mode::exact).air;
          report.t3_max_rel_diff_exact =
              std::max(report.t3_max_rel_diff_exact, std::abs(air_tp_exact - air_hp_exact) / air_tp_exact);

          ++report.t4_checks;
          const double margin = std::min(hp_e.ac - qp_e.ac, tp_e.ac - hp_e.ac);
          report.t4_min_margin = std::min(report.t4_min_margin, margin);
          if (!(qp_e.ac <= hp_e.ac + kAcOrderSlack && hp_e.ac <= tp_e.ac + kAcOrderSlack)) {
            ++report.t4_violations;
            std::ostringstream os;
            os.precision(17);
            os << "AC QP=" << qp_e.ac << " HP=" << hp_e.ac << " TP=" << tp_e.ac;
            violation("T4", lambda, q, q_h, ratio, os.str());
          }
        }
      }
    }
  }
  if (report.t4_checks == 0) report.t4_min_margin = 0.0;
  return report;
}

namespace {

class Recorder {
 public:
  explicit Recorder(OptimResult& result) : result_(result) {}

  void add(const EvalRecord& rec) {
    result_.trace.push_back(rec);
    if (!have_best_ || better(rec, best_)) {
      best_ = rec;
      have_best_ = true;
    }
  }

  bool has_best() const { return have_best_; }
  const EvalRecord& best() const { return best_; }

 private:
  static bool better(const EvalRecord& a, const EvalRecord& b) {
    return std::tie(a.ac, a.Q, a.q, a.T) < std::tie(b.ac, b.Q, b.q, b.T);
  }

  OptimResult& result_;
  EvalRecord best_;
  bool have_best_ = false;
};

Policy make_policy(PolicyKind kind, int q, double T) {
  if (kind == PolicyKind::time) return TimePolicy{T};
  return HybridPolicy{q, T};
}

// Coarse scan over T for every Q at once (one renewal table per T covers all
// Q), then golden-section refinement around the best scan point per Q.
void search_time_dimension(double lambda, const CostParams& costs, PolicyKind kind, int q,
                           const OptimBounds& bounds, const OptimOptions& options, Recorder& rec) {
  const int S = options.scan_points;
  const long Qn = bounds.Q_max + 1;
  const double step = bounds.T_max / S;
  std::vector<double> scan(static_cast<std::size_t>(Qn * S));

  for (int i = 1; i <= S; ++i) {
    const double T = step * i;
    const Policy policy = make_policy(kind, q, T);
    std::optional<RenewalTable> table;
    if (options.mode == Mode::exact) {
      table = renewal_table(increment_for(lambda, policy), bounds.Q_max);
    }
    for (long Q = 0; Q < Qn; ++Q) {
      const SystemConfig cfg{lambda, policy, Q, costs};
      const double ac = table ? average_cost_with_table(cfg, *table, options.delay).ac
                              : average_cost(cfg, Mode::approx, options.delay).ac;
      scan[Q * S + (i - 1)] = ac;
      rec.add(EvalRecord{kind == PolicyKind::time ? 0 : q, Q, 0, T, ac, false});
    }
  }

  for (long Q = 0; Q < Qn; ++Q) {
    auto objective = [&](double T) {
      const Policy policy = make_policy(kind, q, T);
      const SystemConfig cfg{lambda, policy, Q, costs};
      double ac;
      if (options.mode == Mode::exact) {
        ac = average_cost_with_table(cfg, renewal_table(increment_for(lambda, policy), Q), options.delay).ac;
      } else {
        ac = average_cost(cfg, Mode::approx, options.delay).ac;
      }
      rec.add(EvalRecord{kind == PolicyKind::time ? 0 : q, Q, 0, T, ac, true});
      return ac;
    };
    const double* row = &scan[Q * S];
    const int b = static_cast<int>(std::min_element(row, row + S) - row) + 1;
    double lo = b == 1 ? step * 1e-3 : step * (b - 1);
    double hi = b == S ? bounds.T_max : step * (b + 1);

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = objective(x1);
    double f2 = objective(x2);
    while (hi - lo > options.t_tolerance) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = objective(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = objective(x2);
      }
    }
  }
}

}  // namespace

OptimResult optimize(double lambda, const CostParams& costs, PolicyKind kind, const OptimBounds& bounds,
                     const OptimOptions& options) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("demand rate must be positive");
  validate(costs);
  if (bounds.q_max < 1) throw DomainError("q_max must be >= 1");
  if (bounds.Q_max < 0 || bounds.Q_max > kDefaultMaxOrderUpTo) {
    throw DomainError("Q_max must lie in [0, " + std::to_string(kDefaultMaxOrderUpTo) + "]");
  }
  if (!(bounds.T_max > 0.0) || !std::isfinite(bounds.T_max)) throw DomainError("T_max must be positive");
  if (options.scan_points < 3) throw DomainError("T scan needs at least 3 points");
  if (!(options.t_tolerance > 0.0)) throw DomainError("T tolerance must be positive");

  OptimResult result;
  result.kind = kind;
  result.bounds = bounds;
  Recorder rec(result);

  switch (kind) {
    case PolicyKind::quantity:
      for (int q = 1; q <= bounds.q_max; ++q) {
        for (long n = 1; (n - 1) * q <= bounds.Q_max; ++n) {
          const SystemConfig cfg = SystemConfig::quantity(lambda, q, n, costs);
          const double ac = average_cost(cfg, options.mode, options.delay).ac;
          rec.add(EvalRecord{q, cfg.Q, n, 0.0, ac, false});
        }
      }
      break;
    case PolicyKind::time:
      search_time_dimension(lambda, costs, kind, 0, bounds, options, rec);
      break;
    case PolicyKind::hybrid:
      for (int q = 1; q <= bounds.q_max; ++q) search_time_dimension(lambda, costs, kind, q, bounds, options, rec);
      break;
  }

  const EvalRecord& best = rec.best();
  result.q = best.q;
  result.Q = best.Q;
  result.n = best.n;
  result.T = best.T;
  result.ac = best.ac;

  if (kind != PolicyKind::time && best.q == bounds.q_max) result.warnings.push_back("optimum at q = q_max");
  if (kind == PolicyKind::quantity) {
    if ((best.n) * best.q > bounds.Q_max) result.warnings.push_back("optimum at the largest n allowed by Q_max");
  } else {
    if (best.Q == bounds.Q_max) result.warnings.push_back("optimum at Q = Q_max");
    if (best.T >= bounds.T_max * (1.0 - 1e-9)) result.warnings.push_back("optimum at T = T_max");
    if (best.T <= bounds.T_max / options.scan_points) {
      result.warnings.push_back("optimum below the first T scan point");
    }
  }
  return result;
}

}  // namespace consolidate
