#pragma once

// Matched-frequency comparison of QP/TP/HP, the ordering checks built on it,
// and a per-policy average-cost optimizer.

#include <optional>
#include <string>
#include <vector>

#include "consolidate/policy_metrics.hpp"

namespace consolidate {

/// Target expected consolidation (and optionally replenishment) cycle length
/// shared by every policy in a comparison.
struct MatchSpec {
  double lambda = 1.0;
  double target_elc = 1.0;
  std::optional<double> target_elr;
};

struct ComparisonRow {
  PolicyKind kind = PolicyKind::quantity;
  std::string label;
  int q = 0;        // QP q or HP q_H
  double T = 0.0;   // TP T or matched HP T_H
  long Q = 0;       // order-up-to level (when target_elr is set)
  long n = 0;       // QP dispatches per replenishment cycle
  bool feasible = true;
  bool approximate = false;  // matching needed rounding to integers
  double Q_rounding = 0.0;   // Q - (lambda * target_elr - 1)
  std::string note;

  double e_lc = 0.0;
  double aod = 0.0;
  double aosd = 0.0;
  std::optional<double> e_lr_exact;
  std::optional<double> air_exact;
  std::optional<double> air_approx;
  std::optional<double> ac_exact;   // linear delay
  std::optional<double> ac_approx;  // linear delay
};

struct ComparisonVerdicts {
  bool aod_order = true;       // AOD_QP < AOD_HP < AOD_TP for every feasible HP row
  bool aosd_vs_tp = true;      // AOSD_QP, AOSD_HP < AOSD_TP
  int aosd_hp_below_qp = 0;    // HP rows with AOSD_HP < AOSD_QP
  int aosd_hp_above_qp = 0;
  std::optional<bool> air_order;  // approx: AIR_TP ~ AIR_HP >= AIR_QP
  std::optional<bool> ac_order;   // approx: AC_QP <= AC_HP <= AC_TP
};

struct Comparison {
  MatchSpec spec;
  std::vector<ComparisonRow> rows;
  ComparisonVerdicts verdicts;
};

inline constexpr double kAirRelativeTolerance = 0.05;
inline constexpr double kAcOrderSlack = 1e-9;

/// Rows for QP(q = lambda E[L^C]), TP(T = E[L^C]) and one HP row per q_H with
/// T_H matched to E[L^C]. Infeasible rows are kept and flagged.
Comparison compare_matched(const MatchSpec& spec, const std::optional<CostParams>& costs,
                           const std::vector<int>& qh_list);

struct VerifyGrid {
  std::vector<double> lambdas{0.5, 1.0, 2.0};
  std::vector<int> q_values{2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<int> qh_offsets{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<long> elr_ratios{2, 4, 8};
  CostParams costs{25.0, 1.0, 0.4, 15.0, 1.0, 0.8, 0.0};
};

struct Violation {
  std::string theorem;
  double lambda = 0.0;
  int q = 0;
  int q_h = 0;
  long elr_ratio = 0;
  std::string detail;
};

struct VerifyReport {
  long t1_checks = 0, t1_violations = 0;
  long t2_checks = 0, t2_violations = 0;
  long t2_hp_below_qp = 0, t2_hp_above_qp = 0;
  long t3_checks = 0, t3_violations = 0;
  long t4_checks = 0, t4_violations = 0;
  double t3_max_rel_diff_approx = 0.0;
  double t3_max_rel_diff_exact = 0.0;  // informational
  double t4_min_margin = 0.0;          // smallest AC gap along QP <= HP <= TP
  std::vector<Violation> violations;

  bool both_aosd_signs() const { return t2_hp_below_qp > 0 && t2_hp_above_qp > 0; }
  /// Proved orderings (exact formulas): any failure here is a hard failure.
  bool exact_ok() const { return t1_violations == 0 && t2_violations == 0 && both_aosd_signs(); }
  bool approx_ok() const { return t3_violations == 0 && t4_violations == 0; }
};

VerifyReport verify_theorems(const VerifyGrid& grid = {});

struct OptimBounds {
  int q_max = 10;
  long Q_max = 40;
  double T_max = 20.0;
};

struct OptimOptions {
  Mode mode = Mode::exact;
  Delay delay = Delay::linear;
  int scan_points = 200;
  double t_tolerance = 1e-8;
};

struct EvalRecord {
  int q = 0;
  long Q = 0;
  long n = 0;
  double T = 0.0;
  double ac = 0.0;
  bool refine = false;  // golden-section step rather than coarse scan
};

struct OptimResult {
  PolicyKind kind = PolicyKind::quantity;
  int q = 0;
  long Q = 0;
  long n = 0;
  double T = 0.0;
  double ac = 0.0;
  OptimBounds bounds;
  std::vector<EvalRecord> trace;
  std::vector<std::string> warnings;

  std::size_t evaluations() const { return trace.size(); }
};

/// Exhaustive integer grid (q and Q, or q and n for QP) with a coarse scan plus
/// golden-section refinement in T at every integer point. The result is the
/// minimum over everything evaluated, ties going to smaller Q, then q, then T.
OptimResult optimize(double lambda, const CostParams& costs, PolicyKind kind, const OptimBounds& bounds,
                     const OptimOptions& options = {});

}  // namespace consolidate
