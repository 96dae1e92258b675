#include "consolidate/consolidate.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <string>

#include "consolidate/error.hpp"
#include "consolidate/poisson_truncation.hpp"
#include "consolidate/policy_compare.hpp"
#include "consolidate/policy_metrics.hpp"
#include "consolidate/warehouse_sim.hpp"

namespace cs = consolidate;

struct csl_system {
  cs::SystemConfig config;
};

struct csl_comparison {
  cs::Comparison value;
};

struct csl_verify_report {
  cs::VerifyReport value;
};

struct csl_optim_result {
  cs::OptimResult value;
};

namespace {

thread_local std::string g_last_error;

csl_status to_status(cs::ErrorCode code) {
  switch (code) {
    case cs::ErrorCode::invalid_argument: return CSL_ERR_INVALID_ARGUMENT;
    case cs::ErrorCode::domain: return CSL_ERR_DOMAIN;
    case cs::ErrorCode::index: return CSL_ERR_INDEX;
    case cs::ErrorCode::infeasible: return CSL_ERR_INFEASIBLE;
    case cs::ErrorCode::capacity: return CSL_ERR_CAPACITY;
    case cs::ErrorCode::divergence: return CSL_ERR_DIVERGENCE;
    case cs::ErrorCode::quadrature: return CSL_ERR_QUADRATURE;
    case cs::ErrorCode::tolerance: return CSL_ERR_TOLERANCE;
    case cs::ErrorCode::config: return CSL_ERR_CONFIG;
    case cs::ErrorCode::internal: return CSL_ERR_INTERNAL;
  }
  return CSL_ERR_INTERNAL;
}

template <class F>
csl_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return CSL_OK;
  } catch (const cs::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CSL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return CSL_ERR_INTERNAL;
  }
}

csl_status null_argument(const char* name) {
  g_last_error = std::string("null argument: ") + name;
  return CSL_ERR_INVALID_ARGUMENT;
}

#define CSL_REQUIRE(ptr) \
  if ((ptr) == nullptr) return null_argument(#ptr)

template <std::size_t N>
void copy_text(char (&dst)[N], const std::string& src) {
  std::strncpy(dst, src.c_str(), N - 1);
  dst[N - 1] = '\0';
}

cs::CostParams from_c(const csl_costs& c) {
  return cs::CostParams{c.replenish_fixed, c.replenish_unit, c.holding,     c.dispatch_fixed,
                        c.dispatch_unit,   c.wait_linear,    c.wait_squared};
}

cs::PolicyKind from_c(csl_policy_kind kind) {
  switch (kind) {
    case CSL_POLICY_QP: return cs::PolicyKind::quantity;
    case CSL_POLICY_TP: return cs::PolicyKind::time;
    case CSL_POLICY_HP: return cs::PolicyKind::hybrid;
  }
  throw cs::Error(cs::ErrorCode::invalid_argument, "unknown policy kind");
}

csl_policy_kind to_c(cs::PolicyKind kind) {
  switch (kind) {
    case cs::PolicyKind::quantity: return CSL_POLICY_QP;
    case cs::PolicyKind::time: return CSL_POLICY_TP;
    case cs::PolicyKind::hybrid: return CSL_POLICY_HP;
  }
  return CSL_POLICY_QP;
}

cs::Mode from_c(csl_mode mode) { return mode == CSL_MODE_APPROX ? cs::Mode::approx : cs::Mode::exact; }
cs::Delay from_c(csl_delay delay) { return delay == CSL_DELAY_SQUARED ? cs::Delay::squared : cs::Delay::linear; }

csl_estimate to_c(const cs::SimEstimate& e) { return csl_estimate{e.mean, e.se, e.n}; }

double or_nan(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

extern "C" {

const char* csl_version(void) { return "1.0.0"; }

const char* csl_last_error(void) { return g_last_error.c_str(); }

const char* csl_status_string(csl_status status) {
  switch (status) {
    case CSL_OK: return "ok";
    case CSL_ERR_INVALID_ARGUMENT: return cs::to_string(cs::ErrorCode::invalid_argument);
    case CSL_ERR_DOMAIN: return cs::to_string(cs::ErrorCode::domain);
    case CSL_ERR_INDEX: return cs::to_string(cs::ErrorCode::index);
    case CSL_ERR_INFEASIBLE: return cs::to_string(cs::ErrorCode::infeasible);
    case CSL_ERR_CAPACITY: return cs::to_string(cs::ErrorCode::capacity);
    case CSL_ERR_DIVERGENCE: return cs::to_string(cs::ErrorCode::divergence);
    case CSL_ERR_QUADRATURE: return cs::to_string(cs::ErrorCode::quadrature);
    case CSL_ERR_TOLERANCE: return cs::to_string(cs::ErrorCode::tolerance);
    case CSL_ERR_CONFIG: return cs::to_string(cs::ErrorCode::config);
    case CSL_ERR_INTERNAL: return cs::to_string(cs::ErrorCode::internal);
  }
  return "unknown status";
}

csl_status csl_trunc_factorial_moment(double mu, int q, int k, double* out) {
  CSL_REQUIRE(out);
  return guarded([&] { *out = cs::trunc_factorial_moment(mu, q, k); });
}

csl_status csl_match_consolidation_cycle(double lambda, double target_elc, int q_h, double* T_out) {
  CSL_REQUIRE(T_out);
  return guarded([&] { *T_out = cs::match_consolidation_cycle(lambda, target_elc, q_h); });
}

csl_status csl_system_create(const csl_system_desc* desc, csl_system** out) {
  CSL_REQUIRE(desc);
  CSL_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    const cs::CostParams costs = from_c(desc->costs);
    cs::SystemConfig cfg;
    switch (from_c(desc->kind)) {
      case cs::PolicyKind::quantity:
        cfg = cs::SystemConfig::quantity(desc->lambda, desc->q, desc->n, costs);
        break;
      case cs::PolicyKind::time:
        cfg = cs::SystemConfig::time(desc->lambda, desc->T, desc->Q, costs);
        break;
      case cs::PolicyKind::hybrid:
        cfg = cs::SystemConfig::hybrid(desc->lambda, desc->q, desc->T, desc->Q, costs);
        break;
    }
    cs::validate(cfg);
    *out = new csl_system{cfg};
  });
}

void csl_system_destroy(csl_system* sys) { delete sys; }

csl_status csl_system_evaluate(const csl_system* sys, csl_mode mode, csl_delay delay, csl_evaluation* out) {
  CSL_REQUIRE(sys);
  CSL_REQUIRE(out);
  return guarded([&] {
    const cs::Evaluation ev = cs::average_cost(sys->config, from_c(mode), from_c(delay));
    *out = csl_evaluation{ev.ac,
                          ev.components.replenish,
                          ev.components.holding,
                          ev.components.dispatch,
                          ev.components.waiting,
                          ev.aod,
                          ev.aosd,
                          ev.air,
                          {ev.cycle.e_lc, ev.cycle.e_n, ev.cycle.e_w, ev.cycle.e_wsq},
                          {ev.replenish.e_k, ev.replenish.e_lr, ev.replenish.e_h}};
  });
}

csl_status csl_system_simulate(const csl_system* sys, const csl_sim_options* options, csl_trace_fn trace, void* user,
                               csl_sim_report* out) {
  CSL_REQUIRE(sys);
  CSL_REQUIRE(options);
  CSL_REQUIRE(out);
  return guarded([&] {
    cs::SimConfig cfg;
    cfg.system = sys->config;
    cfg.n_cycles = options->n_cycles;
    cfg.seed = options->seed;
    cfg.batch_size = options->batch_size;
    cfg.delay = from_c(options->delay);
    cfg.threads = options->threads;
    cs::TraceSink sink;
    if (trace != nullptr) {
      sink = [trace, user](const cs::CycleRecord& r) {
        const csl_cycle_record rec{r.cycle_index, r.length,       r.k_cycles,          r.cost,
                                   r.sum_delay,   r.sum_sq_delay, r.inventory_integral};
        trace(&rec, user);
      };
    }
    const cs::SimReport r = cs::simulate(cfg, sink);
    *out = csl_sim_report{to_c(r.ac),   to_c(r.aod),  to_c(r.aosd), to_c(r.air),           to_c(r.e_lc),
                          to_c(r.e_lr), to_c(r.e_k),  to_c(r.e_n),  to_c(r.dispatch_rate), r.batches};
  });
}

csl_status csl_compare(const csl_match_spec* spec, const csl_costs* costs, const int* qh, size_t n_qh,
                       csl_comparison** out) {
  CSL_REQUIRE(spec);
  CSL_REQUIRE(out);
  if (n_qh > 0 && qh == nullptr) return null_argument("qh");
  *out = nullptr;
  return guarded([&] {
    cs::MatchSpec match{spec->lambda, spec->target_elc, std::nullopt};
    if (spec->target_elr > 0.0) match.target_elr = spec->target_elr;
    std::optional<cs::CostParams> c;
    if (costs != nullptr) c = from_c(*costs);
    std::vector<int> list(qh, qh + n_qh);
    *out = new csl_comparison{cs::compare_matched(match, c, list)};
  });
}

size_t csl_comparison_size(const csl_comparison* cmp) { return cmp ? cmp->value.rows.size() : 0; }

csl_status csl_comparison_row_at(const csl_comparison* cmp, size_t index, csl_comparison_row* out) {
  CSL_REQUIRE(cmp);
  CSL_REQUIRE(out);
  return guarded([&] {
    if (index >= cmp->value.rows.size()) throw cs::IndexError("comparison row index out of range");
    const cs::ComparisonRow& r = cmp->value.rows[index];
    csl_comparison_row row{};
    row.kind = to_c(r.kind);
    copy_text(row.label, r.label);
    row.q = r.q;
    row.T = r.T;
    row.Q = r.Q;
    row.n = r.n;
    row.feasible = r.feasible ? 1 : 0;
    row.approximate = r.approximate ? 1 : 0;
    row.Q_rounding = r.Q_rounding;
    row.e_lc = r.e_lc;
    row.aod = r.aod;
    row.aosd = r.aosd;
    row.e_lr_exact = or_nan(r.e_lr_exact);
    row.air_exact = or_nan(r.air_exact);
    row.air_approx = or_nan(r.air_approx);
    row.ac_exact = or_nan(r.ac_exact);
    row.ac_approx = or_nan(r.ac_approx);
    copy_text(row.note, r.note);
    *out = row;
  });
}

csl_status csl_comparison_verdicts_get(const csl_comparison* cmp, csl_comparison_verdicts* out) {
  CSL_REQUIRE(cmp);
  CSL_REQUIRE(out);
  const cs::ComparisonVerdicts& v = cmp->value.verdicts;
  *out = csl_comparison_verdicts{v.aod_order ? 1 : 0,
                                 v.aosd_vs_tp ? 1 : 0,
                                 v.aosd_hp_below_qp,
                                 v.aosd_hp_above_qp,
                                 v.air_order ? (*v.air_order ? 1 : 0) : -1,
                                 v.ac_order ? (*v.ac_order ? 1 : 0) : -1};
  return CSL_OK;
}

void csl_comparison_destroy(csl_comparison* cmp) { delete cmp; }

csl_status csl_verify(const csl_verify_grid* grid, csl_verify_report** out) {
  CSL_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    cs::VerifyGrid g;
    if (grid != nullptr) {
      if ((grid->n_lambdas && !grid->lambdas) || (grid->n_q_values && !grid->q_values) ||
          (grid->n_qh_offsets && !grid->qh_offsets) || (grid->n_elr_ratios && !grid->elr_ratios)) {
        throw cs::Error(cs::ErrorCode::invalid_argument, "verify grid has a null array with nonzero length");
      }
      g.lambdas.assign(grid->lambdas, grid->lambdas + grid->n_lambdas);
      g.q_values.assign(grid->q_values, grid->q_values + grid->n_q_values);
      g.qh_offsets.assign(grid->qh_offsets, grid->qh_offsets + grid->n_qh_offsets);
      g.elr_ratios.assign(grid->elr_ratios, grid->elr_ratios + grid->n_elr_ratios);
      g.costs = from_c(grid->costs);
    }
    *out = new csl_verify_report{cs::verify_theorems(g)};
  });
}

csl_status csl_verify_summary_get(const csl_verify_report* report, csl_verify_summary* out) {
  CSL_REQUIRE(report);
  CSL_REQUIRE(out);
  const cs::VerifyReport& r = report->value;
  *out = csl_verify_summary{r.t1_checks,
                            r.t1_violations,
                            r.t2_checks,
                            r.t2_violations,
                            r.t2_hp_below_qp,
                            r.t2_hp_above_qp,
                            r.t3_checks,
                            r.t3_violations,
                            r.t4_checks,
                            r.t4_violations,
                            r.t3_max_rel_diff_approx,
                            r.t3_max_rel_diff_exact,
                            r.t4_min_margin,
                            r.exact_ok() ? 1 : 0,
                            r.approx_ok() ? 1 : 0};
  return CSL_OK;
}

size_t csl_verify_violation_count(const csl_verify_report* report) {
  return report ? report->value.violations.size() : 0;
}

csl_status csl_verify_violation_at(const csl_verify_report* report, size_t index, csl_violation* out) {
  CSL_REQUIRE(report);
  CSL_REQUIRE(out);
  return guarded([&] {
    if (index >= report->value.violations.size()) throw cs::IndexError("violation index out of range");
    const cs::Violation& v = report->value.violations[index];
    csl_violation c{};
    copy_text(c.theorem, v.theorem);
    c.lambda = v.lambda;
    c.q = v.q;
    c.q_h = v.q_h;
    c.elr_ratio = v.elr_ratio;
    copy_text(c.detail, v.detail);
    *out = c;
  });
}

void csl_verify_report_destroy(csl_verify_report* report) { delete report; }

csl_status csl_optimize(double lambda, const csl_costs* costs, csl_policy_kind kind, const csl_optim_bounds* bounds,
                        csl_mode mode, csl_delay delay, csl_optim_result** out) {
  CSL_REQUIRE(costs);
  CSL_REQUIRE(bounds);
  CSL_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    cs::OptimOptions options;
    options.mode = from_c(mode);
    options.delay = from_c(delay);
    const cs::OptimBounds b{bounds->q_max, bounds->Q_max, bounds->T_max};
    *out = new csl_optim_result{cs::optimize(lambda, from_c(*costs), from_c(kind), b, options)};
  });
}

csl_status csl_optim_best_get(const csl_optim_result* result, csl_optim_best* out) {
  CSL_REQUIRE(result);
  CSL_REQUIRE(out);
  const cs::OptimResult& r = result->value;
  *out = csl_optim_best{to_c(r.kind), r.q, r.Q, r.n, r.T, r.ac, r.evaluations()};
  return CSL_OK;
}

size_t csl_optim_trace_size(const csl_optim_result* result) { return result ? result->value.trace.size() : 0; }

csl_status csl_optim_trace_at(const csl_optim_result* result, size_t index, csl_eval_record* out) {
  CSL_REQUIRE(result);
  CSL_REQUIRE(out);
  return guarded([&] {
    if (index >= result->value.trace.size()) throw cs::IndexError("trace index out of range");
    const cs::EvalRecord& e = result->value.trace[index];
    *out = csl_eval_record{e.q, e.Q, e.n, e.T, e.ac, e.refine ? 1 : 0};
  });
}

size_t csl_optim_warning_count(const csl_optim_result* result) {
  return result ? result->value.warnings.size() : 0;
}

const char* csl_optim_warning_at(const csl_optim_result* result, size_t index) {
  if (result == nullptr || index >= result->value.warnings.size()) return nullptr;
  return result->value.warnings[index].c_str();
}

void csl_optim_result_destroy(csl_optim_result* result) { delete result; }

}  // extern "C"
