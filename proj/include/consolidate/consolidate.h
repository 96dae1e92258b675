/*
 * C interface to the consolidation-policy library.
 *
 * Every function returns a csl_status. On failure the message of the most
 * recent error on the calling thread is available from csl_last_error().
 * Objects returned through pointer-to-handle arguments are owned by the caller
 * and released with the matching *_destroy function.
 */
#ifndef CONSOLIDATE_H
#define CONSOLIDATE_H

#include <stddef.h>
#include <stdint.h>

#if defined(CSL_BUILDING_LIBRARY)
#define CSL_API __attribute__((visibility("default")))
#else
#define CSL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum csl_status {
  CSL_OK = 0,
  CSL_ERR_INVALID_ARGUMENT = 1,
  CSL_ERR_DOMAIN = 2,
  CSL_ERR_INDEX = 3,
  CSL_ERR_INFEASIBLE = 4,
  CSL_ERR_CAPACITY = 5,
  CSL_ERR_DIVERGENCE = 6,
  CSL_ERR_QUADRATURE = 7,
  CSL_ERR_TOLERANCE = 8,
  CSL_ERR_CONFIG = 9,
  CSL_ERR_INTERNAL = 10
} csl_status;

typedef enum csl_policy_kind { CSL_POLICY_QP = 0, CSL_POLICY_TP = 1, CSL_POLICY_HP = 2 } csl_policy_kind;
typedef enum csl_mode { CSL_MODE_EXACT = 0, CSL_MODE_APPROX = 1 } csl_mode;
typedef enum csl_delay { CSL_DELAY_LINEAR = 0, CSL_DELAY_SQUARED = 1 } csl_delay;

typedef struct csl_costs {
  double replenish_fixed; /* A_R */
  double replenish_unit;  /* c_R */
  double holding;         /* h */
  double dispatch_fixed;  /* A_D */
  double dispatch_unit;   /* c_D */
  double wait_linear;     /* omega */
  double wait_squared;    /* omega' */
} csl_costs;

/* QP reads q and n; TP reads T and Q; HP reads q, T and Q. */
typedef struct csl_system_desc {
  double lambda;
  csl_policy_kind kind;
  int q;
  double T;
  long Q;
  long n;
  csl_costs costs;
} csl_system_desc;

typedef struct csl_cycle_metrics {
  double e_lc, e_n, e_w, e_wsq;
} csl_cycle_metrics;

typedef struct csl_replenish_metrics {
  double e_k, e_lr, e_h;
} csl_replenish_metrics;

typedef struct csl_evaluation {
  double ac;
  double replenish_cost, holding_cost, dispatch_cost, waiting_cost;
  double aod, aosd, air;
  csl_cycle_metrics cycle;
  csl_replenish_metrics replenish;
} csl_evaluation;

typedef struct csl_estimate {
  double mean;
  double se;
  long n;
} csl_estimate;

typedef struct csl_sim_options {
  long n_cycles;
  uint64_t seed;
  long batch_size; /* 0: n_cycles / 100 */
  csl_delay delay;
  unsigned threads; /* 0: automatic */
} csl_sim_options;

typedef struct csl_sim_report {
  csl_estimate ac, aod, aosd, air, e_lc, e_lr, e_k, e_n, dispatch_rate;
  long batches;
} csl_sim_report;

typedef struct csl_cycle_record {
  long cycle_index;
  double length;
  long k_cycles;
  double cost;
  double sum_delay;
  double sum_sq_delay;
  double inventory_integral;
} csl_cycle_record;

typedef void (*csl_trace_fn)(const csl_cycle_record* record, void* user);

typedef struct csl_match_spec {
  double lambda;
  double target_elc;
  double target_elr; /* <= 0: not set */
} csl_match_spec;

/* Optional values are NaN when absent. */
typedef struct csl_comparison_row {
  csl_policy_kind kind;
  char label[32];
  int q;
  double T;
  long Q;
  long n;
  int feasible;
  int approximate;
  double Q_rounding;
  double e_lc, aod, aosd;
  double e_lr_exact, air_exact, air_approx, ac_exact, ac_approx;
  char note[160];
} csl_comparison_row;

typedef struct csl_comparison_verdicts {
  int aod_order;
  int aosd_vs_tp;
  int aosd_hp_below_qp;
  int aosd_hp_above_qp;
  int air_order; /* -1: not evaluated */
  int ac_order;  /* -1: not evaluated */
} csl_comparison_verdicts;

typedef struct csl_verify_grid {
  const double* lambdas;
  size_t n_lambdas;
  const int* q_values;
  size_t n_q_values;
  const int* qh_offsets;
  size_t n_qh_offsets;
  const long* elr_ratios;
  size_t n_elr_ratios;
  csl_costs costs;
} csl_verify_grid;

typedef struct csl_verify_summary {
  long t1_checks, t1_violations;
  long t2_checks, t2_violations, t2_hp_below_qp, t2_hp_above_qp;
  long t3_checks, t3_violations;
  long t4_checks, t4_violations;
  double t3_max_rel_diff_approx, t3_max_rel_diff_exact, t4_min_margin;
  int exact_ok;
  int approx_ok;
} csl_verify_summary;

typedef struct csl_violation {
  char theorem[8];
  double lambda;
  int q;
  int q_h;
  long elr_ratio;
  char detail[160];
} csl_violation;

typedef struct csl_optim_bounds {
  int q_max;
  long Q_max;
  double T_max;
} csl_optim_bounds;

typedef struct csl_optim_best {
  csl_policy_kind kind;
  int q;
  long Q;
  long n;
  double T;
  double ac;
  size_t evaluations;
} csl_optim_best;

typedef struct csl_eval_record {
  int q;
  long Q;
  long n;
  double T;
  double ac;
  int refine;
} csl_eval_record;

typedef struct csl_system csl_system;
typedef struct csl_comparison csl_comparison;
typedef struct csl_verify_report csl_verify_report;
typedef struct csl_optim_result csl_optim_result;

CSL_API const char* csl_version(void);
CSL_API const char* csl_last_error(void);
CSL_API const char* csl_status_string(csl_status status);

/* Truncated Poisson primitives. */
CSL_API csl_status csl_trunc_factorial_moment(double mu, int q, int k, double* out);
CSL_API csl_status csl_match_consolidation_cycle(double lambda, double target_elc, int q_h, double* T_out);

/* System evaluation. */
CSL_API csl_status csl_system_create(const csl_system_desc* desc, csl_system** out);
CSL_API void csl_system_destroy(csl_system* sys);
CSL_API csl_status csl_system_evaluate(const csl_system* sys, csl_mode mode, csl_delay delay, csl_evaluation* out);
CSL_API csl_status csl_system_simulate(const csl_system* sys, const csl_sim_options* options, csl_trace_fn trace,
                                       void* user, csl_sim_report* out);

/* Matched comparison. qh may be NULL when n_qh is 0; costs may be NULL. */
CSL_API csl_status csl_compare(const csl_match_spec* spec, const csl_costs* costs, const int* qh, size_t n_qh,
                               csl_comparison** out);
CSL_API size_t csl_comparison_size(const csl_comparison* cmp);
CSL_API csl_status csl_comparison_row_at(const csl_comparison* cmp, size_t index, csl_comparison_row* out);
CSL_API csl_status csl_comparison_verdicts_get(const csl_comparison* cmp, csl_comparison_verdicts* out);
CSL_API void csl_comparison_destroy(csl_comparison* cmp);

/* Theorem verification. grid may be NULL for the default grid. */
CSL_API csl_status csl_verify(const csl_verify_grid* grid, csl_verify_report** out);
CSL_API csl_status csl_verify_summary_get(const csl_verify_report* report, csl_verify_summary* out);
CSL_API size_t csl_verify_violation_count(const csl_verify_report* report);
CSL_API csl_status csl_verify_violation_at(const csl_verify_report* report, size_t index, csl_violation* out);
CSL_API void csl_verify_report_destroy(csl_verify_report* report);

/* Average-cost optimizer. */
CSL_API csl_status csl_optimize(double lambda, const csl_costs* costs, csl_policy_kind kind,
                                const csl_optim_bounds* bounds, csl_mode mode, csl_delay delay,
                                csl_optim_result** out);
CSL_API csl_status csl_optim_best_get(const csl_optim_result* result, csl_optim_best* out);
CSL_API size_t csl_optim_trace_size(const csl_optim_result* result);
CSL_API csl_status csl_optim_trace_at(const csl_optim_result* result, size_t index, csl_eval_record* out);
CSL_API size_t csl_optim_warning_count(const csl_optim_result* result);
CSL_API const char* csl_optim_warning_at(const csl_optim_result* result, size_t index);
CSL_API void csl_optim_result_destroy(csl_optim_result* result);

#ifdef __cplusplus
}
#endif

#endif /* CONSOLIDATE_H */
