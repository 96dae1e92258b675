#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "consolidate/consolidate.h"
#include "consolidate/policy_metrics.hpp"

namespace {

const csl_costs kCosts{25.0, 1.0, 0.4, 15.0, 1.0, 0.8, 0.3};

csl_system_desc hp_desc() {
  csl_system_desc d{};
  d.lambda = 1.0;
  d.kind = CSL_POLICY_HP;
  d.q = 6;
  d.T = 5.9199;
  d.Q = 14;
  d.costs = kCosts;
  return d;
}

struct TraceCount {
  long calls = 0;
  long last_index = -1;
  bool ordered = true;
};

void count_trace(const csl_cycle_record* rec, void* user) {
  auto* t = static_cast<TraceCount*>(user);
  if (rec->cycle_index != t->last_index + 1) t->ordered = false;
  t->last_index = rec->cycle_index;
  ++t->calls;
}

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::string(csl_version()) == "1.0.0");
  CHECK(std::string(csl_status_string(CSL_OK)) == "ok");
  CHECK(std::string(csl_status_string(CSL_ERR_CONFIG)).find("config") != std::string::npos);
}

TEST_CASE("null arguments are rejected") {
  CHECK(csl_trunc_factorial_moment(1.0, 3, 1, nullptr) == CSL_ERR_INVALID_ARGUMENT);
  CHECK(std::string(csl_last_error()).find("null argument") != std::string::npos);
  csl_system* sys = nullptr;
  CHECK(csl_system_create(nullptr, &sys) == CSL_ERR_INVALID_ARGUMENT);
  csl_evaluation ev;
  CHECK(csl_system_evaluate(nullptr, CSL_MODE_EXACT, CSL_DELAY_LINEAR, &ev) == CSL_ERR_INVALID_ARGUMENT);
  csl_comparison* cmp = nullptr;
  const csl_match_spec spec{1.0, 5.0, 0.0};
  CHECK(csl_compare(&spec, nullptr, nullptr, 2, &cmp) == CSL_ERR_INVALID_ARGUMENT);
  csl_optim_result* opt = nullptr;
  CHECK(csl_optimize(1.0, nullptr, CSL_POLICY_QP, nullptr, CSL_MODE_EXACT, CSL_DELAY_LINEAR, &opt) ==
        CSL_ERR_INVALID_ARGUMENT);
  CHECK(csl_comparison_size(nullptr) == 0);
  CHECK(csl_optim_warning_at(nullptr, 0) == nullptr);
}

TEST_CASE("library errors map to status codes") {
  double out = 0.0;
  CHECK(csl_trunc_factorial_moment(-1.0, 3, 1, &out) == CSL_ERR_DOMAIN);
  CHECK(std::strlen(csl_last_error()) > 0);
  CHECK(csl_trunc_factorial_moment(2.0, 3, 1, &out) == CSL_OK);
  CHECK(std::strlen(csl_last_error()) == 0);

  csl_system_desc d = hp_desc();
  d.Q = 20000;
  csl_system* sys = nullptr;
  REQUIRE(csl_system_create(&d, &sys) == CSL_OK);
  csl_evaluation ev;
  CHECK(csl_system_evaluate(sys, CSL_MODE_EXACT, CSL_DELAY_LINEAR, &ev) == CSL_ERR_CAPACITY);
  csl_system_destroy(sys);
  sys = nullptr;

  d = hp_desc();
  d.lambda = 0.0;
  CHECK(csl_system_create(&d, &sys) == CSL_ERR_DOMAIN);
  CHECK(sys == nullptr);
}

TEST_CASE("evaluate agrees with the C++ core") {
  const csl_system_desc d = hp_desc();
  csl_system* sys = nullptr;
  REQUIRE(csl_system_create(&d, &sys) == CSL_OK);
  const consolidate::CostParams c{25.0, 1.0, 0.4, 15.0, 1.0, 0.8, 0.3};
  const auto cfg = consolidate::SystemConfig::hybrid(1.0, 6, 5.9199, 14, c);
  for (csl_mode mode : {CSL_MODE_EXACT, CSL_MODE_APPROX}) {
    for (csl_delay delay : {CSL_DELAY_LINEAR, CSL_DELAY_SQUARED}) {
      csl_evaluation ev;
      REQUIRE(csl_system_evaluate(sys, mode, delay, &ev) == CSL_OK);
      const consolidate::Evaluation ref =
          consolidate::average_cost(cfg, mode == CSL_MODE_EXACT ? consolidate::Mode::exact : consolidate::Mode::approx,
                                    delay == CSL_DELAY_LINEAR ? consolidate::Delay::linear
                                                              : consolidate::Delay::squared);
      CHECK(ev.ac == ref.ac);
      CHECK(ev.aod == ref.aod);
      CHECK(ev.aosd == ref.aosd);
      CHECK(ev.air == ref.air);
      CHECK(ev.replenish.e_k == ref.replenish.e_k);
      CHECK(ev.cycle.e_wsq == ref.cycle.e_wsq);
      CHECK(ev.replenish_cost + ev.holding_cost + ev.dispatch_cost + ev.waiting_cost ==
            doctest::Approx(ev.ac).epsilon(1e-12));
    }
  }
  csl_system_destroy(sys);
}

TEST_CASE("simulate reports and trace callback") {
  csl_system_desc d{};
  d.lambda = 2.0;
  d.kind = CSL_POLICY_TP;
  d.T = 1.5;
  d.Q = 8;
  d.costs = kCosts;
  csl_system* sys = nullptr;
  REQUIRE(csl_system_create(&d, &sys) == CSL_OK);
  csl_sim_options o{2000, 5, 0, CSL_DELAY_LINEAR, 2};
  TraceCount t;
  csl_sim_report a;
  REQUIRE(csl_system_simulate(sys, &o, count_trace, &t, &a) == CSL_OK);
  CHECK(t.calls == 2000);
  CHECK(t.ordered);
  CHECK(a.batches == 100);
  csl_sim_report b;
  REQUIRE(csl_system_simulate(sys, &o, nullptr, nullptr, &b) == CSL_OK);
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  o.n_cycles = 99;
  CHECK(csl_system_simulate(sys, &o, nullptr, nullptr, &b) == CSL_ERR_CONFIG);
  csl_system_destroy(sys);
}

TEST_CASE("compare accessors") {
  const csl_match_spec spec{1.0, 5.0, 20.0};
  const int qh[] = {6, 8};
  csl_comparison* cmp = nullptr;
  REQUIRE(csl_compare(&spec, &kCosts, qh, 2, &cmp) == CSL_OK);
  REQUIRE(csl_comparison_size(cmp) == 4);
  csl_comparison_row row;
  REQUIRE(csl_comparison_row_at(cmp, 0, &row) == CSL_OK);
  CHECK(std::string(row.label) == "QP");
  CHECK(row.kind == CSL_POLICY_QP);
  CHECK(row.aod == doctest::Approx(2.0));
  REQUIRE(csl_comparison_row_at(cmp, 2, &row) == CSL_OK);
  CHECK(row.kind == CSL_POLICY_HP);
  CHECK(row.q == 6);
  CHECK(std::abs(row.e_lc - 5.0) <= 1e-9);
  CHECK(csl_comparison_row_at(cmp, 4, &row) == CSL_ERR_INDEX);
  csl_comparison_verdicts v;
  REQUIRE(csl_comparison_verdicts_get(cmp, &v) == CSL_OK);
  CHECK(v.aod_order == 1);
  CHECK(v.aosd_vs_tp == 1);
  CHECK(v.air_order == 1);
  csl_comparison_destroy(cmp);

  const csl_match_spec bare{1.0, 5.0, 0.0};
  REQUIRE(csl_compare(&bare, nullptr, qh, 1, &cmp) == CSL_OK);
  REQUIRE(csl_comparison_verdicts_get(cmp, &v) == CSL_OK);
  CHECK(v.air_order == -1);
  REQUIRE(csl_comparison_row_at(cmp, 0, &row) == CSL_OK);
  CHECK(std::isnan(row.ac_exact));
  csl_comparison_destroy(cmp);
}

TEST_CASE("verify accessors") {
  csl_verify_report* rep = nullptr;
  REQUIRE(csl_verify(nullptr, &rep) == CSL_OK);
  csl_verify_summary s;
  REQUIRE(csl_verify_summary_get(rep, &s) == CSL_OK);
  CHECK(s.exact_ok == 1);
  CHECK(s.t1_violations == 0);
  CHECK(s.t2_hp_below_qp > 0);
  CHECK(s.t2_hp_above_qp > 0);
  CHECK(csl_verify_violation_count(rep) == 0);
  csl_violation viol;
  CHECK(csl_verify_violation_at(rep, 0, &viol) == CSL_ERR_INDEX);
  csl_verify_report_destroy(rep);

  csl_verify_grid g{};
  g.n_lambdas = 1;
  CHECK(csl_verify(&g, &rep) == CSL_ERR_INVALID_ARGUMENT);
}

TEST_CASE("optimize accessors") {
  const csl_optim_bounds b{6, 12, 10.0};
  csl_optim_result* r = nullptr;
  REQUIRE(csl_optimize(1.0, &kCosts, CSL_POLICY_HP, &b, CSL_MODE_EXACT, CSL_DELAY_LINEAR, &r) == CSL_OK);
  csl_optim_best best;
  REQUIRE(csl_optim_best_get(r, &best) == CSL_OK);
  CHECK(best.kind == CSL_POLICY_HP);
  CHECK(best.evaluations == csl_optim_trace_size(r));
  double lowest = INFINITY;
  for (size_t i = 0; i < csl_optim_trace_size(r); ++i) {
    csl_eval_record e;
    REQUIRE(csl_optim_trace_at(r, i, &e) == CSL_OK);
    lowest = std::fmin(lowest, e.ac);
  }
  CHECK(best.ac == lowest);
  csl_eval_record e;
  CHECK(csl_optim_trace_at(r, csl_optim_trace_size(r), &e) == CSL_ERR_INDEX);
  CHECK(csl_optim_warning_at(r, csl_optim_warning_count(r)) == nullptr);
  csl_optim_result_destroy(r);
}

TEST_CASE("match_consolidation_cycle through the C interface") {
  double T = 0.0;
  REQUIRE(csl_match_consolidation_cycle(1.0, 5.0, 6, &T) == CSL_OK);
  CHECK(T == doctest::Approx(5.9198).epsilon(2e-5));
  CHECK(csl_match_consolidation_cycle(1.0, 5.0, 4, &T) == CSL_ERR_INFEASIBLE);
}
