#include <cmath>
#include <numeric>
#include <vector>

#include "consolidate/error.hpp"
#include "consolidate/poisson_truncation.hpp"
#include "consolidate/renewal_engine.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace consolidate;
using doctest::Approx;

namespace {

void check_against_series(const IncrementDist& inc, long Q) {
  const RenewalTable t = renewal_table(inc, Q);
  const std::vector<double> series = oracle::renewal_series(inc.masses, Q);
  for (long i = 0; i <= Q; ++i) {
    INFO("i=" << i << " Q=" << Q);
    CHECK(std::abs(t.m[i] - series[i]) <= 1e-10 * std::max(1.0, series[i]));
  }
  double partial = 0.0;
  for (long i = 0; i <= Q; ++i) {
    partial += series[i];
    CHECK(std::abs(t.M[i] - partial) <= 1e-10 * std::max(1.0, partial));
  }
}

void check_bracketing(const IncrementDist& inc, long Q) {
  const RenewalTable t = renewal_table(inc, Q);
  const double ey = inc.mean();
  const double ek = expected_k(t);
  INFO("Q=" << Q << " E[Y]=" << ey << " E[K]=" << ek);
  // Wald: E[K] E[Y] = E[S_K], the position at the first passage above Q.
  const std::vector<double> series = oracle::renewal_series(inc.masses, Q);
  double passage = 0.0;
  for (long i = 0; i <= Q; ++i) {
    for (std::size_t j = 0; j < inc.masses.size(); ++j) {
      if (i + static_cast<long>(j) > Q) passage += series[i] * inc.masses[j] * static_cast<double>(i + j);
    }
  }
  CHECK(ek * ey == Approx(passage).epsilon(1e-9));
  CHECK(ek >= (static_cast<double>(Q) + 1.0) / ey * (1 - 1e-12));
}

}  // namespace

TEST_CASE("build_increment_hp examples") {
  const IncrementDist a = build_increment_hp(1.0, 1, 60.0);
  REQUIRE(a.masses.size() == 2);
  CHECK(a.masses[0] < 1e-20);
  CHECK(a.masses[1] == Approx(1.0).epsilon(1e-15));

  CHECK(build_increment_hp(1.0, 6, 5.9199).mean() == Approx(5.0).epsilon(5e-5));

  const IncrementDist c = build_increment_hp(2.0, 3, 1.0);
  REQUIRE(c.masses.size() == 4);
  for (int i = 0; i < 3; ++i) CHECK(c.masses[i] == Approx(oracle::pmf(2.0, i)).epsilon(1e-14));
  CHECK(c.masses[3] == Approx(1.0 - oracle::cdf(2.0, 2)).epsilon(1e-14));
}

TEST_CASE("build_increment_tp examples") {
  const IncrementDist a = build_increment_tp(1.0, 1e-6);
  CHECK(a.masses[0] < 1.0);
  CHECK(a.masses[0] == Approx(1.0 - 1e-6).epsilon(1e-12));
  CHECK(a.masses[1] == Approx(1e-6).epsilon(1e-5));

  CHECK(std::abs(build_increment_tp(1.0, 2.0).mean() - 2.0) <= 1e-9);

  const IncrementDist c = build_increment_tp(3.0, 1.0, 1e-12);
  CHECK(c.support_end() >= 20);
  // Quantile oracle: the cut is the first point whose residual tail is below eps.
  const long end = static_cast<long>(c.support_end());
  CHECK(1.0 - oracle::cdf(3.0, end) < 1e-12);
  CHECK(1.0 - oracle::cdf(3.0, end - 1) >= 1e-12 * 0.999);
  CHECK(std::accumulate(c.masses.begin(), c.masses.end(), 0.0) == Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(build_increment_tp(1.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(build_increment_tp(1.0, 1.0, 1e-3), DomainError);
}

TEST_CASE("renewal_table examples") {
  const IncrementDist unit{{0.0, 1.0}};
  RenewalTable t = renewal_table(unit, 4);
  for (double v : t.m) CHECK(v == 1.0);
  CHECK(t.M[4] == 5.0);
  CHECK(expected_k(t) == 5.0);

  const IncrementDist two{{0.0, 0.0, 1.0}};
  t = renewal_table(two, 4);
  CHECK(t.m == std::vector<double>{1, 0, 1, 0, 1});
  CHECK(t.M[4] == 3.0);

  const IncrementDist hp = build_increment_hp(1.0, 3, 2.0);
  t = renewal_table(hp, 10);
  const auto series = oracle::renewal_series(hp.masses, 10, 1e-16);
  CHECK(t.M[10] == Approx(std::accumulate(series.begin(), series.end(), 0.0)).epsilon(1e-12));
}

TEST_CASE("expected_k and holding_sum examples") {
  const IncrementDist unit{{0.0, 1.0}};
  CHECK(expected_k(renewal_table(unit, 4)) == 5.0);
  CHECK(holding_sum(renewal_table(unit, 3)) == 6.0);
  CHECK(holding_sum(renewal_table(build_increment_hp(1.0, 4, 1.3), 0)) == 0.0);

  const IncrementDist hp = build_increment_hp(1.0, 6, 5.9199);
  const double ek = expected_k(renewal_table(hp, 14));
  CHECK(ek >= 3.0 - 1e-4);
  CHECK(ek <= 3.8 + 1e-4);

  const IncrementDist tp = build_increment_tp(1.0, 2.0);
  const auto series = oracle::renewal_series(tp.masses, 9);
  CHECK(expected_k(renewal_table(tp, 9)) == Approx(std::accumulate(series.begin(), series.end(), 0.0)).epsilon(1e-12));
}

TEST_CASE("prefix queries reuse a larger table") {
  const IncrementDist hp = build_increment_hp(1.5, 5, 2.2);
  const RenewalTable big = renewal_table(hp, 40);
  for (long Q : {0L, 1L, 7L, 25L, 40L}) {
    const RenewalTable small = renewal_table(hp, Q);
    CHECK(expected_k(big, Q) == expected_k(small));
    CHECK(holding_sum(big, Q) == Approx(holding_sum(small)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(expected_k(big, 41), IndexError);
  CHECK_THROWS_AS(holding_sum(big, -1), IndexError);
}

TEST_CASE("renewal errors") {
  CHECK_THROWS_AS(renewal_table(IncrementDist{{1.0}}, 3), DivergenceError);
  CHECK_THROWS_AS(renewal_table(IncrementDist{{1.0 - 1e-13, 1e-13}}, 3), DivergenceError);
  CHECK_THROWS_AS(renewal_table(IncrementDist{{0.0, 1.0}}, kDefaultMaxOrderUpTo + 1), CapacityError);
  CHECK_THROWS_AS(renewal_table(IncrementDist{{0.0, 1.0}}, -1), DomainError);
  CHECK_THROWS_AS(validate(IncrementDist{{0.3, 0.3}}), DomainError);
  CHECK_THROWS_AS(validate(IncrementDist{{0.5, -0.1, 0.6}}), DomainError);
  CHECK_THROWS_AS(validate(IncrementDist{}), DomainError);
  CHECK_NOTHROW(renewal_table(IncrementDist{{0.0, 1.0}}, kDefaultMaxOrderUpTo));
}

TEST_CASE("property: recursion matches the convolution series for Q <= 50") {
  oracle::Gen gen(7);
  for (int trial = 0; trial < 40; ++trial) {
    const double lambda = gen.uniform(0.3, 3.0);
    const double T = gen.uniform(0.2, 6.0);
    const int q = static_cast<int>(gen.integer(1, 12));
    const long Q = gen.integer(0, 50);
    INFO("trial " << trial << " lambda=" << lambda << " T=" << T << " q=" << q);
    check_against_series(build_increment_hp(lambda, q, T), Q);
    check_against_series(build_increment_tp(lambda, T), Q);
  }
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> g = gen.simplex(static_cast<std::size_t>(gen.integer(2, 9)));
    check_against_series(IncrementDist{g}, gen.integer(0, 50));
  }
}

TEST_CASE("property: Wald identity, E[K] lower bound and steady-state masses") {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 300; ++trial) {
    const double lambda = gen.uniform(0.1, 4.0);
    const double T = gen.uniform(0.05, 8.0);
    const int q = static_cast<int>(gen.integer(1, 15));
    const long Q = gen.integer(0, 200);
    for (const IncrementDist& inc : {build_increment_hp(lambda, q, T), build_increment_tp(lambda, T)}) {
      check_bracketing(inc, Q);
      const RenewalTable t = renewal_table(inc, Q);
      double s = 0.0;
      for (long i = 0; i <= Q; ++i) {
        CHECK(t.m[i] >= 0.0);
        s += t.m[i] / t.M[Q];
      }
      CHECK(std::abs(s - 1.0) <= 1e-10);
      for (long i = 1; i <= Q; ++i) CHECK(t.M[i] >= t.M[i - 1]);
      CHECK(t.m[0] == Approx(1.0 / (1.0 - inc.masses[0])).epsilon(1e-14));
    }
  }
}

TEST_CASE("TP specialization reproduces the series value of M(Q)") {
  for (double lambda : {0.5, 1.0, 2.0}) {
    for (double T : {0.5, 2.0, 5.0}) {
      const IncrementDist tp = build_increment_tp(lambda, T);
      for (long Q : {0L, 5L, 19L, 50L}) {
        const auto series = oracle::renewal_series(tp.masses, Q);
        const double ek = expected_k(renewal_table(tp, Q));
        CHECK(ek == Approx(std::accumulate(series.begin(), series.end(), 0.0)).epsilon(1e-10));
      }
    }
  }
}
