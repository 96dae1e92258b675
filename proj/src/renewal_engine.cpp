#include "consolidate/renewal_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "consolidate/error.hpp"
#include "consolidate/poisson_truncation.hpp"

namespace consolidate {
namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(name) + " must be positive and finite, got " + std::to_string(value));
  }
}

void require_prefix(const RenewalTable& table, long Q) {
  if (Q < 0 || Q > table.Q) {
    throw IndexError("order-up-to level " + std::to_string(Q) + " outside table range [0, " +
                     std::to_string(table.Q) + "]");
  }
}

}  // namespace

double IncrementDist::mean() const {
  double acc = 0.0;
  for (std::size_t i = 1; i < masses.size(); ++i) acc += static_cast<double>(i) * masses[i];
  return acc;
}

void validate(const IncrementDist& inc) {
  if (inc.masses.empty()) throw DomainError("increment distribution is empty");
  double total = 0.0;
  for (double p : inc.masses) {
    if (!(p >= 0.0)) throw DomainError("increment distribution has a negative or NaN mass");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw DomainError("increment masses sum to " + std::to_string(total) + ", not 1");
  }
  if (!(inc.masses[0] < 1.0)) throw DivergenceError("increment is identically zero");
}

IncrementDist build_increment_hp(double lambda, int q, double T) {
  require_positive(lambda, "lambda");
  require_positive(T, "T");
  if (q < 1) throw DomainError("dispatch quantity must be >= 1, got " + std::to_string(q));
  const double mu = lambda * T;
  IncrementDist inc;
  inc.masses.resize(static_cast<std::size_t>(q) + 1);
  for (int i = 0; i < q; ++i) inc.masses[i] = poisson_pmf(mu, i);
  inc.masses[q] = poisson_tail(mu, q);
  return inc;
}

IncrementDist build_increment_tp(double lambda, double T, double tail_eps) {
  require_positive(lambda, "lambda");
  require_positive(T, "T");
  if (!(tail_eps > 0.0) || tail_eps > 1e-10) {
    throw DomainError("tail threshold must lie in (0, 1e-10], got " + std::to_string(tail_eps));
  }
  const double mu = lambda * T;
  // Far enough out that the remaining tail is far below any admissible eps.
  const long hi = static_cast<long>(std::ceil(mu + 40.0 * std::sqrt(mu) + 60.0));
  std::vector<double> pmf(static_cast<std::size_t>(hi) + 2);
  for (long i = 0; i <= hi + 1; ++i) pmf[i] = poisson_pmf(mu, i);

  // suffix[i] = P(X >= i), accumulated from the top so small tails stay exact.
  std::vector<double> suffix(pmf.size() + 1, 0.0);
  for (long i = hi + 1; i >= 0; --i) suffix[i] = suffix[i + 1] + pmf[i];

  long end = 1;
  while (end < hi && suffix[end + 1] >= tail_eps) ++end;

  IncrementDist inc;
  inc.masses.assign(pmf.begin(), pmf.begin() + end + 1);
  double total = 0.0;
  for (double p : inc.masses) total += p;
  for (double& p : inc.masses) p /= total;
  return inc;
}

RenewalTable renewal_table(const IncrementDist& inc, long Q, long max_Q) {
  validate(inc);
  if (Q < 0) throw DomainError("order-up-to level must be >= 0, got " + std::to_string(Q));
  if (Q > max_Q) {
    throw CapacityError("order-up-to level " + std::to_string(Q) + " exceeds the renewal limit " +
                        std::to_string(max_Q));
  }
  const double g0 = inc.masses[0];
  if (g0 >= 1.0 - 1e-12) {
    throw DivergenceError("zero-increment probability " + std::to_string(g0) + " too close to 1");
  }
  const double scale = 1.0 / (1.0 - g0);
  const long s_max = static_cast<long>(inc.support_end());

  RenewalTable table;
  table.Q = Q;
  table.m.assign(static_cast<std::size_t>(Q) + 1, 0.0);
  table.M.assign(static_cast<std::size_t>(Q) + 1, 0.0);
  table.m[0] = scale;
  for (long i = 1; i <= Q; ++i) {
    double acc = 0.0;
    const long top = std::min(i, s_max);
    for (long j = 1; j <= top; ++j) acc += inc.masses[j] * table.m[i - j];
    table.m[i] = acc * scale;
  }
  double running = 0.0;
  for (long i = 0; i <= Q; ++i) {
    running += table.m[i];
    table.M[i] = running;
  }
  return table;
}

double expected_k(const RenewalTable& table) { return expected_k(table, table.Q); }

double expected_k(const RenewalTable& table, long Q) {
  require_prefix(table, Q);
  return table.M[Q];
}

double holding_sum(const RenewalTable& table) { return holding_sum(table, table.Q); }

double holding_sum(const RenewalTable& table, long Q) {
  require_prefix(table, Q);
  double acc = 0.0;
  for (long i = 0; i <= Q; ++i) acc += static_cast<double>(Q - i) * table.m[i];
  return acc;
}

}  // namespace consolidate
