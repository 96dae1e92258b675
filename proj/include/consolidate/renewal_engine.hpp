#pragma once

// Discrete renewal functions on the lattice {0, 1, ..., Q} for nonnegative
// integer increments (consolidated loads per dispatch).

#include <cstddef>
#include <vector>

namespace consolidate {

inline constexpr long kDefaultMaxOrderUpTo = 10000;
inline constexpr double kDefaultTpTailEps = 1e-12;

/// Probability vector over {0, ..., masses.size() - 1}.
struct IncrementDist {
  std::vector<double> masses;

  double mean() const;
  std::size_t support_end() const { return masses.empty() ? 0 : masses.size() - 1; }
};

/// Checks normalization (1e-10), throwing DomainError, and masses[0] < 1,
/// throwing DivergenceError.
void validate(const IncrementDist& inc);

/// Y_q = min(Poisson(lambda T), q).
IncrementDist build_increment_hp(double lambda, int q, double T);

/// Poisson(lambda T) cut where the residual tail drops below tail_eps, then
/// renormalized.
IncrementDist build_increment_tp(double lambda, double T, double tail_eps = kDefaultTpTailEps);

/// Renewal masses m(i) = sum_k g^(k)(i) and their partial sums M(i) for
/// i = 0..Q. Entries do not depend on Q, so a table built for Q serves every
/// smaller order-up-to level as a prefix.
struct RenewalTable {
  std::vector<double> m;
  std::vector<double> M;
  long Q = 0;
};

/// Solves m(i) = delta_{i0} + sum_j g(j) m(i-j). Throws DivergenceError when
/// masses[0] >= 1 - 1e-12 and CapacityError when Q > max_Q.
RenewalTable renewal_table(const IncrementDist& inc, long Q, long max_Q = kDefaultMaxOrderUpTo);

/// E[K] = M(Q), the expected number of dispatches per replenishment cycle.
double expected_k(const RenewalTable& table);
double expected_k(const RenewalTable& table, long Q);

/// sum_{i<=Q} (Q - i) m(i).
double holding_sum(const RenewalTable& table);
double holding_sum(const RenewalTable& table, long Q);

}  // namespace consolidate
