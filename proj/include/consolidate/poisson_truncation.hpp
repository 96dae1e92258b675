#pragma once

// Truncated Poisson machinery. Throughout, X ~ Poisson(mu) and
// X_q = min(X, q) for a positive integer truncation level q.

#include <span>

namespace consolidate {

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

/// Poisson mass e^-mu mu^x / x!, evaluated in log space. Zero for x < 0.
double poisson_pmf(double mu, long x);
double poisson_log_pmf(double mu, long x);

/// P(X <= x); 0 for x < 0.
double poisson_cdf(double mu, long x);

/// P(X >= m), accurate in relative terms for small tails.
double poisson_tail(double mu, long m);

/// Mass function of X_q: P(X = i) for i < q and P(X >= q) at i = q.
double trunc_pmf(double mu, int q, int i);

/// E[X_q (X_q - 1) ... (X_q - k + 1)] = mu^k P(X <= q-k) + q^(k) P(X >= q+1).
/// Requires 1 <= k <= q.
double trunc_factorial_moment(double mu, int q, int k);

/// d/dmu of trunc_factorial_moment: k mu^(k-1) P(X <= q-k).
double trunc_factorial_moment_dmu(double mu, int q, int k);

/// E[min(V^k, mu^k)] with V ~ gamma(q-k+1, 1), by adaptive Gauss-Kronrod
/// quadrature of the gamma density. Independent route to
/// trunc_factorial_moment; throws QuadratureError if the error estimate
/// exceeds the requested tolerance.
double gamma_min_moment(double mu, int q, int k);

/// E[X_q] - VAR[X_q], computed from tail sums where the truncation is light so
/// that tiny positive values survive rounding. Requires q >= 1.
double trunc_mean_minus_variance(double mu, int q);

/// E^2[X_q] / E[X_q^(2)] and its excess over one. q >= 2.
double lemma3_ratio(double mu, int q);
double lemma3_excess(double mu, int q);

/// E^3[X_q] / E[X_{q+1}^(3)] and its excess over one. q >= 2.
double lemma5_ratio(double mu, int q);
double lemma5_excess(double mu, int q);

/// Mean and variance of X conditioned on X lying in `set` (distinct
/// nonnegative integers).
MeanVariance conditional_mean_var(double mu, std::span<const long> set);

}  // namespace consolidate
