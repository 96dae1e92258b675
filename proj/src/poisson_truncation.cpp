#include "consolidate/poisson_truncation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "consolidate/error.hpp"

namespace consolidate {
namespace {

// Above this cdf value 1 - cdf loses relative accuracy, so tails are summed
// directly instead.
constexpr double kDirectTailThreshold = 1.0 - 1e-9;

// Truncation counts as "light" when P(X > q) is below this; the lemma excess
// functions then use tail sums rather than differences of moments.
constexpr double kLightTail = 1e-3;

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

double log_factorial(long x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(static_cast<double>(x) + 1.0, &sign);
#else
  return std::lgamma(static_cast<double>(x) + 1.0);
#endif
}

void require_mu(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw DomainError("Poisson mean must be positive and finite, got " + std::to_string(mu));
  }
}

void require_moment_args(double mu, int q, int k) {
  require_mu(mu);
  if (q < 1) throw DomainError("truncation level must be >= 1, got " + std::to_string(q));
  if (k < 1 || k > q) {
    throw DomainError("factorial moment order must satisfy 1 <= k <= q (k=" + std::to_string(k) +
                      ", q=" + std::to_string(q) + ")");
  }
}

double falling_factorial(int q, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= static_cast<double>(q - j);
  return r;
}

// Sum_{x >= m} w(x) p(x), walking upward with the ratio recurrence until the
// terms are negligible. Only used with m beyond the bulk of the distribution,
// or with weights that vanish below it.
template <class Weight>
double upper_tail_sum(double mu, long m, Weight weight) {
  if (m < 0) m = 0;
  double p = poisson_pmf(mu, m);
  long x = m;
  // Start below the mode: the first masses may underflow although later ones
  // do not.
  while (p == 0.0 && static_cast<double>(x) < mu) {
    x = std::max<long>(x + 1, static_cast<long>(mu) - 1);
    p = poisson_pmf(mu, x);
  }
  KahanSum acc;
  for (;; ++x) {
    const double term = weight(x) * p;
    acc.add(term);
    if (static_cast<double>(x) > mu &&
        (p == 0.0 || std::abs(term) <= 1e-18 * std::abs(acc.sum))) {
      break;
    }
    p *= mu / static_cast<double>(x + 1);
  }
  return acc.sum;
}

double direct_tail(double mu, long m) {
  return upper_tail_sum(mu, m, [](long) { return 1.0; });
}

double kahan_cdf(double mu, long x) {
  KahanSum acc;
  // Masses below exp(-745) underflow anyway; skip the leading run of them.
  long start = 0;
  if (mu > 800.0) start = std::max<long>(0, static_cast<long>(mu - 40.0 * std::sqrt(mu)));
  for (long j = start; j <= x; ++j) acc.add(poisson_pmf(mu, j));
  return acc.sum;
}

}  // namespace

double poisson_log_pmf(double mu, long x) {
  require_mu(mu);
  if (x < 0) return -std::numeric_limits<double>::infinity();
  return -mu + static_cast<double>(x) * std::log(mu) - log_factorial(x);
}

double poisson_pmf(double mu, long x) {
  if (x < 0) {
    require_mu(mu);
    return 0.0;
  }
  return std::exp(poisson_log_pmf(mu, x));
}

double poisson_cdf(double mu, long x) {
  require_mu(mu);
  if (x < 0) return 0.0;
  const double c = kahan_cdf(mu, x);
  if (c > kDirectTailThreshold) return 1.0 - direct_tail(mu, x + 1);
  return std::min(c, 1.0);
}

double poisson_tail(double mu, long m) {
  require_mu(mu);
  if (m <= 0) return 1.0;
  const double c = kahan_cdf(mu, m - 1);
  if (c > kDirectTailThreshold) return direct_tail(mu, m);
  return std::max(0.0, 1.0 - c);
}

double trunc_pmf(double mu, int q, int i) {
  require_mu(mu);
  if (q < 1) throw DomainError("truncation level must be >= 1, got " + std::to_string(q));
  if (i < 0 || i > q) {
    throw IndexError("truncated mass index " + std::to_string(i) + " outside [0, " +
                     std::to_string(q) + "]");
  }
  if (i < q) return poisson_pmf(mu, i);
  return poisson_tail(mu, q);
}

double trunc_factorial_moment(double mu, int q, int k) {
  require_moment_args(mu, q, k);
  return std::pow(mu, k) * poisson_cdf(mu, q - k) + falling_factorial(q, k) * poisson_tail(mu, q + 1);
}

double trunc_factorial_moment_dmu(double mu, int q, int k) {
  require_moment_args(mu, q, k);
  return k * std::pow(mu, k - 1) * poisson_cdf(mu, q - k);
}

double gamma_min_moment(double mu, int q, int k) {
  require_moment_args(mu, q, k);
  const int shape = q - k + 1;
  const double log_norm = log_factorial(shape - 1);
  const double mu_k = std::pow(mu, k);
  // E[min(V^k, mu^k)] = mu^k - int_0^mu (mu^k - v^k) f(v) dv
  auto integrand = [&](double v) {
    if (v <= 0.0) return shape == 1 ? mu_k : 0.0;
    const double log_density = (shape - 1) * std::log(v) - v - log_norm;
    return (mu_k - std::pow(v, k)) * std::exp(log_density);
  };
  double error = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, mu, 12, 1e-12, &error);
  const double allowed = 1e-10 * std::max(1.0, std::abs(integral));
  if (!std::isfinite(integral) || error > allowed) {
    throw QuadratureError("gamma quadrature did not converge (error estimate " + std::to_string(error) +
                          ")");
  }
  return mu_k - integral;
}

double trunc_mean_minus_variance(double mu, int q) {
  require_mu(mu);
  if (q < 1) throw DomainError("truncation level must be >= 1, got " + std::to_string(q));
  if (poisson_tail(mu, q + 1) <= kLightTail) {
    // With D = (X - q)^+: E[X_q] - VAR[X_q] = E[D^2] + E[D] (2q - 1 - 2mu + E[D]).
    const double excess1 = upper_tail_sum(mu, q + 1, [q](long x) { return double(x - q); });
    const double excess2 = upper_tail_sum(mu, q + 1, [q](long x) {
      const double d = double(x - q);
      return d * d;
    });
    return excess2 + excess1 * (2.0 * q - 1.0 - 2.0 * mu + excess1);
  }
  const double m1 = trunc_factorial_moment(mu, q, 1);
  const double m2 = q >= 2 ? trunc_factorial_moment(mu, q, 2) : 0.0;
  return m1 * m1 - m2;
}

double lemma3_excess(double mu, int q) {
  require_mu(mu);
  if (q < 2) throw DomainError("lemma3 ratio needs q >= 2, got " + std::to_string(q));
  return trunc_mean_minus_variance(mu, q) / trunc_factorial_moment(mu, q, 2);
}

double lemma3_ratio(double mu, int q) { return 1.0 + lemma3_excess(mu, q); }

double lemma5_excess(double mu, int q) {
  require_mu(mu);
  if (q < 2) throw DomainError("lemma5 ratio needs q >= 2, got " + std::to_string(q));
  const double third = trunc_factorial_moment(mu, q + 1, 3);
  if (poisson_tail(mu, q + 1) <= kLightTail) {
    // E[X_q] = mu - a, E[X_{q+1}^(3)] = mu^3 - t.
    const double a = upper_tail_sum(mu, q + 1, [q](long x) { return double(x - q); });
    const double cap = falling_factorial(q + 1, 3);
    const double t = upper_tail_sum(mu, q + 2, [cap](long x) {
      const double xd = static_cast<double>(x);
      return xd * (xd - 1.0) * (xd - 2.0) - cap;
    });
    const double diff = t - 3.0 * mu * mu * a + 3.0 * mu * a * a - a * a * a;
    return diff / third;
  }
  const double first = trunc_factorial_moment(mu, q, 1);
  return (first * first * first - third) / third;
}

double lemma5_ratio(double mu, int q) { return 1.0 + lemma5_excess(mu, q); }

MeanVariance conditional_mean_var(double mu, std::span<const long> set) {
  require_mu(mu);
  if (set.empty()) throw DomainError("conditioning set is empty");
  std::vector<long> points(set.begin(), set.end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.front() < 0) throw DomainError("conditioning set contains a negative value");

  std::vector<double> log_mass(points.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    log_mass[i] = poisson_log_pmf(mu, points[i]);
    mass += std::exp(log_mass[i]);
  }
  if (!(mass > 0.0)) throw DomainError("conditioning event has vanishing probability");

  const double peak = *std::max_element(log_mass.begin(), log_mass.end());
  std::vector<double> weight(points.size());
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    weight[i] = std::exp(log_mass[i] - peak);
    total += weight[i];
  }
  MeanVariance out;
  for (std::size_t i = 0; i < points.size(); ++i) out.mean += weight[i] / total * points[i];
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = static_cast<double>(points[i]) - out.mean;
    out.variance += weight[i] / total * d * d;
  }
  return out;
}

}  // namespace consolidate
