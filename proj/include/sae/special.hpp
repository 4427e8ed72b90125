#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>

namespace sae {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(p / (1 - p))
inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// log(1 + e^t) without overflow for large |t|.
inline double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

// log Gamma(x + d) - log Gamma(x) for x > 0, d >= 0.  Direct lgamma
// differencing loses absolute accuracy ~ulp(x log x), which dwarfs small
// differences once x is large (at x ~ 1e15 rounding alone is O(10)); above
// the cutoff a Stirling-series difference keeps ~1e-16 of the true value.
// The omitted series term is below 1/(360 x^3), so the cutoff of 1e4 keeps
// the branch error under 3e-16 for every d >= 0.
inline constexpr double kStirlingCutoff = 1e4;

inline double lgamma_diff(double x, double d) {
  if (x < kStirlingCutoff) return std::lgamma(x + d) - std::lgamma(x);
  return d * std::log(x) + (x + d - 0.5) * std::log1p(d / x) - d -
         d / (12.0 * x * (x + d));
}

// log B(a, b) via log-gamma, canonicalized as lgamma(lo) - [lgamma(hi+lo)
// - lgamma(hi)] so the large-argument cancellation runs through
// lgamma_diff; exactly symmetric in (a, b) by construction.
inline double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("log_beta: arguments must be positive");
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  return std::lgamma(lo) - lgamma_diff(hi, lo);
}

/// log[B(a + da, b + db) / B(a, b)] for da, db >= 0, stable for huge a, b.
inline double log_beta_ratio(double a, double b, double da, double db) {
  if (a + b < 1e8) return log_beta(a + da, b + db) - log_beta(a, b);
  return lgamma_diff(a, da) + lgamma_diff(b, db) - lgamma_diff(a + b, da + db);
}

/// log C(n, r) via log-gamma; exact 0 for r = 0 and r = n.
inline double log_binom_coeff(std::int64_t n, std::int64_t r) {
  if (n < 0 || r < 0 || r > n)
    throw std::domain_error("log_binom_coeff: need 0 <= r <= n");
  if (r == 0 || r == n) return 0.0;
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(r) + 1.0) -
         std::lgamma(static_cast<double>(n - r) + 1.0);
}

/// log(sum_i exp(x_i)) with max subtraction; -inf entries are permitted.
inline double log_sum_exp(std::span<const double> xs) {
  double mx = kNegInf;
  for (double x : xs)
    if (x > mx) mx = x;
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace sae
