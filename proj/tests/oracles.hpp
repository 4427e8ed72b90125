// Test-side oracles, independent of the library code paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

/// Composite Simpson's rule with `panels` even subintervals.
template <typename F>
double simpson(F f, double a, double b, int panels = 2000) {
  if (panels % 2 == 1) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

/// Kolmogorov-Smirnov distance between a sample and an analytic CDF.
inline double ks_to_cdf(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - F));
    d = std::max(d, std::abs(static_cast<double>(i) / n - F));
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov distance.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// log C(n, r) as a compensated long-double sum of log((n-r+j)/j); no lgamma.
inline double log_binom_brute(std::int64_t n, std::int64_t r) {
  if (r > n - r) r = n - r;
  long double sum = 0.0L, comp = 0.0L;
  for (std::int64_t j = 1; j <= r; ++j) {
    const long double term =
        std::log(static_cast<long double>(n - r + j)) - std::log(static_cast<long double>(j));
    const long double y = term - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return static_cast<double>(sum);
}

/// Empirical quantile (sorted copy, nearest-rank with averaging at halves).
inline double quantile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * xs[lo] + w * xs[hi];
}

}  // namespace oracle
