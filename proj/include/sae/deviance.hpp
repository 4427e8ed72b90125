#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "sae/dataset.hpp"
#include "sae/models.hpp"
#include "sae/rng.hpp"

namespace sae {

/// Deviance gap equivalent to a likelihood ratio of 9 (-2 log 9).
inline const double kStrongEvidenceDiff = -2.0 * std::log(9.0);

enum class DevianceSource { exact_grid, monte_carlo };

// Posterior distribution of the deviance D = -2 log L: sorted support
// values with cumulative probabilities.  Grid posteriors yield it exactly
// (one atom per grid point); conjugate models yield Monte Carlo versions
// with uniform atoms t/T.
class DevianceDistribution {
 public:
  static DevianceDistribution from_draws(std::vector<double> draws,
                                         DevianceSource source = DevianceSource::monte_carlo) {
    if (draws.empty()) throw std::invalid_argument("DevianceDistribution: no draws");
    std::sort(draws.begin(), draws.end());
    DevianceDistribution d;
    d.source_ = source;
    const std::size_t T = draws.size();
    d.values_ = std::move(draws);
    d.cum_.resize(T);
    for (std::size_t t = 0; t < T; ++t)
      d.cum_[t] = static_cast<double>(t + 1) / static_cast<double>(T);
    return d;
  }

  /// Weighted atoms (e.g. grid deviances with posterior masses).  Zero-mass
  /// atoms are dropped and duplicate values merged.
  static DevianceDistribution from_weighted(std::vector<double> values,
                                            std::vector<double> masses,
                                            DevianceSource source = DevianceSource::exact_grid) {
    if (values.size() != masses.size())
      throw std::invalid_argument("DevianceDistribution: size mismatch");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    DevianceDistribution d;
    d.source_ = source;
    double total = 0.0;
    for (std::size_t i : order) {
      const double m = masses[i];
      if (!(m >= 0.0)) throw std::invalid_argument("DevianceDistribution: negative mass");
      if (m == 0.0) continue;
      if (!std::isfinite(values[i]))
        throw std::invalid_argument("DevianceDistribution: non-finite value with mass");
      if (!d.values_.empty() && values[i] == d.values_.back()) {
        d.cum_.back() += m;
      } else {
        d.values_.push_back(values[i]);
        d.cum_.push_back(m);
      }
      total += m;
    }
    if (d.values_.empty() || !(total > 0.0))
      throw std::invalid_argument("DevianceDistribution: all masses are zero");
    double acc = 0.0;
    for (auto& c : d.cum_) {
      acc += c;
      c = acc / total;
    }
    d.cum_.back() = 1.0;
    return d;
  }

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& cum_probs() const { return cum_; }
  DevianceSource source() const { return source_; }
  std::size_t support() const { return values_.size(); }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

  /// Smallest support value whose cumulative probability reaches q.
  double quantile(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile: q must be in [0, 1]");
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), q);
    const std::size_t i = static_cast<std::size_t>(it - cum_.begin());
    return values_[std::min(i, values_.size() - 1)];
  }

  double median() const { return quantile(0.5); }

  double cdf(double x) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    if (it == values_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - values_.begin()) - 1];
  }

  /// One inverse-CDF draw.
  double draw(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - cum_.begin());
    return values_[std::min(i, values_.size() - 1)];
  }

 private:
  DevianceDistribution() = default;

  std::vector<double> values_;
  std::vector<double> cum_;
  DevianceSource source_ = DevianceSource::monte_carlo;
};

// Summary of the difference D_first - D_second between two posterior
// deviance distributions.
struct DevianceDiffSummary {
  double median = 0.0;
  double ci_low = 0.0;   // central 95% interval from the ordered differences
  double ci_high = 0.0;
  double p_first_smaller = 0.0;  // P(D_first < D_second)
  double p_strong = 0.0;         // P(D_first - D_second < -2 log 9)
};

/// Null-model posterior deviance: T draws p ~ Beta(R+1, N-R+1).
inline DevianceDistribution deviance_dist_null(const Dataset& data, std::size_t T, Rng& rng) {
  if (T < 1) throw std::invalid_argument("deviance_dist_null: T must be >= 1");
  const double R = static_cast<double>(data.total_events());
  const double N = static_cast<double>(data.total_population());
  std::vector<double> draws(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double p = rng.beta(R + 1.0, N - R + 1.0);
    draws[t] = -2.0 * loglik_null(data, NullParam{p});
  }
  return DevianceDistribution::from_draws(std::move(draws));
}

/// Saturated-model posterior deviance: per draw, independent
/// p_i ~ Beta(r_i+1, n_i-r_i+1) for every area.
inline DevianceDistribution deviance_dist_saturated(const Dataset& data, std::size_t T,
                                                    Rng& rng) {
  if (T < 1) throw std::invalid_argument("deviance_dist_saturated: T must be >= 1");
  std::vector<double> draws(T);
  for (std::size_t t = 0; t < T; ++t) {
    double ll = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& rec = data.records()[i];
      const double p = rng.beta(static_cast<double>(rec.r) + 1.0,
                                static_cast<double>(rec.n - rec.r) + 1.0);
      ll += data.log_binom(i) + static_cast<double>(rec.r) * std::log(p) +
            static_cast<double>(rec.n - rec.r) * std::log1p(-p);
    }
    draws[t] = -2.0 * ll;
  }
  return DevianceDistribution::from_draws(std::move(draws));
}

namespace detail {

/// Central 95% interval indices, 1-based ceil(q T) (250th/9750th at T = 1e4).
inline std::pair<std::size_t, std::size_t> central95_indices(std::size_t T) {
  const auto idx = [T](double q) {
    auto i = static_cast<std::size_t>(std::ceil(q * static_cast<double>(T)));
    return std::clamp<std::size_t>(i, 1, T) - 1;  // to 0-based
  };
  return {idx(0.025), idx(0.975)};
}

inline double middle_of_sorted(const std::vector<double>& sorted) {
  const std::size_t T = sorted.size();
  if (T % 2 == 1) return sorted[T / 2];
  return 0.5 * (sorted[T / 2 - 1] + sorted[T / 2]);
}

}  // namespace detail

// Draws T values independently from each distribution ("unordered" pairing,
// independent both within and among models), differences them, and
// summarizes the difference D_first - D_second.
inline DevianceDiffSummary compare(const DevianceDistribution& first,
                                   const DevianceDistribution& second, std::size_t T,
                                   Rng& rng) {
  if (T < 1) throw std::invalid_argument("compare: T must be >= 1");
  std::vector<double> diffs(T);
  for (std::size_t t = 0; t < T; ++t) diffs[t] = first.draw(rng);
  for (std::size_t t = 0; t < T; ++t) diffs[t] -= second.draw(rng);

  std::size_t below_zero = 0, below_strong = 0;
  for (double d : diffs) {
    if (d < 0.0) ++below_zero;
    if (d < kStrongEvidenceDiff) ++below_strong;
  }
  std::sort(diffs.begin(), diffs.end());
  const auto [lo, hi] = detail::central95_indices(T);
  DevianceDiffSummary s;
  s.median = detail::middle_of_sorted(diffs);
  s.ci_low = diffs[lo];
  s.ci_high = diffs[hi];
  s.p_first_smaller = static_cast<double>(below_zero) / static_cast<double>(T);
  s.p_strong = static_cast<double>(below_strong) / static_cast<double>(T);
  return s;
}

/// Sorted difference draws FD12 + chi2_s1 - chi2_s2 (independent chi-squares).
inline DevianceDistribution asymptotic_diff(int s1, int s2, double fd12, std::size_t T,
                                            Rng& rng) {
  if (s1 < 1 || s2 < 1) throw std::invalid_argument("asymptotic_diff: s1, s2 must be >= 1");
  if (T < 1) throw std::invalid_argument("asymptotic_diff: T must be >= 1");
  std::vector<double> draws(T);
  for (std::size_t t = 0; t < T; ++t)
    draws[t] = fd12 + rng.chi_squared(static_cast<double>(s1)) -
               rng.chi_squared(static_cast<double>(s2));
  return DevianceDistribution::from_draws(std::move(draws));
}

struct NormalLimit {
  double mean = 0.0;
  double sd = 0.0;
};

/// Large-s limit of the chi-squared difference: N(FD12 + s1 - s2, 2 s1 + 2 s2).
inline NormalLimit asymptotic_diff_normal(int s1, int s2, double fd12) {
  return {fd12 + static_cast<double>(s1 - s2),
          std::sqrt(2.0 * static_cast<double>(s1) + 2.0 * static_cast<double>(s2))};
}

}  // namespace sae
