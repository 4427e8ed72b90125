#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "sae/special.hpp"

namespace sae {

/// Bandwidth sentinel: selects Silverman's rule.
inline constexpr double kAutoBandwidth = 0.0;

// Gaussian kernel density on the logit scale.
struct KdeCurve {
  std::vector<double> abscissae;  // logit-scale evaluation grid
  std::vector<double> densities;
  double bandwidth = 0.0;

  /// Abscissa of the highest density value.
  double mode() const {
    const auto it = std::max_element(densities.begin(), densities.end());
    return abscissae[static_cast<std::size_t>(it - densities.begin())];
  }

  /// Trapezoid integral over the grid.
  double integral() const {
    double s = 0.0;
    for (std::size_t i = 1; i < abscissae.size(); ++i)
      s += 0.5 * (densities[i] + densities[i - 1]) * (abscissae[i] - abscissae[i - 1]);
    return s;
  }
};

inline double sample_sd(std::span<const double> xs) {
  const std::size_t n = xs.size();
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

/// Silverman's rule 1.06 * s * T^(-1/5).
inline double silverman_bandwidth(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("silverman_bandwidth: need >= 2 samples");
  const double s = sample_sd(xs);
  if (!(s > 0.0))
    throw std::invalid_argument("silverman_bandwidth: samples are all identical");
  return 1.06 * s * std::pow(static_cast<double>(xs.size()), -0.2);
}

/// Evenly spaced grid spanning the samples plus four bandwidths each side.
inline std::vector<double> kde_grid(std::span<const double> xs, double bandwidth,
                                    int points = 512) {
  if (points < 2) throw std::invalid_argument("kde_grid: need >= 2 points");
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  const double lo = *mn - 4.0 * bandwidth;
  const double hi = *mx + 4.0 * bandwidth;
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

namespace detail {

inline KdeCurve kde_gaussian(std::span<const double> samples, double h,
                             std::span<const double> grid) {
  KdeCurve curve;
  curve.bandwidth = h;
  curve.abscissae.assign(grid.begin(), grid.end());
  curve.densities.resize(grid.size());
  const double norm =
      1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0.0;
    for (double x : samples) {
      const double z = (grid[g] - x) / h;
      s += std::exp(-0.5 * z * z);
    }
    curve.densities[g] = norm * s;
  }
  return curve;
}

}  // namespace detail

/// Gaussian KDE of logit-scale samples; bandwidth <= 0 selects Silverman.
inline KdeCurve kde_from_logits(std::span<const double> logits, double bandwidth,
                                std::span<const double> grid) {
  if (logits.size() < 2) throw std::invalid_argument("kde: need >= 2 samples");
  const double h = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(logits);
  return detail::kde_gaussian(logits, h, grid);
}

/// kde_from_logits with an automatic covering grid.
inline KdeCurve kde_from_logits_auto(std::span<const double> logits, double bandwidth,
                                     int points = 512) {
  if (logits.size() < 2) throw std::invalid_argument("kde: need >= 2 samples");
  const double h = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(logits);
  const auto grid = kde_grid(logits, h, points);
  return detail::kde_gaussian(logits, h, grid);
}

namespace detail {

inline std::vector<double> rates_to_logits(std::span<const double> rates) {
  if (rates.size() < 2) throw std::invalid_argument("kde_logit: need >= 2 samples");
  std::vector<double> logits(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0.0 && rates[i] < 1.0))
      throw std::invalid_argument("kde_logit: samples must lie strictly inside (0, 1)");
    logits[i] = logit(rates[i]);
  }
  return logits;
}

}  // namespace detail

/// Gaussian KDE of rate samples, transformed to the logit scale.
inline KdeCurve kde_logit(std::span<const double> rates, double bandwidth,
                          std::span<const double> grid) {
  return kde_from_logits(detail::rates_to_logits(rates), bandwidth, grid);
}

/// kde_logit with an automatic covering grid (samples +/- 4 bandwidths).
inline KdeCurve kde_logit_auto(std::span<const double> rates, double bandwidth,
                               int points = 512) {
  return kde_from_logits_auto(detail::rates_to_logits(rates), bandwidth, points);
}

}  // namespace sae
