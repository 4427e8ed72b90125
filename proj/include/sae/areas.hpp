#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sae/dataset.hpp"
#include "sae/models.hpp"
#include "sae/rng.hpp"
#include "sae/special.hpp"

namespace sae {

// T x m matrix of per-area rate draws, row t aligned with the parameter
// draw that generated it.
struct AreaDrawMatrix {
  std::string label;
  std::size_t num_draws = 0;  // T
  std::size_t num_areas = 0;  // m
  std::vector<double> rates;  // row-major, strictly inside (0, 1)
  // Areas where the logit anchor needed the half-count correction
  // (r = 0, or the symmetric r = n case); normal model only.
  std::vector<std::uint8_t> zero_corrected;
  std::vector<std::uint8_t> full_corrected;

  double at(std::size_t t, std::size_t i) const { return rates[t * num_areas + i]; }
  double& at(std::size_t t, std::size_t i) { return rates[t * num_areas + i]; }
  std::span<const double> row(std::size_t t) const {
    return {rates.data() + t * num_areas, num_areas};
  }
  std::vector<double> column(std::size_t i) const {
    std::vector<double> col(num_draws);
    for (std::size_t t = 0; t < num_draws; ++t) col[t] = at(t, i);
    return col;
  }
};

namespace detail {

inline double clamp_rate(double p) {
  if (!(p > 0.0)) return std::numeric_limits<double>::min();
  if (!(p < 1.0)) return 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return p;
}

inline AreaDrawMatrix make_matrix(std::string label, std::size_t T, std::size_t m) {
  AreaDrawMatrix mat;
  mat.label = std::move(label);
  mat.num_draws = T;
  mat.num_areas = m;
  mat.rates.resize(T * m);
  return mat;
}

}  // namespace detail

// Per-area logit anchor theta_hat = log[r / (n - r)] and sampling precision
// psi = n p_hat (1 - p_hat), with the half-count correction at r = 0 and,
// symmetrically, at r = n.
struct AreaLogitStats {
  double theta_hat = 0.0;
  double precision = 0.0;
  bool zero_corrected = false;
  bool full_corrected = false;
};

inline AreaLogitStats area_logit_stats(const CityRecord& rec) {
  AreaLogitStats s;
  double r_eff = static_cast<double>(rec.r);
  if (rec.r == 0) {
    r_eff = 0.5;
    s.zero_corrected = true;
  } else if (rec.r == rec.n) {
    r_eff = static_cast<double>(rec.n) - 0.5;
    s.full_corrected = true;
  }
  const double n = static_cast<double>(rec.n);
  const double p_hat = r_eff / n;
  s.theta_hat = std::log(r_eff / (n - r_eff));
  s.precision = n * p_hat * (1.0 - p_hat);
  return s;
}

struct ConditionalNormal {
  double mean = 0.0;
  double sd = 0.0;
};

// Second-order normal approximation to the conditional posterior of an
// area logit given (mu, sigma): precision-weighted compromise between the
// data anchor theta_hat and the population mean mu.
inline ConditionalNormal normal_area_posterior(const AreaLogitStats& s, double mu,
                                               double sigma) {
  if (!(sigma >= 0.0)) throw std::domain_error("normal_area_posterior: sigma must be >= 0");
  if (sigma == 0.0) return {mu, 0.0};
  const double psi = 1.0 / (sigma * sigma);
  const double total = s.precision + psi;
  return {(s.precision * s.theta_hat + psi * mu) / total, 1.0 / std::sqrt(total)};
}

// Exact conditional posterior moments by Simpson integration over the
// logit; validation cross-check for the normal approximation above.
inline ConditionalNormal normal_area_posterior_exact(const CityRecord& rec, double mu,
                                                     double sigma, int points = 4001) {
  const auto stats = area_logit_stats(rec);
  const auto approx = normal_area_posterior(stats, mu, sigma);
  const double half_width = 10.0 * std::max(approx.sd, 1e-6) + 2.0 * sigma;
  const double lo = approx.mean - half_width, hi = approx.mean + half_width;
  const int n_pts = points | 1;  // Simpson needs an odd count
  const double h = (hi - lo) / (n_pts - 1);

  const double r = static_cast<double>(rec.r);
  const double n = static_cast<double>(rec.n);
  auto log_density = [&](double th) {
    const double z = (th - mu) / sigma;
    return r * th - n * softplus(th) - 0.5 * z * z;
  };
  double peak = kNegInf;
  for (int i = 0; i < n_pts; ++i) peak = std::max(peak, log_density(lo + h * i));

  double z0 = 0.0, z1 = 0.0, z2 = 0.0;
  for (int i = 0; i < n_pts; ++i) {
    const double th = lo + h * i;
    const double w = (i == 0 || i == n_pts - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double g = w * std::exp(log_density(th) - peak);
    z0 += g;
    z1 += g * th;
    z2 += g * th * th;
  }
  const double mean = z1 / z0;
  return {mean, std::sqrt(std::max(z2 / z0 - mean * mean, 0.0))};
}

// Normal-model area draws: for each parameter draw t and area i, one draw
// from the approximate conditional posterior, mapped back to the rate scale.
inline AreaDrawMatrix area_draws_normal(const Dataset& data,
                                        std::span<const std::array<double, 2>> mu_sigma,
                                        Rng& rng) {
  if (mu_sigma.empty()) throw std::invalid_argument("area_draws_normal: no parameter draws");
  const std::size_t m = data.size();
  auto mat = detail::make_matrix("normal", mu_sigma.size(), m);
  mat.zero_corrected.resize(m);
  mat.full_corrected.resize(m);

  std::vector<AreaLogitStats> stats;
  stats.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    stats.push_back(area_logit_stats(data.records()[i]));
    mat.zero_corrected[i] = stats.back().zero_corrected;
    mat.full_corrected[i] = stats.back().full_corrected;
  }
  for (std::size_t t = 0; t < mu_sigma.size(); ++t) {
    const auto [mu, sigma] = mu_sigma[t];
    for (std::size_t i = 0; i < m; ++i) {
      const auto cond = normal_area_posterior(stats[i], mu, sigma);
      mat.at(t, i) = detail::clamp_rate(logistic(rng.normal(cond.mean, cond.sd)));
    }
  }
  return mat;
}

/// Beta-model area draws: p_i ~ Beta(r_i + a_t, n_i - r_i + b_t).
inline AreaDrawMatrix area_draws_beta(const Dataset& data,
                                      std::span<const std::array<double, 2>> ab, Rng& rng) {
  if (ab.empty()) throw std::invalid_argument("area_draws_beta: no parameter draws");
  const std::size_t m = data.size();
  auto mat = detail::make_matrix("beta", ab.size(), m);
  for (std::size_t t = 0; t < ab.size(); ++t) {
    const auto [a, b] = ab[t];
    if (!(a > 0.0) || !(b > 0.0))
      throw std::domain_error("area_draws_beta: a and b must be positive");
    for (std::size_t i = 0; i < m; ++i) {
      const auto& rec = data.records()[i];
      mat.at(t, i) = rng.beta(static_cast<double>(rec.r) + a,
                              static_cast<double>(rec.n - rec.r) + b);
    }
  }
  return mat;
}

// Local flat-prior posteriors Beta(r_i + 1, n_i - r_i + 1), independent per
// area; these double as the saturated model's area draws.
inline AreaDrawMatrix area_draws_local(const Dataset& data, std::size_t T, Rng& rng) {
  if (T < 1) throw std::invalid_argument("area_draws_local: T must be >= 1");
  const std::size_t m = data.size();
  auto mat = detail::make_matrix("local", T, m);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < m; ++i) {
      const auto& rec = data.records()[i];
      mat.at(t, i) = rng.beta(static_cast<double>(rec.r) + 1.0,
                              static_cast<double>(rec.n - rec.r) + 1.0);
    }
  return mat;
}

// Logit-rate draws for a randomly drawn ("typical") area from the fitted
// upper-level model: mu_t + sigma_t Z for the normal model, the logit of a
// Beta(a_t, b_t) draw for the beta model.
inline std::vector<double> typical_city_draws(ModelTag model,
                                              std::span<const std::array<double, 2>> params,
                                              Rng& rng) {
  if (params.empty()) throw std::invalid_argument("typical_city_draws: no parameter draws");
  std::vector<double> logits(params.size());
  switch (model) {
    case ModelTag::normal:
      for (std::size_t t = 0; t < params.size(); ++t)
        logits[t] = rng.normal(params[t][0], params[t][1]);
      break;
    case ModelTag::beta:
      for (std::size_t t = 0; t < params.size(); ++t)
        logits[t] = logit(rng.beta(params[t][0], params[t][1]));
      break;
    default:
      throw std::invalid_argument("typical_city_draws: only the normal and beta models "
                                  "describe a typical area");
  }
  return logits;
}

}  // namespace sae
