#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sae/dataset.hpp"
#include "sae/quadrature.hpp"
#include "sae/special.hpp"

namespace sae {

// The four competing models for the area rates.
enum class ModelTag { normal, beta, null_pooled, saturated };

inline std::string to_string(ModelTag tag) {
  switch (tag) {
    case ModelTag::normal: return "normal";
    case ModelTag::beta: return "beta";
    case ModelTag::null_pooled: return "null";
    case ModelTag::saturated: return "saturated";
  }
  throw std::logic_error("unknown ModelTag");
}

/// Paper-numbered order: normal, beta, null, saturated.
inline int model_ordinal(ModelTag tag) { return static_cast<int>(tag); }

// logit(p_i) ~ N(mu, sigma^2)
struct NormalLogitParams {
  double mu = 0.0;
  double sigma = 0.0;  // >= 0
};

// p_i ~ Beta(a, b)
struct BetaParamsAB {
  double a = 1.0;
  double b = 1.0;
};

// Beta in the (mean, standard deviation) parametrization.
struct BetaParamsMeanSd {
  double mean = 0.5;
  double sd = 0.1;  // must satisfy sd^2 < mean (1 - mean)
};

// p_i == p for all areas.
struct NullParam {
  double p = 0.5;
};

// One free rate per area.
struct SaturatedParams {
  std::vector<double> rates;
};

inline BetaParamsMeanSd beta_ab_to_meansd(BetaParamsAB p) {
  if (!(p.a > 0.0) || !(p.b > 0.0))
    throw std::domain_error("beta_ab_to_meansd: a and b must be positive");
  const double s = p.a + p.b;
  return {p.a / s, std::sqrt(p.a * p.b / (s * s * (s + 1.0)))};
}

inline BetaParamsAB beta_meansd_to_ab(BetaParamsMeanSd p) {
  if (!(p.mean > 0.0 && p.mean < 1.0))
    throw std::domain_error("beta_meansd_to_ab: mean must lie in (0, 1)");
  const double v = p.mean * (1.0 - p.mean);
  if (!(p.sd > 0.0) || !(p.sd * p.sd < v))
    throw std::domain_error("beta_meansd_to_ab: need 0 < sd^2 < mean (1 - mean)");
  const double s = v / (p.sd * p.sd) - 1.0;
  return {p.mean * s, (1.0 - p.mean) * s};
}

/// log L for the pooled (null) model, binomial coefficients included.
inline double loglik_null(const Dataset& data, NullParam param) {
  if (!(param.p > 0.0 && param.p < 1.0))
    throw std::domain_error("loglik_null: p must lie in (0, 1)");
  const double R = static_cast<double>(data.total_events());
  const double N = static_cast<double>(data.total_population());
  return data.log_binom_sum() + R * std::log(param.p) + (N - R) * std::log1p(-param.p);
}

// log L for the normal-logit mixture, marginalized over the area effects
// with the supplied quadrature rule.  Every per-area integral is a
// log-sum-exp over the rule's nodes, so nothing underflows even at
// n_i ~ 5e4.  sigma == 0 collapses to a common rate logistic(mu) and
// bypasses quadrature.
inline double loglik_normal_logit(const Dataset& data, NormalLogitParams params,
                                  const QuadratureRule& rule) {
  if (!(params.sigma >= 0.0))
    throw std::domain_error("loglik_normal_logit: sigma must be >= 0");
  const double R = static_cast<double>(data.total_events());
  const double N = static_cast<double>(data.total_population());
  if (params.sigma == 0.0)
    return data.log_binom_sum() + R * params.mu - N * softplus(params.mu);

  const int K = rule.size();
  std::vector<double> theta(K), sp(K), logw(K), term(K);
  for (int k = 0; k < K; ++k) {
    theta[k] = params.mu + params.sigma * rule.nodes[k];
    sp[k] = softplus(theta[k]);
    logw[k] = std::log(rule.weights[k]);
  }
  double total = data.log_binom_sum();
  for (const auto& rec : data.records()) {
    const double r = static_cast<double>(rec.r);
    const double n = static_cast<double>(rec.n);
    for (int k = 0; k < K; ++k) term[k] = r * theta[k] - n * sp[k] + logw[k];
    total += log_sum_exp(term);
  }
  return total;
}

/// log L for the beta-binomial model, binomial coefficients included.
inline double loglik_beta_binomial(const Dataset& data, BetaParamsAB params) {
  if (!(params.a > 0.0) || !(params.b > 0.0))
    throw std::domain_error("loglik_beta_binomial: a and b must be positive");
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& rec = data.records()[i];
    total += data.log_binom(i) +
             log_beta_ratio(params.a, params.b, static_cast<double>(rec.r),
                            static_cast<double>(rec.n - rec.r));
  }
  return total;
}

/// log L for the saturated model (one rate per area).
inline double loglik_saturated(const Dataset& data, std::span<const double> rates) {
  if (rates.size() != data.size())
    throw std::invalid_argument("loglik_saturated: rates length must match dataset size");
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& rec = data.records()[i];
    const double p = rates[i];
    if (!(p > 0.0 && p < 1.0))
      throw std::domain_error("loglik_saturated: rates must lie in (0, 1)");
    total += data.log_binom(i) + static_cast<double>(rec.r) * std::log(p) +
             static_cast<double>(rec.n - rec.r) * std::log1p(-p);
  }
  return total;
}

inline double loglik_saturated(const Dataset& data, const SaturatedParams& params) {
  return loglik_saturated(data, std::span<const double>(params.rates));
}

}  // namespace sae
