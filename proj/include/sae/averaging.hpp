#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sae/areas.hpp"
#include "sae/dataset.hpp"
#include "sae/deviance.hpp"
#include "sae/grid.hpp"
#include "sae/models.hpp"
#include "sae/rng.hpp"

namespace sae {

// Fixed substream roles so every pipeline stage draws from a stream keyed
// on (master seed, model ordinal, role) and results never depend on which
// other models are included or on evaluation order.
namespace stream {
inline constexpr std::uint64_t kParams = 1;
inline constexpr std::uint64_t kAreas = 2;
inline constexpr std::uint64_t kTypical = 3;
inline constexpr std::uint64_t kSelect = 4;
inline constexpr std::uint64_t kDist = 5;
inline constexpr std::uint64_t kCompareBase = 64;
}  // namespace stream

struct AveragingConfig {
  std::vector<ModelTag> models;
  std::vector<double> priors;  // empty selects equal priors

  std::vector<double> normalized_priors() const {
    if (models.empty())
      throw std::invalid_argument("averaging: at least one model must be included");
    for (std::size_t i = 0; i < models.size(); ++i)
      for (std::size_t j = i + 1; j < models.size(); ++j)
        if (models[i] == models[j])
          throw std::invalid_argument("averaging: duplicate model " + to_string(models[i]));
    std::vector<double> p = priors;
    if (p.empty()) p.assign(models.size(), 1.0 / static_cast<double>(models.size()));
    if (p.size() != models.size())
      throw std::invalid_argument("averaging: priors must match the model list");
    double total = 0.0;
    for (double w : p) {
      if (!(w >= 0.0)) throw std::invalid_argument("averaging: negative prior probability");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("averaging: prior probabilities sum to zero");
    for (double& w : p) w /= total;
    return p;
  }
};

// Everything the averaging step needs from one model, index-aligned on t:
// the deviance draw, the parameter draw that produced it, and the area
// rates generated from that same parameter draw.
struct ModelDraws {
  ModelTag tag = ModelTag::normal;
  std::vector<double> deviances;                 // T
  std::vector<std::array<double, 2>> params;     // T; (mu,sigma), (a,b), or (p,0); empty for saturated
  AreaDrawMatrix areas;                          // T x m
};

struct AlignedDraws {
  std::size_t num_draws = 0;
  std::size_t num_areas = 0;
  std::vector<ModelDraws> models;

  bool has(ModelTag tag) const {
    for (const auto& md : models)
      if (md.tag == tag) return true;
    return false;
  }
  const ModelDraws& require(ModelTag tag) const {
    for (const auto& md : models)
      if (md.tag == tag) return md;
    throw std::invalid_argument("aligned draws do not include model " + to_string(tag));
  }
};

// One parameter-sample pass per model: deviances and area draws come from
// the same draw t.  Grid models sample grid points by posterior mass (the
// deviance is read off the grid); null and saturated use their conjugate
// posteriors.
inline AlignedDraws make_aligned_draws(const Dataset& data, const PosteriorGrid* normal_grid,
                                       const PosteriorGrid* beta_grid,
                                       std::span<const ModelTag> which, std::size_t T,
                                       const Rng& master) {
  if (T < 1) throw std::invalid_argument("make_aligned_draws: T must be >= 1");
  AlignedDraws out;
  out.num_draws = T;
  out.num_areas = data.size();
  for (ModelTag tag : which) {
    ModelDraws md;
    md.tag = tag;
    const auto ord = static_cast<std::uint64_t>(model_ordinal(tag));
    Rng param_rng = master.derive(ord, stream::kParams);
    Rng area_rng = master.derive(ord, stream::kAreas);
    switch (tag) {
      case ModelTag::normal: {
        if (normal_grid == nullptr)
          throw std::invalid_argument("make_aligned_draws: normal grid required");
        const auto idx = sample_indices(*normal_grid, T, param_rng);
        md.params.resize(T);
        md.deviances.resize(T);
        for (std::size_t t = 0; t < T; ++t) {
          md.params[t] = normal_grid->point(idx[t]);
          md.deviances[t] = normal_grid->deviance_at(idx[t]);
        }
        md.areas = area_draws_normal(data, md.params, area_rng);
        break;
      }
      case ModelTag::beta: {
        if (beta_grid == nullptr)
          throw std::invalid_argument("make_aligned_draws: beta grid required");
        const auto idx = sample_indices(*beta_grid, T, param_rng);
        md.params.resize(T);
        md.deviances.resize(T);
        for (std::size_t t = 0; t < T; ++t) {
          const auto pt = beta_grid->point(idx[t]);
          const auto ab = beta_meansd_to_ab(BetaParamsMeanSd{pt[0], pt[1]});
          md.params[t] = {ab.a, ab.b};
          md.deviances[t] = beta_grid->deviance_at(idx[t]);
        }
        md.areas = area_draws_beta(data, md.params, area_rng);
        break;
      }
      case ModelTag::null_pooled: {
        const double R = static_cast<double>(data.total_events());
        const double N = static_cast<double>(data.total_population());
        md.params.resize(T);
        md.deviances.resize(T);
        md.areas = detail::make_matrix("null", T, data.size());
        for (std::size_t t = 0; t < T; ++t) {
          const double p = param_rng.beta(R + 1.0, N - R + 1.0);
          md.params[t] = {p, 0.0};
          md.deviances[t] = -2.0 * loglik_null(data, NullParam{p});
          for (std::size_t i = 0; i < data.size(); ++i) md.areas.at(t, i) = p;
        }
        break;
      }
      case ModelTag::saturated: {
        md.areas = area_draws_local(data, T, area_rng);
        md.areas.label = "saturated";
        md.deviances.resize(T);
        for (std::size_t t = 0; t < T; ++t)
          md.deviances[t] = -2.0 * loglik_saturated(data, md.areas.row(t));
        break;
      }
    }
    out.models.push_back(std::move(md));
  }
  return out;
}

// Per-draw posterior model probabilities
// pi_t(M_j) = pi_j L_j^[t] / sum_k pi_k L_k^[t], computed in log space from
// the deviances.  Row-major T x J, rows sum to one.
inline std::vector<double> posterior_model_probs(const AlignedDraws& aligned,
                                                 const AveragingConfig& config) {
  const auto priors = config.normalized_priors();
  const std::size_t J = config.models.size();
  const std::size_t T = aligned.num_draws;
  std::vector<const std::vector<double>*> dev(J);
  for (std::size_t j = 0; j < J; ++j) {
    dev[j] = &aligned.require(config.models[j]).deviances;
    if (dev[j]->size() != T)
      throw std::invalid_argument("posterior_model_probs: draw counts differ across models");
  }
  std::vector<double> probs(T * J);
  std::vector<double> x(J);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < J; ++j)
      x[j] = std::log(priors[j]) - 0.5 * (*dev[j])[t];
    const double lse = log_sum_exp(x);
    if (!std::isfinite(lse))
      throw std::runtime_error("posterior_model_probs: all model likelihoods vanished");
    for (std::size_t j = 0; j < J; ++j) probs[t * J + j] = std::exp(x[j] - lse);
  }
  return probs;
}

// Model-averaged area draws.  By default one model index is selected per
// draw t and shared by every area (the marginal per-area densities are the
// same either way); per_area_selection re-selects independently per (t, i).
struct AveragedDraws {
  AreaDrawMatrix areas;
  std::vector<std::uint32_t> selected;  // index into config.models; size T, or T*m per-area
  bool per_area = false;
};

inline AveragedDraws averaged_area_draws(const AlignedDraws& aligned,
                                         const AveragingConfig& config, Rng& rng,
                                         bool per_area_selection = false) {
  const auto probs = posterior_model_probs(aligned, config);
  const std::size_t J = config.models.size();
  const std::size_t T = aligned.num_draws;
  const std::size_t m = aligned.num_areas;
  std::vector<const AreaDrawMatrix*> sources(J);
  for (std::size_t j = 0; j < J; ++j) sources[j] = &aligned.require(config.models[j]).areas;

  AveragedDraws out;
  out.per_area = per_area_selection;
  out.areas = detail::make_matrix("averaged", T, m);
  if (per_area_selection) {
    out.selected.resize(T * m);
    for (std::size_t t = 0; t < T; ++t) {
      const std::span<const double> row(probs.data() + t * J, J);
      for (std::size_t i = 0; i < m; ++i) {
        const auto j = static_cast<std::uint32_t>(rng.categorical(row));
        out.selected[t * m + i] = j;
        out.areas.at(t, i) = sources[j]->at(t, i);
      }
    }
  } else {
    out.selected.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
      const std::span<const double> row(probs.data() + t * J, J);
      const auto j = static_cast<std::uint32_t>(rng.categorical(row));
      out.selected[t] = j;
      for (std::size_t i = 0; i < m; ++i) out.areas.at(t, i) = sources[j]->at(t, i);
    }
  }
  return out;
}

// Model-averaged typical-area logits: per draw t, pick the normal draw with
// probability pi_t(normal | y) and the beta draw otherwise.  Only the two
// upper-level models describe a typical area, so any other tag in the
// config is rejected.
inline std::vector<double> averaged_typical_city(std::span<const double> normal_logits,
                                                 std::span<const double> beta_logits,
                                                 const AlignedDraws& aligned,
                                                 const AveragingConfig& config, Rng& rng) {
  for (ModelTag tag : config.models)
    if (tag != ModelTag::normal && tag != ModelTag::beta)
      throw std::invalid_argument("averaged_typical_city: model " + to_string(tag) +
                                  " does not describe a typical area");
  const std::size_t T = aligned.num_draws;
  if (aligned.has(ModelTag::normal) && normal_logits.size() != T)
    throw std::invalid_argument("averaged_typical_city: normal draw count mismatch");
  if (aligned.has(ModelTag::beta) && beta_logits.size() != T)
    throw std::invalid_argument("averaged_typical_city: beta draw count mismatch");

  const auto probs = posterior_model_probs(aligned, config);
  const std::size_t J = config.models.size();
  std::vector<double> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    const std::span<const double> row(probs.data() + t * J, J);
    const std::size_t j = rng.categorical(row);
    out[t] = config.models[j] == ModelTag::normal ? normal_logits[t] : beta_logits[t];
  }
  return out;
}

}  // namespace sae
