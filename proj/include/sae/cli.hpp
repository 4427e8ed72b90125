#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "sae/averaging.hpp"
#include "sae/dataset.hpp"
#include "sae/deviance.hpp"
#include "sae/grid.hpp"
#include "sae/kde.hpp"
#include "sae/models.hpp"
#include "sae/report.hpp"

namespace sae {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kQuadraturePoints = 20;

struct RunConfig {
  std::string data_path;           // empty selects the embedded Missouri data
  std::size_t draws = 10000;       // T
  std::uint64_t seed = 1;
  int grid_points = 100;
  std::optional<GridSpec> normal_grid;
  std::optional<GridSpec> beta_grid;
  std::vector<ModelTag> models = {ModelTag::normal, ModelTag::beta, ModelTag::saturated};
  std::vector<double> priors;      // empty selects equal priors
  std::vector<int> cities = {1, 8, 17, 83, 84};
  double bandwidth = kAutoBandwidth;
  std::string out_dir = "out";
  bool svg = false;
  bool per_area_selection = false;
};

inline ModelTag parse_model_tag(const std::string& name) {
  if (name == "normal") return ModelTag::normal;
  if (name == "beta") return ModelTag::beta;
  if (name == "null") return ModelTag::null_pooled;
  if (name == "saturated") return ModelTag::saturated;
  throw std::invalid_argument("unknown model '" + name +
                              "' (expected normal, beta, null or saturated)");
}

/// Parses a `--grid <model>:<lo1>,<hi1>,<lo2>,<hi2>` flag into the config.
inline void apply_grid_flag(RunConfig& cfg, const std::string& flag) {
  const auto colon = flag.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("--grid expects <model>:<lo1>,<hi1>,<lo2>,<hi2>");
  const std::string model = flag.substr(0, colon);
  std::stringstream ss(flag.substr(colon + 1));
  std::array<double, 4> v{};
  char sep = ',';
  for (int i = 0; i < 4; ++i) {
    if (i > 0 && (!(ss >> sep) || sep != ',')) sep = '?';
    if (sep == '?' || !(ss >> v[i]))
      throw std::invalid_argument("--grid expects four comma-separated bounds");
  }
  GridSpec spec{v[0], v[1], v[2], v[3], 100, 100};
  if (model == "normal") {
    cfg.normal_grid = spec;
  } else if (model == "beta") {
    cfg.beta_grid = spec;
  } else {
    throw std::invalid_argument("--grid model must be 'normal' or 'beta'");
  }
}

namespace detail {

inline void validate_config(const RunConfig& cfg) {
  if (cfg.draws < 100) throw std::invalid_argument("config: draws must be >= 100");
  if (cfg.grid_points < 2) throw std::invalid_argument("config: grid size must be >= 2");
  if (!cfg.priors.empty() && cfg.priors.size() != cfg.models.size())
    throw std::invalid_argument("config: priors must match the model list");
  if (cfg.models.empty()) throw std::invalid_argument("config: at least one model required");
}

inline Dataset load_data(const RunConfig& cfg) {
  return cfg.data_path.empty() ? missouri() : load_csv(cfg.data_path);
}

inline GridSpec grid_spec_for(const RunConfig& cfg, const Dataset& data, GridModel model,
                              const QuadratureRule& rule) {
  const auto& explicit_spec =
      model == GridModel::normal_logit ? cfg.normal_grid : cfg.beta_grid;
  if (explicit_spec) {
    GridSpec spec = *explicit_spec;
    spec.g1 = spec.g2 = cfg.grid_points;
    return spec;
  }
  return auto_grid_spec(data, model, rule, cfg.grid_points);
}

inline std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  return std::filesystem::path(cfg.out_dir) / name;
}

inline void emit_curve(const RunConfig& cfg, const std::string& stem, const KdeCurve& curve,
                       const std::string& title) {
  write_text_file(out_path(cfg, stem + ".csv"), curve_to_csv(curve));
  if (cfg.svg)
    write_text_file(out_path(cfg, stem + ".svg"),
                    curve_to_svg(curve.abscissae, curve.densities, title));
}

inline void emit_cdf(const RunConfig& cfg, const std::string& stem,
                     const DevianceDistribution& dist, const std::string& title) {
  write_text_file(out_path(cfg, stem + ".csv"), cdf_to_csv(dist));
  if (cfg.svg)
    write_text_file(out_path(cfg, stem + ".svg"),
                    curve_to_svg(dist.values(), dist.cum_probs(), title));
}

inline nlohmann::json grid_summary_json(const PosteriorGrid& grid, const GridSummary& s,
                                        const MleEstimate& refined) {
  nlohmann::json j;
  j["grid"] = {{"lo1", grid.spec().lo1}, {"hi1", grid.spec().hi1}, {"lo2", grid.spec().lo2},
               {"hi2", grid.spec().hi2}, {"g1", grid.spec().g1},   {"g2", grid.spec().g2}};
  j["mle"] = {s.mle[0], s.mle[1]};
  j["max_loglik"] = s.max_loglik;
  j["frequentist_deviance"] = s.freq_deviance;
  j["mean_deviance"] = s.mean_deviance;
  j["p_d"] = s.p_d;
  j["dic"] = s.dic;
  j["refined_mle"] = {refined.point[0], refined.point[1]};
  j["refined_loglik"] = refined.loglik;
  return j;
}

inline std::size_t city_index(const Dataset& data, int id) {
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.records()[i].id == id) return i;
  throw std::invalid_argument("no record with city id " + std::to_string(id));
}

inline void log_stage(const std::string& msg) { std::cerr << "[sae] " << msg << "\n"; }

}  // namespace detail

// Fits the two parametric models on their grids and writes grid CSVs plus
// a JSON summary (MLE, log-likelihood, deviance, mean deviance, p_D, DIC).
inline void cmd_fit(const RunConfig& cfg) {
  detail::validate_config(cfg);
  const Dataset data = detail::load_data(cfg);
  const auto rule = gauss_hermite_normalized(kQuadraturePoints);
  std::filesystem::create_directories(cfg.out_dir);

  nlohmann::json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["dataset"] = {{"source", cfg.data_path.empty() ? "missouri" : cfg.data_path},
                        {"areas", data.size()},
                        {"events", data.total_events()},
                        {"population", data.total_population()}};
  summary["seed"] = cfg.seed;

  for (GridModel model : {GridModel::normal_logit, GridModel::beta_mean_sd}) {
    const std::string name = to_string(model);
    detail::log_stage("fit: building " + name + " grid (" + std::to_string(cfg.grid_points) +
                      "x" + std::to_string(cfg.grid_points) + ")");
    const auto spec = detail::grid_spec_for(cfg, data, model, rule);
    const auto grid = build_grid(data, model, spec, rule);
    const auto s = grid_summaries(grid);
    const auto refined = find_mle(data, model, rule);
    write_text_file(detail::out_path(cfg, "grid_" + name + ".csv"), grid_to_csv(grid));
    summary["models"][name] = detail::grid_summary_json(grid, s, refined);
    if (model == GridModel::beta_mean_sd) {
      const auto ab = beta_meansd_to_ab(BetaParamsMeanSd{s.mle[0], s.mle[1]});
      summary["models"][name]["mle_ab"] = {ab.a, ab.b};
    }
  }
  write_text_file(detail::out_path(cfg, "summary.json"), summary.dump(2) + "\n");
  detail::log_stage("fit: wrote " + (std::filesystem::path(cfg.out_dir) / "summary.json").string());
}

// Builds all four posterior deviance distributions, writes their CDFs
// (exact for the grid models, Monte Carlo for null and saturated), and
// summarizes the deviance difference for every configured model pair.
inline void cmd_compare(const RunConfig& cfg) {
  detail::validate_config(cfg);
  const Dataset data = detail::load_data(cfg);
  const auto rule = gauss_hermite_normalized(kQuadraturePoints);
  std::filesystem::create_directories(cfg.out_dir);
  const Rng master(cfg.seed);

  detail::log_stage("compare: building posterior grids");
  const auto normal_grid = build_grid(
      data, GridModel::normal_logit,
      detail::grid_spec_for(cfg, data, GridModel::normal_logit, rule), rule);
  const auto beta_grid = build_grid(
      data, GridModel::beta_mean_sd,
      detail::grid_spec_for(cfg, data, GridModel::beta_mean_sd, rule), rule);

  detail::log_stage("compare: sampling conjugate deviances (T=" + std::to_string(cfg.draws) + ")");
  auto null_rng = master.derive(model_ordinal(ModelTag::null_pooled), stream::kDist);
  auto sat_rng = master.derive(model_ordinal(ModelTag::saturated), stream::kDist);
  struct Entry {
    ModelTag tag;
    DevianceDistribution dist;
  };
  const std::array<Entry, 4> dists = {
      Entry{ModelTag::normal, deviance_cdf(normal_grid)},
      Entry{ModelTag::beta, deviance_cdf(beta_grid)},
      Entry{ModelTag::null_pooled, deviance_dist_null(data, cfg.draws, null_rng)},
      Entry{ModelTag::saturated, deviance_dist_saturated(data, cfg.draws, sat_rng)}};
  const auto dist_of = [&](ModelTag tag) -> const DevianceDistribution& {
    for (const auto& e : dists)
      if (e.tag == tag) return e.dist;
    throw std::logic_error("unreachable");
  };

  nlohmann::json report;
  report["schema_version"] = kSchemaVersion;
  report["seed"] = cfg.seed;
  report["draws"] = cfg.draws;
  for (const auto& e : dists) {
    const std::string name = to_string(e.tag);
    detail::emit_cdf(cfg, "cdf_" + name, e.dist, "Posterior deviance CDF, " + name + " model");
    report["models"][name] = {{"support", e.dist.support()},
                              {"min_deviance", e.dist.min()},
                              {"median_deviance", e.dist.median()}};
  }

  detail::log_stage("compare: differencing model pairs");
  for (std::size_t a = 0; a < cfg.models.size(); ++a) {
    for (std::size_t b = a + 1; b < cfg.models.size(); ++b) {
      const ModelTag mj = cfg.models[a], mk = cfg.models[b];
      auto rng = master.derive(stream::kCompareBase +
                               4 * static_cast<std::uint64_t>(model_ordinal(mj)) +
                               static_cast<std::uint64_t>(model_ordinal(mk)));
      const auto s = compare(dist_of(mj), dist_of(mk), cfg.draws, rng);
      const std::string pair_name = to_string(mj) + "_" + to_string(mk);

      // diff CDF written from a fresh pass with the same stream layout
      auto rng2 = master.derive(stream::kCompareBase +
                                4 * static_cast<std::uint64_t>(model_ordinal(mj)) +
                                static_cast<std::uint64_t>(model_ordinal(mk)));
      std::vector<double> diffs(cfg.draws);
      for (auto& d : diffs) d = dist_of(mj).draw(rng2);
      for (auto& d : diffs) d -= dist_of(mk).draw(rng2);
      detail::emit_cdf(cfg, "diff_" + pair_name,
                       DevianceDistribution::from_draws(std::move(diffs)),
                       "Deviance difference " + to_string(mj) + " - " + to_string(mk));

      report["pairs"][pair_name] = {
          {"first", to_string(mj)},
          {"second", to_string(mk)},
          {"median", s.median},
          {"ci_low", s.ci_low},
          {"ci_high", s.ci_high},
          {"p_first_smaller", s.p_first_smaller},
          {"p_second_smaller", 1.0 - s.p_first_smaller},
          {"p_strong_first", s.p_strong}};
    }
  }
  write_text_file(detail::out_path(cfg, "comparison.json"), report.dump(2) + "\n");
  detail::log_stage("compare: wrote comparison.json");
}

// Per-city posterior rate densities (local, normal, beta) on the logit
// scale, one CSV per city and model.
inline void cmd_areas(const RunConfig& cfg) {
  detail::validate_config(cfg);
  const Dataset data = detail::load_data(cfg);
  const auto rule = gauss_hermite_normalized(kQuadraturePoints);
  std::filesystem::create_directories(cfg.out_dir);
  const Rng master(cfg.seed);

  detail::log_stage("areas: building posterior grids");
  const auto normal_grid = build_grid(
      data, GridModel::normal_logit,
      detail::grid_spec_for(cfg, data, GridModel::normal_logit, rule), rule);
  const auto beta_grid = build_grid(
      data, GridModel::beta_mean_sd,
      detail::grid_spec_for(cfg, data, GridModel::beta_mean_sd, rule), rule);

  detail::log_stage("areas: drawing area rates (T=" + std::to_string(cfg.draws) + ")");
  const std::array<ModelTag, 3> needed = {ModelTag::normal, ModelTag::beta,
                                          ModelTag::saturated};
  const auto aligned =
      make_aligned_draws(data, &normal_grid, &beta_grid, needed, cfg.draws, master);

  detail::log_stage("areas: writing densities");
  for (int id : cfg.cities) {
    const std::size_t i = detail::city_index(data, id);
    const auto local = aligned.require(ModelTag::saturated).areas.column(i);
    const auto norm = aligned.require(ModelTag::normal).areas.column(i);
    const auto beta = aligned.require(ModelTag::beta).areas.column(i);
    const std::string city = std::to_string(id);
    detail::emit_curve(cfg, "density_" + city + "_local",
                       kde_logit_auto(local, cfg.bandwidth),
                       "City " + city + " local posterior (logit rate)");
    detail::emit_curve(cfg, "density_" + city + "_normal",
                       kde_logit_auto(norm, cfg.bandwidth),
                       "City " + city + " normal-model posterior (logit rate)");
    detail::emit_curve(cfg, "density_" + city + "_beta",
                       kde_logit_auto(beta, cfg.bandwidth),
                       "City " + city + " beta-model posterior (logit rate)");
  }
  detail::log_stage("areas: done");
}

// Model-averaged per-city densities plus typical-city densities, with the
// per-model posterior probabilities and realized selection frequencies in
// averaging.json.
inline void cmd_average(const RunConfig& cfg) {
  detail::validate_config(cfg);
  const Dataset data = detail::load_data(cfg);
  const auto rule = gauss_hermite_normalized(kQuadraturePoints);
  std::filesystem::create_directories(cfg.out_dir);
  const Rng master(cfg.seed);

  const bool want_normal = std::find(cfg.models.begin(), cfg.models.end(),
                                     ModelTag::normal) != cfg.models.end();
  const bool want_beta =
      std::find(cfg.models.begin(), cfg.models.end(), ModelTag::beta) != cfg.models.end();

  detail::log_stage("average: building posterior grids");
  std::optional<PosteriorGrid> normal_grid, beta_grid;
  if (want_normal)
    normal_grid = build_grid(data, GridModel::normal_logit,
                             detail::grid_spec_for(cfg, data, GridModel::normal_logit, rule),
                             rule);
  if (want_beta)
    beta_grid = build_grid(data, GridModel::beta_mean_sd,
                           detail::grid_spec_for(cfg, data, GridModel::beta_mean_sd, rule),
                           rule);

  detail::log_stage("average: drawing aligned deviances and area rates (T=" +
                    std::to_string(cfg.draws) + ")");
  const auto aligned = make_aligned_draws(data, normal_grid ? &*normal_grid : nullptr,
                                          beta_grid ? &*beta_grid : nullptr, cfg.models,
                                          cfg.draws, master);
  const AveragingConfig avg_cfg{cfg.models, cfg.priors};
  const auto probs = posterior_model_probs(aligned, avg_cfg);
  auto select_rng = master.derive(8, stream::kSelect);
  const auto averaged =
      averaged_area_draws(aligned, avg_cfg, select_rng, cfg.per_area_selection);

  detail::log_stage("average: writing averaged densities");
  for (int id : cfg.cities) {
    const std::size_t i = detail::city_index(data, id);
    const std::string city = std::to_string(id);
    detail::emit_curve(cfg, "density_" + city + "_averaged",
                       kde_logit_auto(averaged.areas.column(i), cfg.bandwidth),
                       "City " + city + " model-averaged posterior (logit rate)");
  }

  nlohmann::json report;
  report["schema_version"] = kSchemaVersion;
  report["seed"] = cfg.seed;
  report["draws"] = cfg.draws;
  report["per_area_selection"] = cfg.per_area_selection;
  const auto priors = avg_cfg.normalized_priors();
  const std::size_t J = cfg.models.size();
  std::vector<double> mean_prob(J, 0.0), sel_freq(J, 0.0);
  for (std::size_t t = 0; t < cfg.draws; ++t)
    for (std::size_t j = 0; j < J; ++j) mean_prob[j] += probs[t * J + j];
  for (const auto j : averaged.selected) sel_freq[j] += 1.0;
  for (std::size_t j = 0; j < J; ++j) {
    mean_prob[j] /= static_cast<double>(cfg.draws);
    sel_freq[j] /= static_cast<double>(averaged.selected.size());
    report["models"][to_string(cfg.models[j])] = {{"prior", priors[j]},
                                                  {"mean_posterior_prob", mean_prob[j]},
                                                  {"selection_frequency", sel_freq[j]}};
  }

  // Typical-city curves come from the upper-level models only.
  if (want_normal || want_beta) {
    detail::log_stage("average: typical-city draws");
    std::vector<double> typ_normal, typ_beta;
    if (want_normal) {
      auto rng = master.derive(model_ordinal(ModelTag::normal), stream::kTypical);
      typ_normal = typical_city_draws(ModelTag::normal,
                                      aligned.require(ModelTag::normal).params, rng);
      detail::emit_curve(cfg, "density_typical_normal",
                         kde_from_logits_auto(typ_normal, cfg.bandwidth),
                         "Typical-city posterior, normal model (logit rate)");
    }
    if (want_beta) {
      auto rng = master.derive(model_ordinal(ModelTag::beta), stream::kTypical);
      typ_beta =
          typical_city_draws(ModelTag::beta, aligned.require(ModelTag::beta).params, rng);
      detail::emit_curve(cfg, "density_typical_beta",
                         kde_from_logits_auto(typ_beta, cfg.bandwidth),
                         "Typical-city posterior, beta model (logit rate)");
    }
    if (want_normal && want_beta) {
      AveragingConfig marginal_cfg;
      marginal_cfg.models = {ModelTag::normal, ModelTag::beta};
      if (!cfg.priors.empty()) {
        const auto all = avg_cfg.normalized_priors();
        double prior_normal = 0.0, prior_beta = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
          if (cfg.models[j] == ModelTag::normal) prior_normal = all[j];
          if (cfg.models[j] == ModelTag::beta) prior_beta = all[j];
        }
        marginal_cfg.priors = {prior_normal, prior_beta};
      }
      auto rng = master.derive(9, stream::kSelect);
      const auto typ_avg =
          averaged_typical_city(typ_normal, typ_beta, aligned, marginal_cfg, rng);
      detail::emit_curve(cfg, "density_typical_averaged",
                         kde_from_logits_auto(typ_avg, cfg.bandwidth),
                         "Typical-city posterior, model-averaged (logit rate)");
    }
  }
  write_text_file(detail::out_path(cfg, "averaging.json"), report.dump(2) + "\n");
  detail::log_stage("average: wrote averaging.json");
}

}  // namespace sae
