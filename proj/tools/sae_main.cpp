#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sae/cli.hpp"

namespace {

void add_common_options(CLI::App* cmd, sae::RunConfig& cfg, std::vector<std::string>& grids,
                        std::vector<std::string>& models, std::vector<std::string>& formats) {
  cmd->add_option("--data", cfg.data_path,
                  "CSV data file with header id,n,r (default: embedded Missouri data)");
  cmd->add_option("--draws", cfg.draws, "Monte Carlo draw count T (>= 100)")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "master RNG seed")->capture_default_str();
  cmd->add_option("--grid", grids,
                  "explicit grid bounds, <model>:<lo1>,<hi1>,<lo2>,<hi2> (model: normal|beta)");
  cmd->add_option("--grid-size", cfg.grid_points, "grid points per axis")
      ->capture_default_str();
  cmd->add_option("--models", models,
                  "models to include (normal,beta,saturated,null)")
      ->delimiter(',');
  cmd->add_option("--priors", cfg.priors, "prior model probabilities, same order as --models")
      ->delimiter(',');
  cmd->add_option("--cities", cfg.cities, "city ids to report")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--bandwidth", cfg.bandwidth,
                  "KDE bandwidth on the logit scale (0 = Silverman's rule)")
      ->capture_default_str();
  cmd->add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--format", formats, "output formats: csv, json, svg")->delimiter(',');
  cmd->add_flag("--per-area-selection", cfg.per_area_selection,
                "re-select the averaging model independently per (draw, area)");
}

void finalize_config(sae::RunConfig& cfg, const std::vector<std::string>& grids,
                     const std::vector<std::string>& models,
                     const std::vector<std::string>& formats) {
  for (const auto& g : grids) sae::apply_grid_flag(cfg, g);
  if (!models.empty()) {
    cfg.models.clear();
    for (const auto& m : models) cfg.models.push_back(sae::parse_model_tag(m));
  }
  for (const auto& f : formats) {
    if (f == "svg") {
      cfg.svg = true;
    } else if (f != "csv" && f != "json") {
      throw std::invalid_argument("unknown format '" + f + "' (expected csv, json or svg)");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian model comparison and averaging for two-level binomial count data"};
  app.require_subcommand(1);

  sae::RunConfig cfg;
  std::vector<std::string> grids, models, formats;

  auto* fit = app.add_subcommand(
      "fit", "fit the normal-logit and beta models on posterior grids");
  auto* cmp = app.add_subcommand(
      "compare", "posterior deviance CDFs and pairwise deviance differences");
  auto* areas = app.add_subcommand(
      "areas", "per-city posterior rate densities (local, normal, beta)");
  auto* avg = app.add_subcommand(
      "average", "model-averaged per-city and typical-city densities");
  for (auto* cmd : {fit, cmp, areas, avg}) add_common_options(cmd, cfg, grids, models, formats);

  CLI11_PARSE(app, argc, argv);

  try {
    finalize_config(cfg, grids, models, formats);
    if (fit->parsed()) sae::cmd_fit(cfg);
    if (cmp->parsed()) sae::cmd_compare(cfg);
    if (areas->parsed()) sae::cmd_areas(cfg);
    if (avg->parsed()) sae::cmd_average(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
