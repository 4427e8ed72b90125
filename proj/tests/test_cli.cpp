#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "sae/cli.hpp"

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json slurp_json(const fs::path& path) { return nlohmann::json::parse(slurp(path)); }

std::size_t line_count(const fs::path& path) {
  const auto text = slurp(path);
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

// parses a two-column curve CSV and returns the abscissa of the peak
double csv_mode(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::string line;
  std::getline(in, line);  // header
  double best_x = 0.0, best_y = -1.0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    const double x = std::stod(line.substr(0, comma));
    const double y = std::stod(line.substr(comma + 1));
    if (y > best_y) {
      best_y = y;
      best_x = x;
    }
  }
  return best_x;
}

sae::RunConfig base_config(const fs::path& out) {
  sae::RunConfig cfg;
  cfg.out_dir = out.string();
  cfg.seed = 1;
  return cfg;
}

}  // namespace

TEST_CASE("cmd_fit writes grids and a summary with the published DIC") {
  const auto out = fresh_dir("sae_cli_fit");
  sae::cmd_fit(base_config(out));

  CHECK(fs::exists(out / "grid_normal.csv"));
  CHECK(fs::exists(out / "grid_beta.csv"));
  CHECK(line_count(out / "grid_normal.csv") == 1 + 100 * 100);

  const auto summary = slurp_json(out / "summary.json");
  CHECK(summary["schema_version"] == 1);
  CHECK(summary["dataset"]["areas"] == 84);
  CHECK(summary["dataset"]["events"] == 1438);
  const double dic = summary["models"]["normal"]["dic"];
  CHECK(std::abs(dic - 366.13) < 0.2);
  const double dic_beta = summary["models"]["beta"]["dic"];
  CHECK(std::abs(dic_beta - 367.01) < 0.3);
  fs::remove_all(out);
}

TEST_CASE("cmd_fit rejects an empty data file") {
  const auto out = fresh_dir("sae_cli_empty");
  const auto csv = out / "empty.csv";
  std::ofstream(csv).close();
  auto cfg = base_config(out);
  cfg.data_path = csv.string();
  CHECK_THROWS_WITH_AS(sae::cmd_fit(cfg), doctest::Contains("empty file"),
                       std::invalid_argument);
  fs::remove_all(out);
}

TEST_CASE("cmd_fit is stable under grid refinement") {
  const auto out100 = fresh_dir("sae_cli_g100");
  const auto out200 = fresh_dir("sae_cli_g200");
  sae::cmd_fit(base_config(out100));
  auto cfg200 = base_config(out200);
  cfg200.grid_points = 200;
  sae::cmd_fit(cfg200);
  const double dic100 = slurp_json(out100 / "summary.json")["models"]["normal"]["dic"];
  const double dic200 = slurp_json(out200 / "summary.json")["models"]["normal"]["dic"];
  CHECK(std::abs(dic100 - dic200) < 0.2);
  fs::remove_all(out100);
  fs::remove_all(out200);
}

TEST_CASE("cmd_compare reports the published comparison probabilities") {
  const auto out = fresh_dir("sae_cli_compare");
  sae::cmd_compare(base_config(out));

  for (const char* name : {"cdf_normal", "cdf_beta", "cdf_null", "cdf_saturated"})
    CHECK(fs::exists(out / (std::string(name) + ".csv")));
  CHECK(fs::exists(out / "diff_normal_beta.csv"));

  const auto report = slurp_json(out / "comparison.json");
  const double p_normal_smaller = report["pairs"]["normal_beta"]["p_first_smaller"];
  CHECK(p_normal_smaller > 0.60);
  CHECK(p_normal_smaller < 0.66);
  const double p_sat_smaller = report["pairs"]["normal_saturated"]["p_second_smaller"];
  CHECK(p_sat_smaller > 0.75);
  CHECK(p_sat_smaller < 0.81);
  fs::remove_all(out);
}

TEST_CASE("cmd_areas emits the requested city density families") {
  const auto out = fresh_dir("sae_cli_areas");
  sae::cmd_areas(base_config(out));
  std::size_t csvs = 0;
  for (const auto& e : fs::directory_iterator(out)) csvs += e.path().extension() == ".csv";
  CHECK(csvs == 5 * 3);  // default five cities, three families each
  for (int id : {1, 8, 17, 83, 84})
    for (const char* fam : {"local", "normal", "beta"})
      CHECK(fs::exists(out / ("density_" + std::to_string(id) + "_" + fam + ".csv")));
  CHECK(line_count(out / "density_84_normal.csv") == 1 + 512);
  fs::remove_all(out);
}

TEST_CASE("cmd_areas respects a city subset and unknown ids fail") {
  const auto out = fresh_dir("sae_cli_city84");
  auto cfg = base_config(out);
  cfg.cities = {84};
  sae::cmd_areas(cfg);
  std::size_t csvs = 0;
  for (const auto& e : fs::directory_iterator(out)) csvs += e.path().extension() == ".csv";
  CHECK(csvs == 3);

  cfg.cities = {999};
  CHECK_THROWS_AS(sae::cmd_areas(cfg), std::invalid_argument);
  fs::remove_all(out);
}

TEST_CASE("cmd_average writes averaged and typical densities plus a report") {
  const auto out = fresh_dir("sae_cli_avg");
  auto cfg = base_config(out);
  cfg.cities = {1, 84};
  sae::cmd_average(cfg);

  CHECK(fs::exists(out / "density_1_averaged.csv"));
  CHECK(fs::exists(out / "density_84_averaged.csv"));
  CHECK(fs::exists(out / "density_typical_normal.csv"));
  CHECK(fs::exists(out / "density_typical_beta.csv"));
  CHECK(fs::exists(out / "density_typical_averaged.csv"));

  const auto report = slurp_json(out / "averaging.json");
  double total_prob = 0.0, total_freq = 0.0;
  for (const char* name : {"normal", "beta", "saturated"}) {
    total_prob += double(report["models"][name]["mean_posterior_prob"]);
    total_freq += double(report["models"][name]["selection_frequency"]);
  }
  CHECK(total_prob == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(total_freq == doctest::Approx(1.0).epsilon(1e-9));
  fs::remove_all(out);
}

TEST_CASE("cmd_average honors model order and explicit priors") {
  const auto out = fresh_dir("sae_cli_avg_priors");
  auto cfg = base_config(out);
  cfg.models = {sae::ModelTag::saturated, sae::ModelTag::beta, sae::ModelTag::normal};
  cfg.priors = {0.2, 0.3, 0.5};
  cfg.cities = {84};
  cfg.draws = 2000;
  sae::cmd_average(cfg);
  const auto report = slurp_json(out / "averaging.json");
  CHECK(double(report["models"]["saturated"]["prior"]) == doctest::Approx(0.2));
  CHECK(double(report["models"]["beta"]["prior"]) == doctest::Approx(0.3));
  CHECK(double(report["models"]["normal"]["prior"]) == doctest::Approx(0.5));
  CHECK(fs::exists(out / "density_typical_averaged.csv"));
  fs::remove_all(out);
}

TEST_CASE("the averaged big-city density coincides with the normal-model one") {
  const auto out = fresh_dir("sae_cli_city84_modes");
  auto cfg = base_config(out);
  cfg.cities = {84};
  sae::cmd_areas(cfg);
  sae::cmd_average(cfg);
  const double mode_normal = csv_mode(out / "density_84_normal.csv");
  const double mode_avg = csv_mode(out / "density_84_averaged.csv");
  CHECK(std::abs(mode_normal - mode_avg) < 0.1);
  fs::remove_all(out);
}

TEST_CASE("same seed, same bytes; different seed, different draws") {
  const auto out_a = fresh_dir("sae_cli_det_a");
  const auto out_b = fresh_dir("sae_cli_det_b");
  const auto out_c = fresh_dir("sae_cli_det_c");
  auto cfg_a = base_config(out_a);
  auto cfg_b = base_config(out_b);
  auto cfg_c = base_config(out_c);
  cfg_c.seed = 2;
  cfg_a.cities = cfg_b.cities = cfg_c.cities = {4, 84};

  for (auto* cfg : {&cfg_a, &cfg_b, &cfg_c}) {
    sae::cmd_fit(*cfg);
    sae::cmd_areas(*cfg);
    sae::cmd_average(*cfg);
  }
  for (const auto& e : fs::directory_iterator(out_a)) {
    const auto name = e.path().filename();
    CAPTURE(name.string());
    CHECK(slurp(e.path()) == slurp(out_b / name));
  }
  // seed-independent artifacts (grids) match; sampled densities must not
  CHECK(slurp(out_a / "grid_normal.csv") == slurp(out_c / "grid_normal.csv"));
  CHECK(slurp(out_a / "density_4_averaged.csv") != slurp(out_c / "density_4_averaged.csv"));
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  fs::remove_all(out_c);
}

TEST_CASE("svg twins are emitted on request") {
  const auto out = fresh_dir("sae_cli_svg");
  auto cfg = base_config(out);
  cfg.svg = true;
  cfg.cities = {84};
  cfg.draws = 2000;
  sae::cmd_areas(cfg);
  CHECK(fs::exists(out / "density_84_normal.svg"));
  const auto svg = slurp(out / "density_84_normal.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("config validation") {
  auto cfg = base_config(fs::temp_directory_path() / "sae_cli_nowhere");
  cfg.draws = 50;
  CHECK_THROWS_AS(sae::cmd_fit(cfg), std::invalid_argument);

  sae::RunConfig flags;
  sae::apply_grid_flag(flags, "normal:-4.9,-4.6,0.1,0.4");
  REQUIRE(flags.normal_grid.has_value());
  CHECK(flags.normal_grid->lo1 == -4.9);
  CHECK(flags.normal_grid->hi2 == 0.4);
  CHECK_THROWS_AS(sae::apply_grid_flag(flags, "normal:-4.9,-4.6,0.1"), std::invalid_argument);
  CHECK_THROWS_AS(sae::apply_grid_flag(flags, "poisson:1,2,3,4"), std::invalid_argument);
  CHECK(sae::parse_model_tag("saturated") == sae::ModelTag::saturated);
  CHECK_THROWS_AS(sae::parse_model_tag("gamma"), std::invalid_argument);
}

TEST_CASE("explicit grid bounds are honored") {
  const auto out = fresh_dir("sae_cli_explicit");
  auto cfg = base_config(out);
  cfg.grid_points = 60;
  cfg.normal_grid = sae::GridSpec{-5.0, -4.5, 0.1, 0.4, 60, 60};
  cfg.beta_grid = sae::GridSpec{0.007, 0.011, 0.001, 0.004, 60, 60};
  sae::cmd_fit(cfg);
  const auto summary = slurp_json(out / "summary.json");
  CHECK(summary["models"]["normal"]["grid"]["lo1"] == -5.0);
  CHECK(summary["models"]["beta"]["grid"]["hi2"] == 0.004);
  CHECK(line_count(out / "grid_normal.csv") == 1 + 60 * 60);
  fs::remove_all(out);
}
