#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "sae/kde.hpp"
#include "sae/rng.hpp"
#include "sae/special.hpp"

TEST_CASE("a repeated sample reduces to a single normal kernel") {
  const double p = 0.007, h = 0.3;
  const std::vector<double> rates = {p, p};
  const double center = sae::logit(p);
  std::vector<double> grid;
  for (int i = -20; i <= 20; ++i) grid.push_back(center + 0.1 * i);
  const auto curve = sae::kde_logit(rates, h, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = (grid[i] - center) / h;
    const double want = std::exp(-0.5 * z * z) / (h * std::sqrt(2.0 * std::numbers::pi));
    CHECK(curve.densities[i] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("density integrates to one over a covering grid") {
  sae::Rng rng(5);
  std::vector<double> rates(4000);
  for (auto& r : rates) r = rng.beta(3.0, 250.0);
  const auto curve = sae::kde_logit_auto(rates, sae::kAutoBandwidth);
  CHECK(curve.integral() == doctest::Approx(1.0).epsilon(0.02));
  CHECK(curve.bandwidth > 0.0);
  for (double d : curve.densities) CHECK(d >= 0.0);
}

TEST_CASE("KDE mode recovers the center of a known logit-normal sample") {
  sae::Rng rng(6);
  const double mu = -4.7, sd = 0.25;
  std::vector<double> rates(10000);
  for (auto& r : rates) r = sae::logistic(rng.normal(mu, sd));
  const auto curve = sae::kde_logit_auto(rates, sae::kAutoBandwidth);
  CHECK(std::abs(curve.mode() - mu) < 0.05);
}

TEST_CASE("silverman bandwidth closed form") {
  const std::vector<double> xs = {0.0, 2.0};
  // sample sd of {0,2} is sqrt(2)
  CHECK(sae::silverman_bandwidth(xs) ==
        doctest::Approx(1.06 * std::sqrt(2.0) * std::pow(2.0, -0.2)).epsilon(1e-12));
}

TEST_CASE("kde_grid covers samples plus four bandwidths") {
  const std::vector<double> xs = {-1.0, 2.0};
  const auto grid = sae::kde_grid(xs, 0.5, 11);
  CHECK(grid.front() == doctest::Approx(-3.0));
  CHECK(grid.back() == doctest::Approx(4.0));
  CHECK(grid.size() == 11);
}

TEST_CASE("kde input validation") {
  const std::vector<double> one = {0.5};
  CHECK_THROWS_AS(sae::kde_logit_auto(one, 0.1), std::invalid_argument);
  const std::vector<double> bad = {0.5, 1.0};
  CHECK_THROWS_AS(sae::kde_logit_auto(bad, 0.1), std::invalid_argument);
  const std::vector<double> zero = {0.0, 0.5};
  CHECK_THROWS_AS(sae::kde_logit_auto(zero, 0.1), std::invalid_argument);
  // identical samples cannot drive Silverman's rule
  const std::vector<double> flat = {0.25, 0.25, 0.25};
  CHECK_THROWS_AS(sae::kde_logit_auto(flat, sae::kAutoBandwidth), std::invalid_argument);
}
