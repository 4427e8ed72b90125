#include <cmath>

#include "doctest.h"

#include "sae/quadrature.hpp"

namespace {

double moment(const sae::QuadratureRule& rule, int power) {
  double s = 0.0;
  for (int k = 0; k < rule.size(); ++k)
    s += rule.weights[k] * std::pow(rule.nodes[k], power);
  return s;
}

}  // namespace

TEST_CASE("gauss_hermite_normalized rejects out-of-range K") {
  CHECK_THROWS_AS(sae::gauss_hermite_normalized(0), std::domain_error);
  CHECK_THROWS_AS(sae::gauss_hermite_normalized(65), std::domain_error);
}

TEST_CASE("K = 1 degenerates to the mean") {
  const auto rule = sae::gauss_hermite_normalized(1);
  REQUIRE(rule.size() == 1);
  CHECK(rule.nodes[0] == 0.0);
  CHECK(rule.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("K = 20 reproduces standard normal moments") {
  const auto rule = sae::gauss_hermite_normalized(20);
  CHECK(std::abs(moment(rule, 0) - 1.0) < 1e-14);   // f = 1
  CHECK(std::abs(moment(rule, 2) - 1.0) < 1e-12);   // E Z^2
  CHECK(std::abs(moment(rule, 4) - 3.0) < 1e-10);   // E Z^4
}

TEST_CASE("moments 0-2 reproduce N(0,1) for several K") {
  for (int K : {8, 20, 32}) {
    const auto rule = sae::gauss_hermite_normalized(K);
    CHECK(std::abs(moment(rule, 0) - 1.0) < 1e-10);
    CHECK(std::abs(moment(rule, 1)) < 1e-14);
    CHECK(std::abs(moment(rule, 2) - 1.0) < 1e-10);
  }
}

TEST_CASE("rule is exact up to degree 2K - 1") {
  // E Z^8 = 105 needs degree 8 <= 2*5 - 1
  const auto rule = sae::gauss_hermite_normalized(5);
  CHECK(moment(rule, 8) == doctest::Approx(105.0).epsilon(1e-10));
  CHECK(moment(rule, 6) == doctest::Approx(15.0).epsilon(1e-10));
}

TEST_CASE("nodes are symmetric with positive weights") {
  for (int K : {7, 20, 64}) {
    const auto rule = sae::gauss_hermite_normalized(K);
    for (int k = 0; k < K; ++k) {
      CHECK(rule.weights[k] > 0.0);
      CHECK(rule.nodes[k] == -rule.nodes[K - 1 - k]);
      CHECK(rule.weights[k] == rule.weights[K - 1 - k]);
    }
    for (int k = 1; k < K; ++k) CHECK(rule.nodes[k] > rule.nodes[k - 1]);
  }
}

TEST_CASE("K = 20 extreme node matches the tabulated value") {
  // largest root of He_20: sqrt(2) times the Hermite table value 5.3874808900112
  const auto rule = sae::gauss_hermite_normalized(20);
  CHECK(rule.nodes[19] == doctest::Approx(5.3874808900112 * std::sqrt(2.0)).epsilon(1e-10));
}
