// Shared test fixtures; the Missouri grids are built once per process.
#pragma once

#include "sae/dataset.hpp"
#include "sae/grid.hpp"
#include "sae/quadrature.hpp"

namespace fixtures {

inline const sae::QuadratureRule& rule20() {
  static const auto rule = sae::gauss_hermite_normalized(20);
  return rule;
}

inline const sae::PosteriorGrid& normal_grid() {
  static const auto grid =
      sae::build_grid_auto(sae::missouri(), sae::GridModel::normal_logit, rule20());
  return grid;
}

inline const sae::PosteriorGrid& beta_grid() {
  static const auto grid =
      sae::build_grid_auto(sae::missouri(), sae::GridModel::beta_mean_sd, rule20());
  return grid;
}

}  // namespace fixtures
