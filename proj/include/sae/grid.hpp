#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sae/dataset.hpp"
#include "sae/deviance.hpp"
#include "sae/models.hpp"
#include "sae/quadrature.hpp"
#include "sae/rng.hpp"
#include "sae/special.hpp"

namespace sae {

// The two parametric models that live on a 2-D grid.
enum class GridModel { normal_logit, beta_mean_sd };

inline std::string to_string(GridModel m) {
  return m == GridModel::normal_logit ? "normal" : "beta";
}

inline ModelTag tag_of(GridModel m) {
  return m == GridModel::normal_logit ? ModelTag::normal : ModelTag::beta;
}

// Rectangular grid bounds, endpoints included.
struct GridSpec {
  double lo1 = 0.0, hi1 = 0.0;
  double lo2 = 0.0, hi2 = 0.0;
  int g1 = 100, g2 = 100;
};

/// Log-likelihood as a function of the grid coordinates; points outside the
/// parameter domain evaluate to -inf rather than throwing.
inline double model_loglik(const Dataset& data, GridModel model, double x1, double x2,
                           const QuadratureRule& rule) {
  switch (model) {
    case GridModel::normal_logit:
      if (!(x2 >= 0.0)) return kNegInf;
      return loglik_normal_logit(data, NormalLogitParams{x1, x2}, rule);
    case GridModel::beta_mean_sd:
      if (!(x1 > 0.0 && x1 < 1.0)) return kNegInf;
      if (!(x2 > 0.0) || !(x2 * x2 < x1 * (1.0 - x1))) return kNegInf;
      return loglik_beta_binomial(data, beta_meansd_to_ab(BetaParamsMeanSd{x1, x2}));
  }
  throw std::logic_error("unknown GridModel");
}

// Posterior over a parameter grid: mass[g] proportional to exp(loglik[g])
// under the default flat prior, normalized with max subtraction.  An
// optional log-weight vector multiplies an informative prior into the mass
// pointwise; loglik itself always stays likelihood-only so deviances are
// unaffected.  Index layout is row-major, g = i1 * g2 + i2.
class PosteriorGrid {
 public:
  static PosteriorGrid from_loglik(GridModel model, GridSpec spec,
                                   std::vector<double> loglik,
                                   const std::vector<double>* log_weight = nullptr) {
    if (spec.g1 < 2 || spec.g2 < 2)
      throw std::invalid_argument("PosteriorGrid: need at least 2 points per axis");
    if (!(spec.lo1 < spec.hi1) || !(spec.lo2 < spec.hi2))
      throw std::invalid_argument("PosteriorGrid: bounds must satisfy lo < hi");
    if (loglik.size() != static_cast<std::size_t>(spec.g1) * static_cast<std::size_t>(spec.g2))
      throw std::invalid_argument("PosteriorGrid: loglik size does not match grid");
    if (log_weight != nullptr && log_weight->size() != loglik.size())
      throw std::invalid_argument("PosteriorGrid: log_weight size does not match grid");

    const auto weighted = [&](std::size_t g) {
      return log_weight == nullptr ? loglik[g] : loglik[g] + (*log_weight)[g];
    };
    double mx = kNegInf;
    for (std::size_t g = 0; g < loglik.size(); ++g)
      if (weighted(g) > mx) mx = weighted(g);
    if (!std::isfinite(mx))
      throw std::runtime_error(
          "PosteriorGrid: likelihood vanished at every grid point (degenerate spec)");

    PosteriorGrid grid;
    grid.model_ = model;
    grid.spec_ = spec;
    grid.mass_.resize(loglik.size());
    double total = 0.0;
    for (std::size_t g = 0; g < loglik.size(); ++g) {
      const double w = weighted(g);
      const double m = std::isfinite(w) ? std::exp(w - mx) : 0.0;
      grid.mass_[g] = m;
      total += m;
    }
    for (auto& m : grid.mass_) m /= total;
    grid.loglik_ = std::move(loglik);
    return grid;
  }

  GridModel model() const { return model_; }
  const GridSpec& spec() const { return spec_; }
  const std::vector<double>& loglik() const { return loglik_; }
  const std::vector<double>& mass() const { return mass_; }
  int size() const { return spec_.g1 * spec_.g2; }

  double step1() const { return (spec_.hi1 - spec_.lo1) / (spec_.g1 - 1); }
  double step2() const { return (spec_.hi2 - spec_.lo2) / (spec_.g2 - 1); }
  double param1_at(int i1) const { return spec_.lo1 + step1() * i1; }
  double param2_at(int i2) const { return spec_.lo2 + step2() * i2; }
  std::array<double, 2> point(int g) const {
    return {param1_at(g / spec_.g2), param2_at(g % spec_.g2)};
  }
  double deviance_at(int g) const { return -2.0 * loglik_[g]; }

 private:
  PosteriorGrid() = default;

  GridModel model_ = GridModel::normal_logit;
  GridSpec spec_;
  std::vector<double> loglik_;
  std::vector<double> mass_;
};

/// Log prior density over the two grid coordinates, up to a constant.
using LogPrior = std::function<double(double, double)>;

/// Evaluates the model log-likelihood over an explicit grid.  A log_prior,
/// when given, reweights the posterior mass pointwise (default: flat).
inline PosteriorGrid build_grid(const Dataset& data, GridModel model, const GridSpec& spec,
                                const QuadratureRule& rule, const LogPrior& log_prior = {}) {
  if (spec.g1 < 2 || spec.g2 < 2)
    throw std::invalid_argument("build_grid: need at least 2 points per axis");
  const double step1 = (spec.hi1 - spec.lo1) / (spec.g1 - 1);
  const double step2 = (spec.hi2 - spec.lo2) / (spec.g2 - 1);
  std::vector<double> ll, lw;
  const std::size_t size = static_cast<std::size_t>(spec.g1) * static_cast<std::size_t>(spec.g2);
  ll.reserve(size);
  if (log_prior) lw.reserve(size);
  for (int i1 = 0; i1 < spec.g1; ++i1) {
    const double x1 = spec.lo1 + step1 * i1;
    for (int i2 = 0; i2 < spec.g2; ++i2) {
      const double x2 = spec.lo2 + step2 * i2;
      ll.push_back(model_loglik(data, model, x1, x2, rule));
      if (log_prior) lw.push_back(log_prior(x1, x2));
    }
  }
  return PosteriorGrid::from_loglik(model, spec, std::move(ll),
                                    log_prior ? &lw : nullptr);
}

struct MleEstimate {
  std::array<double, 2> point{};
  double loglik = kNegInf;
};

namespace detail {

/// Nelder-Mead maximization in two dimensions.
template <typename F>
MleEstimate nelder_mead_max(F&& f, std::array<double, 2> start, std::array<double, 2> scale,
                            int max_iter = 500) {
  struct Vertex {
    std::array<double, 2> x;
    double v;
  };
  auto eval = [&](std::array<double, 2> x) { return Vertex{x, f(x[0], x[1])}; };
  std::array<Vertex, 3> s = {eval(start),
                             eval({start[0] + scale[0], start[1]}),
                             eval({start[0], start[1] + scale[1]})};
  auto order = [&] {
    std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.v > b.v; });
  };
  order();
  for (int iter = 0; iter < max_iter; ++iter) {
    if (std::isfinite(s[0].v) && std::isfinite(s[2].v) &&
        s[0].v - s[2].v < 1e-11 * (1.0 + std::abs(s[0].v)))
      break;
    const std::array<double, 2> c = {0.5 * (s[0].x[0] + s[1].x[0]),
                                     0.5 * (s[0].x[1] + s[1].x[1])};
    const auto refl = eval({2.0 * c[0] - s[2].x[0], 2.0 * c[1] - s[2].x[1]});
    if (refl.v > s[0].v) {
      const auto exp_ = eval({3.0 * c[0] - 2.0 * s[2].x[0], 3.0 * c[1] - 2.0 * s[2].x[1]});
      s[2] = exp_.v > refl.v ? exp_ : refl;
    } else if (refl.v > s[1].v) {
      s[2] = refl;
    } else {
      const auto con = eval({0.5 * (c[0] + s[2].x[0]), 0.5 * (c[1] + s[2].x[1])});
      if (con.v > s[2].v) {
        s[2] = con;
      } else {
        for (int i = 1; i < 3; ++i)
          s[i] = eval({0.5 * (s[0].x[0] + s[i].x[0]), 0.5 * (s[0].x[1] + s[i].x[1])});
      }
    }
    order();
  }
  return {s[0].x, s[0].v};
}

inline std::vector<double> linspace(double lo, double hi, int k) {
  std::vector<double> v(k);
  for (int i = 0; i < k; ++i) v[i] = lo + (hi - lo) * i / (k - 1);
  return v;
}

inline std::vector<double> geomspace(double lo, double hi, int k) {
  std::vector<double> v(k);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < k; ++i) v[i] = std::exp(llo + (lhi - llo) * i / (k - 1));
  return v;
}

}  // namespace detail

// Continuous maximum-likelihood search: coarse data-driven sweep followed
// by Nelder-Mead refinement.  Reported separately from the grid MLE and
// never used in the posterior summaries.
inline MleEstimate find_mle(const Dataset& data, GridModel model, const QuadratureRule& rule) {
  const double R = static_cast<double>(data.total_events());
  const double N = static_cast<double>(data.total_population());
  const double p_anchor = (R + 0.5) / (N + 1.0);

  std::vector<double> axis1, axis2;
  if (model == GridModel::normal_logit) {
    const double c = logit(p_anchor);
    axis1 = detail::linspace(c - 3.0, c + 3.0, 25);
    axis2 = detail::geomspace(0.01, 3.0, 25);
  } else {
    axis1 = detail::linspace(std::max(p_anchor / 3.0, 1e-7),
                             std::min(p_anchor * 3.0, 1.0 - 1e-7), 25);
    const double s_max = std::sqrt(p_anchor * (1.0 - p_anchor));
    axis2 = detail::geomspace(s_max * 3e-3, s_max * 0.97, 25);
  }

  MleEstimate coarse;
  for (double x1 : axis1)
    for (double x2 : axis2) {
      const double v = model_loglik(data, model, x1, x2, rule);
      if (v > coarse.loglik) coarse = {{x1, x2}, v};
    }
  if (!std::isfinite(coarse.loglik))
    throw std::runtime_error("find_mle: likelihood vanished over the whole search region");

  const std::array<double, 2> scale = {0.5 * (axis1[1] - axis1[0]), 0.3 * coarse.point[1]};
  const auto f = [&](double x1, double x2) { return model_loglik(data, model, x1, x2, rule); };
  auto refined = detail::nelder_mead_max(f, coarse.point, scale);
  return refined.loglik > coarse.loglik ? refined : coarse;
}

// AUTO grid bounds: MLE +/- 5 profile standard deviations per axis from
// the finite-difference observed information, clipped to the parameter
// domain, with the requested number of points per axis.
inline GridSpec auto_grid_spec(const Dataset& data, GridModel model,
                               const QuadratureRule& rule, int grid_points = 100) {
  const auto mle = find_mle(data, model, rule);
  const double x1 = mle.point[0], x2 = mle.point[1];
  const auto f = [&](double a, double b) { return model_loglik(data, model, a, b, rule); };

  const double h1 = 1e-4 * std::max(std::abs(x1), 0.1);
  const double h2 = 1e-4 * std::max(std::abs(x2), 0.1);
  const double f0 = mle.loglik;
  const double a11 = -(f(x1 + h1, x2) - 2.0 * f0 + f(x1 - h1, x2)) / (h1 * h1);
  const double a22 = -(f(x1, x2 + h2) - 2.0 * f0 + f(x1, x2 - h2)) / (h2 * h2);
  const double a12 = -(f(x1 + h1, x2 + h2) - f(x1 + h1, x2 - h2) - f(x1 - h1, x2 + h2) +
                       f(x1 - h1, x2 - h2)) /
                     (4.0 * h1 * h2);
  const double det = a11 * a22 - a12 * a12;
  if (!(a11 > 0.0) || !(a22 > 0.0) || !(det > 0.0))
    throw std::runtime_error(
        "auto_grid_spec: curvature at the likelihood maximum is not positive definite; "
        "supply an explicit grid");
  const double sd1 = std::sqrt(a22 / det);
  const double sd2 = std::sqrt(a11 / det);

  GridSpec spec;
  spec.g1 = spec.g2 = grid_points;
  spec.lo1 = x1 - 5.0 * sd1;
  spec.hi1 = x1 + 5.0 * sd1;
  spec.lo2 = x2 - 5.0 * sd2;
  spec.hi2 = x2 + 5.0 * sd2;
  if (model == GridModel::normal_logit) {
    spec.lo2 = std::max(spec.lo2, 0.0);
  } else {
    spec.lo1 = std::max(spec.lo1, 1e-9);
    spec.hi1 = std::min(spec.hi1, 1.0 - 1e-9);
    spec.lo2 = std::max(spec.lo2, 1e-3 * x2);
    spec.hi2 = std::min(spec.hi2, 0.5);
  }
  return spec;
}

inline PosteriorGrid build_grid_auto(const Dataset& data, GridModel model,
                                     const QuadratureRule& rule, int grid_points = 100) {
  return build_grid(data, model, auto_grid_spec(data, model, rule, grid_points), rule);
}

// Posterior summaries of a grid.  p_D uses the deviance at the grid MLE
// (not the posterior mean), and DIC = mean deviance + p_D.
struct GridSummary {
  std::array<double, 2> mle{};
  int mle_index = 0;
  double max_loglik = kNegInf;
  double freq_deviance = 0.0;
  double mean_deviance = 0.0;
  double p_d = 0.0;
  double dic = 0.0;
};

inline GridSummary grid_summaries(const PosteriorGrid& grid) {
  GridSummary s;
  const auto& ll = grid.loglik();
  const auto& mass = grid.mass();
  for (int g = 0; g < grid.size(); ++g) {
    if (ll[g] > s.max_loglik) {
      s.max_loglik = ll[g];
      s.mle_index = g;
    }
  }
  s.mle = grid.point(s.mle_index);
  s.freq_deviance = -2.0 * s.max_loglik;
  double mean_dev = 0.0;
  for (int g = 0; g < grid.size(); ++g)
    if (mass[g] > 0.0) mean_dev += mass[g] * (-2.0 * ll[g]);
  s.mean_deviance = mean_dev;
  s.p_d = s.mean_deviance - s.freq_deviance;
  s.dic = s.mean_deviance + s.p_d;
  return s;
}

/// Exact (up to grid resolution) posterior deviance distribution.
inline DevianceDistribution deviance_cdf(const PosteriorGrid& grid) {
  std::vector<double> dev(grid.loglik().size());
  for (std::size_t g = 0; g < dev.size(); ++g)
    dev[g] = -2.0 * grid.loglik()[g];
  return DevianceDistribution::from_weighted(std::move(dev), grid.mass(),
                                             DevianceSource::exact_grid);
}

/// T categorical grid-point draws weighted by posterior mass.
inline std::vector<int> sample_indices(const PosteriorGrid& grid, std::size_t T, Rng& rng) {
  if (T < 1) throw std::invalid_argument("sample_indices: T must be >= 1");
  const CategoricalTable table(grid.mass());
  std::vector<int> idx(T);
  for (auto& g : idx) g = static_cast<int>(table.draw(rng));
  return idx;
}

inline std::vector<std::array<double, 2>> sample_params(const PosteriorGrid& grid,
                                                        std::size_t T, Rng& rng) {
  const auto idx = sample_indices(grid, T, rng);
  std::vector<std::array<double, 2>> pts(T);
  for (std::size_t t = 0; t < T; ++t) pts[t] = grid.point(idx[t]);
  return pts;
}

}  // namespace sae
