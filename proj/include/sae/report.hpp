#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sae/deviance.hpp"
#include "sae/grid.hpp"
#include "sae/kde.hpp"

namespace sae {

/// Shortest exact text form of a double (round-trips bit-for-bit).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << content;
}

inline std::string grid_to_csv(const PosteriorGrid& grid) {
  std::string s = "param1,param2,loglik,mass\n";
  for (int g = 0; g < grid.size(); ++g) {
    const auto pt = grid.point(g);
    s += format_double(pt[0]);
    s += ',';
    s += format_double(pt[1]);
    s += ',';
    s += format_double(grid.loglik()[g]);
    s += ',';
    s += format_double(grid.mass()[g]);
    s += '\n';
  }
  return s;
}

inline std::string cdf_to_csv(const DevianceDistribution& dist) {
  std::string s = "value,cum_prob\n";
  for (std::size_t i = 0; i < dist.support(); ++i) {
    s += format_double(dist.values()[i]);
    s += ',';
    s += format_double(dist.cum_probs()[i]);
    s += '\n';
  }
  return s;
}

inline std::string curve_to_csv(const KdeCurve& curve) {
  std::string s = "logit,density\n";
  for (std::size_t i = 0; i < curve.abscissae.size(); ++i) {
    s += format_double(curve.abscissae[i]);
    s += ',';
    s += format_double(curve.densities[i]);
    s += '\n';
  }
  return s;
}

// Minimal standalone SVG line plot; a thin rendering of an already-emitted
// CSV curve so plots need no external tooling.
inline std::string curve_to_svg(std::span<const double> x, std::span<const double> y,
                                const std::string& title) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("curve_to_svg: need matching series with >= 2 points");
  const double width = 720, height = 480;
  const double ml = 72, mr = 24, mt = 44, mb = 56;
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  double xmin = *xmin_it, xmax = *xmax_it;
  double ymin = std::min(0.0, *ymin_it), ymax = *ymax_it;
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  const auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (width - ml - mr); };
  const auto py = [&](double v) {
    return height - mb - (v - ymin) / (ymax - ymin) * (height - mt - mb);
  };
  const auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
       "viewBox=\"0 0 720 480\">\n";
  s += "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
  s += "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"15\">" + title + "</text>\n";
  // axes
  s += "<line x1=\"" + num(ml) + "\" y1=\"" + num(height - mb) + "\" x2=\"" + num(width - mr) +
       "\" y2=\"" + num(height - mb) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) + "\" y2=\"" +
       num(height - mb) + "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    s += "<line x1=\"" + num(px(xv)) + "\" y1=\"" + num(height - mb) + "\" x2=\"" +
         num(px(xv)) + "\" y2=\"" + num(height - mb + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(height - mb + 20) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + num(xv) +
         "</text>\n";
    s += "<line x1=\"" + num(ml - 5) + "\" y1=\"" + num(py(yv)) + "\" x2=\"" + num(ml) +
         "\" y2=\"" + num(py(yv)) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(py(yv) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + num(yv) +
         "</text>\n";
  }
  s += "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += num(px(x[i]));
    s += ',';
    s += num(py(y[i]));
    if (i + 1 < x.size()) s += ' ';
  }
  s += "\"/>\n</svg>\n";
  return s;
}

}  // namespace sae
