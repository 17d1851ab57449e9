#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "orient/density.hpp"
#include "orient/text.hpp"

namespace orient {

struct RadarOptions {
  double size = 400.0;
  /// Vertex radius floor as a fraction of the outer radius, so empty bins stay visible.
  double min_radius_frac = 0.01;
  std::string fill = "#2ca02c";
};

/// Polygon radii, proportional to bin value with the largest bin at the outer
/// radius.
inline std::vector<double> radar_vertex_radii(const DiscreteDensity& p, const RadarOptions& opt) {
  if (!(opt.size > 0.0)) throw std::invalid_argument("radar: size must be > 0");
  if (!(opt.min_radius_frac >= 0.0 && opt.min_radius_frac < 1.0))
    throw std::invalid_argument("radar: min_radius_frac must be in [0, 1)");
  const double outer = 0.45 * opt.size;
  const double peak = p[p.argmax_bin()];
  std::vector<double> radii(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) radii[i] = outer * std::max(opt.min_radius_frac, p[i] / peak);
  return radii;
}

/// Radar-chart SVG of a density. Spoke i points along (cos t_i, sin t_i) in
/// SVG coordinates (y down), the same convention the angles use on images,
/// with spoke 0 along +x.
inline std::string render_radar_svg(const DiscreteDensity& p, const RadarOptions& opt = {}) {
  const auto radii = radar_vertex_radii(p, opt);
  const double c = 0.5 * opt.size, outer = 0.45 * opt.size;
  const auto num = [](double v) { return text::format_fixed(v, 3); };
  const std::size_t n = p.size();

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(opt.size) << "\" height=\"" << num(opt.size)
      << "\" viewBox=\"0 0 " << num(opt.size) << ' ' << num(opt.size) << "\">\n"
      << "  <circle cx=\"" << num(c) << "\" cy=\"" << num(c) << "\" r=\"" << num(outer)
      << "\" fill=\"none\" stroke=\"#bbbbbb\"/>\n"
      << "  <g stroke=\"#dddddd\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double t = bin_angle(i, n);
    svg << "    <line x1=\"" << num(c) << "\" y1=\"" << num(c) << "\" x2=\"" << num(c + outer * std::cos(t))
        << "\" y2=\"" << num(c + outer * std::sin(t)) << "\"/>\n";
  }
  svg << "  </g>\n  <polygon points=\"";
  for (std::size_t i = 0; i < n; ++i) {
    const double t = bin_angle(i, n);
    if (i) svg << ' ';
    svg << num(c + radii[i] * std::cos(t)) << ',' << num(c + radii[i] * std::sin(t));
  }
  svg << "\" fill=\"" << opt.fill << "\" fill-opacity=\"0.4\" stroke=\"" << opt.fill << "\"/>\n</svg>\n";
  return svg.str();
}

}  // namespace orient
