#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "orient/density_io.hpp"
#include "orient/priors.hpp"
#include "orient/text.hpp"

namespace orient {

// Format: "# grid=<W>x<H> image=<iw>x<ih> n_bins=<N>" then W*H density lines,
// row-major with row 0 at the top of the image.

inline void write_grid(std::ostream& out, const DensityGrid& grid) {
  out << "# grid=" << grid.grid_w() << 'x' << grid.grid_h() << " image=" << text::format_real(grid.image_w()) << 'x'
      << text::format_real(grid.image_h()) << " n_bins=" << grid.n_bins() << '\n';
  for (const auto& c : grid.cells()) out << format_density(c) << '\n';
}

inline DensityGrid read_grid(std::istream& in) {
  std::string raw;
  std::size_t lineno = 0;
  bool have_header = false;
  long long gw = 0, gh = 0, n = 0;
  double iw = 0.0, ih = 0.0;
  std::vector<DiscreteDensity> cells;

  const auto pair = [](std::string_view v, auto& a, auto& b, auto parse) {
    const auto x = v.find('x');
    return x != std::string_view::npos && parse(v.substr(0, x), a) && parse(v.substr(x + 1), b);
  };
  const auto as_int = [](std::string_view s, long long& o) { return text::parse_int(s, o); };
  const auto as_real = [](std::string_view s, double& o) { return text::parse_real(s, o); };

  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '#') {
      if (have_header) continue;
      if (!pair(text::header_value(line, "grid"), gw, gh, as_int) ||
          !pair(text::header_value(line, "image"), iw, ih, as_real) ||
          !text::parse_int(text::header_value(line, "n_bins"), n))
        throw DataError(where + ": expected '# grid=<W>x<H> image=<iw>x<ih> n_bins=<N>' header");
      if (gw < 2 || gh < 2 || n < kMinBins || iw <= 0.0 || ih <= 0.0)
        throw DataError(where + ": grid header values out of range");
      have_header = true;
      continue;
    }
    if (!have_header) throw DataError(where + ": missing grid header");
    cells.push_back(density_from_fields(text::split(line, ','), static_cast<std::size_t>(n), where));
  }
  if (!have_header) throw DataError("grid file has no header");
  if (cells.size() != static_cast<std::size_t>(gw * gh))
    throw DataError("grid file: expected " + std::to_string(gw * gh) + " densities, found " +
                    std::to_string(cells.size()));
  return DensityGrid(static_cast<int>(gw), static_cast<int>(gh), iw, ih, std::move(cells));
}

}  // namespace orient
