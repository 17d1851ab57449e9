#pragma once

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "orient/density.hpp"
#include "orient/text.hpp"

namespace orient {

/// Densities read from text may carry print rounding; rows whose bins sum to
/// one within this tolerance are renormalized, anything further off is
/// rejected.
inline constexpr double kTextSumTolerance = 1e-6;

inline std::string density_header(std::size_t n_bins) { return "# n_bins=" + std::to_string(n_bins); }

inline std::string format_density(const DiscreteDensity& p) {
  std::string line;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) line += ',';
    line += text::format_real(p[i]);
  }
  return line;
}

/// Parses an `# n_bins=<N>` header line; zero when the line is not one.
inline std::size_t parse_density_header(std::string_view line) {
  const auto v = text::header_value(line, "n_bins");
  long long n = 0;
  if (v.empty() || !text::parse_int(v, n) || n <= 0) return 0;
  return static_cast<std::size_t>(n);
}

/// Builds a density from parsed fields; `where` prefixes error messages.
inline DiscreteDensity density_from_fields(std::span<const std::string_view> fields, std::size_t n_bins,
                                           const std::string& where) {
  if (fields.size() != n_bins)
    throw DataError(where + ": expected " + std::to_string(n_bins) + " bin values, found " +
                    std::to_string(fields.size()));
  std::vector<double> bins(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    if (!text::parse_real(fields[i], bins[i]))
      throw DataError(where + ": bin " + std::to_string(i) + " is not a number: '" + std::string(fields[i]) + "'");
    if (bins[i] < 0.0) throw DataError(where + ": bin " + std::to_string(i) + " is negative");
  }
  const double sum = std::accumulate(bins.begin(), bins.end(), 0.0);
  if (std::abs(sum - 1.0) > kTextSumTolerance)
    throw DataError(where + ": bins sum to " + text::format_real(sum) + ", expected 1");
  try {
    // Rows already normalized to working precision are kept bit for bit.
    if (std::abs(sum - 1.0) <= kNormalizationTolerance) return DiscreteDensity(std::move(bins));
    return DiscreteDensity::from_weights(std::move(bins));
  } catch (const std::invalid_argument& e) {
    throw DataError(where + ": " + e.what());
  }
}

struct DensityFile {
  std::size_t n_bins = 0;
  std::vector<DiscreteDensity> densities;
  /// 1-based source line of each density.
  std::vector<std::size_t> lines;
};

/// Reads the density text format: a `# n_bins=<N>` header, then one density
/// per line as N comma-separated reals. Blank lines and further `#` comment
/// lines are ignored.
inline DensityFile read_densities(std::istream& in) {
  DensityFile file;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (file.n_bins == 0) {
        file.n_bins = parse_density_header(line);
        if (file.n_bins == 0) throw DataError("line " + std::to_string(lineno) + ": expected '# n_bins=<N>' header");
      }
      continue;
    }
    if (file.n_bins == 0) throw DataError("line " + std::to_string(lineno) + ": missing '# n_bins=<N>' header");
    const auto fields = text::split(line, ',');
    file.densities.push_back(density_from_fields(fields, file.n_bins, "line " + std::to_string(lineno)));
    file.lines.push_back(lineno);
  }
  if (file.n_bins == 0) throw DataError("density file has no '# n_bins=<N>' header");
  return file;
}

inline void write_densities(std::ostream& out, std::span<const DiscreteDensity> densities, std::size_t n_bins) {
  out << density_header(n_bins) << '\n';
  for (const auto& p : densities) out << format_density(p) << '\n';
}

}  // namespace orient
