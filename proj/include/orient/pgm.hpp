#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "orient/density.hpp"
#include "orient/priors.hpp"

namespace orient {

namespace detail {

// Reads one whitespace-delimited header integer, skipping '#' comments.
inline long long pgm_header_int(std::istream& in, const char* what) {
  int c = in.get();
  while (true) {
    while (c != EOF && std::isspace(c)) c = in.get();
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
      continue;
    }
    break;
  }
  if (c == EOF || !std::isdigit(c)) throw DataError(std::string("PGM: missing or invalid ") + what);
  long long v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > (1LL << 31)) throw DataError(std::string("PGM: ") + what + " out of range");
    c = in.get();
  }
  if (c == EOF || !std::isspace(c)) throw DataError(std::string("PGM: malformed ") + what);
  return v;
}

}  // namespace detail

/// Binary 8-bit PGM (P5); any nonzero pixel is human region.
inline RegionMask read_pgm_mask(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw DataError("PGM: expected magic 'P5'");
  const long long w = detail::pgm_header_int(in, "width");
  const long long h = detail::pgm_header_int(in, "height");
  const long long maxval = detail::pgm_header_int(in, "maxval");
  if (w < 1 || h < 1) throw DataError("PGM: width and height must be >= 1");
  if (maxval < 1 || maxval > 255) throw DataError("PGM: only 8-bit images (maxval 1..255) are supported");
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(w * h));
  in.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
  if (in.gcount() != static_cast<std::streamsize>(bits.size()))
    throw DataError("PGM: pixel data truncated (expected " + std::to_string(bits.size()) + " bytes)");
  return RegionMask(static_cast<int>(w), static_cast<int>(h), std::move(bits));
}

inline RegionMask read_pgm_mask(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open mask '" + path + "'");
  try {
    return read_pgm_mask(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

/// Writes human pixels as 255 and background as 0.
inline void write_pgm_mask(std::ostream& out, const RegionMask& mask) {
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  for (auto b : mask.bits()) out.put(b ? static_cast<char>(255) : '\0');
}

inline void write_pgm_mask(const std::string& path, const RegionMask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write mask '" + path + "'");
  write_pgm_mask(out, mask);
}

}  // namespace orient
