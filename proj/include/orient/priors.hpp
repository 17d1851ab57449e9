#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "orient/angle.hpp"
#include "orient/density.hpp"

namespace orient {

/// Binary human-region raster, row-major, 1 = human.
///
/// Pixel (x, y) is centred on integer coordinates, so a real-valued point is
/// looked up at (floor(x + 0.5), floor(y + 0.5)).
class RegionMask {
 public:
  RegionMask(int width, int height, std::vector<std::uint8_t> bits)
      : width_(width), height_(height), bits_(std::move(bits)) {
    if (width_ < 1 || height_ < 1) throw std::invalid_argument("RegionMask: width and height must be >= 1");
    if (bits_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
      throw std::invalid_argument("RegionMask: expected width*height bits");
    for (auto& b : bits_) b = b ? 1 : 0;
  }

  static RegionMask filled(int width, int height, bool value) {
    return RegionMask(width, height,
                      std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, value ? 1 : 0));
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }

  /// Nearest-pixel lookup; points outside the image are not human.
  bool sample(double x, double y) const {
    const double px = std::floor(x + 0.5), py = std::floor(y + 0.5);
    if (px < 0.0 || py < 0.0 || px >= width_ || py >= height_) return false;
    return at(static_cast<int>(px), static_cast<int>(py));
  }

  friend bool operator==(const RegionMask&, const RegionMask&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

/// Hand region: centre in pixels and half its size (R). The centre may lie
/// outside the frame.
struct HandBox {
  double cx = 0.0;
  double cy = 0.0;
  double half_size = 1.0;

  /// R is half the larger side for non-square boxes.
  static HandBox from_extent(double cx, double cy, double box_w, double box_h) {
    return HandBox{cx, cy, 0.5 * std::max(box_w, box_h)};
  }

  void validate() const {
    if (!std::isfinite(cx) || !std::isfinite(cy)) throw std::invalid_argument("HandBox: centre must be finite");
    if (!(half_size > 0.0) || !std::isfinite(half_size)) throw std::invalid_argument("HandBox: half_size must be > 0");
  }
};

struct RegionPriorConfig {
  /// Rays run from R out to k_r * R.
  double k_r = 4.0;
  double radial_step = 1.0;

  void validate() const {
    if (!(k_r > 1.0) || !std::isfinite(k_r)) throw std::invalid_argument("RegionPriorConfig: k_r must be > 1");
    if (!(radial_step > 0.0) || !std::isfinite(radial_step))
      throw std::invalid_argument("RegionPriorConfig: radial_step must be > 0");
  }

  /// Number of samples per ray: r_j = R + j * radial_step for r_j <= k_r * R.
  std::size_t samples_per_ray(double half_size) const {
    return static_cast<std::size_t>(std::floor((k_r - 1.0) * half_size / radial_step + 1e-9)) + 1;
  }
};

struct RegionPriorResult {
  DiscreteDensity density;
  /// Human-pixel hits per bin before normalization.
  std::vector<double> hits;
  /// True when no ray touched the human region and the uniform density was
  /// returned instead.
  bool fallback = false;
};

/// Orientation evidence from the human region: for each bin, count the human
/// pixels met along the ray from the hand centre between R and k_r * R.
inline RegionPriorResult region_prior(const RegionMask& mask, const HandBox& box, const RegionPriorConfig& cfg,
                                      int n_bins) {
  box.validate();
  cfg.validate();
  if (n_bins < kMinBins) throw std::invalid_argument("region_prior: n_bins must be >= 4");
  const auto n = static_cast<std::size_t>(n_bins);
  const std::size_t steps = cfg.samples_per_ray(box.half_size);

  std::vector<double> hits(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(bin_angle(i, n)), s = std::sin(bin_angle(i, n));
    double count = 0.0;
    for (std::size_t j = 0; j < steps; ++j) {
      const double r = box.half_size + static_cast<double>(j) * cfg.radial_step;
      if (mask.sample(box.cx + r * c, box.cy + r * s)) count += 1.0;
    }
    hits[i] = count;
    total += count;
  }
  if (total == 0.0) return {DiscreteDensity::uniform(n), std::move(hits), true};
  std::vector<double> bins(n);
  for (std::size_t i = 0; i < n; ++i) bins[i] = hits[i] / total;
  return {DiscreteDensity(std::move(bins)), std::move(hits), false};
}

/// Lattice of densities over the image. Lattice point (a, b) sits at
/// (a * image_w / (grid_w - 1), b * image_h / (grid_h - 1)), so the corner
/// points coincide with the image corners. Cells are stored row-major with
/// row 0 at the top (y = 0).
class DensityGrid {
 public:
  DensityGrid(int grid_w, int grid_h, double image_w, double image_h, std::vector<DiscreteDensity> cells)
      : grid_w_(grid_w), grid_h_(grid_h), image_w_(image_w), image_h_(image_h), cells_(std::move(cells)) {
    if (grid_w_ < 2 || grid_h_ < 2) throw std::invalid_argument("DensityGrid: grid needs at least 2x2 points");
    if (!(image_w_ > 0.0) || !(image_h_ > 0.0)) throw std::invalid_argument("DensityGrid: image size must be > 0");
    if (cells_.size() != static_cast<std::size_t>(grid_w_) * static_cast<std::size_t>(grid_h_))
      throw std::invalid_argument("DensityGrid: expected grid_w*grid_h cell densities");
    for (const auto& c : cells_)
      if (c.size() != cells_.front().size()) throw std::invalid_argument("DensityGrid: cells differ in bin count");
  }

  int grid_w() const { return grid_w_; }
  int grid_h() const { return grid_h_; }
  double image_w() const { return image_w_; }
  double image_h() const { return image_h_; }
  std::size_t n_bins() const { return cells_.front().size(); }
  std::span<const DiscreteDensity> cells() const { return cells_; }

  const DiscreteDensity& cell(int a, int b) const { return cells_[index(a, b)]; }
  std::size_t index(int a, int b) const { return static_cast<std::size_t>(b) * grid_w_ + a; }

  double lattice_x(int a) const { return a * image_w_ / (grid_w_ - 1); }
  double lattice_y(int b) const { return b * image_h_ / (grid_h_ - 1); }

 private:
  int grid_w_;
  int grid_h_;
  double image_w_;
  double image_h_;
  std::vector<DiscreteDensity> cells_;
};

struct LatticeWeight {
  std::size_t index;
  double weight;
};

/// Bilinear weights of the four lattice points enclosing (x, y). Points
/// outside the image are clamped onto its border first.
inline std::array<LatticeWeight, 4> bilinear_weights(int grid_w, int grid_h, double image_w, double image_h, double x,
                                                     double y) {
  const auto axis = [](double pos, double extent, int points, int& lo, double& frac) {
    const double u = std::clamp(pos, 0.0, extent) * (points - 1) / extent;
    lo = std::min(static_cast<int>(std::floor(u)), points - 2);
    frac = u - lo;
  };
  int a0, b0;
  double fu, fv;
  axis(x, image_w, grid_w, a0, fu);
  axis(y, image_h, grid_h, b0, fv);
  const auto idx = [&](int a, int b) { return static_cast<std::size_t>(b) * grid_w + a; };
  return {{{idx(a0, b0), (1.0 - fu) * (1.0 - fv)},
           {idx(a0 + 1, b0), fu * (1.0 - fv)},
           {idx(a0, b0 + 1), (1.0 - fu) * fv},
           {idx(a0 + 1, b0 + 1), fu * fv}}};
}

struct GridSample {
  double x = 0.0;
  double y = 0.0;
  OrientationAngle theta_gt;
};

/// Trains lattice densities as bilinearly weighted means of the encoded
/// ground-truth samples. Points that receive no weight hold the uniform
/// density.
inline DensityGrid grid_train(std::span<const GridSample> samples, int grid_w, int grid_h, double image_w,
                              double image_h, const ConversionConfig& cfg) {
  if (samples.empty()) throw std::invalid_argument("grid_train: no samples");
  if (grid_w < 2 || grid_h < 2) throw std::invalid_argument("grid_train: grid needs at least 2x2 points");
  if (!(image_w > 0.0) || !(image_h > 0.0)) throw std::invalid_argument("grid_train: image size must be > 0");
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.n_bins);
  const std::size_t points = static_cast<std::size_t>(grid_w) * grid_h;
  std::vector<std::vector<double>> acc(points, std::vector<double>(n, 0.0));
  std::vector<double> weight(points, 0.0);

  for (const auto& s : samples) {
    if (!(s.x >= 0.0 && s.x <= image_w && s.y >= 0.0 && s.y <= image_h))
      throw std::invalid_argument("grid_train: sample at (" + std::to_string(s.x) + ", " + std::to_string(s.y) +
                                  ") lies outside the image");
    const DiscreteDensity p = encode(s.theta_gt, cfg);
    for (const auto& [k, w] : bilinear_weights(grid_w, grid_h, image_w, image_h, s.x, s.y)) {
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) acc[k][i] += w * p[i];
      weight[k] += w;
    }
  }

  std::vector<DiscreteDensity> cells;
  cells.reserve(points);
  for (std::size_t k = 0; k < points; ++k)
    cells.push_back(weight[k] > 0.0 ? DiscreteDensity::from_weights(std::move(acc[k])) : DiscreteDensity::uniform(n));
  return DensityGrid(grid_w, grid_h, image_w, image_h, std::move(cells));
}

/// Position prior at (x, y): bilinear interpolation of the four enclosing
/// lattice densities, renormalized.
inline DiscreteDensity grid_query(const DensityGrid& grid, double x, double y) {
  const std::size_t n = grid.n_bins();
  std::vector<double> out(n, 0.0);
  double wsum = 0.0;
  for (const auto& [k, w] : bilinear_weights(grid.grid_w(), grid.grid_h(), grid.image_w(), grid.image_h(), x, y)) {
    if (w == 0.0) continue;
    const auto& p = grid.cells()[k];
    for (std::size_t i = 0; i < n; ++i) out[i] += w * p[i];
    wsum += w;
  }
  for (double& v : out) v /= wsum;
  return DiscreteDensity::from_weights(std::move(out));
}

}  // namespace orient
