#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "orient/angle.hpp"
#include "orient/dataset.hpp"
#include "orient/priors.hpp"

namespace orient {

/// Mask that is human on the open half-plane the orientation points into:
/// pixels p with (p - c) . (cos t, sin t) > 0.
inline RegionMask half_plane_mask(int width, int height, double cx, double cy, OrientationAngle theta) {
  const double ux = std::cos(theta.radians()), uy = std::sin(theta.radians());
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      bits[static_cast<std::size_t>(y) * width + x] = ((x - cx) * ux + (y - cy) * uy) > 0.0 ? 1 : 0;
  return RegionMask(width, height, std::move(bits));
}

struct SyntheticDatasetOptions {
  std::size_t count = 100;
  int image_w = 160;
  int image_h = 120;
  double half_size = 8.0;
  /// Hand centres keep this distance from the frame edge so rays stay inside.
  int margin = 32;
  /// Mask paths written into the annotations; empty leaves them blank.
  std::string mask_dir;
};

/// Annotations with integer hand centres and uniformly random orientations.
/// Ids are "s00000", "s00001", ...
inline std::vector<HandAnnotation> synthetic_annotations(const SyntheticDatasetOptions& opt, std::uint64_t seed) {
  if (opt.margin < 0 || opt.image_w <= 2 * opt.margin || opt.image_h <= 2 * opt.margin)
    throw std::invalid_argument("synthetic_annotations: image too small for the margin");
  Rng rng(seed);
  std::vector<HandAnnotation> out;
  out.reserve(opt.count);
  for (std::size_t i = 0; i < opt.count; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "s%05zu", i);
    HandAnnotation a;
    a.sample_id = id;
    a.image_w = opt.image_w;
    a.image_h = opt.image_h;
    a.box.cx = opt.margin + static_cast<double>(rng.below(static_cast<std::uint64_t>(opt.image_w - 2 * opt.margin)));
    a.box.cy = opt.margin + static_cast<double>(rng.below(static_cast<std::uint64_t>(opt.image_h - 2 * opt.margin)));
    a.box.half_size = opt.half_size;
    a.theta_gt = OrientationAngle(kTwoPi * rng.uniform());
    if (!opt.mask_dir.empty()) a.mask_path = opt.mask_dir + "/" + a.sample_id + ".pgm";
    out.push_back(std::move(a));
  }
  return out;
}

/// Half-plane human region aligned with the annotation's ground truth.
inline RegionMask aligned_mask(const HandAnnotation& a) {
  return half_plane_mask(static_cast<int>(a.image_w), static_cast<int>(a.image_h), a.box.cx, a.box.cy, a.theta_gt);
}

}  // namespace orient
