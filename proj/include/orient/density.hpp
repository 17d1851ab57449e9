#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "orient/angle.hpp"

namespace orient {

/// Malformed or inconsistent input data (files, records, masks).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a product of densities vanishes in every bin.
class ZeroProductError : public std::domain_error {
 public:
  ZeroProductError() : std::domain_error("fuse: product of densities is zero in every bin (disjoint supports)") {}
};

inline constexpr int kMinBins = 4;
inline constexpr double kNormalizationTolerance = 1e-9;

/// Orientation of bin i out of n: 2*pi*i/n.
inline double bin_angle(std::size_t i, std::size_t n) {
  return kTwoPi * static_cast<double>(i) / static_cast<double>(n);
}

/// Probability mass over n evenly spaced orientations. Bins are nonnegative
/// and sum to one.
class DiscreteDensity {
 public:
  /// Takes bins that already satisfy the density conditions.
  explicit DiscreteDensity(std::vector<double> bins) : bins_(std::move(bins)) {
    check_shape(bins_);
    const double sum = std::accumulate(bins_.begin(), bins_.end(), 0.0);
    if (std::abs(sum - 1.0) > kNormalizationTolerance)
      throw std::invalid_argument("DiscreteDensity: bins sum to " + std::to_string(sum) + ", expected 1");
  }

  /// Normalizes nonnegative weights into a density.
  static DiscreteDensity from_weights(std::vector<double> weights) {
    check_shape(weights);
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(sum > 0.0)) throw std::invalid_argument("DiscreteDensity: all weights are zero");
    for (double& w : weights) w /= sum;
    // Holds unless the weights span more than ~1e300 in magnitude.
    if (std::abs(std::accumulate(weights.begin(), weights.end(), 0.0) - 1.0) > kNormalizationTolerance)
      throw std::logic_error("DiscreteDensity: normalization lost precision");
    return DiscreteDensity(Trusted{}, std::move(weights));
  }

  static DiscreteDensity uniform(std::size_t n) {
    return from_weights(std::vector<double>(n, 1.0));
  }

  std::size_t size() const { return bins_.size(); }
  double operator[](std::size_t i) const { return bins_[i]; }
  std::span<const double> bins() const { return bins_; }

  /// Index of the largest bin; the lowest index wins ties.
  std::size_t argmax_bin() const {
    return static_cast<std::size_t>(std::max_element(bins_.begin(), bins_.end()) - bins_.begin());
  }

  /// True when every bin holds the same value.
  bool is_uniform() const {
    return std::all_of(bins_.begin(), bins_.end(), [&](double v) { return v == bins_.front(); });
  }

  friend bool operator==(const DiscreteDensity&, const DiscreteDensity&) = default;

 private:
  struct Trusted {};
  DiscreteDensity(Trusted, std::vector<double> bins) : bins_(std::move(bins)) {}

  static void check_shape(std::span<const double> bins) {
    if (bins.size() < static_cast<std::size_t>(kMinBins))
      throw std::invalid_argument("DiscreteDensity: need at least " + std::to_string(kMinBins) + " bins, got " +
                                  std::to_string(bins.size()));
    for (double v : bins)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("DiscreteDensity: bins must be finite and nonnegative");
  }

  std::vector<double> bins_;
};

/// Objective used to turn a density back into an angle.
enum class DecodeKernel {
  /// Cosine similarity between the bins and a Gaussian template in squared
  /// distance. Exact inverse of encode up to the candidate spacing.
  cosine_similarity,
  /// sum_i p_i exp(-d / (2 sigma^2)) / sum_i p_i, distance to the first power.
  printed_linear,
  /// sum_i p_i exp(-d^2 / (2 sigma^2)) / sum_i p_i.
  printed_squared,
};

struct ConversionConfig {
  int n_bins = 16;
  double sigma = deg_to_rad(10.0);
  /// Spacing of the exhaustive candidate grid searched by decode.
  double decode_step = deg_to_rad(0.1);
  DecodeKernel kernel = DecodeKernel::cosine_similarity;
  /// Re-search +-one step around the best candidate at a tenth of the spacing.
  bool refine = false;

  void validate() const {
    if (n_bins < kMinBins) throw std::invalid_argument("ConversionConfig: n_bins must be >= 4");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("ConversionConfig: sigma must be > 0");
    if (!(decode_step > 0.0) || decode_step > kTwoPi / n_bins * (1.0 + 1e-12))
      throw std::invalid_argument("ConversionConfig: decode_step must be in (0, 2pi/n_bins]");
  }
};

/// Gaussian soft label around theta_gt in squared angular distance.
inline DiscreteDensity encode(OrientationAngle theta_gt, const ConversionConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.n_bins);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = angular_distance(OrientationAngle(bin_angle(i, n)), theta_gt);
    d2[i] = d * d;
  }
  // Shifting the exponent by the nearest bin's distance cancels in the
  // normalization and keeps tiny sigmas from underflowing every bin.
  const double d2_min = *std::min_element(d2.begin(), d2.end());
  const double two_var = 2.0 * cfg.sigma * cfg.sigma;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(-(d2[i] - d2_min) / two_var);
  return DiscreteDensity::from_weights(std::move(w));
}

struct DecodeResult {
  OrientationAngle angle;
  /// Objective at `angle`; cosine similarity minus 1 for the cosine kernel.
  double score = 0.0;
  /// Set when the density carries no directional information (all bins
  /// equal); the angle is then 0 by convention.
  bool low_confidence = false;
};

/// Argmax decoder over an exhaustive candidate grid. Precomputes the template
/// bank once so it can be reused across many densities.
class Decoder {
 public:
  explicit Decoder(const ConversionConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    n_ = static_cast<std::size_t>(cfg_.n_bins);
    const double ratio = kTwoPi / cfg_.decode_step;
    const double nearest = std::round(ratio);
    n_candidates_ = static_cast<std::size_t>(std::abs(ratio - nearest) < 1e-9 ? nearest : std::ceil(ratio));
    bank_.resize(n_candidates_ * n_);
    norm_.resize(n_candidates_);
    for (std::size_t k = 0; k < n_candidates_; ++k) {
      const OrientationAngle theta(candidate(k));
      std::span<double> row(bank_.data() + k * n_, n_);
      fill_template(theta, row);
      norm_[k] = template_norm(row);
    }
  }

  const ConversionConfig& config() const { return cfg_; }
  std::size_t candidate_count() const { return n_candidates_; }

  /// Accepts un-normalized nonnegative bins as well as proper densities.
  DecodeResult decode_detailed(std::span<const double> p) const {
    check_input(p);
    const double mass = scale_of(p);
    if (std::all_of(p.begin(), p.end(), [&](double v) { return v == p.front(); }))
      return DecodeResult{OrientationAngle(0.0), score_of(p, mass, row(0), norm_[0]), true};

    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_candidates_; ++k) {
      const double s = score_of(p, mass, row(k), norm_[k]);
      if (s > best_score) {
        best_score = s;
        best = k;
      }
    }
    double best_angle = candidate(best);

    if (cfg_.refine) {
      const double fine = cfg_.decode_step / 10.0;
      const double center = best_angle;
      std::vector<double> tmpl(n_);
      for (int j = -9; j <= 9; ++j) {
        if (j == 0) continue;
        const OrientationAngle theta(center + j * fine);
        fill_template(theta, tmpl);
        const double s = score_of(p, mass, tmpl, template_norm(tmpl));
        if (s > best_score) {
          best_score = s;
          best_angle = theta.radians();
        }
      }
    }
    return DecodeResult{OrientationAngle(best_angle), best_score, false};
  }

  OrientationAngle decode(std::span<const double> p) const { return decode_detailed(p).angle; }
  OrientationAngle decode(const DiscreteDensity& p) const { return decode_detailed(p.bins()).angle; }

  /// Objective value at an arbitrary angle; exposed for diagnostics.
  double objective(std::span<const double> p, OrientationAngle theta) const {
    check_input(p);
    std::vector<double> tmpl(n_);
    fill_template(theta, tmpl);
    return score_of(p, scale_of(p), tmpl, template_norm(tmpl));
  }

 private:
  double candidate(std::size_t k) const { return static_cast<double>(k) * cfg_.decode_step; }
  std::span<const double> row(std::size_t k) const { return {bank_.data() + k * n_, n_}; }

  void fill_template(OrientationAngle theta, std::span<double> out) const {
    const double two_var = 2.0 * cfg_.sigma * cfg_.sigma;
    for (std::size_t i = 0; i < n_; ++i) {
      const double d = angular_distance(OrientationAngle(bin_angle(i, n_)), theta);
      const double e = cfg_.kernel == DecodeKernel::printed_linear ? d : d * d;
      out[i] = std::exp(-e / two_var);
    }
  }

  double template_norm(std::span<const double> tmpl) const {
    if (cfg_.kernel != DecodeKernel::cosine_similarity) return 1.0;
    double ss = 0.0;
    for (double t : tmpl) ss += t * t;
    return std::sqrt(ss);
  }

  double scale_of(std::span<const double> p) const {
    if (cfg_.kernel != DecodeKernel::cosine_similarity) return std::accumulate(p.begin(), p.end(), 0.0);
    double pp = 0.0;
    for (double v : p) pp += v * v;
    return std::sqrt(pp);
  }

  // For the cosine kernel `mass` carries |p| instead of sum(p), and the score
  // is cos - 1 taken from the distance between unit vectors, which keeps
  // nearly parallel candidates apart where the cosine itself rounds to 1.
  double score_of(std::span<const double> p, double mass, std::span<const double> tmpl, double norm) const {
    if (cfg_.kernel == DecodeKernel::cosine_similarity) {
      double chord = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        const double d = p[i] / mass - tmpl[i] / norm;
        chord += d * d;
      }
      return -0.5 * chord;
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < n_; ++i) dot += p[i] * tmpl[i];
    return dot / mass;
  }

  void check_input(std::span<const double> p) const {
    if (p.size() != n_)
      throw std::invalid_argument("decode: density has " + std::to_string(p.size()) + " bins, config expects " +
                                  std::to_string(n_));
    bool any = false;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("decode: bins must be finite and nonnegative");
      any = any || v > 0.0;
    }
    if (!any) throw std::invalid_argument("decode: density has all bins zero");
  }

  ConversionConfig cfg_;
  std::size_t n_ = 0;
  std::size_t n_candidates_ = 0;
  std::vector<double> bank_;
  std::vector<double> norm_;
};

inline OrientationAngle decode(const DiscreteDensity& p, const ConversionConfig& cfg) {
  return Decoder(cfg).decode(p);
}

/// Elementwise product of independent densities, renormalized.
///
/// Factors whose bins are all equal are the multiplicative identity and are
/// skipped, so fusing with uniform priors returns the other input bit for bit.
inline DiscreteDensity fuse(std::span<const DiscreteDensity> densities) {
  if (densities.empty()) throw std::invalid_argument("fuse: need at least one density");
  const std::size_t n = densities.front().size();
  for (const auto& d : densities)
    if (d.size() != n) throw std::invalid_argument("fuse: densities have different bin counts");

  std::vector<double> acc;
  const DiscreteDensity* only = nullptr;
  std::size_t informative = 0;
  for (const auto& d : densities) {
    if (d.is_uniform()) continue;
    if (++informative == 1) {
      only = &d;
      acc.assign(d.bins().begin(), d.bins().end());
      continue;
    }
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc[i] *= d[i];
      peak = std::max(peak, acc[i]);
    }
    if (peak == 0.0) throw ZeroProductError();
    for (double& v : acc) v /= peak;
  }
  if (informative == 0) return DiscreteDensity::uniform(n);
  if (informative == 1) return *only;
  return DiscreteDensity::from_weights(std::move(acc));
}

inline DiscreteDensity fuse(std::initializer_list<DiscreteDensity> densities) {
  return fuse(std::span<const DiscreteDensity>(densities.begin(), densities.size()));
}

inline constexpr double kKlFloor = 1e-12;

namespace detail {

inline std::vector<double> kl_smoothed(const DiscreteDensity& p) {
  std::vector<double> out(p.bins().begin(), p.bins().end());
  bool floored = false;
  for (double& v : out) {
    if (v < kKlFloor) {
      v = kKlFloor;
      floored = true;
    }
  }
  if (floored) {
    const double sum = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& v : out) v /= sum;
  }
  return out;
}

}  // namespace detail

/// KL(p || q) in nats. Both sides are floored at 1e-12 and renormalized, so
/// the result is finite when q has empty bins and KL(p, p) is exactly 0.
inline double kl_divergence(const DiscreteDensity& p, const DiscreteDensity& q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: densities have different bin counts");
  const auto ps = detail::kl_smoothed(p), qs = detail::kl_smoothed(q);
  double kl = 0.0;
  for (std::size_t i = 0; i < qs.size(); ++i) kl += ps[i] * std::log(ps[i] / qs[i]);
  return std::max(0.0, kl);
}

}  // namespace orient
