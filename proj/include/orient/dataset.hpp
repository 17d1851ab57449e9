#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "orient/angle.hpp"
#include "orient/density.hpp"
#include "orient/density_io.hpp"
#include "orient/priors.hpp"
#include "orient/text.hpp"

namespace orient {

/// One annotated hand. Angles are degrees on disk and radians in memory.
struct HandAnnotation {
  std::string sample_id;
  double image_w = 0.0;
  double image_h = 0.0;
  HandBox box;
  OrientationAngle theta_gt;
  /// Empty when the sample has no human-region mask.
  std::string mask_path;
};

inline constexpr std::array<std::string_view, 8> kAnnotationColumns = {
    "sample_id", "image_w", "image_h", "cx", "cy", "half_size", "theta_deg", "mask_path"};

inline std::string annotation_header() {
  std::string h;
  for (std::size_t i = 0; i < kAnnotationColumns.size(); ++i) {
    if (i) h += ',';
    h += kAnnotationColumns[i];
  }
  return h;
}

inline std::vector<HandAnnotation> load_annotations(std::istream& in) {
  std::string raw;
  std::size_t lineno = 0;
  bool have_header = false;
  std::vector<HandAnnotation> out;
  std::set<std::string, std::less<>> seen;

  while (std::getline(in, raw)) {
    ++lineno;
    if (lineno == 1 && raw.starts_with("\xEF\xBB\xBF")) raw.erase(0, 3);
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (!have_header) {
      if (line != annotation_header()) throw DataError(where + ": expected header '" + annotation_header() + "'");
      have_header = true;
      continue;
    }
    const auto fields = text::split(line, ',');
    if (fields.size() > kAnnotationColumns.size())
      throw DataError(where + ": too many fields (" + std::to_string(fields.size()) + ")");

    const auto field = [&](std::size_t i) -> std::string_view {
      if (i >= fields.size()) throw DataError(where + ": field '" + std::string(kAnnotationColumns[i]) + "' missing");
      return text::trim(fields[i]);
    };
    const auto real = [&](std::size_t i) {
      double v = 0.0;
      if (!text::parse_real(field(i), v))
        throw DataError(where + ": field '" + std::string(kAnnotationColumns[i]) + "' is not a number: '" +
                        std::string(field(i)) + "'");
      return v;
    };

    HandAnnotation a;
    a.sample_id = std::string(field(0));
    if (a.sample_id.empty()) throw DataError(where + ": field 'sample_id' is empty");
    a.image_w = real(1);
    a.image_h = real(2);
    a.box.cx = real(3);
    a.box.cy = real(4);
    a.box.half_size = real(5);
    a.theta_gt = OrientationAngle::from_degrees(real(6));
    // A row may stop before the optional mask_path column.
    if (fields.size() > 7) a.mask_path = std::string(field(7));
    if (a.image_w <= 0.0) throw DataError(where + ": field 'image_w' must be > 0");
    if (a.image_h <= 0.0) throw DataError(where + ": field 'image_h' must be > 0");
    if (a.box.half_size <= 0.0) throw DataError(where + ": field 'half_size' must be > 0");
    if (!seen.insert(a.sample_id).second) throw DataError(where + ": duplicate sample_id '" + a.sample_id + "'");
    out.push_back(std::move(a));
  }
  if (!have_header) throw DataError("annotation file is empty (missing header)");
  return out;
}

inline std::vector<HandAnnotation> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open annotations '" + path + "'");
  try {
    return load_annotations(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline void save_annotations(std::ostream& out, std::span<const HandAnnotation> anns) {
  out << annotation_header() << '\n';
  for (const auto& a : anns) {
    out << a.sample_id << ',' << text::format_real(a.image_w) << ',' << text::format_real(a.image_h) << ','
        << text::format_real(a.box.cx) << ',' << text::format_real(a.box.cy) << ','
        << text::format_real(a.box.half_size) << ',' << text::format_real(a.theta_gt.degrees()) << ','
        << a.mask_path << '\n';
  }
}

struct PredictionRecord {
  std::string sample_id;
  DiscreteDensity density;
};

/// Prediction file: the density header, then `sample_id,<N bins>` per line.
inline std::vector<PredictionRecord> read_predictions(std::istream& in) {
  std::string raw;
  std::size_t lineno = 0, n_bins = 0;
  std::vector<PredictionRecord> out;
  std::set<std::string, std::less<>> seen;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '#') {
      if (n_bins == 0 && (n_bins = parse_density_header(line)) == 0)
        throw DataError(where + ": expected '# n_bins=<N>' header");
      continue;
    }
    if (n_bins == 0) throw DataError(where + ": missing '# n_bins=<N>' header");
    const auto fields = text::split(line, ',');
    std::string id(text::trim(fields.front()));
    if (id.empty()) throw DataError(where + ": empty sample_id");
    if (!seen.insert(id).second) throw DataError(where + ": duplicate prediction for '" + id + "'");
    auto p = density_from_fields(std::span(fields).subspan(1), n_bins, where);
    out.push_back(PredictionRecord{std::move(id), std::move(p)});
  }
  if (n_bins == 0) throw DataError("prediction file has no '# n_bins=<N>' header");
  return out;
}

inline std::vector<PredictionRecord> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open predictions '" + path + "'");
  try {
    return read_predictions(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline void write_predictions(std::ostream& out, std::span<const PredictionRecord> preds) {
  if (preds.empty()) throw std::invalid_argument("write_predictions: nothing to write");
  out << density_header(preds.front().density.size()) << '\n';
  for (const auto& r : preds) out << r.sample_id << ',' << format_density(r.density) << '\n';
}

// ---------------------------------------------------------------------------
// Randomness. Engines and transforms are spelled out so streams are identical
// across standard libraries (std::shuffle and std::normal_distribution are
// implementation-defined).

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) without modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do v = engine_();
    while (v >= limit);
    return v % bound;
  }

  /// Standard normal via Box-Muller.
  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------

class FoldSplit {
 public:
  FoldSplit(int n_folds, std::map<std::string, int, std::less<>> assignment)
      : n_folds_(n_folds), assignment_(std::move(assignment)) {}

  int n_folds() const { return n_folds_; }
  const std::map<std::string, int, std::less<>>& assignment() const { return assignment_; }

  int fold_of(std::string_view id) const {
    const auto it = assignment_.find(id);
    if (it == assignment_.end()) throw std::out_of_range("FoldSplit: unknown sample '" + std::string(id) + "'");
    return it->second;
  }

  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(n_folds_), 0);
    for (const auto& [id, f] : assignment_) ++sizes[static_cast<std::size_t>(f)];
    return sizes;
  }

 private:
  int n_folds_;
  std::map<std::string, int, std::less<>> assignment_;
};

/// Seeded Fisher-Yates shuffle followed by round-robin assignment, so fold
/// sizes differ by at most one.
inline FoldSplit split_folds(std::span<const std::string> ids, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw std::invalid_argument("split_folds: need at least 2 folds");
  if (static_cast<std::size_t>(n_folds) > ids.size())
    throw std::invalid_argument("split_folds: " + std::to_string(n_folds) + " folds requested for " +
                                std::to_string(ids.size()) + " samples");
  std::vector<std::string> order(ids.begin(), ids.end());
  Rng rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  std::map<std::string, int, std::less<>> assignment;
  for (std::size_t i = 0; i < order.size(); ++i)
    if (!assignment.emplace(order[i], static_cast<int>(i % n_folds)).second)
      throw std::invalid_argument("split_folds: duplicate id '" + order[i] + "'");
  return FoldSplit(n_folds, std::move(assignment));
}

/// Splits whole groups (e.g. all frames of one video) instead of samples.
/// `group_of` maps a sample id to its group key.
inline FoldSplit split_folds_grouped(std::span<const std::string> ids, int n_folds, std::uint64_t seed,
                                     const std::function<std::string(const std::string&)>& group_of) {
  std::vector<std::string> groups;
  std::set<std::string> seen;
  for (const auto& id : ids)
    if (seen.insert(group_of(id)).second) groups.push_back(group_of(id));
  const FoldSplit by_group = split_folds(groups, n_folds, seed);
  std::map<std::string, int, std::less<>> assignment;
  for (const auto& id : ids) assignment.emplace(id, by_group.fold_of(group_of(id)));
  return FoldSplit(n_folds, std::move(assignment));
}

// ---------------------------------------------------------------------------

inline constexpr double kBimodalTrueWeight = 0.55;
inline constexpr double kBimodalFalseWeight = 0.45;

/// Stand-in for a trained density head. Emits encode(theta_gt + noise), or
/// with probability bimodal_rate a two-peak mixture whose weaker peak sits
/// opposite the truth. The stream depends only on (seed, sample_id).
inline PredictionRecord synthetic_predict(const HandAnnotation& ann, double noise_sigma, double bimodal_rate,
                                          std::uint64_t seed, const ConversionConfig& cfg) {
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("synthetic_predict: noise_sigma must be >= 0");
  if (!(bimodal_rate >= 0.0 && bimodal_rate <= 1.0))
    throw std::invalid_argument("synthetic_predict: bimodal_rate must be in [0, 1]");
  Rng rng(seed ^ fnv1a(ann.sample_id));
  const double noise = noise_sigma * rng.gaussian();
  const bool bimodal = rng.uniform() < bimodal_rate;
  const OrientationAngle centre(ann.theta_gt.radians() + noise);
  DiscreteDensity p = encode(centre, cfg);
  if (!bimodal) return {ann.sample_id, std::move(p)};
  const DiscreteDensity q = encode(OrientationAngle(centre.radians() + std::numbers::pi), cfg);
  std::vector<double> mix(p.size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = kBimodalTrueWeight * p[i] + kBimodalFalseWeight * q[i];
  return {ann.sample_id, DiscreteDensity::from_weights(std::move(mix))};
}

}  // namespace orient
