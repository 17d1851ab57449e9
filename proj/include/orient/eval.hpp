#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "orient/angle.hpp"
#include "orient/dataset.hpp"
#include "orient/density.hpp"
#include "orient/pgm.hpp"
#include "orient/priors.hpp"
#include "orient/text.hpp"

namespace orient {

/// Prediction error in degrees, in [0, 180].
inline double angular_error(OrientationAngle pred, OrientationAngle gt) {
  const double d = std::fmod(std::abs(pred.degrees() - gt.degrees()), 360.0);
  return std::min(d, 360.0 - d);
}

inline constexpr std::array<double, 3> kBelowThresholds = {10.0, 20.0, 30.0};
inline constexpr std::array<double, 3> kAboveThresholds = {90.0, 120.0, 150.0};

struct ThresholdShare {
  double threshold_deg;
  double percent;

  friend bool operator==(const ThresholdShare&, const ThresholdShare&) = default;
};

/// Share of samples strictly below / strictly above fixed error thresholds.
struct ErrorPopulationReport {
  std::string method_name;
  std::array<ThresholdShare, 3> below{};
  std::array<ThresholdShare, 3> above{};
  std::size_t n_samples = 0;
  double mean_error = 0.0;
  double median_error = 0.0;
  /// Samples whose fused density vanished; counted at 180 degrees.
  std::size_t fusion_failures = 0;

  friend bool operator==(const ErrorPopulationReport&, const ErrorPopulationReport&) = default;
};

/// Errors are sorted before any accumulation, so the report does not depend
/// on the order samples were evaluated in.
inline ErrorPopulationReport population_report(std::span<const double> errors, std::string method_name,
                                               std::size_t fusion_failures = 0) {
  if (errors.empty()) throw std::invalid_argument("population_report: no errors to report");
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());

  ErrorPopulationReport r;
  r.method_name = std::move(method_name);
  r.n_samples = sorted.size();
  r.fusion_failures = fusion_failures;
  for (std::size_t t = 0; t < kBelowThresholds.size(); ++t) {
    const auto count = std::lower_bound(sorted.begin(), sorted.end(), kBelowThresholds[t]) - sorted.begin();
    r.below[t] = {kBelowThresholds[t], 100.0 * static_cast<double>(count) / n};
  }
  for (std::size_t t = 0; t < kAboveThresholds.size(); ++t) {
    const auto count = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), kAboveThresholds[t]);
    r.above[t] = {kAboveThresholds[t], 100.0 * static_cast<double>(count) / n};
  }
  r.mean_error = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  const std::size_t mid = sorted.size() / 2;
  r.median_error = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return r;
}

using MaskProvider = std::function<RegionMask(const HandAnnotation&)>;

/// Loads `mask_path` as PGM, resolving relative paths against `base_dir`.
inline MaskProvider pgm_mask_provider(std::filesystem::path base_dir) {
  return [base = std::move(base_dir)](const HandAnnotation& a) {
    if (a.mask_path.empty()) throw DataError("sample '" + a.sample_id + "': no mask_path for region prior");
    std::filesystem::path p(a.mask_path);
    if (p.is_relative()) p = base / p;
    try {
      return read_pgm_mask(p.string());
    } catch (const DataError& e) {
      throw DataError("sample '" + a.sample_id + "': " + e.what());
    }
  };
}

struct PipelineOptions {
  bool use_region_prior = false;
  bool use_position_prior = false;
  /// Required when use_position_prior is set.
  const DensityGrid* grid = nullptr;
  ConversionConfig cfg;
  RegionPriorConfig region_cfg;
  /// Required when use_region_prior is set.
  MaskProvider masks;
  std::string method_name = "density representation";
  /// 0 picks the hardware concurrency.
  unsigned threads = 1;
};

struct SampleOutcome {
  std::string sample_id;
  OrientationAngle predicted;
  double error_deg = 0.0;
  bool fusion_failed = false;
};

struct PipelineResult {
  ErrorPopulationReport report;
  /// In prediction order.
  std::vector<SampleOutcome> samples;
};

namespace detail {

// Runs body(i) for i in [0, n) on up to `threads` workers. Rethrows the
// exception of the lowest failing index, matching a sequential run.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::vector<std::exception_ptr> errors(n);
  const auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    run(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t start = 0; start < n; start += chunk) pool.emplace_back(run, start, std::min(n, start + chunk));
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Per prediction: fuse the image density with the enabled priors, decode,
/// and score against ground truth.
inline PipelineResult evaluate_pipeline(std::span<const HandAnnotation> annotations,
                                        std::span<const PredictionRecord> predictions, const PipelineOptions& opt) {
  opt.cfg.validate();
  if (predictions.empty()) throw std::invalid_argument("evaluate_pipeline: no predictions");
  if (opt.use_position_prior && !opt.grid) throw std::invalid_argument("evaluate_pipeline: position prior needs a grid");
  if (opt.use_region_prior && !opt.masks)
    throw std::invalid_argument("evaluate_pipeline: region prior needs a mask provider");

  std::unordered_map<std::string_view, const HandAnnotation*> by_id;
  for (const auto& a : annotations) by_id.emplace(a.sample_id, &a);
  std::vector<const HandAnnotation*> resolved(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto it = by_id.find(predictions[i].sample_id);
    if (it == by_id.end())
      throw DataError("prediction for unknown sample '" + predictions[i].sample_id + "'");
    if (predictions[i].density.size() != static_cast<std::size_t>(opt.cfg.n_bins))
      throw DataError("sample '" + predictions[i].sample_id + "': prediction has " +
                      std::to_string(predictions[i].density.size()) + " bins, expected " +
                      std::to_string(opt.cfg.n_bins));
    resolved[i] = it->second;
  }
  if (opt.grid && opt.use_position_prior && opt.grid->n_bins() != static_cast<std::size_t>(opt.cfg.n_bins))
    throw DataError("position grid has " + std::to_string(opt.grid->n_bins()) + " bins, expected " +
                    std::to_string(opt.cfg.n_bins));

  const Decoder decoder(opt.cfg);
  std::vector<SampleOutcome> outcomes(predictions.size());
  detail::parallel_for(predictions.size(), opt.threads, [&](std::size_t i) {
    const HandAnnotation& ann = *resolved[i];
    std::vector<DiscreteDensity> factors{predictions[i].density};
    if (opt.use_region_prior) {
      const RegionMask mask = opt.masks(ann);
      if (mask.width() != static_cast<int>(ann.image_w) || mask.height() != static_cast<int>(ann.image_h))
        throw DataError("sample '" + ann.sample_id + "': mask is " + std::to_string(mask.width()) + "x" +
                        std::to_string(mask.height()) + ", annotation image is " + text::format_real(ann.image_w) +
                        "x" + text::format_real(ann.image_h));
      factors.push_back(region_prior(mask, ann.box, opt.region_cfg, opt.cfg.n_bins).density);
    }
    if (opt.use_position_prior) factors.push_back(grid_query(*opt.grid, ann.box.cx, ann.box.cy));

    SampleOutcome& out = outcomes[i];
    out.sample_id = ann.sample_id;
    try {
      out.predicted = decoder.decode(fuse(factors));
      out.error_deg = angular_error(out.predicted, ann.theta_gt);
    } catch (const ZeroProductError&) {
      out.fusion_failed = true;
      out.error_deg = 180.0;
    }
  });

  std::vector<double> errors;
  errors.reserve(outcomes.size());
  std::size_t failures = 0;
  for (const auto& o : outcomes) {
    errors.push_back(o.error_deg);
    failures += o.fusion_failed ? 1 : 0;
  }
  return {population_report(errors, opt.method_name, failures), std::move(outcomes)};
}

struct CrossValidationResult {
  /// Pooled over every held-out sample.
  ErrorPopulationReport overall;
  std::vector<ErrorPopulationReport> folds;
};

/// Every annotation must share one image size; it defines the grid frame.
inline std::pair<double, double> common_image_size(std::span<const HandAnnotation> annotations) {
  if (annotations.empty()) throw DataError("no annotations");
  const double w = annotations.front().image_w, h = annotations.front().image_h;
  for (const auto& a : annotations)
    if (a.image_w != w || a.image_h != h)
      throw DataError("sample '" + a.sample_id + "': image size differs from '" + annotations.front().sample_id +
                      "'; a position grid needs one frame size");
  return {w, h};
}

/// Grid training samples from annotations. Hand centres outside the frame are
/// clamped onto its border, as queries are.
inline std::vector<GridSample> grid_samples(std::span<const HandAnnotation* const> annotations, double image_w,
                                            double image_h) {
  std::vector<GridSample> out;
  out.reserve(annotations.size());
  for (const auto* a : annotations)
    out.push_back({std::clamp(a->box.cx, 0.0, image_w), std::clamp(a->box.cy, 0.0, image_h), a->theta_gt});
  return out;
}

/// K-fold protocol: when the position prior is on, each fold's grid is
/// trained only on annotations of the other folds.
inline CrossValidationResult cross_validate(std::span<const HandAnnotation> annotations,
                                            std::span<const PredictionRecord> predictions, const FoldSplit& split,
                                            PipelineOptions opt, int grid_w = 5, int grid_h = 4) {
  std::vector<double> all_errors;
  std::size_t all_failures = 0;
  CrossValidationResult result;
  std::optional<std::pair<double, double>> frame;
  if (opt.use_position_prior) frame = common_image_size(annotations);
  const std::string method = opt.method_name;

  for (int fold = 0; fold < split.n_folds(); ++fold) {
    std::vector<PredictionRecord> held_out;
    for (const auto& p : predictions)
      if (split.fold_of(p.sample_id) == fold) held_out.push_back(p);
    if (held_out.empty()) continue;

    std::optional<DensityGrid> grid;
    if (opt.use_position_prior) {
      std::vector<const HandAnnotation*> train;
      for (const auto& a : annotations)
        if (split.assignment().contains(a.sample_id) && split.fold_of(a.sample_id) != fold) train.push_back(&a);
      if (train.empty()) throw DataError("fold " + std::to_string(fold) + ": no training annotations for the grid");
      const auto samples = grid_samples(train, frame->first, frame->second);
      grid.emplace(grid_train(samples, grid_w, grid_h, frame->first, frame->second, opt.cfg));
      opt.grid = &*grid;
    }
    opt.method_name = method + " [fold " + std::to_string(fold) + "]";
    auto fold_result = evaluate_pipeline(annotations, held_out, opt);
    for (const auto& s : fold_result.samples) all_errors.push_back(s.error_deg);
    all_failures += fold_result.report.fusion_failures;
    result.folds.push_back(std::move(fold_result.report));
  }
  result.overall = population_report(all_errors, method, all_failures);
  return result;
}

// ---------------------------------------------------------------------------
// Output

inline std::string render_report_table(std::span<const ErrorPopulationReport> reports) {
  std::size_t name_w = 6;
  for (const auto& r : reports) name_w = std::max(name_w, r.method_name.size());
  const auto pad = [](std::string s, std::size_t w, bool left) {
    const std::string fill(s.size() < w ? w - s.size() : 0, ' ');
    return left ? s + fill : fill + s;
  };
  const auto percent = [](double v) { return text::format_fixed(v, 3) + "%"; };

  std::ostringstream out;
  out << pad("Method", name_w, true);
  for (double t : kBelowThresholds) out << pad("<" + text::format_fixed(t, 0) + "deg", 10, false);
  out << pad("...", 6, false);
  for (double t : kAboveThresholds) out << pad(">" + text::format_fixed(t, 0) + "deg", 10, false);
  out << pad("mean", 10, false) << pad("median", 10, false) << pad("n", 8, false) << '\n';
  for (const auto& r : reports) {
    out << pad(r.method_name, name_w, true);
    for (const auto& s : r.below) out << pad(percent(s.percent), 10, false);
    out << pad("-", 6, false);
    for (const auto& s : r.above) out << pad(percent(s.percent), 10, false);
    out << pad(text::format_fixed(r.mean_error, 3), 10, false) << pad(text::format_fixed(r.median_error, 3), 10, false)
        << pad(std::to_string(r.n_samples), 8, false) << '\n';
  }
  for (const auto& r : reports)
    if (r.fusion_failures)
      out << "# " << r.method_name << ": " << r.fusion_failures
          << " sample(s) with zero-product fusion scored as 180 deg\n";
  return out.str();
}

inline nlohmann::ordered_json report_to_json(const ErrorPopulationReport& r) {
  nlohmann::ordered_json j;
  j["method_name"] = r.method_name;
  auto& below = j["below_thresholds"] = nlohmann::ordered_json::object();
  for (const auto& s : r.below) below[text::format_fixed(s.threshold_deg, 0)] = s.percent;
  auto& above = j["above_thresholds"] = nlohmann::ordered_json::object();
  for (const auto& s : r.above) above[text::format_fixed(s.threshold_deg, 0)] = s.percent;
  j["n_samples"] = r.n_samples;
  j["mean_error"] = r.mean_error;
  j["median_error"] = r.median_error;
  j["fusion_failures"] = r.fusion_failures;
  return j;
}

}  // namespace orient
