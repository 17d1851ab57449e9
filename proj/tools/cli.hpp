#pragma once

// Command-line front end. Kept in a header so tests can drive it in-process.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "orient/orient.hpp"

namespace orient::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2 };

/// Configuration problems detected before any data is touched.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct Globals {
  int n_bins = 16;
  double sigma_deg = 10.0;
  double decode_step_deg = 0.1;
  std::string kernel = "cosine";
  bool refine = false;
  double kr = 4.0;
  double radial_step = 1.0;
  std::uint64_t seed = 0;
  bool n_bins_given = false;

  ConversionConfig conversion(int n_bins_override = 0) const {
    ConversionConfig cfg;
    cfg.n_bins = n_bins_override ? n_bins_override : n_bins;
    cfg.sigma = deg_to_rad(sigma_deg);
    cfg.decode_step = deg_to_rad(decode_step_deg);
    cfg.refine = refine;
    if (kernel == "cosine") cfg.kernel = DecodeKernel::cosine_similarity;
    else if (kernel == "printed") cfg.kernel = DecodeKernel::printed_linear;
    else if (kernel == "printed-squared") cfg.kernel = DecodeKernel::printed_squared;
    else throw UsageError("--decode-kernel must be cosine, printed or printed-squared");
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }

  RegionPriorConfig region() const {
    RegionPriorConfig cfg{kr, radial_step};
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }

  /// Bin count for a density file: the file header decides unless --n-bins
  /// was given explicitly, in which case they must agree.
  int bins_for_file(std::size_t file_bins) const {
    if (n_bins_given && static_cast<std::size_t>(n_bins) != file_bins)
      throw DataError("input has n_bins=" + std::to_string(file_bins) + " but --n-bins " + std::to_string(n_bins));
    return static_cast<int>(file_bins);
  }
};

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

// "-" means the process stream.
class Input {
 public:
  Input(const std::string& path, std::istream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
      if (!*file_) throw DataError("cannot open '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::istream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
};

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw DataError("cannot write '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

inline std::string format_angle_deg(OrientationAngle a) { return text::format_fixed(a.degrees(), 6); }

inline void cmd_encode(const Globals& g, const std::string& input, const std::string& output, Streams io) {
  const ConversionConfig cfg = g.conversion();
  Input in(input, io.in);
  std::vector<DiscreteDensity> out;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in.get(), raw)) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    double deg = 0.0;
    if (!text::parse_real(line, deg))
      throw DataError("line " + std::to_string(lineno) + ": not an angle in degrees: '" + std::string(line) + "'");
    out.push_back(encode(OrientationAngle::from_degrees(deg), cfg));
  }
  Output o(output, io.out);
  write_densities(o.get(), out, static_cast<std::size_t>(cfg.n_bins));
}

inline void cmd_decode(const Globals& g, const std::string& input, const std::string& output, Streams io) {
  g.conversion();
  Input in(input, io.in);
  const DensityFile file = read_densities(in.get());
  const Decoder decoder(g.conversion(g.bins_for_file(file.n_bins)));
  Output o(output, io.out);
  for (const auto& p : file.densities) o.get() << format_angle_deg(decoder.decode(p)) << '\n';
}

inline void cmd_region_prior(const Globals& g, const std::string& mask_path, const HandBox& box,
                             const std::string& output, Streams io) {
  const RegionPriorConfig rcfg = g.region();
  const ConversionConfig cfg = g.conversion();
  try {
    box.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const RegionMask mask = read_pgm_mask(mask_path);
  const auto result = region_prior(mask, box, rcfg, cfg.n_bins);
  Output o(output, io.out);
  o.get() << density_header(result.density.size()) << '\n' << format_density(result.density) << '\n';
  if (result.fallback) o.get() << "# fallback=uniform\n";
}

inline void cmd_grid_train(const Globals& g, const std::string& annotations, int grid_w, int grid_h,
                           const std::string& output, Streams io) {
  const ConversionConfig cfg = g.conversion();
  if (grid_w < 2 || grid_h < 2) throw UsageError("--grid-w and --grid-h must be >= 2");
  const auto anns = load_annotations(annotations);
  const auto [iw, ih] = common_image_size(anns);
  std::vector<const HandAnnotation*> ptrs;
  for (const auto& a : anns) ptrs.push_back(&a);
  const auto samples = grid_samples(ptrs, iw, ih);
  const DensityGrid grid = grid_train(samples, grid_w, grid_h, iw, ih, cfg);
  Output o(output, io.out);
  write_grid(o.get(), grid);
}

inline void cmd_grid_query(const Globals& g, const std::string& grid_path, double x, double y,
                           const std::string& output, Streams io) {
  g.conversion();
  Input in(grid_path, io.in);
  const DensityGrid grid = read_grid(in.get());
  g.bins_for_file(grid.n_bins());
  const DiscreteDensity p = grid_query(grid, x, y);
  Output o(output, io.out);
  o.get() << density_header(p.size()) << '\n' << format_density(p) << '\n';
}

inline void cmd_fuse(const Globals& g, const std::vector<std::string>& inputs, const std::string& output,
                     Streams io) {
  g.conversion();
  std::vector<DensityFile> files;
  for (const auto& path : inputs) {
    Input in(path, io.in);
    try {
      files.push_back(read_densities(in.get()));
    } catch (const DataError& e) {
      throw DataError(path + ": " + e.what());
    }
  }
  const std::size_t n = files.front().n_bins;
  g.bins_for_file(n);
  for (std::size_t f = 0; f < files.size(); ++f) {
    if (files[f].n_bins != n) throw DataError(inputs[f] + ": n_bins differs from " + inputs.front());
    if (files[f].densities.size() != files.front().densities.size())
      throw DataError(inputs[f] + ": line count differs from " + inputs.front());
  }
  std::vector<DiscreteDensity> out;
  for (std::size_t k = 0; k < files.front().densities.size(); ++k) {
    std::vector<DiscreteDensity> factors;
    for (const auto& f : files) factors.push_back(f.densities[k]);
    try {
      out.push_back(fuse(factors));
    } catch (const ZeroProductError& e) {
      throw DataError("density " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  Output o(output, io.out);
  write_densities(o.get(), out, n);
}

struct EvalArgs {
  std::string annotations;
  std::string predictions;
  bool region_prior = false;
  bool position_prior = false;
  int folds = 10;
  std::string group_delim;
  int grid_w = 5;
  int grid_h = 4;
  unsigned threads = 1;
  std::string json_path;
  std::string method_name = "density representation";
  std::string output;
};

inline void cmd_eval(const Globals& g, const EvalArgs& a, Streams io) {
  g.conversion();
  const RegionPriorConfig rcfg = g.region();
  if (a.folds == 1 || a.folds < 0) throw UsageError("--folds must be 0 (no split) or >= 2");
  if (a.position_prior && a.folds < 2) throw UsageError("--position-prior needs --folds >= 2");
  if (a.grid_w < 2 || a.grid_h < 2) throw UsageError("--grid-w and --grid-h must be >= 2");
  if (a.group_delim.size() > 1) throw UsageError("--group-delim must be a single character");

  const auto anns = load_annotations(a.annotations);
  const auto preds = read_predictions(a.predictions);
  if (preds.empty()) throw DataError(a.predictions + ": no predictions");

  PipelineOptions opt;
  opt.cfg = g.conversion(g.bins_for_file(preds.front().density.size()));
  opt.region_cfg = rcfg;
  opt.use_region_prior = a.region_prior;
  opt.use_position_prior = a.position_prior;
  opt.method_name = a.method_name;
  opt.threads = a.threads;
  if (a.region_prior) opt.masks = pgm_mask_provider(std::filesystem::path(a.annotations).parent_path());

  std::vector<ErrorPopulationReport> rows;
  nlohmann::ordered_json json;
  json["config"] = {{"n_bins", opt.cfg.n_bins},
                    {"sigma_deg", g.sigma_deg},
                    {"decode_step_deg", g.decode_step_deg},
                    {"decode_kernel", g.kernel},
                    {"refine", g.refine},
                    {"kr", g.kr},
                    {"radial_step", g.radial_step},
                    {"seed", g.seed},
                    {"folds", a.folds},
                    {"region_prior", a.region_prior},
                    {"position_prior", a.position_prior}};

  if (a.folds >= 2) {
    std::vector<std::string> ids;
    for (const auto& p : preds) ids.push_back(p.sample_id);
    if (static_cast<std::size_t>(a.folds) > ids.size())
      throw DataError(std::to_string(a.folds) + " folds requested for " + std::to_string(ids.size()) + " predictions");
    const FoldSplit split =
        a.group_delim.empty()
            ? split_folds(ids, a.folds, g.seed)
            : split_folds_grouped(ids, a.folds, g.seed, [d = a.group_delim.front()](const std::string& id) {
                return id.substr(0, id.find(d));
              });
    const auto cv = cross_validate(anns, preds, split, opt, a.grid_w, a.grid_h);
    rows = cv.folds;
    rows.push_back(cv.overall);
    json["overall"] = report_to_json(cv.overall);
    json["folds"] = nlohmann::ordered_json::array();
    for (const auto& f : cv.folds) json["folds"].push_back(report_to_json(f));
  } else {
    const auto result = evaluate_pipeline(anns, preds, opt);
    rows.push_back(result.report);
    json["overall"] = report_to_json(result.report);
  }

  Output o(a.output, io.out);
  o.get() << render_report_table(rows);
  if (!a.json_path.empty()) {
    Output j(a.json_path, io.out);
    j.get() << json.dump(2) << '\n';
  }
}

inline void cmd_radar(const Globals& g, const std::string& input, std::size_t line, const RadarOptions& ropt,
                      const std::string& output, Streams io) {
  g.conversion();
  if (!(ropt.size > 0.0)) throw UsageError("--size must be > 0");
  if (!(ropt.min_radius_frac >= 0.0 && ropt.min_radius_frac < 1.0))
    throw UsageError("--min-radius must be in [0, 1)");
  Input in(input, io.in);
  const DensityFile file = read_densities(in.get());
  g.bins_for_file(file.n_bins);
  if (line >= file.densities.size())
    throw DataError("density index " + std::to_string(line) + " out of range (" +
                    std::to_string(file.densities.size()) + " densities)");
  Output o(output, io.out);
  o.get() << render_radar_svg(file.densities[line], ropt);
}

struct SynthArgs {
  std::string out_dir;
  SyntheticDatasetOptions data;
  double noise_deg = 10.0;
  double bimodal_rate = 0.3;
  bool masks = true;
};

inline void cmd_synth(const Globals& g, SynthArgs a, Streams io) {
  const ConversionConfig cfg = g.conversion();
  if (a.bimodal_rate < 0.0 || a.bimodal_rate > 1.0) throw UsageError("--bimodal-rate must be in [0, 1]");
  if (a.noise_deg < 0.0) throw UsageError("--noise-deg must be >= 0");
  namespace fs = std::filesystem;
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  if (a.masks) {
    a.data.mask_dir = "masks";
    fs::create_directories(dir / "masks");
  }
  std::vector<HandAnnotation> anns;
  try {
    anns = synthetic_annotations(a.data, g.seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::vector<PredictionRecord> preds;
  for (const auto& ann : anns) {
    preds.push_back(synthetic_predict(ann, deg_to_rad(a.noise_deg), a.bimodal_rate, g.seed, cfg));
    if (a.masks) write_pgm_mask((dir / ann.mask_path).string(), aligned_mask(ann));
  }
  {
    Output o((dir / "annotations.csv").string(), io.out);
    save_annotations(o.get(), anns);
  }
  {
    Output o((dir / "predictions.txt").string(), io.out);
    write_predictions(o.get(), preds);
  }
  io.out << "wrote " << anns.size() << " samples to " << dir.string() << '\n';
}

}  // namespace detail

/// Runs the tool with argv-style arguments (args[0] is the program name).
inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"Orientation as a discrete circular density: conversion, priors, fusion and evaluation", "orient"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  auto* nb = app.add_option("--n-bins", g.n_bins, "Number of orientation bins N")->capture_default_str();
  app.add_option("--sigma-deg", g.sigma_deg, "Encoding Gaussian width in degrees")->capture_default_str();
  app.add_option("--decode-step-deg", g.decode_step_deg, "Decode candidate spacing in degrees")->capture_default_str();
  app.add_option("--decode-kernel", g.kernel, "Decode objective: cosine | printed | printed-squared")
      ->capture_default_str();
  app.add_flag("--refine", g.refine, "Refine the decoded angle at a tenth of the step");
  app.add_option("--kr", g.kr, "Human-region ray length as a multiple of R")->capture_default_str();
  app.add_option("--radial-step", g.radial_step, "Ray sampling step in pixels")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();

  std::string input = "-", output = "-";

  auto* enc = app.add_subcommand("encode", "Angles in degrees (one per line) to densities");
  enc->add_option("-i,--input", input, "Input file, - for stdin")->capture_default_str();
  enc->add_option("-o,--output", output, "Output file, - for stdout")->capture_default_str();

  auto* dec = app.add_subcommand("decode", "Densities to angles in degrees");
  dec->add_option("-i,--input", input, "Input file, - for stdin")->capture_default_str();
  dec->add_option("-o,--output", output, "Output file, - for stdout")->capture_default_str();

  std::string mask_path;
  HandBox box;
  auto* rp = app.add_subcommand("region-prior", "Human-region orientation prior from a PGM mask");
  rp->add_option("--mask", mask_path, "Binary PGM (P5) mask, nonzero = human")->required();
  rp->add_option("--cx", box.cx, "Hand centre x in pixels")->required();
  rp->add_option("--cy", box.cy, "Hand centre y in pixels")->required();
  rp->add_option("--half-size", box.half_size, "Half the hand size R in pixels")->required();
  rp->add_option("-o,--output", output, "Output file, - for stdout")->capture_default_str();

  std::string annotations;
  int grid_w = 5, grid_h = 4;
  auto* gt = app.add_subcommand("grid-train", "Train the position-prior grid from annotations");
  gt->add_option("--annotations", annotations, "Annotation CSV")->required();
  gt->add_option("--grid-w", grid_w, "Lattice points along x")->capture_default_str();
  gt->add_option("--grid-h", grid_h, "Lattice points along y")->capture_default_str();
  gt->add_option("-o,--output", output, "Output grid file, - for stdout")->capture_default_str();

  std::string grid_path;
  double qx = 0.0, qy = 0.0;
  auto* gq = app.add_subcommand("grid-query", "Interpolate the position prior at a point");
  gq->add_option("--grid", grid_path, "Grid file")->required();
  gq->add_option("--x", qx, "Query x in pixels")->required();
  gq->add_option("--y", qy, "Query y in pixels")->required();
  gq->add_option("-o,--output", output, "Output file, - for stdout")->capture_default_str();

  std::vector<std::string> fuse_inputs;
  auto* fu = app.add_subcommand("fuse", "Line-wise product of density files");
  fu->add_option("inputs", fuse_inputs, "Density files (line k of each is fused)")->required();
  fu->add_option("-o,--output", output, "Output file, - for stdout")->capture_default_str();

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Error-population report for predictions, optionally fused with priors");
  ev->add_option("--annotations", ea.annotations, "Annotation CSV")->required();
  ev->add_option("--predictions", ea.predictions, "Prediction file")->required();
  ev->add_flag("--region-prior", ea.region_prior, "Fuse the human-region prior (needs mask_path)");
  ev->add_flag("--position-prior", ea.position_prior, "Fuse the position prior trained on the other folds");
  ev->add_option("--folds", ea.folds, "Cross-validation folds (0 disables splitting)")->capture_default_str();
  ev->add_option("--group-delim", ea.group_delim,
                 "Keep ids sharing the prefix before this character in one fold (default: split per sample)");
  ev->add_option("--grid-w", ea.grid_w, "Position grid points along x")->capture_default_str();
  ev->add_option("--grid-h", ea.grid_h, "Position grid points along y")->capture_default_str();
  ev->add_option("--threads", ea.threads, "Worker threads (0 = all cores)")->capture_default_str();
  ev->add_option("--json", ea.json_path, "Also write the report as JSON");
  ev->add_option("--method-name", ea.method_name, "Row label")->capture_default_str();
  ev->add_option("-o,--output", ea.output, "Text report file, - for stdout");

  std::size_t radar_line = 0;
  RadarOptions ropt;
  auto* ra = app.add_subcommand("radar", "Radar-chart SVG of a density");
  ra->add_option("-i,--input", input, "Density file, - for stdin")->capture_default_str();
  ra->add_option("--index", radar_line, "Which density of the file (0-based)")->capture_default_str();
  ra->add_option("--size", ropt.size, "Canvas size in pixels")->capture_default_str();
  ra->add_option("--min-radius", ropt.min_radius_frac, "Minimum vertex radius as a fraction of the outer radius")
      ->capture_default_str();
  ra->add_option("-o,--output", output, "Output SVG, - for stdout")->capture_default_str();

  SynthArgs sa;
  auto* sy = app.add_subcommand("synth", "Write a synthetic dataset (annotations, predictions, masks)");
  sy->add_option("--out-dir", sa.out_dir, "Output directory")->required();
  sy->add_option("--count", sa.data.count, "Number of samples")->capture_default_str();
  sy->add_option("--image-w", sa.data.image_w, "Image width")->capture_default_str();
  sy->add_option("--image-h", sa.data.image_h, "Image height")->capture_default_str();
  sy->add_option("--half-size", sa.data.half_size, "Hand half size R")->capture_default_str();
  sy->add_option("--margin", sa.data.margin, "Minimum hand-centre distance from the frame edge")
      ->capture_default_str();
  sy->add_option("--noise-deg", sa.noise_deg, "Prediction noise in degrees")->capture_default_str();
  sy->add_option("--bimodal-rate", sa.bimodal_rate, "Share of two-peak predictions")->capture_default_str();
  sy->add_flag("!--no-masks", sa.masks, "Skip writing half-plane masks");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kUsage;
  }
  g.n_bins_given = nb->count() > 0;

  const Streams io{in, out, err};
  try {
    if (*enc) cmd_encode(g, input, output, io);
    else if (*dec) cmd_decode(g, input, output, io);
    else if (*rp) cmd_region_prior(g, mask_path, box, output, io);
    else if (*gt) cmd_grid_train(g, annotations, grid_w, grid_h, output, io);
    else if (*gq) cmd_grid_query(g, grid_path, qx, qy, output, io);
    else if (*fu) cmd_fuse(g, fuse_inputs, output, io);
    else if (*ev) cmd_eval(g, ea, io);
    else if (*ra) cmd_radar(g, input, radar_line, ropt, output, io);
    else if (*sy) cmd_synth(g, sa, io);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}

}  // namespace orient::cli
