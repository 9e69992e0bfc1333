// hfvp: horizon and vanishing point detection from line segments.
//
//   hfvp detect --segments img.segments.txt --width 640 --height 480 [--prior p.json]
//   hfvp bench  --dataset DIR --ablation cnn-full --out results/
//   hfvp synth  --out DIR --n 100 --seed 1 --priors

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "hfvp/eval.hpp"
#include "hfvp/io.hpp"
#include "hfvp/random.hpp"
#include "hfvp/raster.hpp"
#include "hfvp/synth.hpp"

namespace fs = std::filesystem;
using namespace hfvp;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("hfvp");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("HFVP_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

struct ParamFlags {
  double theta_con = 2.0, theta_ver = 10.0, theta_hor = 1.5, theta_dist = 33.0;
  std::size_t samples = 300, subset = 20, em_iters = 3, ransac_budget = 500;
  double kappa = 0.2;

  void add(CLI::App* app) {
    app->add_option("--theta-con", theta_con, "consistency threshold, degrees")->capture_default_str();
    app->add_option("--theta-ver", theta_ver, "vertical candidate threshold, degrees")->capture_default_str();
    app->add_option("--theta-hor", theta_hor, "horizon filter threshold, degrees")->capture_default_str();
    app->add_option("--theta-dist", theta_dist, "VP separation, degrees")->capture_default_str();
    app->add_option("--samples", samples, "horizon candidates")->capture_default_str();
    app->add_option("--subset", subset, "segments intersected per candidate")->capture_default_str();
    app->add_option("--em-iters", em_iters, "refinement iterations")->capture_default_str();
    app->add_option("--ransac-budget", ransac_budget, "zenith RANSAC iterations")->capture_default_str();
    app->add_option("--kappa", kappa, "squash scale as a fraction of image height")->capture_default_str();
  }

  AlgorithmParams params() const {
    AlgorithmParams p;
    p.theta_con = deg2rad(theta_con);
    p.theta_ver = deg2rad(theta_ver);
    p.theta_hor = deg2rad(theta_hor);
    p.theta_dist = deg2rad(theta_dist);
    p.samples = samples;
    p.subset = subset;
    p.em_iters = em_iters;
    p.ransac_budget = ransac_budget;
    p.kappa_over_height = kappa;
    try {
      p.validate();
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    return p;
  }
};

Ablation ablation_or_usage(const std::string& text) {
  try {
    return parse_ablation(text);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct DetectArgs {
  std::string segments, image, prior, gt, out, ablation;
  double width = 0.0, height = 0.0;
  std::uint64_t seed = 0;
  bool svg = false, timings = false, candidates = false;
  ParamFlags flags;
};

int run_detect(const DetectArgs& a) {
  const Ablation mode = a.ablation.empty() ? (a.prior.empty() ? Ablation::NoneFull : Ablation::CnnFull)
                                           : ablation_or_usage(a.ablation);
  const AlgorithmParams params = a.flags.params();
  if (a.svg && a.out.empty()) throw UsageError("--svg needs --out");
  if (a.segments.empty() == a.image.empty()) throw UsageError("give exactly one of --segments or --image");
  if (needs_prior(mode) && a.prior.empty()) {
    throw UsageError(to_string(mode) + " needs --prior (or use --ablation none-full)");
  }

  std::optional<GroundTruth> gt;
  if (!a.gt.empty()) gt = load_truth_json(a.gt);

  SegmentSet set;
  if (!a.image.empty()) {
    const GrayImage img = read_pgm(fs::path(a.image));
    const CameraFramed frame = CameraFramed::with_defaults(img.width, img.height);
    set = detect_segments(img, frame);
    spdlog::info("detected {} segments in {}", set.size(), a.image);
  } else {
    double w = a.width, h = a.height;
    if (gt && w == 0.0 && h == 0.0) {
      w = gt->width;
      h = gt->height;
    }
    if (!(w > 0.0 && h > 0.0)) throw UsageError("--segments needs --width and --height (or --gt)");
    const CameraFramed frame = CameraFramed::with_defaults(w, h);
    const LoadResult loaded = load_segments(a.segments, frame);
    set = loaded.set;
    spdlog::info("loaded {} segments from {}", set.size(), a.segments);
  }

  std::optional<HorizonPrior> prior;
  if (needs_prior(mode)) {
    const CategoricalPrior cat = load_prior_json(a.prior);
    prior = fit_gaussian(cat, set.frame.height, 5000, a.seed);
    if (prior->std_floored) spdlog::warn("prior standard deviation hit the one-bin floor");
  }
  const DetectionResult result = run_mode(mode, set, prior, params, a.seed);
  if (result.degraded) spdlog::warn("no segments; horizon taken from the prior alone");
  if (result.zenith.zenith_vp == std::nullopt && mode != Ablation::CnnEmpty) {
    spdlog::info("zenith fell back to the initial direction");
  }

  const std::string json = detection_to_json(result, set, mode, a.timings);
  if (a.out.empty()) {
    std::cout << json;
  } else {
    write_text(fs::path(a.out) / "result.json", json);
  }
  if (a.svg) {
    OverlayOptions opt;
    if (gt) opt.truth = gt->horizon;
    opt.draw_candidates = a.candidates;
    write_text(fs::path(a.out) / "overlay.svg", overlay_svg(result, set, opt));
  }
  if (gt) {
    const double err = horizon_error(to_image_line(set.frame, result.horizon_line), gt->horizon, set.frame);
    spdlog::info("horizon error {:.6f}", err);
  }
  return 0;
}

struct BenchArgs {
  std::string dataset, out, ablation = "none-full";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  double auc_threshold = kDefaultAucThreshold;
  bool timings = false;
  ParamFlags flags;
};

int run_bench(const BenchArgs& a) {
  const Ablation mode = ablation_or_usage(a.ablation);
  const AlgorithmParams params = a.flags.params();
  if (!(a.auc_threshold > 0.0)) throw UsageError("--auc-threshold must be positive");
  if (a.jobs == 0) throw UsageError("--jobs must be at least 1");
  if (dataset_ids(a.dataset).empty()) throw UsageError("no <id>.segments.txt with <id>.gt.json in " + a.dataset);
  if (needs_prior(mode)) {
    for (const auto& id : dataset_ids(a.dataset)) {
      const fs::path p = fs::path(a.dataset) / (id + ".prior.json");
      if (!fs::exists(p)) throw UsageError(to_string(mode) + " needs prior file " + p.string());
    }
  }

  const BenchmarkReport report = run_benchmark(a.dataset, mode, params, a.seed, a.auc_threshold, a.jobs);
  for (const auto& [id, msg] : report.failures) spdlog::error("{}: {}", id, msg);
  write_report(report, a.out, a.timings);
  std::cout << to_string(mode) << " AUC(" << a.auc_threshold << ") = " << report.auc << " over "
            << report.records.size() << " images";
  if (!report.failures.empty()) std::cout << ", " << report.failures.size() << " failed";
  std::cout << '\n';
  return report.records.empty() ? kExitRuntime : 0;
}

struct SynthArgs {
  std::string out;
  std::size_t n = 100;
  std::uint64_t seed = 0;
  double width = 640.0, height = 480.0;
  int families = 2, per_family = 32, vertical = -1;
  double outliers = 0.2, noise = 0.5;
  std::vector<double> ladder;
  bool priors = false, adversarial = false, centred = false;
  double prior_sigma_offset = 5.0, prior_sigma_alpha = 2.0;
  std::optional<double> fov, pitch, roll;
};

void write_suite(const fs::path& dir, const SynthArgs& a, double noise) {
  for (std::size_t i = 0; i < a.n; ++i) {
    SceneSpec spec;
    spec.width = a.width;
    spec.height = a.height;
    spec.n_families = a.families;
    spec.segments_per_family = a.per_family;
    spec.vertical_segments = a.vertical;
    spec.outlier_fraction = a.outliers;
    spec.endpoint_noise_px = noise;
    spec.fov_deg = a.fov;
    spec.pitch_deg = a.pitch;
    spec.roll_deg = a.roll;
    spec.outlier_mode = a.adversarial ? OutlierMode::Adversarial : OutlierMode::RandomChords;
    spec.seed = derive_seed(a.seed, i);
    const SyntheticScene scene = make_scene(spec);
    std::ostringstream id;
    id << "scene_" << std::setw(4) << std::setfill('0') << i;
    if (a.priors) {
      const CategoricalPrior prior = synthetic_prior(scene, deg2rad(a.prior_sigma_alpha), a.prior_sigma_offset,
                                                     spec.seed, !a.centred);
      save_scene(dir, id.str(), scene, &prior);
    } else {
      save_scene(dir, id.str(), scene);
    }
  }
}

int run_synth(const SynthArgs& a) {
  if (a.n == 0) throw UsageError("--n must be at least 1");
  if (!(a.outliers >= 0.0 && a.outliers < 1.0)) throw UsageError("--outlier-fraction must be in [0, 1)");
  if (a.families < 1) throw UsageError("--families must be at least 1");
  if (a.ladder.empty()) {
    if (!(a.noise >= 0.0)) throw UsageError("--noise must be >= 0");
    write_suite(a.out, a, a.noise);
    std::cout << "wrote " << a.n << " scenes to " << a.out << '\n';
    return 0;
  }
  for (double noise : a.ladder) {
    if (!(noise >= 0.0)) throw UsageError("noise levels must be >= 0");
    std::ostringstream sub;
    sub << "noise_" << noise;
    write_suite(fs::path(a.out) / sub.str(), a, noise);
  }
  std::cout << "wrote " << a.ladder.size() << " suites of " << a.n << " scenes to " << a.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Horizon-first vanishing point detection"};
  app.require_subcommand(1);

  DetectArgs det;
  auto* detect_cmd = app.add_subcommand("detect", "detect the horizon and VPs in one image");
  auto* seg_opt = detect_cmd->add_option("--segments", det.segments, "segment file: x1 y1 x2 y2 per line")
                      ->check(CLI::ExistingFile);
  auto* img_opt = detect_cmd->add_option("--image", det.image, "8-bit binary PGM; segments are detected")
                      ->check(CLI::ExistingFile);
  seg_opt->excludes(img_opt);
  detect_cmd->add_option("--width", det.width, "image width in pixels");
  detect_cmd->add_option("--height", det.height, "image height in pixels");
  detect_cmd->add_option("--prior", det.prior, "categorical prior JSON")->check(CLI::ExistingFile);
  detect_cmd->add_option("--gt", det.gt, "ground-truth JSON, for the overlay and the logged error")
      ->check(CLI::ExistingFile);
  detect_cmd->add_option("--ablation", det.ablation,
                         "none-full, cnn-empty or cnn-full (default: cnn-full with --prior, else none-full)");
  detect_cmd->add_option("--seed", det.seed)->capture_default_str();
  detect_cmd->add_option("--out", det.out, "output directory for result.json (default: JSON to stdout)");
  detect_cmd->add_flag("--svg", det.svg, "also write overlay.svg to --out");
  detect_cmd->add_flag("--timings", det.timings, "include stage timings in the JSON");
  detect_cmd->add_flag("--candidates", det.candidates, "draw all horizon candidates in the overlay");
  det.flags.add(detect_cmd);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "evaluate a dataset directory");
  bench_cmd->add_option("--dataset", bench.dataset, "directory of <id>.segments.txt, <id>.gt.json, <id>.prior.json")
      ->required()
      ->check(CLI::ExistingDirectory);
  bench_cmd->add_option("--out", bench.out, "output directory")->required();
  bench_cmd->add_option("--ablation", bench.ablation)->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
  bench_cmd->add_option("--jobs", bench.jobs)->capture_default_str();
  bench_cmd->add_option("--auc-threshold", bench.auc_threshold)->capture_default_str();
  bench_cmd->add_flag("--timings", bench.timings, "add per-image runtimes to the report");
  bench.flags.add(bench_cmd);

  SynthArgs syn;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--out", syn.out, "output directory")->required();
  synth_cmd->add_option("--n", syn.n, "scenes")->capture_default_str();
  synth_cmd->add_option("--seed", syn.seed)->capture_default_str();
  synth_cmd->add_option("--width", syn.width)->capture_default_str();
  synth_cmd->add_option("--height", syn.height)->capture_default_str();
  synth_cmd->add_option("--families", syn.families, "horizontal VP families")->capture_default_str();
  synth_cmd->add_option("--per-family", syn.per_family, "segments per horizontal family")->capture_default_str();
  synth_cmd->add_option("--vertical", syn.vertical, "vertical segments (default: --per-family)");
  synth_cmd->add_option("--outlier-fraction", syn.outliers)->capture_default_str();
  synth_cmd->add_option("--noise", syn.noise, "endpoint noise, pixels")->capture_default_str();
  synth_cmd->add_option("--noise-ladder", syn.ladder, "several noise levels, one sub-suite each")->delimiter(',');
  synth_cmd->add_flag("--priors", syn.priors, "also write <id>.prior.json");
  synth_cmd->add_flag("--centred", syn.centred, "centre the priors exactly on the truth");
  synth_cmd->add_option("--prior-sigma-offset", syn.prior_sigma_offset, "pixels")->capture_default_str();
  synth_cmd->add_option("--prior-sigma-alpha", syn.prior_sigma_alpha, "degrees")->capture_default_str();
  synth_cmd->add_option("--fov", syn.fov, "fixed horizontal FOV, degrees (default: drawn per scene)");
  synth_cmd->add_option("--pitch", syn.pitch, "fixed pitch, degrees (default: drawn per scene)");
  synth_cmd->add_option("--roll", syn.roll, "fixed roll, degrees (default: drawn per scene)");
  synth_cmd->add_flag("--adversarial", syn.adversarial, "outliers share one false intersection");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*detect_cmd) return run_detect(det);
    if (*bench_cmd) return run_bench(bench);
    if (*synth_cmd) return run_synth(syn);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const ParseError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
