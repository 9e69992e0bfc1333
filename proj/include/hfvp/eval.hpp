#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hfvp/geom.hpp"
#include "hfvp/hvp.hpp"
#include "hfvp/params.hpp"
#include "hfvp/prior.hpp"

namespace hfvp {

inline constexpr double kDefaultAucThreshold = 0.25;
inline constexpr std::size_t kHistogramThresholds = 512;

/// Maximum vertical gap between the lines at u = 0 and u = width, divided by
/// the image height. +inf when either line is vertical.
double horizon_error(const ImageLined& detected, const ImageLined& truth, const CameraFramed& frame);

/// Area under the cumulative error curve on [0, max_threshold], normalized
/// to [0, 1]: mean over errors of max(0, 1 - e / max_threshold).
double auc(const std::vector<double>& errors, double max_threshold = kDefaultAucThreshold);

/// (threshold, fraction of errors <= threshold) at `count` uniform
/// thresholds spanning [0, max_threshold].
std::vector<std::pair<double, double>> cumulative_histogram(const std::vector<double>& errors,
                                                            double max_threshold = kDefaultAucThreshold,
                                                            std::size_t count = kHistogramThresholds);

enum class Ablation { NoneFull, CnnEmpty, CnnFull };

/// "none-full" / "cnn-empty" / "cnn-full".
std::string to_string(Ablation mode);
/// Accepts the CLI spellings and the table tags ("NONE+FULL", ...).
Ablation parse_ablation(const std::string& text);
bool needs_prior(Ablation mode);

/// Runs one image under an ablation mode. `prior` must be file-backed for
/// the CNN modes and is ignored for none-full.
DetectionResult run_mode(Ablation mode, const SegmentSet& set, const std::optional<HorizonPrior>& prior,
                         const AlgorithmParams& params, std::uint64_t seed);

struct GroundTruth {
  double width = 0.0;
  double height = 0.0;
  ImageLined horizon;
};

GroundTruth parse_truth_json(const std::string& text);
GroundTruth load_truth_json(const std::filesystem::path& path);

struct ErrorRecord {
  std::string image_id;
  double horizon_error = 0.0;
  double runtime_s = 0.0;
  Ablation mode = Ablation::CnnFull;
};

struct BenchmarkReport {
  Ablation mode = Ablation::CnnFull;
  /// Sorted by image_id.
  std::vector<ErrorRecord> records;
  /// (image_id, message) for images that could not be evaluated.
  std::vector<std::pair<std::string, std::string>> failures;
  double auc = 0.0;
  double mean_runtime_s = 0.0;
  double auc_threshold = kDefaultAucThreshold;
};

/// Image ids of a dataset directory: every "<id>.segments.txt" with a
/// matching "<id>.gt.json". Sorted.
std::vector<std::string> dataset_ids(const std::filesystem::path& dir);

/// Per-image seed derived from the run seed and the image id.
std::uint64_t image_seed(std::uint64_t seed, const std::string& image_id);

/// Evaluates every image of `dir` under `mode`. Images are independent and
/// may run on up to `jobs` threads; the report is order-stable. Throws
/// InvalidArgument for an empty dataset.
BenchmarkReport run_benchmark(const std::filesystem::path& dir, Ablation mode, const AlgorithmParams& params,
                              std::uint64_t seed, double auc_threshold = kDefaultAucThreshold,
                              std::size_t jobs = 1);

/// records.csv, summary.json and histogram.csv under out_dir. Runtimes are
/// only written when asked for, so seeded reports are byte-identical.
void write_report(const BenchmarkReport& report, const std::filesystem::path& out_dir,
                  bool include_timings = false);

}  // namespace hfvp
