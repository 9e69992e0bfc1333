#include "hfvp/eval.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "hfvp/random.hpp"

namespace hfvp {

namespace fs = std::filesystem;

double horizon_error(const ImageLined& detected, const ImageLined& truth, const CameraFramed& frame) {
  if (detected.is_vertical() || truth.is_vertical()) {
    return std::numeric_limits<double>::infinity();
  }
  const double left = std::abs(detected.v_at(0.0) - truth.v_at(0.0));
  const double right = std::abs(detected.v_at(frame.width) - truth.v_at(frame.width));
  return std::max(left, right) / frame.height;
}

double auc(const std::vector<double>& errors, double max_threshold) {
  if (errors.empty()) throw InvalidArgument("auc: no errors");
  if (!(max_threshold > 0.0)) throw InvalidArgument("auc: threshold must be positive");
  double area = 0.0;
  for (double e : errors) {
    if (std::isnan(e) || e < 0.0) throw InvalidArgument("auc: errors must be >= 0");
    if (e < max_threshold) area += 1.0 - e / max_threshold;
  }
  return area / static_cast<double>(errors.size());
}

std::vector<std::pair<double, double>> cumulative_histogram(const std::vector<double>& errors,
                                                            double max_threshold, std::size_t count) {
  if (errors.empty()) throw InvalidArgument("cumulative_histogram: no errors");
  if (count < 2) throw InvalidArgument("cumulative_histogram: need at least two thresholds");
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = max_threshold * static_cast<double>(k) / static_cast<double>(count - 1);
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    out.emplace_back(t, static_cast<double>(below) / static_cast<double>(sorted.size()));
  }
  return out;
}

std::string to_string(Ablation mode) {
  switch (mode) {
    case Ablation::NoneFull: return "none-full";
    case Ablation::CnnEmpty: return "cnn-empty";
    case Ablation::CnnFull: return "cnn-full";
  }
  return "unknown";
}

Ablation parse_ablation(const std::string& text) {
  std::string t;
  for (char c : text) t.push_back(c == '+' || c == '_' ? '-' : static_cast<char>(std::tolower(c)));
  if (t == "none-full") return Ablation::NoneFull;
  if (t == "cnn-empty") return Ablation::CnnEmpty;
  if (t == "cnn-full") return Ablation::CnnFull;
  throw InvalidArgument("unknown ablation mode '" + text + "'");
}

bool needs_prior(Ablation mode) { return mode != Ablation::NoneFull; }

DetectionResult run_mode(Ablation mode, const SegmentSet& set, const std::optional<HorizonPrior>& prior,
                         const AlgorithmParams& params, std::uint64_t seed) {
  if (mode == Ablation::NoneFull) {
    return detect(set, no_context_prior(set.frame), params, seed);
  }
  if (!prior || prior->source != PriorSource::FileBacked) {
    throw UnsupportedMode(to_string(mode) + " needs a global-context prior");
  }
  if (mode == Ablation::CnnEmpty) return detect_prior_only(set, *prior);
  return detect(set, *prior, params, seed);
}

GroundTruth parse_truth_json(const std::string& text) {
  GroundTruth gt;
  try {
    const auto j = nlohmann::json::parse(text);
    gt.width = j.at("width").get<double>();
    gt.height = j.at("height").get<double>();
    const auto h = j.at("horizon").get<std::array<double, 3>>();
    gt.horizon = ImageLined::from_coefficients(Vec3<double>(h[0], h[1], h[2]));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("ground-truth JSON: ") + e.what());
  } catch (const DegenerateGeometry& e) {
    throw ParseError(std::string("ground-truth JSON: ") + e.what());
  }
  if (!(gt.width > 0.0) || !(gt.height > 0.0)) {
    throw ParseError("ground-truth JSON: width and height must be positive");
  }
  return gt;
}

GroundTruth load_truth_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ground truth " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_truth_json(ss.str());
}

std::vector<std::string> dataset_ids(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidArgument("dataset directory not found: " + dir.string());
  static const std::string suffix = ".segments.txt";
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    const std::string id = name.substr(0, name.size() - suffix.size());
    if (fs::exists(dir / (id + ".gt.json"))) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::uint64_t image_seed(std::uint64_t seed, const std::string& image_id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : image_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return derive_seed(seed, h);
}

namespace {

ErrorRecord evaluate_image(const fs::path& dir, const std::string& id, Ablation mode,
                           const AlgorithmParams& params, std::uint64_t seed) {
  const GroundTruth gt = load_truth_json(dir / (id + ".gt.json"));
  const CameraFramed frame = CameraFramed::with_defaults(gt.width, gt.height);
  const SegmentSet set = load_segments(dir / (id + ".segments.txt"), frame, {.skip_degenerate = true}).set;
  std::optional<CategoricalPrior> cat;
  if (needs_prior(mode)) {
    const fs::path prior_path = dir / (id + ".prior.json");
    if (!fs::exists(prior_path)) throw ParseError("missing prior file " + prior_path.string());
    cat = load_prior_json(prior_path);
  }

  const std::uint64_t s = image_seed(seed, id);
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<HorizonPrior> prior;
  if (cat) prior = fit_gaussian(*cat, frame.height, 5000, s);
  const DetectionResult result = run_mode(mode, set, prior, params, s);
  const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ErrorRecord rec;
  rec.image_id = id;
  rec.mode = mode;
  rec.runtime_s = runtime;
  rec.horizon_error = horizon_error(to_image_line(frame, result.horizon_line), gt.horizon, frame);
  return rec;
}

void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string format_double(double x) {
  if (std::isinf(x)) return "inf";
  std::ostringstream ss;
  ss << std::setprecision(10) << x;
  return ss.str();
}

}  // namespace

BenchmarkReport run_benchmark(const fs::path& dir, Ablation mode, const AlgorithmParams& params,
                              std::uint64_t seed, double auc_threshold, std::size_t jobs) {
  params.validate();
  const auto ids = dataset_ids(dir);
  if (ids.empty()) throw InvalidArgument("dataset is empty: " + dir.string());

  std::vector<std::optional<ErrorRecord>> slots(ids.size());
  std::vector<std::string> errors(ids.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < ids.size(); i = next++) {
      try {
        slots[i] = evaluate_image(dir, ids[i], mode, params, seed);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, ids.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  BenchmarkReport report;
  report.mode = mode;
  report.auc_threshold = auc_threshold;
  std::vector<double> errs;
  double runtime = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (slots[i]) {
      report.records.push_back(*slots[i]);
      errs.push_back(slots[i]->horizon_error);
      runtime += slots[i]->runtime_s;
    } else {
      report.failures.emplace_back(ids[i], errors[i]);
    }
  }
  if (!errs.empty()) {
    report.auc = auc(errs, auc_threshold);
    report.mean_runtime_s = runtime / static_cast<double>(errs.size());
  }
  return report;
}

void write_report(const BenchmarkReport& report, const fs::path& out_dir, bool include_timings) {
  fs::create_directories(out_dir);

  std::ostringstream csv;
  csv << "image_id,mode,horizon_error" << (include_timings ? ",runtime_s" : "") << '\n';
  std::vector<double> errs;
  for (const auto& r : report.records) {
    csv << r.image_id << ',' << to_string(r.mode) << ',' << format_double(r.horizon_error);
    if (include_timings) csv << ',' << format_double(r.runtime_s);
    csv << '\n';
    errs.push_back(r.horizon_error);
  }
  write_atomically(out_dir / "records.csv", csv.str());

  nlohmann::json summary;
  summary["mode"] = to_string(report.mode);
  summary["auc"] = report.auc;
  summary["auc_threshold"] = report.auc_threshold;
  if (include_timings) summary["mean_runtime_s"] = report.mean_runtime_s;
  summary["n"] = report.records.size();
  nlohmann::json failed = nlohmann::json::array();
  for (const auto& [id, msg] : report.failures) failed.push_back({{"image_id", id}, {"error", msg}});
  summary["failed"] = failed;
  write_atomically(out_dir / "summary.json", summary.dump(2) + "\n");

  std::ostringstream hist;
  hist << "threshold,fraction\n";
  if (!errs.empty()) {
    for (const auto& [t, frac] : cumulative_histogram(errs, report.auc_threshold)) {
      hist << format_double(t) << ',' << format_double(frac) << '\n';
    }
  }
  write_atomically(out_dir / "histogram.csv", hist.str());
}

}  // namespace hfvp
