#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <chrono>

#include "hfvp/eval.hpp"
#include "hfvp/io.hpp"
#include "support.hpp"

using namespace hfvp;
using hfvp::testing::run;
using hfvp::testing::slurp;
using hfvp::testing::tree_bytes;
namespace fs = std::filesystem;

namespace {

const std::string kCli = HFVP_CLI_PATH;

std::string quiet(const std::string& args, const fs::path& log) { return kCli + " " + args + " >" + log.string() + " 2>&1"; }

// stdout only.
std::string capture(const std::string& args, const fs::path& out) {
  return kCli + " " + args + " >" + out.string() + " 2>/dev/null";
}

std::size_t count_files(const fs::path& dir, const std::string& suffix) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    n += name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  }
  return n;
}

}  // namespace

TEST_CASE("synth is reproducible") {
  const auto dir = hfvp::testing::scratch_dir("cli_synth");
  const auto log = dir / "log";
  REQUIRE(run(quiet("synth --out " + (dir / "a").string() + " --n 100 --seed 7", log)) == 0);
  REQUIRE(run(quiet("synth --out " + (dir / "b").string() + " --n 100 --seed 7", log)) == 0);
  CHECK(count_files(dir / "a", ".segments.txt") == 100);
  CHECK(count_files(dir / "a", ".gt.json") == 100);
  CHECK(tree_bytes(dir / "a") == tree_bytes(dir / "b"));
  REQUIRE(run(quiet("synth --out " + (dir / "c").string() + " --n 100 --seed 8", log)) == 0);
  CHECK(tree_bytes(dir / "a") != tree_bytes(dir / "c"));
  fs::remove_all(dir);
}

TEST_CASE("synth outlier fraction and noise ladder") {
  const auto dir = hfvp::testing::scratch_dir("cli_ladder");
  const auto log = dir / "log";
  REQUIRE(run(quiet("synth --out " + (dir / "o").string() +
                        " --n 3 --per-family 20 --vertical 10 --families 2 --outlier-fraction 0.5", log)) == 0);
  for (int i = 0; i < 3; ++i) {
    const auto gt = nlohmann::json::parse(slurp(dir / "o" / ("scene_000" + std::to_string(i) + ".gt.json")));
    CHECK(gt["n_segments"] == 100);
    CHECK(gt["n_outliers"] == 50);
  }

  REQUIRE(run(quiet("synth --out " + (dir / "l").string() + " --n 2 --noise-ladder 0,0.25,0.5,1.0", log)) == 0);
  std::size_t subdirs = 0;
  for (const auto& e : fs::directory_iterator(dir / "l")) {
    if (!e.is_directory()) continue;
    ++subdirs;
    CHECK(count_files(e.path(), ".segments.txt") == 2);
  }
  CHECK(subdirs == 4);
  fs::remove_all(dir);
}

TEST_CASE("detect on a synthetic scene") {
  const auto dir = hfvp::testing::scratch_dir("cli_detect");
  const auto log = dir / "log";
  REQUIRE(run(quiet("synth --out " + dir.string() + " --n 1 --seed 3 --fov 60 --pitch 5 --roll 2 --priors", log)) == 0);
  const std::string scene = (dir / "scene_0000").string();
  const std::string base = "detect --segments " + scene + ".segments.txt --width 640 --height 480 --seed 4 ";

  REQUIRE(run(quiet(base + "--ablation none-full --gt " + scene + ".gt.json --svg --out " + (dir / "a").string(), log)) == 0);
  const auto result = nlohmann::json::parse(slurp(dir / "a" / "result.json"));
  CHECK(result["mode"] == "none-full");
  CHECK(fs::exists(dir / "a" / "overlay.svg"));

  // Same bytes as the library on the same file.
  const auto frame = CameraFramed::with_defaults(640, 480);
  const auto set = load_segments(scene + ".segments.txt", frame, {.skip_degenerate = true}).set;
  const auto lib = detect(set, no_context_prior(frame), AlgorithmParams{}, 4);
  CHECK(slurp(dir / "a" / "result.json") == detection_to_json(lib, set, Ablation::NoneFull));

  // With the default 300 uniform offsets the error floor is the gap to the
  // nearest sampled candidate; denser sampling isolates the search itself.
  REQUIRE(run(capture(base + "--ablation none-full --samples 2000", dir / "dense.json")) == 0);
  const auto dense = nlohmann::json::parse(slurp(dir / "dense.json"));
  const auto& h = dense["horizon"]["homogeneous"];
  const auto detected = ImageLined::from_coefficients({h[0].get<double>(), h[1].get<double>(), h[2].get<double>()});
  CHECK(horizon_error(detected, load_truth_json(scene + ".gt.json").horizon, frame) < 0.01);

  REQUIRE(run(quiet(base + "--ablation none-full --out " + (dir / "b").string(), log)) == 0);
  CHECK(slurp(dir / "a" / "result.json") == slurp(dir / "b" / "result.json"));

  // The prior switches the default mode.
  REQUIRE(run(capture(base + "--prior " + scene + ".prior.json", dir / "stdout.json")) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "stdout.json"))["mode"] == "cnn-full");
  fs::remove_all(dir);
}

TEST_CASE("detect validation errors") {
  const auto dir = hfvp::testing::scratch_dir("cli_errors");
  const auto log = dir / "log";
  REQUIRE(run(quiet("synth --out " + dir.string() + " --n 1", log)) == 0);
  const std::string seg = "--segments " + (dir / "scene_0000.segments.txt").string() + " --width 640 --height 480 ";

  CHECK(run(quiet("detect " + seg + "--ablation cnn-full", log)) == 1);
  CHECK(slurp(log).find("--prior") != std::string::npos);

  const auto missing = (dir / "nope.prior.json").string();
  CHECK(run(quiet("detect " + seg + "--ablation cnn-full --prior " + missing, log)) == 1);
  CHECK(slurp(log).find("nope.prior.json") != std::string::npos);

  CHECK(run(quiet("detect --segments " + (dir / "absent.txt").string() + " --width 640 --height 480", log)) == 1);
  CHECK(run(quiet("detect " + seg + "--ablation sideways", log)) == 1);
  CHECK(run(quiet("frobnicate", log)) == 1);

  // Empty input is not an error: the result is flagged degraded.
  std::ofstream(dir / "empty.txt") << "# nothing\n";
  REQUIRE(run(capture("detect --segments " + (dir / "empty.txt").string() + " --width 640 --height 480", dir / "e.json")) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "e.json"))["degraded"] == true);
  fs::remove_all(dir);
}

TEST_CASE("bench") {
  const auto dir = hfvp::testing::scratch_dir("cli_bench");
  const auto data = dir / "data";
  const auto log = dir / "log";
  REQUIRE(run(quiet("synth --out " + data.string() + " --n 100 --seed 9 --priors", log)) == 0);

  const auto t0 = std::chrono::steady_clock::now();
  REQUIRE(run(quiet("bench --dataset " + data.string() + " --out " + (dir / "a").string() + " --seed 2", log)) == 0);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("100-scene bench: " << seconds << " s");
  CHECK(seconds < 120.0);
  CHECK(slurp(log).find("AUC") != std::string::npos);

  REQUIRE(run(quiet("bench --dataset " + data.string() + " --out " + (dir / "b").string() + " --seed 2 --jobs 3", log)) == 0);
  CHECK(tree_bytes(dir / "a") == tree_bytes(dir / "b"));
  const auto summary = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
  CHECK(summary["n"] == 100);

  // One malformed truth file: reported, the rest complete.
  std::ofstream(data / "scene_0004.gt.json") << "{\"width\": 640";
  REQUIRE(run(quiet("bench --dataset " + data.string() + " --out " + (dir / "c").string() + " --ablation cnn-full", log)) == 0);
  const auto partial = nlohmann::json::parse(slurp(dir / "c" / "summary.json"));
  CHECK(partial["n"] == 99);
  REQUIRE(partial["failed"].size() == 1);
  CHECK(partial["failed"][0]["image_id"] == "scene_0004");

  fs::create_directories(dir / "empty");
  CHECK(run(quiet("bench --dataset " + (dir / "empty").string() + " --out " + (dir / "d").string(), log)) == 1);
  CHECK(run(quiet("bench --dataset " + (dir / "absent").string() + " --out " + (dir / "d").string(), log)) == 1);
  fs::remove_all(dir);
}
