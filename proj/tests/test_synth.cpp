#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "hfvp/random.hpp"
#include "hfvp/synth.hpp"
#include "support.hpp"

using namespace hfvp;

namespace {

const CameraFramed kFrame = CameraFramed::with_defaults(640, 480);

double slope_deg(const ImageLined& l) { return rad2deg(std::atan(l.slope_intercept()[0])); }

// Signed distance of a pixel to a unit-normal image line.
double residual(const ImageLined& l, double u, double v) { return l.abc[0] * u + l.abc[1] * v + l.abc[2]; }

SceneSpec level_spec(std::uint64_t seed) {
  SceneSpec spec;
  spec.fov_deg = 60.0;
  spec.pitch_deg = 0.0;
  spec.roll_deg = 0.0;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("horizon_from_camera, level camera") {
  const auto h = horizon_from_camera(60.0, 0.0, 0.0, kFrame);
  CHECK(std::abs(h.v_at(0.0) - 240.0) < 1e-9);
  CHECK(std::abs(h.v_at(640.0) - 240.0) < 1e-9);
}

TEST_CASE("horizon_from_camera, pitch matches projected far points") {
  const double f = 320.0 / std::tan(deg2rad(30.0));
  const double t = deg2rad(10.0);
  const auto h = horizon_from_camera(60.0, 10.0, 0.0, kFrame);
  // Camera axes x right, y down, z forward; pitched up by t, horizontal
  // directions are (x, sin t, cos t) up to scale.
  for (double x : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
    const Vec3<double> d(x, std::sin(t), std::cos(t));
    CHECK(std::abs(residual(h, 320.0 + f * d.x() / d.z(), 240.0 + f * d.y() / d.z())) < 1e-9);
  }
  CHECK(h.v_at(320.0) - 240.0 == doctest::Approx(f * std::tan(t)).epsilon(1e-12));
}

TEST_CASE("horizon_from_camera, pure roll") {
  for (double psi : {-15.0, -3.0, 4.0, 10.0}) {
    const auto h = horizon_from_camera(60.0, 0.0, psi, kFrame);
    CHECK(slope_deg(h) == doctest::Approx(-psi).epsilon(1e-12));
    CHECK(std::abs(residual(h, 320.0, 240.0)) < 1e-9);
  }
  CHECK_THROWS_AS(horizon_from_camera(60.0, 90.0, 0.0, kFrame), InvalidArgument);
  CHECK_THROWS_AS(horizon_from_camera(0.0, 0.0, 0.0, kFrame), InvalidArgument);
}

TEST_CASE("make_scene ground truth") {
  const auto level = make_scene(level_spec(1));
  CHECK(std::abs(level.gt_horizon_image.v_at(0.0) - 240.0) < 1e-9);
  CHECK(std::abs(level.gt_horizon_image.v_at(640.0) - 240.0) < 1e-9);

  SceneSpec rolled = level_spec(2);
  rolled.roll_deg = 10.0;
  CHECK(slope_deg(make_scene(rolled).gt_horizon_image) == doctest::Approx(-10.0).epsilon(1e-12));

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SceneSpec spec;
    spec.n_families = 1 + static_cast<int>(seed % 4);
    spec.seed = derive_seed(3, seed);
    const auto scene = make_scene(spec);
    for (const auto& v : scene.horizontal_vps()) CHECK(std::abs(scene.gt_horizon.coords().dot(v.coords())) < 1e-9);
    // The zenith lies on the normal to the horizon through the principal point.
    const auto& z = scene.gt_zenith.coords();
    const auto& n = scene.gt_horizon_image.abc;
    CHECK(std::abs(z.x() * n[1] - z.y() * n[0]) < 1e-9);
    // Sphere and image forms of the horizon agree.
    const auto img = to_image_line(scene.frame, scene.gt_horizon);
    CHECK((img.abc - scene.gt_horizon_image.abc).norm() < 1e-9);
  }
}

TEST_CASE("noiseless segments pass through their VP") {
  SceneSpec spec;
  spec.endpoint_noise_px = 0.0;
  spec.seed = 4;
  const auto scene = make_scene(spec);
  const double theta_con = deg2rad(2.0);
  for (const auto& fam : scene.families) {
    REQUIRE(!fam.segment_ids.empty());
    for (auto id : fam.segment_ids) {
      CHECK(std::abs(scene.segments[id].line.coords().dot(fam.vp.coords())) < 1e-9);
      CHECK(consistency(fam.vp, scene.segments[id].line, theta_con) == doctest::Approx(theta_con).epsilon(1e-9));
    }
  }
}

TEST_CASE("family and outlier counts") {
  SceneSpec spec;
  spec.n_families = 3;
  spec.segments_per_family = 20;
  spec.vertical_segments = 10;
  spec.outlier_fraction = 0.5;
  spec.seed = 5;
  const auto scene = make_scene(spec);
  REQUIRE(scene.families.size() == 4);
  CHECK(scene.families[0].vertical);
  CHECK(scene.families[0].segment_ids.size() == 10);
  for (std::size_t k = 1; k < 4; ++k) CHECK(scene.families[k].segment_ids.size() == 20);
  CHECK(scene.outlier_ids.size() == 70);
  CHECK(scene.segments.size() == 140);

  spec.outlier_fraction = 0.0;
  CHECK(make_scene(spec).outlier_ids.empty());

  spec.outlier_fraction = 1.0;
  CHECK_THROWS_AS(make_scene(spec), InvalidArgument);
  spec.outlier_fraction = 0.2;
  spec.n_families = 0;
  CHECK_THROWS_AS(make_scene(spec), InvalidArgument);
  spec.n_families = 2;
  spec.fov_deg = 0.0;
  CHECK_THROWS_AS(make_scene(spec), InvalidArgument);
}

TEST_CASE("adversarial outliers share an off-horizon point") {
  SceneSpec spec;
  spec.outlier_mode = OutlierMode::Adversarial;
  spec.outlier_fraction = 0.3;
  spec.endpoint_noise_px = 0.0;
  spec.seed = 6;
  const auto scene = make_scene(spec);
  REQUIRE(scene.outlier_ids.size() >= 2);
  const auto& a = scene.segments[scene.outlier_ids[0]].line;
  const auto& b = scene.segments[scene.outlier_ids[1]].line;
  const auto decoy = meet(a, b);
  for (auto id : scene.outlier_ids) CHECK(std::abs(scene.segments[id].line.coords().dot(decoy.coords())) < 1e-9);
  const auto px = unlift_point(scene.frame, decoy);
  CHECK(std::abs(residual(scene.gt_horizon_image, px.x(), px.y())) >= 0.25 * 480.0 - 1e-6);
}

TEST_CASE("seeded and noise-independent geometry") {
  SceneSpec spec;
  spec.seed = 7;
  const auto a = make_scene(spec);
  const auto b = make_scene(spec);
  REQUIRE(a.segments.size() == b.segments.size());
  for (std::size_t i = 0; i < a.segments.size(); ++i) CHECK(a.segments[i].p1 == b.segments[i].p1);

  // Noise is a separate stream: the camera and the clean segments do not move.
  spec.endpoint_noise_px = 0.0;
  const auto clean = make_scene(spec);
  spec.endpoint_noise_px = 1.0;
  const auto noisy = make_scene(spec);
  CHECK(clean.gt_horizon.coords() == noisy.gt_horizon.coords());
  REQUIRE(clean.segments.size() == noisy.segments.size());
  double max_shift = 0.0;
  for (std::size_t i = 0; i < clean.segments.size(); ++i) {
    max_shift = std::max(max_shift, (clean.segments[i].p1 - noisy.segments[i].p1).norm());
  }
  CHECK(max_shift > 0.0);
  CHECK(max_shift < 8.0);
}

TEST_CASE("synthetic priors") {
  const auto scene = make_scene(level_spec(8));
  const auto truth = scene_horizon_param(scene);
  const auto centred = fit_gaussian(synthetic_prior(scene, deg2rad(2.0), 5.0, 1, false),
                                    scene.frame.height);
  CHECK(std::abs(centred.alpha_mean - truth.alpha) < deg2rad(0.5));
  CHECK(std::abs(centred.o_mean - truth.offset) < 1.0);
  const auto a = synthetic_prior(scene, deg2rad(2.0), 5.0, 1);
  const auto b = synthetic_prior(scene, deg2rad(2.0), 5.0, 1);
  CHECK(a.alpha_bins == b.alpha_bins);
  CHECK(a.w_bins == b.w_bins);
  CHECK_THROWS_AS(synthetic_prior(scene, 0.0, 5.0, 1), InvalidArgument);
}

TEST_CASE("save_scene writes segments, truth and prior") {
  const auto dir = hfvp::testing::scratch_dir("synth");
  const auto scene = make_scene(level_spec(9));
  const auto prior = synthetic_prior(scene, deg2rad(2.0), 5.0, 9);
  save_scene(dir, "s0", scene, &prior);
  save_scene(dir, "s1", scene);
  CHECK(std::filesystem::exists(dir / "s0.prior.json"));
  CHECK(!std::filesystem::exists(dir / "s1.prior.json"));

  const auto loaded = load_segments(dir / "s0.segments.txt", scene.frame);
  REQUIRE(loaded.set.size() == scene.segments.size());
  for (std::size_t i = 0; i < loaded.set.size(); ++i) {
    CHECK((loaded.set[i].p1 - scene.segments[i].p1).norm() < 1e-6);
    CHECK((loaded.set[i].p2 - scene.segments[i].p2).norm() < 1e-6);
  }

  const auto j = nlohmann::json::parse(hfvp::testing::slurp(dir / "s0.gt.json"));
  CHECK(j["width"].get<double>() == 640.0);
  CHECK(j["height"].get<double>() == 480.0);
  REQUIRE(j["horizon"].size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(j["horizon"][k].get<double>() == doctest::Approx(scene.gt_horizon_image.abc[k]));
  CHECK(j["zenith"].size() == 3);
  CHECK(j["vps"].size() == scene.horizontal_vps().size());

  const auto back = load_prior_json(dir / "s0.prior.json");
  CHECK(back.alpha_bins.size() == 500);
  std::filesystem::remove_all(dir);
}
