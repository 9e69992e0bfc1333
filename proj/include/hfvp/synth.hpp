#pragma once

// Synthetic scenes with exact ground truth: a pinhole camera with given
// field of view, pitch and roll, one vertical line family, one or more
// horizontal families, endpoint noise and outlier segments.
//
// Camera convention: world z is up. Positive pitch tilts the optical axis
// upwards (horizon moves down the image); positive roll turns the horizon
// to image slope -roll (u right, v down).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hfvp/geom.hpp"
#include "hfvp/prior.hpp"
#include "hfvp/segments.hpp"

namespace hfvp {

enum class OutlierMode {
  RandomChords,
  /// Outliers all pass through one false intersection well off the horizon.
  Adversarial,
};

struct SceneSpec {
  double width = 640.0;
  double height = 480.0;
  /// Horizontal families; two at right angles is a Manhattan scene.
  int n_families = 2;
  int segments_per_family = 32;
  /// Vertical family size; negative means segments_per_family.
  int vertical_segments = -1;
  /// Outliers as a fraction of all segments, in [0, 1).
  double outlier_fraction = 0.2;
  double endpoint_noise_px = 0.5;
  /// Unset camera angles are drawn from truncated normals: FOV N(60, 10)
  /// in [40, 80], pitch N(0, 10) in [-30, 30], roll N(0, 5) in [-20, 20].
  std::optional<double> fov_deg;
  std::optional<double> pitch_deg;
  std::optional<double> roll_deg;
  std::optional<double> yaw_deg;
  OutlierMode outlier_mode = OutlierMode::RandomChords;
  std::uint64_t seed = 0;
};

struct VPFamily {
  SpherePointd vp;
  bool vertical = false;
  std::vector<std::uint32_t> segment_ids;
};

struct SyntheticScene {
  CameraFramed frame;
  double fov_deg = 0.0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
  double yaw_deg = 0.0;
  double focal_px = 0.0;
  SphereLined gt_horizon;
  ImageLined gt_horizon_image;
  SpherePointd gt_zenith;
  /// Vertical family first, then the horizontal ones.
  std::vector<VPFamily> families;
  std::vector<std::uint32_t> outlier_ids;
  SegmentSet segments;

  std::vector<SpherePointd> horizontal_vps() const;
};

/// Horizon of a centred pinhole camera with horizontal field of view fov.
ImageLined horizon_from_camera(double fov_deg, double pitch_deg, double roll_deg, const CameraFramed& frame);

SyntheticScene make_scene(const SceneSpec& spec);

/// Ground-truth horizon of a scene in (alpha, signed offset) form.
HorizonParam scene_horizon_param(const SyntheticScene& scene);

/// Stand-in for a global-context network: Gaussians of the given widths
/// whose centres are themselves drawn around the true horizon with the same
/// widths (so the truth is a typical draw from the prior, not its mode),
/// discretized into 500-bin categoricals. jitter = false centres them
/// exactly on the truth.
CategoricalPrior synthetic_prior(const SyntheticScene& scene, double sigma_alpha, double sigma_offset,
                                 std::uint64_t seed, bool jitter = true,
                                 double kappa_over_height = kDefaultKappaOverHeight);

/// Writes <id>.segments.txt, <id>.gt.json and, when given, <id>.prior.json.
void save_scene(const std::filesystem::path& dir, const std::string& id, const SyntheticScene& scene,
                const CategoricalPrior* prior = nullptr);

/// Ground-truth JSON: width, height, horizon [a, b, c] (pixel line), zenith
/// and vps as calibrated homogeneous 3-vectors, camera angles.
std::string scene_truth_json(const SyntheticScene& scene);

}  // namespace hfvp
