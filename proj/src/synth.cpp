#include "hfvp/synth.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>

#include "hfvp/random.hpp"

namespace hfvp {

namespace {

constexpr std::uint64_t kGeometryStream = 0x67656f;
constexpr std::uint64_t kNoiseStream = 0x6e6f69;
constexpr std::uint64_t kOutlierStream = 0x6f7574;
constexpr std::uint64_t kPriorStream = 0x707269;
constexpr int kMaxTries = 1000;
constexpr double kMinLength = 20.0;

using Mat3 = Eigen::Matrix3d;

double truncated_normal(Rng& rng, double mean, double std, double lo, double hi) {
  std::normal_distribution<double> n(mean, std);
  for (;;) {
    const double x = n(rng);
    if (x >= lo && x <= hi) return x;
  }
}

// World-to-camera rotation; camera axes x right, y down, z forward.
Mat3 camera_rotation(double yaw, double pitch, double roll) {
  Mat3 level;  // looks along world +y
  level << 1, 0, 0,
           0, 0, -1,
           0, 1, 0;
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  Mat3 yaw_m;  // rotate the world about z
  yaw_m << cy, sy, 0,
           -sy, cy, 0,
           0, 0, 1;
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  Mat3 pitch_m;
  pitch_m << 1, 0, 0,
             0, cp, sp,
             0, -sp, cp;
  const double cr = std::cos(roll), sr = std::sin(roll);
  Mat3 roll_m;
  roll_m << cr, sr, 0,
            -sr, cr, 0,
            0, 0, 1;
  return roll_m * pitch_m * level * yaw_m;
}

double focal_from_fov(double fov_deg, double width) {
  return (width / 2.0) / std::tan(deg2rad(fov_deg) / 2.0);
}

// Camera-frame direction to calibrated sphere point.
SpherePointd direction_to_sphere(const Vec3<double>& dir_cam, double focal, double rho) {
  return SpherePointd::normalized(
      canonical_sign<double>(Vec3<double>(rho * focal * dir_cam.x(), rho * focal * dir_cam.y(), dir_cam.z())));
}

// Clips the segment a-b to [0,w]x[0,h] (Liang-Barsky). False if nothing is left.
bool clip_to_frame(Vec2<double>& a, Vec2<double>& b, double w, double h) {
  double t0 = 0.0, t1 = 1.0;
  const Vec2<double> d = b - a;
  const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
  const double q[4] = {a.x(), w - a.x(), a.y(), h - a.y()};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
  }
  if (t0 > t1) return false;
  const Vec2<double> a0 = a;
  a = a0 + t0 * d;
  b = a0 + t1 * d;
  return true;
}

struct RawSegment {
  Vec2<double> p1, p2;
};

// Random segment on the image line through `mid` and the point `vp`, not
// straddling vp. Returns false after too many rejections.
bool segment_towards(Rng& rng, const CameraFramed& frame, const SpherePointd& vp, RawSegment& out) {
  std::uniform_real_distribution<double> ux(0.0, frame.width), uy(0.0, frame.height);
  const double max_len = 0.4 * std::min(frame.width, frame.height);
  std::uniform_real_distribution<double> len(1.5 * kMinLength, max_len);
  for (int tries = 0; tries < kMaxTries; ++tries) {
    const Vec2<double> mid(ux(rng), uy(rng));
    const double L = len(rng);
    const SpherePointd m = lift_point(frame, mid.x(), mid.y());
    SphereLined line;
    try {
      line = join(m, vp);
    } catch (const DegenerateGeometry&) {
      continue;
    }
    const ImageLined il = to_image_line(frame, line);
    const Vec2<double> dir(-il.abc[1], il.abc[0]);
    Vec2<double> a = mid - 0.5 * L * dir;
    Vec2<double> b = mid + 0.5 * L * dir;
    // A finite world segment never projects across its vanishing point.
    if (std::abs(vp[2]) > 1e-12) {
      const Vec2<double> v = unlift_point(frame, vp);
      const double t = (v - a).dot(dir);
      if (t > -5.0 && t < L + 5.0) continue;
    }
    if (!clip_to_frame(a, b, frame.width, frame.height)) continue;
    if ((b - a).norm() < kMinLength) continue;
    out = {a, b};
    return true;
  }
  return false;
}

bool random_chord(Rng& rng, const CameraFramed& frame, RawSegment& out) {
  std::uniform_real_distribution<double> ux(0.0, frame.width), uy(0.0, frame.height);
  std::uniform_real_distribution<double> ang(0.0, std::numbers::pi);
  const double max_len = 0.4 * std::min(frame.width, frame.height);
  std::uniform_real_distribution<double> len(1.5 * kMinLength, max_len);
  for (int tries = 0; tries < kMaxTries; ++tries) {
    const Vec2<double> mid(ux(rng), uy(rng));
    const double a = ang(rng), L = len(rng);
    const Vec2<double> dir(std::cos(a), std::sin(a));
    Vec2<double> p = mid - 0.5 * L * dir, q = mid + 0.5 * L * dir;
    if (!clip_to_frame(p, q, frame.width, frame.height)) continue;
    if ((q - p).norm() < kMinLength) continue;
    out = {p, q};
    return true;
  }
  return false;
}

}  // namespace

std::vector<SpherePointd> SyntheticScene::horizontal_vps() const {
  std::vector<SpherePointd> out;
  for (const auto& f : families) {
    if (!f.vertical) out.push_back(f.vp);
  }
  return out;
}

ImageLined horizon_from_camera(double fov_deg, double pitch_deg, double roll_deg, const CameraFramed& frame) {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw InvalidArgument("fov must be in (0, 180) degrees");
  if (!(std::abs(pitch_deg) < 90.0)) throw InvalidArgument("|pitch| must be below 90 degrees");
  const double f = focal_from_fov(fov_deg, frame.width);
  const Mat3 R = camera_rotation(0.0, deg2rad(pitch_deg), deg2rad(roll_deg));
  const Vec3<double> up = R * Vec3<double>::UnitZ();
  // K^-T up for K = [f 0 cu; 0 f cv; 0 0 1].
  const Vec3<double> l(up.x() / f, up.y() / f, up.z() - frame.cu() * up.x() / f - frame.cv() * up.y() / f);
  return ImageLined::from_coefficients(l);
}

SyntheticScene make_scene(const SceneSpec& spec) {
  if (spec.n_families < 1) throw InvalidArgument("make_scene: need at least one horizontal family");
  if (spec.segments_per_family < 0) throw InvalidArgument("make_scene: negative family size");
  if (!(spec.outlier_fraction >= 0.0 && spec.outlier_fraction < 1.0)) {
    throw InvalidArgument("make_scene: outlier_fraction must be in [0, 1)");
  }
  if (!(spec.endpoint_noise_px >= 0.0)) throw InvalidArgument("make_scene: negative noise");
  if (spec.fov_deg && !(*spec.fov_deg > 0.0 && *spec.fov_deg < 180.0)) {
    throw InvalidArgument("make_scene: fov must be in (0, 180) degrees");
  }
  if (spec.pitch_deg && !(std::abs(*spec.pitch_deg) < 90.0)) {
    throw InvalidArgument("make_scene: |pitch| must be below 90 degrees");
  }

  Rng geo(derive_seed(spec.seed, kGeometryStream));
  Rng noise_rng(derive_seed(spec.seed, kNoiseStream));
  Rng outlier_rng(derive_seed(spec.seed, kOutlierStream));

  SyntheticScene scene;
  scene.frame = CameraFramed::with_defaults(spec.width, spec.height);
  const CameraFramed& frame = scene.frame;
  // Draw every angle so the stream position does not depend on which are set.
  const double fov = truncated_normal(geo, 60.0, 10.0, 40.0, 80.0);
  const double pitch = truncated_normal(geo, 0.0, 10.0, -30.0, 30.0);
  const double roll = truncated_normal(geo, 0.0, 5.0, -20.0, 20.0);
  const double yaw = std::uniform_real_distribution<double>(0.0, 360.0)(geo);
  scene.fov_deg = spec.fov_deg.value_or(fov);
  scene.pitch_deg = spec.pitch_deg.value_or(pitch);
  scene.roll_deg = spec.roll_deg.value_or(roll);
  scene.yaw_deg = spec.yaw_deg.value_or(yaw);
  scene.focal_px = focal_from_fov(scene.fov_deg, frame.width);

  const Mat3 R = camera_rotation(deg2rad(scene.yaw_deg), deg2rad(scene.pitch_deg), deg2rad(scene.roll_deg));
  const double f = scene.focal_px;
  const Vec3<double> up_cam = R * Vec3<double>::UnitZ();
  scene.gt_zenith = direction_to_sphere(up_cam, f, frame.rho);
  scene.gt_horizon = SphereLined::normalized(
      canonical_sign<double>(Vec3<double>(up_cam.x() / (frame.rho * f), up_cam.y() / (frame.rho * f), up_cam.z())));
  scene.gt_horizon_image = horizon_from_camera(scene.fov_deg, scene.pitch_deg, scene.roll_deg, frame);

  const int n_vertical = spec.vertical_segments < 0 ? spec.segments_per_family : spec.vertical_segments;
  scene.families.push_back({scene.gt_zenith, true, {}});
  for (int k = 0; k < spec.n_families; ++k) {
    const double az = std::numbers::pi * k / spec.n_families;
    const Vec3<double> d(std::cos(az), std::sin(az), 0.0);
    scene.families.push_back({direction_to_sphere(R * d, f, frame.rho), false, {}});
  }

  std::vector<RawSegment> raw;
  std::vector<std::uint32_t> owner;  // family index, or -1 for outliers
  for (std::size_t fi = 0; fi < scene.families.size(); ++fi) {
    const int count = scene.families[fi].vertical ? n_vertical : spec.segments_per_family;
    for (int i = 0; i < count; ++i) {
      RawSegment s;
      if (!segment_towards(geo, frame, scene.families[fi].vp, s)) continue;
      raw.push_back(s);
      owner.push_back(static_cast<std::uint32_t>(fi));
    }
  }
  const std::size_t n_inliers = raw.size();
  const auto n_outliers = static_cast<std::size_t>(
      std::lround(spec.outlier_fraction / (1.0 - spec.outlier_fraction) * static_cast<double>(n_inliers)));

  std::optional<SpherePointd> decoy;
  if (spec.outlier_mode == OutlierMode::Adversarial && n_outliers > 0) {
    // A point inside the image at least a quarter height from the horizon.
    std::uniform_real_distribution<double> ux(0.1 * frame.width, 0.9 * frame.width);
    std::uniform_real_distribution<double> uy(0.1 * frame.height, 0.9 * frame.height);
    for (int tries = 0; tries < kMaxTries && !decoy; ++tries) {
      const Vec2<double> q(ux(outlier_rng), uy(outlier_rng));
      const auto& l = scene.gt_horizon_image.abc;
      if (std::abs(l[0] * q.x() + l[1] * q.y() + l[2]) >= 0.25 * frame.height) {
        decoy = lift_point(frame, q.x(), q.y());
      }
    }
  }
  for (std::size_t i = 0; i < n_outliers; ++i) {
    RawSegment s;
    const bool ok = decoy ? segment_towards(outlier_rng, frame, *decoy, s) : random_chord(outlier_rng, frame, s);
    if (!ok) continue;
    raw.push_back(s);
    owner.push_back(static_cast<std::uint32_t>(-1));
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  scene.segments.frame = frame;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    Vec2<double> a = raw[i].p1, b = raw[i].p2;
    const Vec2<double> na(gauss(noise_rng), gauss(noise_rng));
    const Vec2<double> nb(gauss(noise_rng), gauss(noise_rng));
    if (spec.endpoint_noise_px > 0.0) {
      a += spec.endpoint_noise_px * na;
      b += spec.endpoint_noise_px * nb;
      a = a.cwiseMax(Vec2<double>::Zero()).cwiseMin(Vec2<double>(frame.width, frame.height));
      b = b.cwiseMax(Vec2<double>::Zero()).cwiseMin(Vec2<double>(frame.width, frame.height));
    }
    const auto id = static_cast<std::uint32_t>(scene.segments.size());
    scene.segments.segments.push_back(LineSegment::from_endpoints(frame, a, b));
    if (owner[i] == static_cast<std::uint32_t>(-1)) {
      scene.outlier_ids.push_back(id);
    } else {
      scene.families[owner[i]].segment_ids.push_back(id);
    }
  }
  return scene;
}

std::string scene_truth_json(const SyntheticScene& scene) {
  nlohmann::json j;
  j["width"] = scene.frame.width;
  j["height"] = scene.frame.height;
  const auto& h = scene.gt_horizon_image.abc;
  j["horizon"] = {h[0], h[1], h[2]};
  const auto& z = scene.gt_zenith.coords();
  j["zenith"] = {z[0], z[1], z[2]};
  nlohmann::json vps = nlohmann::json::array();
  for (const auto& p : scene.horizontal_vps()) vps.push_back({p[0], p[1], p[2]});
  j["vps"] = vps;
  j["fov_deg"] = scene.fov_deg;
  j["pitch_deg"] = scene.pitch_deg;
  j["roll_deg"] = scene.roll_deg;
  j["n_segments"] = scene.segments.size();
  j["n_outliers"] = scene.outlier_ids.size();
  return j.dump(2);
}

HorizonParam scene_horizon_param(const SyntheticScene& scene) {
  return param_from_line(scene.frame, scene.gt_horizon);
}

CategoricalPrior synthetic_prior(const SyntheticScene& scene, double sigma_alpha, double sigma_offset,
                                 std::uint64_t seed, bool jitter, double kappa_over_height) {
  if (!(sigma_alpha > 0.0) || !(sigma_offset > 0.0)) {
    throw InvalidArgument("synthetic_prior: widths must be positive");
  }
  const HorizonParam truth = scene_horizon_param(scene);
  double alpha = truth.alpha;
  double offset = truth.offset;
  if (jitter) {
    Rng rng(derive_seed(seed, kPriorStream));
    std::normal_distribution<double> n(0.0, 1.0);
    alpha += sigma_alpha * n(rng);
    offset += sigma_offset * n(rng);
  }
  return categorical_from_gaussian(alpha, sigma_alpha, offset, sigma_offset, kappa_over_height,
                                   scene.frame.height);
}

void save_scene(const std::filesystem::path& dir, const std::string& id, const SyntheticScene& scene,
                const CategoricalPrior* prior) {
  std::filesystem::create_directories(dir);
  save_segments(dir / (id + ".segments.txt"), scene.segments);
  auto write = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text << '\n';
  };
  write(dir / (id + ".gt.json"), scene_truth_json(scene));
  if (prior) write(dir / (id + ".prior.json"), prior_to_json(*prior));
}

}  // namespace hfvp
