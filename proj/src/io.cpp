#include "hfvp/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace hfvp {

namespace {

nlohmann::json vec(const Vec3<double>& v) { return {v[0], v[1], v[2]}; }

nlohmann::json image_point(const CameraFramed& frame, const SpherePointd& p) {
  if (std::abs(p[2]) <= 1e-12) return nullptr;
  const Vec2<double> uv = unlift_point(frame, p);
  return {uv.x(), uv.y()};
}

// Endpoints of a line across the frame, for drawing.
std::optional<std::array<Vec2<double>, 2>> span_frame(const ImageLined& l, const CameraFramed& frame) {
  if (!l.is_vertical(1e-9)) {
    return std::array{Vec2<double>(0.0, l.v_at(0.0)), Vec2<double>(frame.width, l.v_at(frame.width))};
  }
  if (std::abs(l.abc[0]) <= 1e-12) return std::nullopt;
  const double u = -l.abc[2] / l.abc[0];
  return std::array{Vec2<double>(u, 0.0), Vec2<double>(u, frame.height)};
}

}  // namespace

std::string detection_to_json(const DetectionResult& result, const SegmentSet& set, Ablation mode,
                              bool include_timings) {
  const CameraFramed& frame = set.frame;
  nlohmann::json j;
  j["mode"] = to_string(mode);
  j["degraded"] = result.degraded;
  j["frame"] = {{"width", frame.width},
                {"height", frame.height},
                {"rho", frame.rho},
                {"principal_point", {frame.cu(), frame.cv()}}};

  const ImageLined h = to_image_line(frame, result.horizon_line);
  nlohmann::json horizon;
  horizon["homogeneous"] = vec(h.abc);
  horizon["sphere"] = vec(result.horizon_line.coords());
  if (h.is_vertical()) {
    horizon["slope_intercept"] = nullptr;
  } else {
    const Vec2<double> mb = h.slope_intercept();
    horizon["slope_intercept"] = {{"m", mb.x()}, {"b", mb.y()}};
  }
  horizon["alpha"] = result.horizon.alpha;
  horizon["offset"] = result.horizon.offset;
  j["horizon"] = horizon;
  j["score"] = result.score;

  nlohmann::json zenith;
  zenith["direction"] = vec(result.zenith.zenith_dir.coords());
  zenith["used_ransac"] = result.zenith.used_ransac;
  if (result.zenith.zenith_vp) {
    zenith["sphere"] = vec(result.zenith.zenith_vp->coords());
    zenith["image"] = image_point(frame, *result.zenith.zenith_vp);
  } else {
    zenith["sphere"] = nullptr;
    zenith["image"] = nullptr;
  }
  zenith["inliers"] = result.zenith.inlier_ids;
  j["zenith"] = zenith;

  nlohmann::json vps = nlohmann::json::array();
  for (std::size_t k = 0; k < result.vps.size(); ++k) {
    vps.push_back({{"sphere", vec(result.vps[k].coords())},
                   {"image", image_point(frame, result.vps[k])},
                   {"weight", result.vp_weights[k]}});
  }
  j["vps"] = vps;
  j["assignments"] = result.assignments;
  if (include_timings) {
    j["timings"] = {{"zenith_s", result.timings.zenith_s},
                    {"candidates_s", result.timings.candidates_s},
                    {"total_s", result.timings.total_s}};
  }
  return j.dump(2) + "\n";
}

std::string overlay_svg(const DetectionResult& result, const SegmentSet& set, const OverlayOptions& options) {
  static constexpr std::array<const char*, 6> kPalette = {"#e41a1c", "#377eb8", "#4daf4a",
                                                          "#984ea3", "#ff7f00", "#a65628"};
  const CameraFramed& frame = set.frame;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << frame.width << "\" height=\"" << frame.height
      << "\" viewBox=\"0 0 " << frame.width << ' ' << frame.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  if (options.draw_candidates && !result.candidates.empty()) {
    double top = 0.0;
    for (const auto& c : result.candidates) top = std::max(top, c.score);
    for (const auto& c : result.candidates) {
      const auto ends = span_frame(to_image_line(frame, c.line), frame);
      if (!ends) continue;
      const double t = top > 0.0 ? c.score / top : 0.0;
      svg << "<line x1=\"" << (*ends)[0].x() << "\" y1=\"" << (*ends)[0].y() << "\" x2=\"" << (*ends)[1].x()
          << "\" y2=\"" << (*ends)[1].y() << "\" stroke=\"rgb(" << static_cast<int>(255 * t) << ",0,"
          << static_cast<int>(255 * (1 - t)) << ")\" stroke-opacity=\"0.25\" stroke-width=\"1\"/>\n";
    }
  }

  std::vector<char> zenith_inlier(set.size(), 0);
  for (auto id : result.zenith.inlier_ids) zenith_inlier[id] = 1;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& s = set[i];
    const char* colour = "#999999";
    if (i < result.assignments.size() && result.assignments[i] >= 0) {
      colour = kPalette[static_cast<std::size_t>(result.assignments[i]) % kPalette.size()];
    } else if (zenith_inlier[i]) {
      colour = "#00bcd4";
    }
    svg << "<line x1=\"" << s.p1.x() << "\" y1=\"" << s.p1.y() << "\" x2=\"" << s.p2.x() << "\" y2=\"" << s.p2.y()
        << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
  }

  if (options.truth) {
    if (const auto ends = span_frame(*options.truth, frame)) {
      svg << "<line x1=\"" << (*ends)[0].x() << "\" y1=\"" << (*ends)[0].y() << "\" x2=\"" << (*ends)[1].x()
          << "\" y2=\"" << (*ends)[1].y() << "\" stroke=\"#00c000\" stroke-width=\"2\" stroke-dasharray=\"8,6\"/>\n";
    }
  }
  if (const auto ends = span_frame(to_image_line(frame, result.horizon_line), frame)) {
    svg << "<line x1=\"" << (*ends)[0].x() << "\" y1=\"" << (*ends)[0].y() << "\" x2=\"" << (*ends)[1].x()
        << "\" y2=\"" << (*ends)[1].y() << "\" stroke=\"#ff00ff\" stroke-width=\"3\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace hfvp
