#include "hfvp/segments.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

namespace hfvp {

LineSegment LineSegment::from_endpoints(const CameraFramed& frame, const Vec2<double>& p1,
                                        const Vec2<double>& p2) {
  if (!p1.allFinite() || !p2.allFinite()) {
    throw InvalidArgument("segment endpoint is not finite");
  }
  const double length = (p2 - p1).norm();
  if (!(length > 0.0)) {
    throw InvalidArgument("segment endpoints coincide");
  }
  LineSegment s;
  s.p1 = p1;
  s.p2 = p2;
  s.length = length;
  s.line = join(lift_point(frame, p1.x(), p1.y()), lift_point(frame, p2.x(), p2.y()));
  return s;
}

double LineSegment::image_angle() const {
  const Vec2<double> d = p2 - p1;
  double a = std::atan2(d.y(), d.x());
  if (a < 0) a += std::numbers::pi;
  if (a >= std::numbers::pi) a -= std::numbers::pi;
  return a;
}

LoadResult parse_segments(std::istream& in, const CameraFramed& frame, LoadOptions options) {
  LoadResult result;
  result.set.frame = frame;
  std::vector<std::size_t> degenerate;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream row(line);
    double v[4];
    for (double& x : v) {
      if (!(row >> x)) {
        throw ParseError("line " + std::to_string(lineno) + ": expected 4 numbers", lineno);
      }
      if (!std::isfinite(x)) {
        throw ParseError("line " + std::to_string(lineno) + ": non-finite value", lineno);
      }
    }
    std::string rest;
    if (row >> rest) {
      throw ParseError("line " + std::to_string(lineno) + ": trailing data '" + rest + "'", lineno);
    }

    const Vec2<double> p1(std::clamp(v[0], 0.0, frame.width), std::clamp(v[1], 0.0, frame.height));
    const Vec2<double> p2(std::clamp(v[2], 0.0, frame.width), std::clamp(v[3], 0.0, frame.height));
    if (!((p2 - p1).norm() > 0.0)) {
      degenerate.push_back(lineno);
      continue;
    }
    result.set.segments.push_back(LineSegment::from_endpoints(frame, p1, p2));
  }

  if (!degenerate.empty() && !options.skip_degenerate) {
    std::string rows;
    for (std::size_t r : degenerate) rows += (rows.empty() ? "" : ", ") + std::to_string(r);
    throw ParseError("zero-length segment on line(s) " + rows, degenerate.front());
  }
  result.rejected_rows = std::move(degenerate);
  return result;
}

LoadResult load_segments(const std::filesystem::path& path, const CameraFramed& frame,
                         LoadOptions options) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open segment file " + path.string());
  }
  return parse_segments(in, frame, options);
}

void write_segments(std::ostream& out, const SegmentSet& set) {
  out << std::setprecision(17);
  for (const auto& s : set.segments) {
    out << s.p1.x() << ' ' << s.p1.y() << ' ' << s.p2.x() << ' ' << s.p2.y() << '\n';
  }
}

void save_segments(const std::filesystem::path& path, const SegmentSet& set) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  write_segments(out, set);
}

namespace {

// Segment lines always have a finite image direction; a zenith direction at
// infinity has none and counts as unrelated to every segment.
double vertical_angle(const SphereLined& l, const SphereLined& zenith_dir) {
  if (zenith_dir.coords().head<2>().norm() <= degenerate_norm<double>()) return std::numbers::pi / 2;
  return direction_angle(l, zenith_dir);
}

}  // namespace

std::vector<std::uint32_t> filter_for_horizon(const SegmentSet& set, const SphereLined& zenith_dir,
                                              const SphereLined& horizon, double theta_ver,
                                              double theta_hor) {
  std::vector<std::uint32_t> kept;
  for (std::uint32_t i = 0; i < set.size(); ++i) {
    const auto& l = set.segments[i].line;
    if (vertical_angle(l, zenith_dir) >= theta_ver && angle(l, horizon) >= theta_hor) {
      kept.push_back(i);
    }
  }
  return kept;
}

std::vector<std::uint32_t> select_vertical_candidates(const SegmentSet& set,
                                                      const SphereLined& zenith_dir,
                                                      double theta_ver) {
  std::vector<std::uint32_t> kept;
  for (std::uint32_t i = 0; i < set.size(); ++i) {
    if (vertical_angle(set.segments[i].line, zenith_dir) < theta_ver) kept.push_back(i);
  }
  return kept;
}

SegmentSet subset(const SegmentSet& set, std::span<const std::uint32_t> ids) {
  SegmentSet out;
  out.frame = set.frame;
  out.segments.reserve(ids.size());
  for (auto i : ids) out.segments.push_back(set.segments.at(i));
  return out;
}

}  // namespace hfvp
