#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "hfvp/geom.hpp"

namespace hfvp {

/// Image-space segment with its lifted homogeneous line.
struct LineSegment {
  Vec2<double> p1;
  Vec2<double> p2;
  SphereLined line;
  double length = 0.0;

  /// Throws InvalidArgument for coincident endpoints.
  static LineSegment from_endpoints(const CameraFramed& frame, const Vec2<double>& p1,
                                    const Vec2<double>& p2);

  /// Image-space direction angle in [0, pi).
  double image_angle() const;
};

struct SegmentSet {
  CameraFramed frame;
  std::vector<LineSegment> segments;

  std::size_t size() const { return segments.size(); }
  bool empty() const { return segments.empty(); }
  const LineSegment& operator[](std::size_t i) const { return segments[i]; }
};

struct LoadOptions {
  /// Drop zero-length rows (reported in LoadResult::rejected_rows) instead
  /// of failing the whole file.
  bool skip_degenerate = false;
};

struct LoadResult {
  SegmentSet set;
  /// 1-based file line numbers of dropped rows.
  std::vector<std::size_t> rejected_rows;
};

/// Reads "u1 v1 u2 v2" rows ('#' comments, blank lines skipped). Endpoints
/// are clamped into [0, width] x [0, height]. Throws ParseError naming the
/// offending line(s).
LoadResult load_segments(const std::filesystem::path& path, const CameraFramed& frame,
                         LoadOptions options = {});
LoadResult parse_segments(std::istream& in, const CameraFramed& frame, LoadOptions options = {});

void write_segments(std::ostream& out, const SegmentSet& set);
void save_segments(const std::filesystem::path& path, const SegmentSet& set);

/// Indices of segments whose image direction is at least theta_ver from the
/// zenith direction's and whose line is at least theta_hor from the horizon
/// candidate on the sphere.
std::vector<std::uint32_t> filter_for_horizon(const SegmentSet& set, const SphereLined& zenith_dir,
                                              const SphereLined& horizon, double theta_ver,
                                              double theta_hor);

/// Indices of segments whose image direction is strictly within theta_ver of
/// the zenith direction's.
std::vector<std::uint32_t> select_vertical_candidates(const SegmentSet& set,
                                                      const SphereLined& zenith_dir,
                                                      double theta_ver);

/// Copies the listed segments into a new set over the same frame.
SegmentSet subset(const SegmentSet& set, std::span<const std::uint32_t> ids);

}  // namespace hfvp
