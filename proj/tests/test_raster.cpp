#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "hfvp/raster.hpp"

using namespace hfvp;

namespace {

// White band of the given half-width around segment a-b on black.
void draw(GrayImage& img, Vec2<double> a, Vec2<double> b, double half_width = 1.5) {
  const Vec2<double> d = (b - a).normalized();
  const double len = (b - a).norm();
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const Vec2<double> p(x + 0.5, y + 0.5);
      const double t = (p - a).dot(d);
      if (t < 0 || t > len) continue;
      const double dist = std::abs(d.x() * (p.y() - a.y()) - d.y() * (p.x() - a.x()));
      if (dist <= half_width) img.at(x, y) = 255;
    }
  }
}

double direction_gap(const LineSegment& s, Vec2<double> a, Vec2<double> b) {
  const Vec2<double> d1 = (s.p2 - s.p1).normalized(), d2 = (b - a).normalized();
  return std::acos(std::min(1.0, std::abs(d1.dot(d2))));
}

double distance_to_line(Vec2<double> p, Vec2<double> a, Vec2<double> b) {
  const Vec2<double> d = (b - a).normalized();
  return std::abs(d.x() * (p.y() - a.y()) - d.y() * (p.x() - a.x()));
}

bool recovered(const SegmentSet& set, Vec2<double> a, Vec2<double> b) {
  for (const auto& s : set.segments) {
    if (direction_gap(s, a, b) < deg2rad(2.0) && distance_to_line(s.p1, a, b) < 2.0 &&
        distance_to_line(s.p2, a, b) < 2.0) {
      return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("PGM round trip") {
  GrayImage img(7, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 11);
  std::stringstream buf;
  write_pgm(buf, img);
  const GrayImage back = read_pgm(buf);
  CHECK(back.width == 7);
  CHECK(back.height == 3);
  CHECK(back.pixels == img.pixels);
}

TEST_CASE("non-P5 rasters are rejected") {
  std::istringstream ascii("P2\n2 2\n255\n0 1 2 3\n");
  CHECK_THROWS_AS(read_pgm(ascii), ParseError);
  std::istringstream wide("P5\n2 2\n65535\n");
  CHECK_THROWS_AS(read_pgm(wide), ParseError);
  std::istringstream truncated("P5\n4 4\n255\nab");
  CHECK_THROWS_AS(read_pgm(truncated), ParseError);
}

TEST_CASE("one drawn line is recovered") {
  GrayImage img(320, 240);
  const Vec2<double> a(60, 50), b(240, 137);  // about 200 px long
  draw(img, a, b);
  const auto frame = CameraFramed::with_defaults(320, 240);
  const SegmentSet set = detect_segments(img, frame);
  CHECK(set.size() >= 1);
  CHECK(recovered(set, a, b));
}

TEST_CASE("uniform image has no segments") {
  const GrayImage img(100, 80, 128);
  CHECK(detect_segments(img, CameraFramed::with_defaults(100, 80)).empty());
}

TEST_CASE("two crossing lines") {
  GrayImage img(320, 240);
  const Vec2<double> a1(40, 40), b1(280, 200), a2(40, 200), b2(280, 60);
  draw(img, a1, b1);
  draw(img, a2, b2);
  const SegmentSet set = detect_segments(img, CameraFramed::with_defaults(320, 240));
  CHECK(set.size() >= 2);
  bool first = false, second = false;
  for (const auto& s : set.segments) {
    first = first || direction_gap(s, a1, b1) < deg2rad(2.0);
    second = second || direction_gap(s, a2, b2) < deg2rad(2.0);
  }
  CHECK(first);
  CHECK(second);
}

TEST_CASE("frame must match the raster") {
  const GrayImage img(100, 80);
  CHECK_THROWS_AS(detect_segments(img, CameraFramed::with_defaults(80, 100)), InvalidArgument);
}
