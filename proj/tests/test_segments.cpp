#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "hfvp/segments.hpp"

using namespace hfvp;

namespace {

const CameraFramed kFrame = CameraFramed::with_defaults(640, 480);

// Image line through the principal point at `deg` from vertical, as a segment.
LineSegment centred(double deg, double half = 100.0) {
  const double a = deg2rad(deg);
  const Vec2<double> d(std::sin(a), -std::cos(a));
  const Vec2<double> c(kFrame.cu(), kFrame.cv());
  return LineSegment::from_endpoints(kFrame, c - half * d, c + half * d);
}

}  // namespace

TEST_CASE("parse one horizontal segment") {
  std::istringstream in("# comment\n\n0 0 10 0\n");
  const auto r = parse_segments(in, kFrame);
  REQUIRE(r.set.size() == 1);
  CHECK(r.set[0].length == doctest::Approx(10.0));
  CHECK(r.set[0].image_angle() == doctest::Approx(0.0));
}

TEST_CASE("zero-length rows are rejected with their line numbers") {
  std::istringstream in("0 0 10 0\n5 5 5 5\n1 1 2 2\n7 7 7 7\n");
  try {
    parse_segments(in, kFrame);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("2, 4") != std::string::npos);
  }
  std::istringstream again("0 0 10 0\n5 5 5 5\n1 1 2 2\n7 7 7 7\n");
  const auto r = parse_segments(again, kFrame, {.skip_degenerate = true});
  CHECK(r.set.size() == 2);
  CHECK(r.rejected_rows == std::vector<std::size_t>{2, 4});
}

TEST_CASE("malformed rows") {
  std::istringstream few("1 2 3\n");
  CHECK_THROWS_AS(parse_segments(few, kFrame), ParseError);
  std::istringstream extra("1 2 3 4 5\n");
  CHECK_THROWS_AS(parse_segments(extra, kFrame), ParseError);
  std::istringstream nan("1 2 nan 4\n");
  CHECK_THROWS_AS(parse_segments(nan, kFrame), ParseError);
}

TEST_CASE("endpoints are clamped into the frame") {
  std::istringstream in("-10 -10 700 500\n");
  const auto r = parse_segments(in, kFrame);
  REQUIRE(r.set.size() == 1);
  CHECK(r.set[0].p1 == Vec2<double>(0, 0));
  CHECK(r.set[0].p2 == Vec2<double>(640, 480));
}

TEST_CASE("100 rows match an independent join") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 640), v(0, 480);
  std::ostringstream file;
  std::vector<std::array<double, 4>> rows;
  for (int i = 0; i < 100; ++i) {
    rows.push_back({u(rng), v(rng), u(rng), v(rng)});
    file << std::setprecision(17) << rows.back()[0] << ' ' << rows.back()[1] << ' ' << rows.back()[2] << ' '
         << rows.back()[3] << '\n';
  }
  std::istringstream in(file.str());
  const auto r = parse_segments(in, kFrame);
  REQUIRE(r.set.size() == 100);
  const double rho = 2.0 / 640;
  for (int i = 0; i < 100; ++i) {
    const Vec3<double> a(rho * (rows[i][0] - 320), rho * (rows[i][1] - 240), 1);
    const Vec3<double> b(rho * (rows[i][2] - 320), rho * (rows[i][3] - 240), 1);
    const Vec3<double> l = a.cross(b).normalized();
    const Vec3<double> got = r.set[i].line.coords();
    CHECK(std::min((got - l).norm(), (got + l).norm()) < 1e-12);
  }
}

TEST_CASE("write and read back") {
  std::istringstream in("1.5 2.25 300 400\n10 10 20 30\n");
  const auto r = parse_segments(in, kFrame);
  std::ostringstream out;
  write_segments(out, r.set);
  std::istringstream in2(out.str());
  const auto r2 = parse_segments(in2, kFrame);
  REQUIRE(r2.set.size() == 2);
  CHECK(r2.set[0].p1 == r.set[0].p1);
  CHECK(r2.set[1].p2 == r.set[1].p2);
}

TEST_CASE("filter_for_horizon") {
  const double theta_ver = deg2rad(10.0), theta_hor = deg2rad(1.5);
  const SphereLined zenith = SphereLined::from_unit(Vec3<double>::UnitX());  // vertical through centre
  const SphereLined h = SphereLined::from_unit(Vec3<double>::UnitY());       // horizontal through centre
  SegmentSet set;
  set.frame = kFrame;
  set.segments = {centred(5.0), centred(89.0), centred(45.0)};
  CHECK(angle(set[0].line, zenith) == doctest::Approx(deg2rad(5.0)));
  CHECK(angle(set[1].line, h) == doctest::Approx(deg2rad(1.0)));
  CHECK(filter_for_horizon(set, zenith, h, theta_ver, theta_hor) == std::vector<std::uint32_t>{2});

  SegmentSet empty;
  empty.frame = kFrame;
  CHECK(filter_for_horizon(empty, zenith, h, theta_ver, theta_hor).empty());
}

TEST_CASE("select_vertical_candidates") {
  const SphereLined zenith = SphereLined::from_unit(Vec3<double>::UnitX());
  SegmentSet set;
  set.frame = kFrame;
  set.segments = {centred(0.0), centred(10.0), centred(9.9), centred(30.0)};
  const double theta = direction_angle(set[1].line, zenith);  // boundary: excluded
  CHECK(select_vertical_candidates(set, zenith, theta) == std::vector<std::uint32_t>{0, 2});

  // Off-centre verticals count by image direction.
  set.segments.push_back(LineSegment::from_endpoints(kFrame, {20, 50}, {21, 400}));
  CHECK(select_vertical_candidates(set, zenith, deg2rad(10.0)).back() == 4);

  // Mixed set against a brute-force angle between image directions.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 640), v(0, 480);
  SegmentSet mixed;
  mixed.frame = kFrame;
  for (int i = 0; i < 200; ++i) {
    const Vec2<double> a(u(rng), v(rng)), b(u(rng), v(rng));
    if ((a - b).norm() < 1) continue;
    mixed.segments.push_back(LineSegment::from_endpoints(kFrame, a, b));
  }
  std::vector<std::uint32_t> expect;
  for (std::uint32_t i = 0; i < mixed.size(); ++i) {
    const Vec2<double> d = (mixed[i].p2 - mixed[i].p1).normalized();
    if (std::acos(std::min(1.0, std::abs(d.y()))) < deg2rad(10.0)) expect.push_back(i);
  }
  CHECK(select_vertical_candidates(mixed, zenith, deg2rad(10.0)) == expect);
}

TEST_CASE("subset keeps frame and order") {
  SegmentSet set;
  set.frame = kFrame;
  set.segments = {centred(0.0), centred(20.0), centred(40.0)};
  const std::vector<std::uint32_t> ids{2, 0};
  const auto s = subset(set, ids);
  REQUIRE(s.size() == 2);
  CHECK(s[0].p1 == set[2].p1);
  CHECK(s.frame.width == 640);
}
