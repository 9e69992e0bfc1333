#include "hfvp/raster.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

namespace hfvp {

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

int pgm_int(std::istream& in, const char* what) {
  const std::string tok = pgm_token(in);
  try {
    std::size_t pos = 0;
    const int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("PGM: bad ") + what + " '" + tok + "'");
  }
}

double otsu_threshold(const std::vector<double>& values, double max_value) {
  constexpr int kBins = 256;
  std::array<double, kBins> hist{};
  for (double v : values) {
    const int b = std::min(kBins - 1, static_cast<int>(v / max_value * (kBins - 1) + 0.5));
    hist[b] += 1.0;
  }
  const double total = static_cast<double>(values.size());
  double sum_all = 0.0;
  for (int i = 0; i < kBins; ++i) sum_all += i * hist[i];

  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_bin = 0;
  for (int t = 0; t < kBins; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = t;
    }
  }
  // Pixels strictly above the upper edge of best_bin are edges.
  return (best_bin + 0.5) / (kBins - 1) * max_value;
}

double angle_diff_mod_pi(double a, double b) {
  double d = std::fmod(std::abs(a - b), std::numbers::pi);
  return std::min(d, std::numbers::pi - d);
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
  if (pgm_token(in) != "P5") {
    throw ParseError("unsupported raster format: expected binary PGM (P5)");
  }
  const int w = pgm_int(in, "width");
  const int h = pgm_int(in, "height");
  const int maxval = pgm_int(in, "maxval");
  if (w <= 0 || h <= 0) throw ParseError("PGM: non-positive dimensions");
  if (maxval <= 0 || maxval > 255) throw ParseError("PGM: only 8-bit maxval is supported");

  GrayImage img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw ParseError("PGM: truncated pixel data");
  }
  if (maxval != 255) {
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(std::lround(p * 255.0 / maxval));
  }
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open image " + path.string());
  return read_pgm(in);
}

void write_pgm(std::ostream& out, const GrayImage& image) {
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
}

SegmentSet detect_segments(const GrayImage& image, const CameraFramed& frame,
                           const DetectorOptions& options) {
  if (image.width != static_cast<int>(frame.width) || image.height != static_cast<int>(frame.height)) {
    throw InvalidArgument("image dimensions do not match the camera frame");
  }
  SegmentSet out;
  out.frame = frame;
  const int w = image.width;
  const int h = image.height;
  if (w < 3 || h < 3) return out;

  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> mag(n, 0.0), level_angle(n, 0.0);
  double max_mag = 0.0;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      auto I = [&](int dx, int dy) { return static_cast<double>(image.at(x + dx, y + dy)); };
      const double gx = (I(1, -1) + 2 * I(1, 0) + I(1, 1)) - (I(-1, -1) + 2 * I(-1, 0) + I(-1, 1));
      const double gy = (I(-1, 1) + 2 * I(0, 1) + I(1, 1)) - (I(-1, -1) + 2 * I(0, -1) + I(1, -1));
      const std::size_t k = static_cast<std::size_t>(y) * w + x;
      mag[k] = std::hypot(gx, gy);
      // Level lines run perpendicular to the gradient.
      double a = std::atan2(gx, -gy);
      if (a < 0) a += std::numbers::pi;
      level_angle[k] = a;
      max_mag = std::max(max_mag, mag[k]);
    }
  }
  if (max_mag <= 0.0) return out;

  const double threshold = otsu_threshold(mag, max_mag);
  std::vector<std::uint32_t> seeds;
  for (std::size_t k = 0; k < n; ++k) {
    if (mag[k] > threshold) seeds.push_back(static_cast<std::uint32_t>(k));
  }
  std::stable_sort(seeds.begin(), seeds.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return mag[a] > mag[b]; });

  std::vector<char> used(n, 0);
  std::vector<std::uint32_t> region, queue;
  for (std::uint32_t seed : seeds) {
    if (used[seed]) continue;
    region.clear();
    queue.assign(1, seed);
    used[seed] = 1;
    double sx = std::cos(2 * level_angle[seed]);
    double sy = std::sin(2 * level_angle[seed]);
    double region_angle = level_angle[seed];
    while (!queue.empty()) {
      const std::uint32_t k = queue.back();
      queue.pop_back();
      region.push_back(k);
      const int x = static_cast<int>(k % w);
      const int y = static_cast<int>(k / w);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::uint32_t nk = static_cast<std::uint32_t>(ny * w + nx);
          if (used[nk] || mag[nk] <= threshold) continue;
          if (angle_diff_mod_pi(level_angle[nk], region_angle) > options.angle_tolerance) continue;
          used[nk] = 1;
          queue.push_back(nk);
          sx += std::cos(2 * level_angle[nk]);
          sy += std::sin(2 * level_angle[nk]);
          region_angle = 0.5 * std::atan2(sy, sx);
          if (region_angle < 0) region_angle += std::numbers::pi;
        }
      }
    }
    if (region.size() < options.min_region_pixels) continue;

    // Magnitude-weighted principal axis of pixel centres.
    double wsum = 0.0;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (auto k : region) {
      const Eigen::Vector2d c(k % w + 0.5, k / w + 0.5);
      mean += mag[k] * c;
      wsum += mag[k];
    }
    mean /= wsum;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (auto k : region) {
      const Eigen::Vector2d d = Eigen::Vector2d(k % w + 0.5, k / w + 0.5) - mean;
      cov += mag[k] * d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    const Eigen::Vector2d dir = eig.eigenvectors().col(1);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto k : region) {
      const double t = (Eigen::Vector2d(k % w + 0.5, k / w + 0.5) - mean).dot(dir);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    if (hi - lo < options.min_length) continue;
    Vec2<double> p1 = mean + lo * dir;
    Vec2<double> p2 = mean + hi * dir;
    p1 = p1.cwiseMax(Vec2<double>::Zero()).cwiseMin(Vec2<double>(frame.width, frame.height));
    p2 = p2.cwiseMax(Vec2<double>::Zero()).cwiseMin(Vec2<double>(frame.width, frame.height));
    if ((p2 - p1).norm() < options.min_length) continue;
    out.segments.push_back(LineSegment::from_endpoints(frame, p1, p2));
  }
  return out;
}

}  // namespace hfvp
