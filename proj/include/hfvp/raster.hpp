#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "hfvp/segments.hpp"

namespace hfvp {

/// 8-bit grayscale image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Binary PGM (P5, maxval <= 255). Anything else throws ParseError.
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(std::ostream& out, const GrayImage& image);

struct DetectorOptions {
  /// Max deviation of a pixel's level-line angle from its region's angle.
  double angle_tolerance = deg2rad(22.5);
  double min_length = 20.0;
  std::size_t min_region_pixels = 10;
};

/// Minimal line-segment detector: Sobel gradients, Otsu threshold on the
/// gradient magnitude, 8-connected region growing on level-line
/// orientation, least-squares line fit. Deterministic.
SegmentSet detect_segments(const GrayImage& image, const CameraFramed& frame,
                           const DetectorOptions& options = {});

}  // namespace hfvp
