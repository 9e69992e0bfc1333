#pragma once

#include <optional>
#include <string>

#include "hfvp/eval.hpp"
#include "hfvp/hvp.hpp"

namespace hfvp {

/// Detection result as JSON. Timings are left out unless asked for so that
/// seeded runs serialize byte-identically.
std::string detection_to_json(const DetectionResult& result, const SegmentSet& set, Ablation mode,
                              bool include_timings = false);

struct OverlayOptions {
  std::optional<ImageLined> truth;
  bool draw_candidates = false;
};

/// SVG with segments coloured by VP assignment, the detected horizon and,
/// if given, the ground-truth horizon dashed.
std::string overlay_svg(const DetectionResult& result, const SegmentSet& set, const OverlayOptions& options = {});

}  // namespace hfvp
