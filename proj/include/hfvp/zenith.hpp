#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hfvp/params.hpp"
#include "hfvp/prior.hpp"
#include "hfvp/segments.hpp"

namespace hfvp {

struct ZenithResult {
  std::optional<SpherePointd> zenith_vp;
  /// Line through the principal point and the zenith VP.
  SphereLined zenith_dir;
  /// Segments with positive consistency to the final zenith_vp.
  std::vector<std::uint32_t> inlier_ids;
  /// Vertical candidates fed to RANSAC.
  std::vector<std::uint32_t> candidate_ids;
  bool used_ransac = false;
};

/// Zenith direction from the prior's most probable slope. A no-context
/// prior gives the vertical line through the principal point.
SphereLined initial_zenith_direction(const HorizonPrior& prior);

/// Unit p minimizing sum_i (l_i . p)^2: right singular vector of the
/// stacked line matrix with the smallest singular value.
SpherePointd algebraic_vp(std::span<const SphereLined> lines);

/// RANSAC over pairs of near-vertical segments, then an SVD fit on the
/// winning inlier set. Falls back to init_dir when the best set does not
/// exceed params.zenith_min_inlier_fraction of the candidates.
ZenithResult detect_zenith(const SegmentSet& set, const SphereLined& init_dir,
                           const AlgorithmParams& params, std::uint64_t seed);

}  // namespace hfvp
