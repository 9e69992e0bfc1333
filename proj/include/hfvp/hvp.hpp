#pragma once

// Horizon-first search for horizontal vanishing points: sample horizon
// candidates perpendicular to the zenith direction, pick well-separated VPs
// on each by weighted independent set, refine them on the line, and keep the
// candidate whose best VPs explain the most segments.

#include <cstdint>
#include <span>
#include <vector>

#include "hfvp/mwis.hpp"
#include "hfvp/params.hpp"
#include "hfvp/prior.hpp"
#include "hfvp/segments.hpp"
#include "hfvp/zenith.hpp"

namespace hfvp {

struct HorizonCandidate {
  HorizonParam param;
  SphereLined line;
  /// Refined VPs, heaviest first; pairwise separated by more than theta_dist.
  std::vector<SpherePointd> vps;
  /// Post-refinement consistency sums, parallel to vps.
  std::vector<double> vp_weights;
  double score = 0.0;
};

/// S horizon lines perpendicular to zenith_dir. Offsets come from the
/// prior: uniform over the no-context range, otherwise the MAP offset
/// followed by S - 1 Gaussian draws.
std::vector<HorizonCandidate> sample_candidates(const HorizonPrior& prior, const SphereLined& zenith_dir,
                                                const CameraFramed& frame, std::size_t samples,
                                                std::uint64_t seed);

/// Sum of consistencies of p over the listed segments.
double vp_weight(const SpherePointd& p, const SegmentSet& set, std::span<const std::uint32_t> ids,
                 double theta_con);

/// Ring coordinate of a point on the great circle of h, in [0, pi).
double position_on_line(const Eigen::Matrix<double, 3, 2>& basis, const SpherePointd& p);

struct VPInitialization {
  /// Intersections of the sampled segments with h; graph nodes.
  std::vector<SpherePointd> points;
  VPGraph graph;
  MwisResult selection;

  std::vector<SpherePointd> selected() const;
};

/// Intersects up to params.subset segments (sampled without replacement
/// from `filtered`) with h, weights each intersection by its consistency
/// over all of `filtered`, links pairs within theta_dist and solves MWIS.
VPInitialization init_vps(const SphereLined& h, const SegmentSet& set,
                          std::span<const std::uint32_t> filtered, const AlgorithmParams& params,
                          std::uint64_t seed);

struct ConstrainedFit {
  SpherePointd point;
  /// Coefficients in null_space_basis(h).
  Vec2<double> lambda;
  /// ||L^T B_h lambda||, the smallest singular value of L^T B_h.
  double cost = 0.0;
};

/// M-step: unit p with h.p = 0 minimizing ||L^T p||.
ConstrainedFit fit_vp_on_line(const SphereLined& h, std::span<const SphereLined> lines);

struct RefinedVP {
  SpherePointd point;
  /// Segment ids consistent with `point` after the last E-step.
  std::vector<std::uint32_t> support;
};

/// EM-style refinement on h. E: segments with positive consistency. M:
/// fit_vp_on_line. Stops after em_iters rounds or when the assignment
/// repeats; VPs that lose all support are dropped.
std::vector<RefinedVP> refine_vps(const SphereLined& h, std::span<const SpherePointd> vps,
                                  const SegmentSet& set, std::span<const std::uint32_t> filtered,
                                  double theta_con, std::size_t em_iters);

/// Sum of the two largest weights (one if only one VP, zero if none).
double score_weights(std::span<const double> weights);

/// Recomputes VP weights over `filtered`, sorts heaviest first, drops VPs
/// within theta_dist of a heavier one, and scores the result.
void score_candidate(HorizonCandidate& candidate, const SegmentSet& set,
                     std::span<const std::uint32_t> filtered, const AlgorithmParams& params);

/// Full per-candidate pass: filter, init, refine, score.
void evaluate_candidate(HorizonCandidate& candidate, const SegmentSet& set, const SphereLined& zenith_dir,
                        const AlgorithmParams& params, std::uint64_t seed);

struct Timings {
  double zenith_s = 0.0;
  double candidates_s = 0.0;
  double total_s = 0.0;
};

struct DetectionResult {
  ZenithResult zenith;
  HorizonParam horizon;
  SphereLined horizon_line;
  /// Horizontal VPs of the chosen candidate, heaviest first.
  std::vector<SpherePointd> vps;
  std::vector<double> vp_weights;
  double score = 0.0;
  std::size_t best_index = 0;
  /// Per input segment: index into vps of the most consistent VP, or -1.
  std::vector<int> assignments;
  /// Every candidate, scored; best_index points into this.
  std::vector<HorizonCandidate> candidates;
  /// Set when there were no segments and the horizon fell back to the prior.
  bool degraded = false;
  Timings timings;
};

/// Zenith detection, candidate sampling and scoring; the highest score
/// wins, ties going to the lowest candidate index.
DetectionResult detect(const SegmentSet& set, const HorizonPrior& prior, const AlgorithmParams& params,
                       std::uint64_t seed);

/// Horizon straight from the prior's MAP, no line analysis.
DetectionResult detect_prior_only(const SegmentSet& set, const HorizonPrior& prior);

}  // namespace hfvp
