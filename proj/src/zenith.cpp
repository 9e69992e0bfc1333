#include "hfvp/zenith.hpp"

#include <Eigen/SVD>

#include "hfvp/random.hpp"

namespace hfvp {

SphereLined initial_zenith_direction(const HorizonPrior& prior) {
  if (prior.source == PriorSource::NoContext) {
    return zenith_direction_from_slope(prior.alpha_mean);
  }
  return zenith_direction_from_slope(map_estimate(prior).alpha);
}

SpherePointd algebraic_vp(std::span<const SphereLined> lines) {
  if (lines.size() < 2) {
    throw DegenerateGeometry("algebraic_vp needs at least two lines");
  }
  Eigen::MatrixX3d L(static_cast<Eigen::Index>(lines.size()), 3);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    L.row(static_cast<Eigen::Index>(i)) = lines[i].coords().transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixX3d> svd(L, Eigen::ComputeFullV);
  return SpherePointd::normalized(canonical_sign<double>(svd.matrixV().col(2)));
}

ZenithResult detect_zenith(const SegmentSet& set, const SphereLined& init_dir,
                           const AlgorithmParams& params, std::uint64_t seed) {
  ZenithResult result;
  result.zenith_dir = init_dir;
  result.candidate_ids = select_vertical_candidates(set, init_dir, params.theta_ver);
  const auto& cand = result.candidate_ids;
  const std::size_t n = cand.size();
  if (n < 2) return result;
  result.used_ransac = true;

  auto inliers_of = [&](const SpherePointd& p) {
    std::vector<std::uint32_t> in;
    for (auto id : cand) {
      if (consistency(p, set[id].line, params.theta_con) > 0.0) in.push_back(id);
    }
    return in;
  };

  std::vector<std::uint32_t> best;
  auto try_pair = [&](std::size_t a, std::size_t b) {
    SpherePointd p;
    try {
      p = meet(set[cand[a]].line, set[cand[b]].line);
    } catch (const DegenerateGeometry&) {
      return;
    }
    auto in = inliers_of(p);
    // Strict improvement keeps the earliest round on ties.
    if (in.size() > best.size()) best = std::move(in);
  };

  const std::size_t pairs = n * (n - 1) / 2;
  if (pairs <= params.ransac_budget) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) try_pair(a, b);
    }
  } else {
    Rng rng(derive_seed(seed, stream::kZenith));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t round = 0; round < params.ransac_budget; ++round) {
      const std::size_t a = pick(rng);
      std::size_t b = pick(rng);
      while (b == a) b = pick(rng);
      try_pair(a, b);
    }
  }

  if (static_cast<double>(best.size()) <= params.zenith_min_inlier_fraction * static_cast<double>(n) ||
      best.size() < 2) {
    return result;
  }

  std::vector<SphereLined> lines;
  lines.reserve(best.size());
  for (auto id : best) lines.push_back(set[id].line);
  const SpherePointd z = algebraic_vp(lines);

  const SpherePointd centre = SpherePointd::from_unit(Vec3<double>(0.0, 0.0, 1.0));
  try {
    result.zenith_dir = join(centre, z);
  } catch (const DegenerateGeometry&) {
    // Zenith at the principal point: the direction is undefined, keep the prior's.
  }
  result.zenith_vp = z;
  result.inlier_ids.clear();
  for (auto id : best) {
    if (consistency(z, set[id].line, params.theta_con) > 0.0) result.inlier_ids.push_back(id);
  }
  return result;
}

}  // namespace hfvp
