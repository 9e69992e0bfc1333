#include "hfvp/hvp.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "hfvp/random.hpp"

namespace hfvp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::uint32_t> consistent_ids(const SpherePointd& p, const SegmentSet& set,
                                          std::span<const std::uint32_t> ids, double theta_con) {
  std::vector<std::uint32_t> out;
  for (auto id : ids) {
    if (consistency(p, set[id].line, theta_con) > 0.0) out.push_back(id);
  }
  return out;
}

}  // namespace

std::vector<HorizonCandidate> sample_candidates(const HorizonPrior& prior, const SphereLined& zenith_dir,
                                                const CameraFramed& frame, std::size_t samples,
                                                std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("sample_candidates: need at least one sample");
  const double alpha = slope_from_zenith_direction(zenith_dir);
  Rng rng(derive_seed(seed, stream::kSampling));

  std::vector<double> offsets;
  offsets.reserve(samples);
  if (prior.source == PriorSource::NoContext) {
    std::uniform_real_distribution<double> uniform(prior.offset_range[0], prior.offset_range[1]);
    for (std::size_t i = 0; i < samples; ++i) offsets.push_back(uniform(rng));
  } else {
    offsets.push_back(map_estimate(prior).offset);
    std::normal_distribution<double> normal(prior.o_mean, prior.o_std);
    while (offsets.size() < samples) offsets.push_back(normal(rng));
  }

  std::vector<HorizonCandidate> out;
  out.reserve(samples);
  for (double o : offsets) {
    HorizonCandidate c;
    c.param = {alpha, o};
    c.line = horizon_line(frame, c.param);
    out.push_back(std::move(c));
  }
  return out;
}

double vp_weight(const SpherePointd& p, const SegmentSet& set, std::span<const std::uint32_t> ids,
                 double theta_con) {
  double w = 0.0;
  for (auto id : ids) w += consistency(p, set[id].line, theta_con);
  return w;
}

double position_on_line(const Eigen::Matrix<double, 3, 2>& basis, const SpherePointd& p) {
  const Vec2<double> lambda = basis.transpose() * p.coords();
  double phi = std::atan2(lambda.y(), lambda.x());
  if (phi < 0) phi += std::numbers::pi;
  if (phi >= std::numbers::pi) phi -= std::numbers::pi;
  return phi;
}

std::vector<SpherePointd> VPInitialization::selected() const {
  std::vector<SpherePointd> out;
  out.reserve(selection.nodes.size());
  for (auto i : selection.nodes) out.push_back(points[i]);
  return out;
}

VPInitialization init_vps(const SphereLined& h, const SegmentSet& set,
                          std::span<const std::uint32_t> filtered, const AlgorithmParams& params,
                          std::uint64_t seed) {
  VPInitialization init;
  if (filtered.empty()) return init;

  // Partial Fisher-Yates: the first m entries are a uniform sample without
  // replacement.
  std::vector<std::uint32_t> pool(filtered.begin(), filtered.end());
  const std::size_t m = std::min(params.subset, pool.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }

  const auto basis = null_space_basis<double>(h.coords());
  std::vector<double> positions, weights;
  for (std::size_t i = 0; i < m; ++i) {
    SpherePointd p;
    try {
      p = meet(set[pool[i]].line, h);
    } catch (const DegenerateGeometry&) {
      continue;
    }
    init.points.push_back(p);
    positions.push_back(position_on_line(basis, p));
    weights.push_back(vp_weight(p, set, filtered, params.theta_con));
  }
  init.graph = VPGraph::proximity(std::move(positions), std::move(weights), params.theta_dist);
  init.selection = mwis_ring(init.graph);
  return init;
}

ConstrainedFit fit_vp_on_line(const SphereLined& h, std::span<const SphereLined> lines) {
  if (lines.empty()) throw DegenerateGeometry("fit_vp_on_line: no lines");
  const Eigen::Matrix<double, 3, 2> basis = null_space_basis<double>(h.coords());
  Eigen::MatrixX2d A(static_cast<Eigen::Index>(lines.size()), 2);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    A.row(static_cast<Eigen::Index>(i)) = lines[i].coords().transpose() * basis;
  }
  Eigen::JacobiSVD<Eigen::MatrixX2d> svd(A, Eigen::ComputeFullV);
  const Vec2<double> lambda0 = svd.matrixV().col(1);

  ConstrainedFit fit;
  fit.point = SpherePointd::normalized(canonical_sign<double>(basis * lambda0));
  fit.lambda = basis.transpose() * fit.point.coords();
  fit.cost = (A * fit.lambda).norm();
  return fit;
}

std::vector<RefinedVP> refine_vps(const SphereLined& h, std::span<const SpherePointd> vps,
                                  const SegmentSet& set, std::span<const std::uint32_t> filtered,
                                  double theta_con, std::size_t em_iters) {
  std::vector<RefinedVP> out;
  std::vector<SphereLined> lines;
  for (const auto& start : vps) {
    SpherePointd p = start;
    std::vector<std::uint32_t> previous;
    for (std::size_t it = 0; it < em_iters; ++it) {
      auto support = consistent_ids(p, set, filtered, theta_con);
      if (support.empty() || support == previous) break;
      lines.clear();
      for (auto id : support) lines.push_back(set[id].line);
      p = fit_vp_on_line(h, lines).point;
      previous = std::move(support);
    }
    auto support = consistent_ids(p, set, filtered, theta_con);
    if (support.empty()) continue;
    out.push_back({p, std::move(support)});
  }
  return out;
}

double score_weights(std::span<const double> weights) {
  std::vector<double> w(weights.begin(), weights.end());
  std::sort(w.begin(), w.end(), std::greater<>());
  double s = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(2, w.size()); ++i) s += w[i];
  return s;
}

void score_candidate(HorizonCandidate& candidate, const SegmentSet& set,
                     std::span<const std::uint32_t> filtered, const AlgorithmParams& params) {
  std::vector<std::pair<double, SpherePointd>> weighted;
  weighted.reserve(candidate.vps.size());
  for (const auto& p : candidate.vps) {
    weighted.emplace_back(vp_weight(p, set, filtered, params.theta_con), p);
  }
  std::stable_sort(weighted.begin(), weighted.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  candidate.vps.clear();
  candidate.vp_weights.clear();
  for (const auto& [w, p] : weighted) {
    const bool separated = std::all_of(candidate.vps.begin(), candidate.vps.end(),
                                       [&](const SpherePointd& q) { return angle(p, q) > params.theta_dist; });
    if (!separated) continue;
    candidate.vps.push_back(p);
    candidate.vp_weights.push_back(w);
  }
  candidate.score = score_weights(candidate.vp_weights);
}

void evaluate_candidate(HorizonCandidate& candidate, const SegmentSet& set, const SphereLined& zenith_dir,
                        const AlgorithmParams& params, std::uint64_t seed) {
  candidate.vps.clear();
  candidate.vp_weights.clear();
  candidate.score = 0.0;
  const auto filtered =
      filter_for_horizon(set, zenith_dir, candidate.line, params.theta_ver, params.theta_hor);
  if (filtered.empty()) return;

  const VPInitialization init = init_vps(candidate.line, set, filtered, params, seed);
  const auto starts = init.selected();
  for (auto& r : refine_vps(candidate.line, starts, set, filtered, params.theta_con, params.em_iters)) {
    candidate.vps.push_back(r.point);
  }
  score_candidate(candidate, set, filtered, params);
}

namespace {

std::vector<int> assign_segments(const SegmentSet& set, std::span<const SpherePointd> vps, double theta_con) {
  std::vector<int> out(set.size(), -1);
  for (std::size_t j = 0; j < set.size(); ++j) {
    double best = 0.0;
    for (std::size_t k = 0; k < vps.size(); ++k) {
      const double c = consistency(vps[k], set[j].line, theta_con);
      if (c > best) {
        best = c;
        out[j] = static_cast<int>(k);
      }
    }
  }
  return out;
}

HorizonParam fallback_horizon(const HorizonPrior& prior) {
  if (prior.source == PriorSource::NoContext) return {prior.alpha_mean, 0.0};
  return map_estimate(prior);
}

}  // namespace

DetectionResult detect(const SegmentSet& set, const HorizonPrior& prior, const AlgorithmParams& params,
                       std::uint64_t seed) {
  params.validate();
  const auto t0 = Clock::now();
  const CameraFramed& frame = set.frame;
  DetectionResult result;
  const SphereLined init_dir = initial_zenith_direction(prior);

  if (set.empty()) {
    result.degraded = true;
    result.zenith.zenith_dir = init_dir;
    result.horizon = fallback_horizon(prior);
    result.horizon_line = horizon_line(frame, result.horizon);
    result.timings.total_s = seconds_since(t0);
    return result;
  }

  result.zenith = detect_zenith(set, init_dir, params, seed);
  result.timings.zenith_s = seconds_since(t0);

  const auto t1 = Clock::now();
  result.candidates = sample_candidates(prior, result.zenith.zenith_dir, frame, params.samples, seed);
  for (std::size_t i = 0; i < result.candidates.size(); ++i) {
    evaluate_candidate(result.candidates[i], set, result.zenith.zenith_dir, params,
                       derive_seed(seed, stream::kCandidate, i));
  }
  result.timings.candidates_s = seconds_since(t1);

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.candidates.size(); ++i) {
    if (result.candidates[i].score > result.candidates[best].score) best = i;
  }
  const HorizonCandidate& winner = result.candidates[best];
  result.best_index = best;
  result.horizon = winner.param;
  result.horizon_line = winner.line;
  result.vps = winner.vps;
  result.vp_weights = winner.vp_weights;
  result.score = winner.score;
  result.assignments = assign_segments(set, result.vps, params.theta_con);
  result.timings.total_s = seconds_since(t0);
  return result;
}

DetectionResult detect_prior_only(const SegmentSet& set, const HorizonPrior& prior) {
  const auto t0 = Clock::now();
  DetectionResult result;
  result.horizon = map_estimate(prior);
  result.horizon_line = horizon_line(set.frame, result.horizon);
  result.zenith.zenith_dir = zenith_direction_from_slope(result.horizon.alpha);
  result.assignments.assign(set.size(), -1);
  result.timings.total_s = seconds_since(t0);
  return result;
}

}  // namespace hfvp
