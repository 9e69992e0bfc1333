#pragma once

// Horizon parameterization and the global-context prior.
//
// A horizon is stored as (alpha, offset): alpha in [-pi/2, pi/2) is the
// image-space direction angle (u right, v down) and offset is SIGNED, in
// pixels, measured from the principal point along the unit normal
// n(alpha) = (sin alpha, -cos alpha). For |alpha| < pi/2 that normal points
// up the image, so a positive offset puts the horizon above the centre.
//
// The unsigned form (alpha in [-pi, pi), offset >= 0) folds onto this one by
// (alpha +- pi, -offset).

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "hfvp/geom.hpp"

namespace hfvp {

inline constexpr std::size_t kCategoricalBins = 500;
inline constexpr double kDefaultKappaOverHeight = 0.2;

struct HorizonParam {
  double alpha = 0.0;
  double offset = 0.0;
};

/// w = atan(o / kappa). Requires o >= 0, kappa > 0.
double squash(double offset, double kappa);
/// Inverse of squash on [0, pi/2).
double unsquash(double w, double kappa);

/// Sign-preserving squash over the whole real line, onto (-pi/2, pi/2).
double signed_squash(double offset, double kappa);
double signed_unsquash(double w, double kappa);

/// Maps any (alpha, offset) onto the canonical alpha range.
HorizonParam fold_param(double alpha, double offset);

/// Horizon through the principal point's normal at the given offset.
SphereLined horizon_line(const CameraFramed& frame, const HorizonParam& param);
HorizonParam param_from_line(const CameraFramed& frame, const SphereLined& line);

/// Image line through the principal point perpendicular to a horizon of
/// slope alpha, as a sphere line: (cos alpha, sin alpha, 0).
SphereLined zenith_direction_from_slope(double alpha);
/// Horizon slope implied by a zenith direction through the principal point.
double slope_from_zenith_direction(const SphereLined& zenith_dir);

/// Two categorical distributions over uniformly binned domains.
struct CategoricalPrior {
  std::vector<double> alpha_bins;
  std::vector<double> w_bins;
  std::array<double, 2> alpha_domain{-std::numbers::pi / 2, std::numbers::pi / 2};
  std::array<double, 2> w_domain{-std::numbers::pi / 2, std::numbers::pi / 2};
  double kappa_over_height = kDefaultKappaOverHeight;

  /// Throws InvalidArgument on empty/negative bins, sums off 1 by more than
  /// 1e-6, or an inverted/out-of-range domain.
  void validate() const;

  /// True for the unsigned layout with non-negative w (side of the
  /// principal point carried by alpha over a full turn).
  bool unsigned_offsets() const { return w_domain[0] >= 0.0; }

  double alpha_bin_width() const;
  double w_bin_width() const;
  double alpha_bin_center(std::size_t k) const;
  double w_bin_center(std::size_t k) const;
};

enum class PriorSource { FileBacked, NoContext };

/// Continuous horizon prior: Gaussians on alpha and on the signed offset,
/// or the uniform no-context fallback.
struct HorizonPrior {
  PriorSource source = PriorSource::FileBacked;
  double alpha_mean = 0.0;
  double alpha_std = 0.0;
  double o_mean = 0.0;
  double o_std = 0.0;
  /// No-context only: alpha is pinned to alpha_mean.
  bool alpha_fixed = false;
  /// No-context only: offsets are uniform over this range.
  std::array<double, 2> offset_range{0.0, 0.0};
  /// Set when a std was raised to the one-bin-width floor.
  bool std_floored = false;
  /// Retained for MAP estimates when fitted from a categorical.
  std::optional<CategoricalPrior> categorical;
  double kappa = 0.0;

  static HorizonPrior gaussian(double alpha_mean, double alpha_std, double o_mean, double o_std);
};

/// Moment-matched Gaussians from n_samples bin draws. Offsets are moment-
/// matched in pixels (after unsquash), not in w.
HorizonPrior fit_gaussian(const CategoricalPrior& cat, double image_height,
                          std::size_t n_samples = 5000, std::uint64_t seed = 0);

/// alpha = 0, offsets uniform on [-2H, 2H].
HorizonPrior no_context_prior(const CameraFramed& frame);

/// Mode of the prior. Categorical-backed priors use the bin with the
/// highest density (offset density includes the dw/do Jacobian); plain
/// Gaussians return their means. Throws UnsupportedMode for no-context.
HorizonParam map_estimate(const HorizonPrior& prior);

/// Discretizes Gaussians over the signed layout; used to fabricate priors
/// for synthetic scenes.
CategoricalPrior categorical_from_gaussian(double alpha_mean, double alpha_std, double o_mean,
                                           double o_std, double kappa_over_height, double height,
                                           std::size_t bins = kCategoricalBins);

CategoricalPrior load_prior_json(const std::filesystem::path& path);
CategoricalPrior parse_prior_json(const std::string& text);
std::string prior_to_json(const CategoricalPrior& cat);

}  // namespace hfvp
