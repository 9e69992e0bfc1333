#pragma once

#include <cstddef>
#include <stdexcept>

#include "hfvp/geom.hpp"

namespace hfvp {

/// Algorithm parameters. Defaults are the published values for an H x W
/// image; rho comes from the CameraFrame and kappa = kappa_over_height * H.
struct AlgorithmParams {
  double theta_con = deg2rad(2.0);
  double theta_ver = deg2rad(10.0);
  double theta_hor = deg2rad(1.5);
  double theta_dist = deg2rad(33.0);
  std::size_t samples = 300;  // horizon candidates, S
  std::size_t subset = 20;    // segments intersected per candidate, M
  double kappa_over_height = 0.2;
  std::size_t em_iters = 3;
  std::size_t ransac_budget = 500;
  /// Zenith inlier set must exceed this fraction of the vertical candidates.
  double zenith_min_inlier_fraction = 0.02;

  void validate() const {
    if (!(theta_con > 0) || !(theta_ver > 0) || !(theta_hor > 0) || !(theta_dist > 0)) {
      throw InvalidArgument("all angle thresholds must be positive");
    }
    if (samples < 1 || subset < 1) throw InvalidArgument("samples and subset must be >= 1");
    if (!(kappa_over_height > 0)) throw InvalidArgument("kappa_over_height must be positive");
  }
};

}  // namespace hfvp
