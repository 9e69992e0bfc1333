#include "hfvp/prior.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "hfvp/random.hpp"

namespace hfvp {

namespace {

constexpr double kPi = std::numbers::pi;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void check_bins(const std::vector<double>& bins, const char* name) {
  if (bins.empty()) throw InvalidArgument(std::string(name) + " is empty");
  double sum = 0.0;
  for (double p : bins) {
    if (!std::isfinite(p) || p < 0.0) {
      throw InvalidArgument(std::string(name) + " has a negative or non-finite probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw InvalidArgument(std::string(name) + " does not sum to 1");
  }
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments sample_moments(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

double squash(double offset, double kappa) {
  if (!(kappa > 0.0)) throw InvalidArgument("squash: kappa must be positive");
  if (!(offset >= 0.0)) throw InvalidArgument("squash: offset must be non-negative");
  return std::atan(offset / kappa);
}

double unsquash(double w, double kappa) {
  if (!(kappa > 0.0)) throw InvalidArgument("unsquash: kappa must be positive");
  if (!(w >= 0.0 && w < kPi / 2)) throw InvalidArgument("unsquash: w outside [0, pi/2)");
  return kappa * std::tan(w);
}

double signed_squash(double offset, double kappa) {
  if (!(kappa > 0.0)) throw InvalidArgument("signed_squash: kappa must be positive");
  if (!std::isfinite(offset)) throw InvalidArgument("signed_squash: non-finite offset");
  return std::atan(offset / kappa);
}

double signed_unsquash(double w, double kappa) {
  if (!(kappa > 0.0)) throw InvalidArgument("signed_unsquash: kappa must be positive");
  if (!(std::abs(w) < kPi / 2)) throw InvalidArgument("signed_unsquash: w outside (-pi/2, pi/2)");
  return kappa * std::tan(w);
}

HorizonParam fold_param(double alpha, double offset) {
  double a = std::fmod(alpha + kPi, 2 * kPi);
  if (a < 0) a += 2 * kPi;
  a -= kPi;  // [-pi, pi)
  if (a >= kPi / 2) return {a - kPi, -offset};
  if (a < -kPi / 2) return {a + kPi, -offset};
  return {a, offset};
}

SphereLined horizon_line(const CameraFramed& frame, const HorizonParam& param) {
  const double nx = std::sin(param.alpha);
  const double ny = -std::cos(param.alpha);
  return SphereLined::normalized(canonical_sign<double>(Vec3<double>(nx, ny, -frame.rho * param.offset)));
}

HorizonParam param_from_line(const CameraFramed& frame, const SphereLined& line) {
  const auto& l = line.coords();
  const double s = l.head<2>().norm();
  if (s <= degenerate_norm<double>()) {
    throw DegenerateGeometry("line at infinity has no horizon parameters");
  }
  const double nx = l.x() / s;
  const double ny = l.y() / s;
  return fold_param(std::atan2(nx, -ny), -l.z() / (s * frame.rho));
}

SphereLined zenith_direction_from_slope(double alpha) {
  return SphereLined::normalized(canonical_sign<double>(Vec3<double>(std::cos(alpha), std::sin(alpha), 0.0)));
}

double slope_from_zenith_direction(const SphereLined& zenith_dir) {
  const auto& l = zenith_dir.coords();
  return fold_param(std::atan2(l.y(), l.x()), 0.0).alpha;
}

void CategoricalPrior::validate() const {
  check_bins(alpha_bins, "alpha_bins");
  check_bins(w_bins, "w_bins");
  if (!(alpha_domain[0] < alpha_domain[1]) || alpha_domain[0] < -kPi - 1e-9 ||
      alpha_domain[1] > kPi + 1e-9) {
    throw InvalidArgument("alpha_domain must be an increasing sub-range of [-pi, pi]");
  }
  if (!(w_domain[0] < w_domain[1]) || w_domain[0] < -kPi / 2 - 1e-9 || w_domain[1] > kPi / 2 + 1e-9) {
    throw InvalidArgument("w_domain must be an increasing sub-range of [-pi/2, pi/2]");
  }
  if (!(kappa_over_height > 0.0)) throw InvalidArgument("kappa_over_height must be positive");
}

double CategoricalPrior::alpha_bin_width() const {
  return (alpha_domain[1] - alpha_domain[0]) / static_cast<double>(alpha_bins.size());
}
double CategoricalPrior::w_bin_width() const {
  return (w_domain[1] - w_domain[0]) / static_cast<double>(w_bins.size());
}
double CategoricalPrior::alpha_bin_center(std::size_t k) const {
  return alpha_domain[0] + (static_cast<double>(k) + 0.5) * alpha_bin_width();
}
double CategoricalPrior::w_bin_center(std::size_t k) const {
  return w_domain[0] + (static_cast<double>(k) + 0.5) * w_bin_width();
}

HorizonPrior HorizonPrior::gaussian(double alpha_mean, double alpha_std, double o_mean, double o_std) {
  if (!(alpha_std > 0.0) || !(o_std > 0.0)) {
    throw InvalidArgument("Gaussian prior needs positive standard deviations");
  }
  HorizonPrior p;
  p.source = PriorSource::FileBacked;
  p.alpha_mean = alpha_mean;
  p.alpha_std = alpha_std;
  p.o_mean = o_mean;
  p.o_std = o_std;
  return p;
}

HorizonPrior fit_gaussian(const CategoricalPrior& cat, double image_height, std::size_t n_samples,
                          std::uint64_t seed) {
  cat.validate();
  if (n_samples < 2) throw InvalidArgument("fit_gaussian needs at least 2 samples");
  if (!(image_height > 0.0)) throw InvalidArgument("fit_gaussian: image height must be positive");
  const double kappa = cat.kappa_over_height * image_height;

  Rng rng(derive_seed(seed, stream::kPriorFit));
  std::discrete_distribution<std::size_t> alpha_dist(cat.alpha_bins.begin(), cat.alpha_bins.end());
  std::discrete_distribution<std::size_t> w_dist(cat.w_bins.begin(), cat.w_bins.end());

  // Samples sit at bin centres; alpha and w are independent, so pairing the
  // i-th draws is a valid joint sample for folding.
  std::vector<double> alphas(n_samples), offsets(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double a = cat.alpha_bin_center(alpha_dist(rng));
    const double w = cat.w_bin_center(w_dist(rng));
    const double o = cat.unsigned_offsets() ? unsquash(w, kappa) : signed_unsquash(w, kappa);
    const HorizonParam folded = fold_param(a, o);
    alphas[i] = folded.alpha;
    offsets[i] = folded.offset;
  }

  const Moments am = sample_moments(alphas);
  const Moments om = sample_moments(offsets);

  HorizonPrior prior;
  prior.source = PriorSource::FileBacked;
  prior.alpha_mean = am.mean;
  prior.alpha_std = am.std;
  prior.o_mean = om.mean;
  prior.o_std = om.std;
  prior.kappa = kappa;
  prior.categorical = cat;

  const double alpha_floor = cat.alpha_bin_width();
  // Pixel extent of the w-bin holding the offset mean.
  const double w_mean = cat.unsigned_offsets() ? squash(std::abs(om.mean), kappa)
                                               : signed_squash(om.mean, kappa);
  const double half = 0.5 * cat.w_bin_width();
  const double lo = std::max(w_mean - half, -kPi / 2 + 1e-12);
  const double hi = std::min(w_mean + half, kPi / 2 - 1e-12);
  const double o_floor = kappa * (std::tan(hi) - std::tan(lo));
  if (prior.alpha_std < alpha_floor) {
    prior.alpha_std = alpha_floor;
    prior.std_floored = true;
  }
  if (prior.o_std < o_floor) {
    prior.o_std = o_floor;
    prior.std_floored = true;
  }
  return prior;
}

HorizonPrior no_context_prior(const CameraFramed& frame) {
  HorizonPrior p;
  p.source = PriorSource::NoContext;
  p.alpha_mean = 0.0;
  p.alpha_std = 0.0;
  p.alpha_fixed = true;
  p.offset_range = {-2.0 * frame.height, 2.0 * frame.height};
  p.o_mean = 0.0;
  p.o_std = (p.offset_range[1] - p.offset_range[0]) / std::sqrt(12.0);
  return p;
}

HorizonParam map_estimate(const HorizonPrior& prior) {
  if (prior.source == PriorSource::NoContext) {
    throw UnsupportedMode("MAP horizon needs a global-context prior");
  }
  if (!prior.categorical) {
    return {prior.alpha_mean, prior.o_mean};
  }
  const CategoricalPrior& cat = *prior.categorical;
  const double alpha = cat.alpha_bin_center(argmax(cat.alpha_bins));

  // Density over o at each bin centre: p_k / dw * dw/do.
  const double kappa = prior.kappa;
  std::size_t best = 0;
  double best_density = -1.0;
  for (std::size_t k = 0; k < cat.w_bins.size(); ++k) {
    const double o = kappa * std::tan(cat.w_bin_center(k));
    const double density = cat.w_bins[k] * kappa / (kappa * kappa + o * o);
    if (density > best_density) {
      best_density = density;
      best = k;
    }
  }
  const double offset = kappa * std::tan(cat.w_bin_center(best));
  return fold_param(alpha, offset);
}

CategoricalPrior categorical_from_gaussian(double alpha_mean, double alpha_std, double o_mean,
                                           double o_std, double kappa_over_height, double height,
                                           std::size_t bins) {
  if (!(alpha_std > 0.0) || !(o_std > 0.0) || bins == 0) {
    throw InvalidArgument("categorical_from_gaussian: bad parameters");
  }
  CategoricalPrior cat;
  cat.kappa_over_height = kappa_over_height;
  cat.alpha_bins.resize(bins);
  cat.w_bins.resize(bins);
  const double kappa = kappa_over_height * height;

  auto fill = [&](std::vector<double>& out, auto edge_value, double mean, double std) {
    for (std::size_t k = 0; k < bins; ++k) {
      out[k] = normal_cdf((edge_value(k + 1) - mean) / std) - normal_cdf((edge_value(k) - mean) / std);
    }
    const double sum = std::accumulate(out.begin(), out.end(), 0.0);
    if (!(sum > 0.0)) throw InvalidArgument("categorical_from_gaussian: no mass inside the domain");
    for (double& p : out) p /= sum;
  };
  const double aw = (cat.alpha_domain[1] - cat.alpha_domain[0]) / static_cast<double>(bins);
  fill(cat.alpha_bins, [&](std::size_t e) { return cat.alpha_domain[0] + static_cast<double>(e) * aw; },
       alpha_mean, alpha_std);
  const double ww = (cat.w_domain[1] - cat.w_domain[0]) / static_cast<double>(bins);
  fill(cat.w_bins,
       [&](std::size_t e) {
         const double w = cat.w_domain[0] + static_cast<double>(e) * ww;
         if (e == 0) return -std::numeric_limits<double>::infinity();
         if (e == bins) return std::numeric_limits<double>::infinity();
         return kappa * std::tan(w);
       },
       o_mean, o_std);
  return cat;
}

CategoricalPrior parse_prior_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("prior JSON: ") + e.what());
  }
  CategoricalPrior cat;
  try {
    cat.alpha_bins = j.at("alpha_bins").get<std::vector<double>>();
    cat.w_bins = j.at("w_bins").get<std::vector<double>>();
    if (j.contains("alpha_domain")) cat.alpha_domain = j["alpha_domain"].get<std::array<double, 2>>();
    if (j.contains("w_domain")) cat.w_domain = j["w_domain"].get<std::array<double, 2>>();
    cat.kappa_over_height = j.value("kappa_over_height", kDefaultKappaOverHeight);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("prior JSON: ") + e.what());
  }
  if (cat.alpha_bins.size() != kCategoricalBins || cat.w_bins.size() != kCategoricalBins) {
    throw ParseError("prior JSON: alpha_bins and w_bins must each hold 500 values");
  }
  try {
    cat.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("prior JSON: ") + e.what());
  }
  return cat;
}

CategoricalPrior load_prior_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open prior file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_prior_json(ss.str());
}

std::string prior_to_json(const CategoricalPrior& cat) {
  nlohmann::json j;
  j["alpha_bins"] = cat.alpha_bins;
  j["w_bins"] = cat.w_bins;
  j["alpha_domain"] = cat.alpha_domain;
  j["w_domain"] = cat.w_domain;
  j["kappa_over_height"] = cat.kappa_over_height;
  return j.dump();
}

}  // namespace hfvp
