#pragma once

// Calibrated homogeneous geometry on the unit (Gaussian) sphere.
//
// Pixel (u, v) lifts to normalize([rho (u - c_u), rho (v - c_v), 1]). Lines
// are unit normals of planes through the origin, so points and lines share
// one representation and join/meet are both normalized cross products. All
// angles identify antipodes: a homogeneous vector and its negation are the
// same point.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>

#include "hfvp/error.hpp"

namespace hfvp {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
constexpr Scalar deg2rad(Scalar deg) {
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}
template <typename Scalar>
constexpr Scalar rad2deg(Scalar rad) {
  return rad * Scalar(180) / std::numbers::pi_v<Scalar>;
}

/// Norm tolerance for unit vectors; 1e-9 for double.
template <typename Scalar>
constexpr Scalar unit_tolerance() {
  if constexpr (std::is_same_v<Scalar, float>) {
    return Scalar(1e-5);
  } else {
    return Scalar(1e-9);
  }
}

/// Cross products with norm below this are treated as degenerate.
template <typename Scalar>
constexpr Scalar degenerate_norm() {
  if constexpr (std::is_same_v<Scalar, float>) {
    return Scalar(1e-6);
  } else {
    return Scalar(1e-12);
  }
}

/// Flips `v` so the third component is non-negative; exact zeros defer to
/// the second, then the first component.
template <typename Scalar>
Vec3<Scalar> canonical_sign(const Vec3<Scalar>& v) {
  for (int i = 2; i >= 0; --i) {
    if (v[i] > Scalar(0)) return v;
    if (v[i] < Scalar(0)) return -v;
  }
  return v;
}

namespace detail {

template <typename Scalar, typename Tag>
class UnitVector {
 public:
  using scalar_type = Scalar;
  using vector_type = Vec3<Scalar>;

  UnitVector() : v_(Scalar(0), Scalar(0), Scalar(1)) {}

  /// Wraps an already-unit vector; throws when the norm is off by more than
  /// unit_tolerance().
  static UnitVector from_unit(const vector_type& v) {
    if (!v.allFinite() || std::abs(v.norm() - Scalar(1)) > unit_tolerance<Scalar>()) {
      throw InvalidArgument("vector is not unit norm");
    }
    return UnitVector(v);
  }

  /// Normalizes `v`; throws DegenerateGeometry for (near-)zero input.
  static UnitVector normalized(const vector_type& v) {
    const Scalar n = v.norm();
    if (!v.allFinite() || n <= degenerate_norm<Scalar>()) {
      throw DegenerateGeometry("cannot normalize a zero vector");
    }
    return UnitVector(v / n);
  }

  const vector_type& coords() const noexcept { return v_; }
  Scalar operator[](int i) const { return v_[i]; }
  Scalar dot(const UnitVector& o) const { return v_.dot(o.v_); }

  UnitVector canonical() const { return UnitVector(canonical_sign(v_)); }
  UnitVector operator-() const { return UnitVector(-v_); }

  template <typename Other>
  UnitVector<Other, Tag> cast() const {
    return UnitVector<Other, Tag>::normalized(v_.template cast<Other>());
  }

 private:
  explicit UnitVector(const vector_type& v) : v_(v) {}
  vector_type v_;
};

struct PointTag {};
struct LineTag {};

}  // namespace detail

/// Point on the calibrated image plane as a unit 3-vector.
template <typename Scalar>
using SpherePoint = detail::UnitVector<Scalar, detail::PointTag>;
/// Image line as the unit normal of its plane through the camera centre.
template <typename Scalar>
using SphereLine = detail::UnitVector<Scalar, detail::LineTag>;

using SpherePointd = SpherePoint<double>;
using SphereLined = SphereLine<double>;

/// Pixel-to-sphere mapping. Principal point defaults to the image centre and
/// rho to 2 / max(width, height).
template <typename Scalar>
struct CameraFrame {
  Scalar width{};
  Scalar height{};
  Vec2<Scalar> principal_point{Vec2<Scalar>::Zero()};
  Scalar rho{};

  static CameraFrame with_defaults(Scalar width, Scalar height) {
    if (!(width > 0) || !(height > 0) || !std::isfinite(width) || !std::isfinite(height)) {
      throw InvalidArgument("frame dimensions must be positive");
    }
    CameraFrame f;
    f.width = width;
    f.height = height;
    f.principal_point = Vec2<Scalar>(width / 2, height / 2);
    f.rho = Scalar(2) / std::max(width, height);
    return f;
  }

  Scalar cu() const { return principal_point.x(); }
  Scalar cv() const { return principal_point.y(); }
};

using CameraFramed = CameraFrame<double>;

template <typename Scalar>
SpherePoint<Scalar> lift_point(const CameraFrame<Scalar>& frame, Scalar u, Scalar v) {
  if (!std::isfinite(u) || !std::isfinite(v)) {
    throw InvalidArgument("lift_point: non-finite pixel coordinate");
  }
  return SpherePoint<Scalar>::normalized(
      Vec3<Scalar>(frame.rho * (u - frame.cu()), frame.rho * (v - frame.cv()), Scalar(1)));
}

/// Sphere point back to pixels; throws for points at (or behind) infinity.
template <typename Scalar>
Vec2<Scalar> unlift_point(const CameraFrame<Scalar>& frame, const SpherePoint<Scalar>& p) {
  const auto& c = p.coords();
  if (std::abs(c.z()) <= degenerate_norm<Scalar>()) {
    throw DegenerateGeometry("point at infinity has no pixel coordinates");
  }
  return Vec2<Scalar>(c.x() / c.z() / frame.rho + frame.cu(),
                      c.y() / c.z() / frame.rho + frame.cv());
}

namespace detail {
template <typename Out, typename Scalar>
Out normalized_cross(const Vec3<Scalar>& a, const Vec3<Scalar>& b, const char* what) {
  const Vec3<Scalar> c = a.cross(b);
  if (c.norm() <= degenerate_norm<Scalar>()) {
    throw DegenerateGeometry(std::string(what) + ": inputs are parallel or antipodal");
  }
  return Out::normalized(canonical_sign<Scalar>(c));
}
}  // namespace detail

/// Line through two points.
template <typename Scalar>
SphereLine<Scalar> join(const SpherePoint<Scalar>& p1, const SpherePoint<Scalar>& p2) {
  return detail::normalized_cross<SphereLine<Scalar>>(p1.coords(), p2.coords(), "join");
}

/// Intersection of two lines.
template <typename Scalar>
SpherePoint<Scalar> meet(const SphereLine<Scalar>& l1, const SphereLine<Scalar>& l2) {
  return detail::normalized_cross<SpherePoint<Scalar>>(l1.coords(), l2.coords(), "meet");
}

/// Smallest angle between two homogeneous directions, in [0, pi/2].
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar angle(const Eigen::MatrixBase<DerivedA>& x,
                                const Eigen::MatrixBase<DerivedB>& y) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar c = std::min(Scalar(1), std::abs(x.dot(y)));
  return std::acos(c);
}

template <typename Scalar, typename TagA, typename TagB>
Scalar angle(const detail::UnitVector<Scalar, TagA>& x, const detail::UnitVector<Scalar, TagB>& y) {
  return angle(x.coords(), y.coords());
}

/// Angle between the image directions of two lines, in [0, pi/2]. Only the
/// first two coordinates matter: the calibrated lift is isotropic, so these
/// are the pixel-space normals up to scale. A line through the principal
/// point (third coordinate 0) has the same direction as any parallel line.
template <typename Scalar>
Scalar direction_angle(const SphereLine<Scalar>& a, const SphereLine<Scalar>& b) {
  const Vec2<Scalar> na = a.coords().template head<2>();
  const Vec2<Scalar> nb = b.coords().template head<2>();
  const Scalar la = na.norm(), lb = nb.norm();
  if (la <= degenerate_norm<Scalar>() || lb <= degenerate_norm<Scalar>()) {
    throw DegenerateGeometry("direction_angle: line at infinity");
  }
  return std::acos(std::min(Scalar(1), std::abs(na.dot(nb)) / (la * lb)));
}

/// Angular distance of a point from a line's great circle, in [0, pi/2].
/// The line normal is orthogonal to every point on the line, so this is
/// |pi/2 - angle(p, l)|.
template <typename Scalar>
Scalar point_line_angle(const SpherePoint<Scalar>& p, const SphereLine<Scalar>& l) {
  const Scalar s = std::min(Scalar(1), std::abs(p.coords().dot(l.coords())));
  return std::asin(s);
}

/// Point-line consistency max(theta_con - dist(p, l), 0), where dist is the
/// angular distance from p to the great circle of l. Peaks at theta_con when
/// p lies on l.
template <typename Scalar>
Scalar consistency(const SpherePoint<Scalar>& p, const SphereLine<Scalar>& l, Scalar theta_con) {
  return std::max(theta_con - point_line_angle(p, l), Scalar(0));
}

/// Pixel-space line a u + b v + c = 0 with a^2 + b^2 = 1.
template <typename Scalar>
struct ImageLine {
  Vec3<Scalar> abc{Scalar(0), Scalar(1), Scalar(0)};

  static ImageLine from_coefficients(const Vec3<Scalar>& coeffs) {
    const Scalar n = coeffs.template head<2>().norm();
    if (!coeffs.allFinite() || n <= degenerate_norm<Scalar>()) {
      throw DegenerateGeometry("image line at infinity");
    }
    Vec3<Scalar> v = coeffs / n;
    // b >= 0, exact b == 0 defers to a.
    if (v[1] < 0 || (v[1] == 0 && v[0] < 0)) v = -v;
    return ImageLine{v};
  }

  static ImageLine through(const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
    return from_coefficients(Vec3<Scalar>(a.x(), a.y(), 1).cross(Vec3<Scalar>(b.x(), b.y(), 1)));
  }

  bool is_vertical(Scalar tol = Scalar(1e-12)) const { return std::abs(abc[1]) <= tol; }

  /// v coordinate at column u; requires a non-vertical line.
  Scalar v_at(Scalar u) const { return -(abc[0] * u + abc[2]) / abc[1]; }

  /// Slope m and intercept b of v = m u + b.
  Vec2<Scalar> slope_intercept() const {
    return Vec2<Scalar>(-abc[0] / abc[1], -abc[2] / abc[1]);
  }
};

using ImageLined = ImageLine<double>;

template <typename Scalar>
ImageLine<Scalar> to_image_line(const CameraFrame<Scalar>& frame, const SphereLine<Scalar>& l) {
  const auto& c = l.coords();
  const Scalar a = c.x() * frame.rho;
  const Scalar b = c.y() * frame.rho;
  return ImageLine<Scalar>::from_coefficients(
      Vec3<Scalar>(a, b, c.z() - a * frame.cu() - b * frame.cv()));
}

template <typename Scalar>
SphereLine<Scalar> to_sphere_line(const CameraFrame<Scalar>& frame, const ImageLine<Scalar>& line) {
  const auto& abc = line.abc;
  return SphereLine<Scalar>::normalized(canonical_sign<Scalar>(
      Vec3<Scalar>(abc[0] / frame.rho, abc[1] / frame.rho,
                   abc[0] * frame.cu() + abc[1] * frame.cv() + abc[2])));
}

/// Two orthonormal vectors spanning the plane orthogonal to `n` (the null
/// space of n^T). Gram-Schmidt against the canonical axis least aligned
/// with n.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 2> null_space_basis(const Vec3<Scalar>& n) {
  int axis = 0;
  n.cwiseAbs().minCoeff(&axis);
  Vec3<Scalar> e = Vec3<Scalar>::Zero();
  e[axis] = Scalar(1);
  const Vec3<Scalar> b1 = (e - n.dot(e) * n).normalized();
  const Vec3<Scalar> b2 = n.cross(b1).normalized();
  Eigen::Matrix<Scalar, 3, 2> basis;
  basis << b1, b2;
  return basis;
}

}  // namespace hfvp
