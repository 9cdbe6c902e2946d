#pragma once

// Rotation-matrix and heading-vector primitives. Attitude is carried as a
// rotation matrix R = [i_B j_B k_B] whose columns are the body axes expressed
// in the world frame; yaw only ever appears through the heading vector.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "quadflat/errors.hpp"

namespace quadflat {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Rotation = Mat3<Scalar>;

using Vector3d = Vec3<double>;
using Matrix3d = Mat3<double>;

/// Divisor magnitude below which the flatness and heading maps are singular.
inline constexpr double kSingularTol = 1e-9;

/// Tolerance on ||M + M^T|| (elementwise max) accepted by vee().
inline constexpr double kSkewTol = 1e-9;

/// Maximum Frobenius distance from SO(3) accepted by reorthonormalize().
inline constexpr double kNearRotationTol = 1e-3;

template <typename Scalar>
Vec3<Scalar> world_i() {
  return Vec3<Scalar>::UnitX();
}
template <typename Scalar>
Vec3<Scalar> world_j() {
  return Vec3<Scalar>::UnitY();
}
template <typename Scalar>
Vec3<Scalar> world_k() {
  return Vec3<Scalar>::UnitZ();
}

/// Cross-product matrix: hat(v) * w == v.cross(w).
template <typename Derived>
Mat3<typename Derived::Scalar> hat(const Eigen::MatrixBase<Derived>& v) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 3);
  using Scalar = typename Derived::Scalar;
  Mat3<Scalar> m;
  m << Scalar(0), -v(2), v(1),
       v(2), Scalar(0), -v(0),
       -v(1), v(0), Scalar(0);
  return m;
}

/// Inverse of hat(). With M = [[0,a,b],[-a,0,c],[-b,-c,0]] the result is
/// (-c, b, -a).
template <typename Derived>
Vec3<typename Derived::Scalar> vee(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  const Mat3<Scalar> sym = m + m.transpose();
  if (sym.cwiseAbs().maxCoeff() > Scalar(kSkewTol)) {
    throw NonSkewInput("vee: matrix is not skew-symmetric");
  }
  const Scalar a = m(0, 1);
  const Scalar b = m(0, 2);
  const Scalar c = m(1, 2);
  return Vec3<Scalar>(-c, b, -a);
}

/// Matrix exponential of hat(v) (Rodrigues' formula).
template <typename Derived>
Rotation<typename Derived::Scalar> so3_exp(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Scalar theta = v.norm();
  const Mat3<Scalar> k = hat(v);
  if (theta < Scalar(1e-8)) {
    return Mat3<Scalar>::Identity() + k + Scalar(0.5) * k * k;
  }
  return Mat3<Scalar>::Identity() + (sin(theta) / theta) * k +
         ((Scalar(1) - cos(theta)) / (theta * theta)) * k * k;
}

/// Rotation about the world k axis.
template <typename Scalar>
Rotation<Scalar> rotation_about_k(Scalar angle) {
  return so3_exp(Vec3<Scalar>(Scalar(0), Scalar(0), angle));
}

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar angle) {
  using std::remainder;
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar r = remainder(angle, two_pi);
  if (r <= -std::numbers::pi_v<Scalar>) r += two_pi;
  return r;
}

/// Unit vector in the world X-Y plane. Invariant: norm 1 and zero k component.
template <typename Scalar>
class Heading {
 public:
  Heading() : h_(Vec3<Scalar>::UnitX()) {}

  /// Normalizes the horizontal part of v.
  static Heading from_planar(const Vec3<Scalar>& v) {
    Vec3<Scalar> planar(v.x(), v.y(), Scalar(0));
    const Scalar n = planar.norm();
    if (!(n > Scalar(kSingularTol))) {
      throw DegenerateHeading("heading: vector has no horizontal component");
    }
    Heading out;
    out.h_ = planar / n;
    return out;
  }

  const Vec3<Scalar>& vector() const { return h_; }

  /// k x h: the horizontal axis perpendicular to the heading.
  Vec3<Scalar> lateral() const { return Vec3<Scalar>(-h_.y(), h_.x(), Scalar(0)); }

 private:
  Vec3<Scalar> h_;
};

/// Normalized projection of the body forward axis i_B onto the X-Y plane.
template <typename Scalar>
Heading<Scalar> heading_of(const Rotation<Scalar>& r) {
  return Heading<Scalar>::from_planar(r.col(0));
}

template <typename Scalar>
Heading<Scalar> heading_from_yaw(Scalar psi) {
  using std::cos;
  using std::sin;
  return Heading<Scalar>::from_planar(Vec3<Scalar>(cos(psi), sin(psi), Scalar(0)));
}

/// Principal angle of the heading, in (-pi, pi].
template <typename Scalar>
Scalar yaw_of(const Heading<Scalar>& h) {
  using std::atan2;
  const Scalar psi = atan2(h.vector().y(), h.vector().x());
  return psi <= -std::numbers::pi_v<Scalar> ? std::numbers::pi_v<Scalar> : psi;
}

/// Completes a right-handed body basis from a thrust axis and a heading:
///   i_B = ((k x h) x k_B) / ||(k x h) x k_B||,  j_B = k_B x i_B.
template <typename Scalar>
Rotation<Scalar> basis_from_axis_and_heading(const Vec3<Scalar>& k_b, const Heading<Scalar>& h) {
  const Vec3<Scalar> raw = h.lateral().cross(k_b);
  const Scalar n = raw.norm();
  if (!(n > Scalar(kSingularTol))) {
    throw FlipOverSingularity("body basis: thrust axis is aligned with the lateral heading axis");
  }
  Rotation<Scalar> r;
  r.col(0) = raw / n;
  r.col(2) = k_b;
  r.col(1) = k_b.cross(r.col(0));
  return r;
}

/// Modified Gram-Schmidt on the columns: i_B first, then j_B, and k_B = i_B x j_B.
template <typename Scalar>
Rotation<Scalar> reorthonormalize(const Mat3<Scalar>& m) {
  Vec3<Scalar> i = m.col(0);
  const Scalar ni = i.norm();
  Rotation<Scalar> r;
  if (ni > Scalar(0)) {
    i /= ni;
    Vec3<Scalar> j = m.col(1) - i.dot(m.col(1)) * i;
    const Scalar nj = j.norm();
    if (nj > Scalar(0)) {
      j /= nj;
      r.col(0) = i;
      r.col(1) = j;
      r.col(2) = i.cross(j);
      if ((m - r).norm() <= Scalar(kNearRotationTol)) return r;
    }
  }
  throw NotNearRotation("reorthonormalize: matrix is not within tolerance of a rotation");
}

template <typename Scalar>
bool is_rotation(const Mat3<Scalar>& r, Scalar tol = Scalar(1e-9)) {
  using std::abs;
  return (r.transpose() * r - Mat3<Scalar>::Identity()).cwiseAbs().maxCoeff() <= tol &&
         abs(r.determinant() - Scalar(1)) <= tol;
}

}  // namespace quadflat
