#pragma once

// Reference trajectories with closed-form derivatives through snap.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>

#include "quadflat/geom.hpp"

namespace quadflat {

/// Position with derivatives 0..4 plus yaw, yaw rate and yaw acceleration.
template <typename Scalar = double>
struct FlatSample {
  std::array<Vec3<Scalar>, 5> r{Vec3<Scalar>::Zero(), Vec3<Scalar>::Zero(), Vec3<Scalar>::Zero(),
                                Vec3<Scalar>::Zero(), Vec3<Scalar>::Zero()};
  Scalar psi = Scalar(0);
  Scalar psi1 = Scalar(0);
  Scalar psi2 = Scalar(0);
};

/// Value of a scalar function and its first four derivatives.
template <typename Scalar = double>
using Jet4 = std::array<Scalar, 5>;

/// Smooth step s(t) = -20t^7 + 70t^6 - 84t^5 + 35t^4 on [0, 1]; first three
/// derivatives vanish at both ends.
template <typename Scalar>
Jet4<Scalar> sigma(Scalar t) {
  if (!(t >= Scalar(0) && t <= Scalar(1))) throw OutOfDomain("sigma: t outside [0, 1]");
  const Scalar t2 = t * t;
  const Scalar t3 = t2 * t;
  const Scalar t4 = t3 * t;
  return {
      t4 * (Scalar(35) + t * (Scalar(-84) + t * (Scalar(70) + t * Scalar(-20)))),
      t3 * (Scalar(140) + t * (Scalar(-420) + t * (Scalar(420) + t * Scalar(-140)))),
      t2 * (Scalar(420) + t * (Scalar(-1680) + t * (Scalar(2100) + t * Scalar(-840)))),
      t * (Scalar(840) + t * (Scalar(-5040) + t * (Scalar(8400) + t * Scalar(-4200)))),
      Scalar(840) + t * (Scalar(-10080) + t * (Scalar(25200) + t * Scalar(-16800))),
  };
}

/// Time-scaled step sigma_T(t) = T * sigma(t / T), with derivatives
/// sigma_T^(n)(t) = T^(1-n) sigma^(n)(t / T).
template <typename Scalar>
Jet4<Scalar> sigma_T(Scalar t, Scalar T) {
  if (!(T > Scalar(0))) throw OutOfDomain("sigma_T: T must be positive");
  if (!(t >= Scalar(0) && t <= T)) throw OutOfDomain("sigma_T: t outside [0, T]");
  const Jet4<Scalar> s = sigma(t / T);
  Jet4<Scalar> out;
  Scalar scale = T;
  for (std::size_t n = 0; n < 5; ++n) {
    out[n] = scale * s[n];
    scale /= T;
  }
  return out;
}

/// Derivatives of f(phi(t)) given f^(k) evaluated at phi(t) and the jet of phi.
template <typename Scalar>
Jet4<Scalar> compose(const Jet4<Scalar>& f, const Jet4<Scalar>& phi) {
  const Scalar p1 = phi[1], p2 = phi[2], p3 = phi[3], p4 = phi[4];
  return {
      f[0],
      f[1] * p1,
      f[2] * p1 * p1 + f[1] * p2,
      f[3] * p1 * p1 * p1 + Scalar(3) * f[2] * p1 * p2 + f[1] * p3,
      f[4] * p1 * p1 * p1 * p1 + Scalar(6) * f[3] * p1 * p1 * p2 +
          f[2] * (Scalar(3) * p2 * p2 + Scalar(4) * p1 * p3) + f[1] * p4,
  };
}

template <typename Scalar>
Jet4<Scalar> cos_jet(const Jet4<Scalar>& phi) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(phi[0]), s = sin(phi[0]);
  return compose<Scalar>({c, -s, -c, s, c}, phi);
}

template <typename Scalar>
Jet4<Scalar> sin_jet(const Jet4<Scalar>& phi) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(phi[0]), s = sin(phi[0]);
  return compose<Scalar>({s, c, -s, -c, s}, phi);
}

enum class YawPolicy { Zero, Tangent };

/// Helix [cos(W s_T(t)), sin(W s_T(t)), 0.1 s_T(t)] for t in [0, T].
template <typename Scalar>
FlatSample<Scalar> helix(Scalar omega, Scalar t, Scalar T, YawPolicy yaw = YawPolicy::Zero) {
  const Jet4<Scalar> s = sigma_T(t, T);
  Jet4<Scalar> angle;
  for (std::size_t n = 0; n < 5; ++n) angle[n] = omega * s[n];
  const Jet4<Scalar> cx = cos_jet(angle);
  const Jet4<Scalar> sy = sin_jet(angle);
  FlatSample<Scalar> out;
  for (std::size_t n = 0; n < 5; ++n) {
    out.r[n] = Vec3<Scalar>(cx[n], sy[n], Scalar(0.1) * s[n]);
  }
  if (yaw == YawPolicy::Tangent && omega != Scalar(0)) {
    // The horizontal velocity of a circle traversed at angle phi points along
    // phi + pi/2 (counter-clockwise) or phi - pi/2.
    const Scalar offset = omega > Scalar(0) ? std::numbers::pi_v<Scalar> / 2 : -std::numbers::pi_v<Scalar> / 2;
    out.psi = wrap_angle(angle[0] + offset);
    out.psi1 = angle[1];
    out.psi2 = angle[2];
  }
  return out;
}

template <typename Scalar>
FlatSample<Scalar> hover(const Vec3<Scalar>& point, Scalar psi = Scalar(0)) {
  FlatSample<Scalar> out;
  out.r[0] = point;
  out.psi = psi;
  return out;
}

/// Time-indexed reference used by the simulation engine.
using Trajectory = std::function<FlatSample<double>(double)>;

/// Helix over [0, T]; past T the end point is held at rest.
inline Trajectory make_helix(double omega, double T, YawPolicy yaw = YawPolicy::Zero) {
  return [=](double t) {
    if (t <= T) return helix(omega, t > 0.0 ? t : 0.0, T, yaw);
    FlatSample<double> end = helix(omega, T, T, yaw);
    return hover(end.r[0], end.psi);
  };
}

inline Trajectory make_hover(const Vector3d& point, double psi = 0.0) {
  return [=](double) { return hover(point, psi); };
}

}  // namespace quadflat
