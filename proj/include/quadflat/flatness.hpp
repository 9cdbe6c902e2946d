#pragma once

// Differential-flatness maps from (position derivatives, yaw) to attitude,
// thrust and its derivatives, body angular velocity/acceleration and
// feedforward torque. Angular rates are body-frame components; every vector
// written in lower case below (k_B, h, ...) is expressed in the world frame.

#include "quadflat/geom.hpp"
#include "quadflat/trajectory.hpp"
#include "quadflat/vehicle.hpp"

namespace quadflat {

template <typename Scalar = double>
struct Attitude {
  Rotation<Scalar> R;
  Scalar p;
};

template <typename Scalar = double>
struct BodyRates {
  Scalar p1;
  Vec3<Scalar> omega;
};

template <typename Scalar = double>
struct BodyAccel {
  Scalar p2;
  Vec3<Scalar> alpha;
};

template <typename Scalar = double>
struct FlatOutputs {
  Rotation<Scalar> R;
  Scalar p;
  Scalar p1;
  Scalar p2;
  Vec3<Scalar> omega;
  Vec3<Scalar> alpha;
  Vec3<Scalar> tau;
};

namespace detail {
template <typename Scalar>
void require_thrust(Scalar p) {
  if (!(p > Scalar(kSingularTol))) throw ZeroThrustSingularity("flatness: thrust magnitude is zero");
}

template <typename Scalar>
Scalar require_divisor(Scalar d, const char* what) {
  using std::abs;
  if (!(abs(d) > Scalar(kSingularTol))) throw FlipOverSingularity(what);
  return d;
}
}  // namespace detail

/// k_B = (m r'' + m g k) / p with p = ||m r'' + m g k||, completed with the
/// trajectory heading.
template <typename Scalar>
Attitude<Scalar> attitude_from_flat(const FlatSample<Scalar>& sample, const VehicleParams<Scalar>& params) {
  const Vec3<Scalar> force = params.m * sample.r[2] + params.m * params.g * world_k<Scalar>();
  const Scalar p = force.norm();
  detail::require_thrust(p);
  const Vec3<Scalar> k_b = force / p;
  return {basis_from_axis_and_heading(k_b, heading_from_yaw(sample.psi)), p};
}

/// Thrust rate and body angular velocity from the mass-scaled jerk m*r'''.
template <typename Scalar>
BodyRates<Scalar> body_rates(const Rotation<Scalar>& R, const Heading<Scalar>& h, Scalar p,
                             const Vec3<Scalar>& m_jerk, Scalar psi1) {
  detail::require_thrust(p);
  const auto i_b = R.col(0), j_b = R.col(1), k_b = R.col(2);
  const Vec3<Scalar> lateral = h.lateral();
  const Scalar den = detail::require_divisor(lateral.dot(j_b), "flatness: (k x h).j_B vanishes");

  BodyRates<Scalar> out;
  out.p1 = m_jerk.dot(k_b);
  const Vec3<Scalar> h_omega = (m_jerk - out.p1 * k_b) / p;
  out.omega.x() = -h_omega.dot(j_b);
  out.omega.y() = h_omega.dot(i_b);
  out.omega.z() = (out.omega.y() * lateral.dot(k_b) + psi1 * h.vector().dot(i_b)) / den;
  return out;
}

/// Thrust second derivative and body angular acceleration from the
/// mass-scaled snap m*r''''.
template <typename Scalar>
BodyAccel<Scalar> body_accel(const Rotation<Scalar>& R, const Heading<Scalar>& h, Scalar p, Scalar p1,
                             const Vec3<Scalar>& omega, const Vec3<Scalar>& m_snap, Scalar psi1, Scalar psi2) {
  detail::require_thrust(p);
  const auto i_b = R.col(0), j_b = R.col(1), k_b = R.col(2);
  const Vec3<Scalar> lateral = h.lateral();
  const Scalar den = detail::require_divisor(lateral.dot(j_b), "flatness: (k x h).j_B vanishes");
  const Vec3<Scalar> w = R * omega;

  const Vec3<Scalar> w_x_k = w.cross(k_b);
  const Vec3<Scalar> h_p = m_snap - p * w.cross(w_x_k) - Scalar(2) * p1 * w_x_k;
  BodyAccel<Scalar> out;
  out.p2 = h_p.dot(k_b);
  const Vec3<Scalar> h_alpha = (h_p - out.p2 * k_b) / p;
  out.alpha.x() = -h_alpha.dot(j_b);
  out.alpha.y() = h_alpha.dot(i_b);

  const Vec3<Scalar> w_x_i = w.cross(i_b);
  const Scalar v = (psi2 * h.vector() + psi1 * psi1 * lateral).dot(i_b) + Scalar(2) * psi1 * h.vector().dot(w_x_i);
  out.alpha.z() = (v + out.alpha.y() * lateral.dot(k_b) - lateral.dot(w.cross(w_x_i))) / den;
  return out;
}

template <typename Scalar>
BodyRates<Scalar> omega_from_flat(const FlatSample<Scalar>& sample, const Rotation<Scalar>& R, Scalar p,
                                  const VehicleParams<Scalar>& params) {
  return body_rates<Scalar>(R, heading_from_yaw(sample.psi), p, params.m * sample.r[3], sample.psi1);
}

template <typename Scalar>
BodyAccel<Scalar> alpha_from_flat(const FlatSample<Scalar>& sample, const Rotation<Scalar>& R, Scalar p, Scalar p1,
                                  const Vec3<Scalar>& omega, const VehicleParams<Scalar>& params) {
  return body_accel<Scalar>(R, heading_from_yaw(sample.psi), p, p1, omega, params.m * sample.r[4], sample.psi1,
                            sample.psi2);
}

/// Rigid-body torque J*alpha + omega x (J*omega), body frame.
template <typename Scalar>
Vec3<Scalar> inverse_dynamics_torque(const Vec3<Scalar>& omega, const Vec3<Scalar>& alpha,
                                     const VehicleParams<Scalar>& params) {
  return params.J.cwiseProduct(alpha) + omega.cross(params.J.cwiseProduct(omega));
}

/// Full open-loop command along a reference sample.
template <typename Scalar>
FlatOutputs<Scalar> feedforward(const FlatSample<Scalar>& sample, const VehicleParams<Scalar>& params) {
  const Attitude<Scalar> att = attitude_from_flat(sample, params);
  const BodyRates<Scalar> rates = omega_from_flat(sample, att.R, att.p, params);
  const BodyAccel<Scalar> acc = alpha_from_flat(sample, att.R, att.p, rates.p1, rates.omega, params);
  return {att.R, att.p, rates.p1, acc.p2, rates.omega, acc.alpha,
          inverse_dynamics_torque(rates.omega, acc.alpha, params)};
}

/// Alternative yaw-rate route: w_z = (psi' - w_y (j_B.k)) / (k_B.k).
template <typename Scalar>
Scalar omega_z_shortcut(Scalar psi1, Scalar omega_y, const Rotation<Scalar>& R) {
  const Scalar kk = R(2, 2);
  if (!(kk > Scalar(kSingularTol))) throw FlipOverSingularity("omega_z_shortcut: k_B.k is not positive");
  return (psi1 - omega_y * R(2, 1)) / kk;
}

/// Alternative yaw-acceleration route:
///   a_z = (psi'' - w_x w_y (k_B.k) + w_x w_z (j_B.k) - a_y (j_B.k)) / (k_B.k).
template <typename Scalar>
Scalar alpha_z_shortcut(Scalar psi2, const Vec3<Scalar>& omega, Scalar alpha_y, const Rotation<Scalar>& R) {
  const Scalar kk = R(2, 2);
  if (!(kk > Scalar(kSingularTol))) throw FlipOverSingularity("alpha_z_shortcut: k_B.k is not positive");
  const Scalar jk = R(2, 1);
  return (psi2 - omega.x() * omega.y() * kk + omega.x() * omega.z() * jk - alpha_y * jk) / kk;
}

}  // namespace quadflat
