#pragma once

// Mellinger controller: a position loop producing a desired force, cascaded
// into a geometric attitude loop on the rotation matrix. Stateless.
//
// Gain naming follows the published law, which applies Kp to the VELOCITY
// error and Kv to the POSITION error:
//   F_des = -Kp (v - v_T) - Kv (r - r_T) + m g k + m a_T

#include "quadflat/flatness.hpp"
#include "quadflat/geom.hpp"
#include "quadflat/trajectory.hpp"
#include "quadflat/vehicle.hpp"

namespace quadflat {

template <typename Scalar = double>
struct MellingerGains {
  Vec3<Scalar> Kp = Vec3<Scalar>::Constant(Scalar(5));     // velocity error
  Vec3<Scalar> Kv = Vec3<Scalar>::Constant(Scalar(12.5));  // position error
  Vec3<Scalar> KR = Vec3<Scalar>::Constant(Scalar(9.25));
  Vec3<Scalar> Komega = Vec3<Scalar>::Constant(Scalar(1));
};

template <typename Scalar = double>
struct DesiredAttitude {
  Scalar p;
  Rotation<Scalar> R;
};

template <typename Scalar = double>
struct AttitudeErrors {
  Vec3<Scalar> e_R;
  Vec3<Scalar> e_omega;
};

template <typename Scalar>
Vec3<Scalar> desired_force(const Vec3<Scalar>& r, const Vec3<Scalar>& v, const FlatSample<Scalar>& ref,
                           const MellingerGains<Scalar>& gains, const VehicleParams<Scalar>& params) {
  return -gains.Kp.cwiseProduct(v - ref.r[1]) - gains.Kv.cwiseProduct(r - ref.r[0]) +
         params.m * params.g * world_k<Scalar>() + params.m * ref.r[2];
}

/// Thrust is the projection of the force on the CURRENT k_B; the desired
/// attitude points k_B along the force and takes its heading from psi_T.
template <typename Scalar>
DesiredAttitude<Scalar> desired_attitude(const Vec3<Scalar>& force, const Rotation<Scalar>& R, Scalar psi_T) {
  const Scalar n = force.norm();
  if (!(n > Scalar(kSingularTol))) throw ZeroForceSingularity("desired_attitude: desired force is zero");
  return {force.dot(R.col(2)), basis_from_axis_and_heading<Scalar>(force / n, heading_from_yaw(psi_T))};
}

template <typename Scalar>
AttitudeErrors<Scalar> attitude_errors(const Rotation<Scalar>& R, const Rotation<Scalar>& R_des,
                                       const Vec3<Scalar>& omega, const Vec3<Scalar>& omega_T) {
  const Mat3<Scalar> skew = Scalar(0.5) * (R_des.transpose() * R - R.transpose() * R_des);
  return {vee(skew), omega - omega_T};
}

/// Body angular velocity of the reference itself, through the flatness chain.
template <typename Scalar>
Vec3<Scalar> trajectory_omega(const FlatSample<Scalar>& ref, const VehicleParams<Scalar>& params) {
  const Attitude<Scalar> att = attitude_from_flat(ref, params);
  return omega_from_flat(ref, att.R, att.p, params).omega;
}

template <typename Scalar>
ControlCommand<Scalar> mellinger_output(const RigidState<Scalar>& state, const FlatSample<Scalar>& ref,
                                        const MellingerGains<Scalar>& gains, const VehicleParams<Scalar>& params) {
  const Vec3<Scalar> force = desired_force(state.r, state.v, ref, gains, params);
  const DesiredAttitude<Scalar> des = desired_attitude(force, state.R, ref.psi);
  const AttitudeErrors<Scalar> err = attitude_errors(state.R, des.R, state.omega, trajectory_omega(ref, params));
  return {des.p, -gains.KR.cwiseProduct(err.e_R) - gains.Komega.cwiseProduct(err.e_omega)};
}

template <typename Scalar = double>
class MellingerController {
 public:
  MellingerController(const MellingerGains<Scalar>& gains, const VehicleParams<Scalar>& params)
      : gains_(gains), params_(params) {}

  ControlCommand<Scalar> update(const RigidState<Scalar>& state, const FlatSample<Scalar>& ref) const {
    return mellinger_output(state, ref, gains_, params_);
  }

  const MellingerGains<Scalar>& gains() const { return gains_; }

 private:
  MellingerGains<Scalar> gains_;
  VehicleParams<Scalar> params_;
};

}  // namespace quadflat
