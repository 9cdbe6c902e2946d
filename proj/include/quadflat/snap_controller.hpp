#pragma once

// Snap controller: a fourth-order position law and a second-order yaw law
// running in parallel. Thrust p and its rate are not measured, so the
// controller keeps them as internal state and integrates the commanded
// thrust acceleration at every cycle.

#include "quadflat/flatness.hpp"
#include "quadflat/geom.hpp"
#include "quadflat/trajectory.hpp"
#include "quadflat/vehicle.hpp"

namespace quadflat {

template <typename Scalar = double>
struct SnapGains {
  Vec3<Scalar> K1 = Vec3<Scalar>::Constant(Scalar(40));     // jerk error
  Vec3<Scalar> K2 = Vec3<Scalar>::Constant(Scalar(600));    // acceleration error
  Vec3<Scalar> K3 = Vec3<Scalar>::Constant(Scalar(4000));   // velocity error
  Vec3<Scalar> K4 = Vec3<Scalar>::Constant(Scalar(10000));  // position error
  Scalar K5 = Scalar(20);                                   // yaw rate error
  Scalar K6 = Scalar(100);                                  // yaw error
};

/// Thrust and thrust rate carried between control cycles.
template <typename Scalar = double>
struct SnapState {
  Scalar p;
  Scalar p1 = Scalar(0);
};

template <typename Scalar = double>
struct SnapMeasurement {
  Vec3<Scalar> r;
  Vec3<Scalar> v;
  Vec3<Scalar> r2;
  Vec3<Scalar> r3;
  Scalar psi;
  Scalar psi1;
};

template <typename Scalar = double>
struct MotionEstimate {
  Vec3<Scalar> r2;
  Vec3<Scalar> r3;
};

template <typename Scalar = double>
struct SnapDemand {
  Vec3<Scalar> r4;
  Scalar psi2;
};

template <typename Scalar = double>
struct YawAndRate {
  Scalar psi;
  Scalar psi1;
};

/// Acceleration and jerk reconstructed from the stored thrust:
///   r'' = (p k_B - m g k) / m,   r''' = (p' k_B + p (w x k_B)) / m.
template <typename Scalar>
MotionEstimate<Scalar> estimate_motion(const RigidState<Scalar>& state, const SnapState<Scalar>& stored,
                                       const VehicleParams<Scalar>& params) {
  const Vec3<Scalar> k_b = state.R.col(2);
  const Vec3<Scalar> w = state.R * state.omega;
  return {(stored.p * k_b - params.m * params.g * world_k<Scalar>()) / params.m,
          (stored.p1 * k_b + stored.p * w.cross(k_b)) / params.m};
}

template <typename Scalar>
YawAndRate<Scalar> yaw_and_rate(const Rotation<Scalar>& R, const Vec3<Scalar>& omega) {
  using std::hypot;
  // h.i_B equals the length of the horizontal part of i_B.
  if (!(hypot(R(0, 0), R(1, 0)) > Scalar(kSingularTol))) throw FlipOverSingularity("yaw_and_rate: h.i_B vanishes");
  const Heading<Scalar> h = heading_of(R);
  const Scalar den = h.vector().dot(R.col(0));
  const Vec3<Scalar> lateral = h.lateral();
  return {yaw_of(h), (omega.z() * lateral.dot(R.col(1)) - omega.y() * lateral.dot(R.col(2))) / den};
}

/// Desired snap and yaw acceleration. The printed law has no reference snap
/// or yaw-acceleration term; `reference_feedforward` adds r''''_T and psi''_T.
template <typename Scalar>
SnapDemand<Scalar> snap_law(const SnapMeasurement<Scalar>& meas, const FlatSample<Scalar>& ref,
                            const SnapGains<Scalar>& gains, bool reference_feedforward = false) {
  SnapDemand<Scalar> out;
  out.r4 = -gains.K1.cwiseProduct(meas.r3 - ref.r[3]) - gains.K2.cwiseProduct(meas.r2 - ref.r[2]) -
           gains.K3.cwiseProduct(meas.v - ref.r[1]) - gains.K4.cwiseProduct(meas.r - ref.r[0]);
  out.psi2 = -gains.K5 * (meas.psi1 - ref.psi1) - gains.K6 * wrap_angle(meas.psi - ref.psi);
  if (reference_feedforward) {
    out.r4 += ref.r[4];
    out.psi2 += ref.psi2;
  }
  return out;
}

template <typename Scalar = double>
struct SnapStep {
  ControlCommand<Scalar> command;
  SnapState<Scalar> next;
  Scalar p2;
};

/// Maps the demanded snap and yaw acceleration to thrust and torque using
/// the measured attitude and rates and the stored thrust. Thrust is
/// integrated semi-implicitly: p1' = p1 + p2 dt, p' = p + p1' dt.
template <typename Scalar>
SnapStep<Scalar> snap_output(const SnapDemand<Scalar>& demand, const RigidState<Scalar>& state,
                             const SnapState<Scalar>& stored, const VehicleParams<Scalar>& params, Scalar dt) {
  const YawAndRate<Scalar> yaw = yaw_and_rate(state.R, state.omega);
  const BodyAccel<Scalar> acc = body_accel<Scalar>(state.R, heading_of(state.R), stored.p, stored.p1, state.omega,
                                                   params.m * demand.r4, yaw.psi1, demand.psi2);
  SnapStep<Scalar> out;
  out.p2 = acc.p2;
  out.next.p1 = stored.p1 + acc.p2 * dt;
  out.next.p = stored.p + out.next.p1 * dt;
  out.command.p = out.next.p;
  out.command.tau = inverse_dynamics_torque(state.omega, acc.alpha, params);
  return out;
}

template <typename Scalar = double>
class SnapController {
 public:
  SnapController(const SnapGains<Scalar>& gains, const VehicleParams<Scalar>& params, Scalar dt,
                 bool reference_feedforward = false)
      : gains_(gains), params_(params), dt_(dt), feedforward_(reference_feedforward),
        stored_{params.hover_thrust(), Scalar(0)} {}

  ControlCommand<Scalar> update(const RigidState<Scalar>& state, const FlatSample<Scalar>& ref) {
    const MotionEstimate<Scalar> motion = estimate_motion(state, stored_, params_);
    const YawAndRate<Scalar> yaw = yaw_and_rate(state.R, state.omega);
    const SnapMeasurement<Scalar> meas{state.r, state.v, motion.r2, motion.r3, yaw.psi, yaw.psi1};
    const SnapStep<Scalar> step = snap_output(snap_law(meas, ref, gains_, feedforward_), state, stored_, params_, dt_);
    stored_ = step.next;
    return step.command;
  }

  const SnapState<Scalar>& stored() const { return stored_; }
  void set_stored(const SnapState<Scalar>& s) { stored_ = s; }
  const SnapGains<Scalar>& gains() const { return gains_; }

 private:
  SnapGains<Scalar> gains_;
  VehicleParams<Scalar> params_;
  Scalar dt_;
  bool feedforward_;
  SnapState<Scalar> stored_;
};

}  // namespace quadflat
