#pragma once

// "+" configuration quadcopter: rotor mixer with clamping, rigid-body
// equations of motion and a fixed-step RK4 integrator.
//
// Rotor layout implied by the mixer rows (arms along the body axes): rotor 1
// on +i_B, rotor 2 on -j_B, rotor 3 on -i_B, rotor 4 on +j_B. Rotors 1/3 and
// 2/4 spin in opposite directions.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>

#include "quadflat/geom.hpp"

namespace quadflat {

template <typename Scalar>
using Vec4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Mat4 = Eigen::Matrix<Scalar, 4, 4>;

template <typename Scalar = double>
struct VehicleParams {
  Scalar m = Scalar(0.5);
  Scalar g = Scalar(9.81);
  Scalar L = Scalar(0.25);
  Vec3<Scalar> J = Vec3<Scalar>(Scalar(0.0196), Scalar(0.0196), Scalar(0.0264));
  Scalar kF = Scalar(3e-5);
  Scalar kM = Scalar(1.1e-6);
  /// Upper rotor speed bound in rad/s. +infinity disables clamping at both
  /// ends (ideal reversible rotors).
  Scalar s_max = Scalar(400);

  bool clamping() const { return s_max < std::numeric_limits<Scalar>::infinity(); }

  Scalar hover_thrust() const { return m * g; }

  bool valid() const {
    return m > 0 && g > 0 && L > 0 && (J.array() > Scalar(0)).all() && kF > 0 && kM > 0 &&
           s_max > 0;
  }
};

template <typename Scalar = double>
struct RigidState {
  Vec3<Scalar> r = Vec3<Scalar>::Zero();
  Vec3<Scalar> v = Vec3<Scalar>::Zero();
  Rotation<Scalar> R = Rotation<Scalar>::Identity();
  /// Body-frame components along (i_B, j_B, k_B).
  Vec3<Scalar> omega = Vec3<Scalar>::Zero();
};

template <typename Scalar = double>
struct StateDerivative {
  Vec3<Scalar> r_dot;
  Vec3<Scalar> v_dot;
  Mat3<Scalar> R_dot;
  Vec3<Scalar> omega_dot;
};

/// Collective thrust magnitude along k_B and body-frame torque.
template <typename Scalar = double>
struct ControlCommand {
  Scalar p = Scalar(0);
  Vec3<Scalar> tau = Vec3<Scalar>::Zero();
};

/// Rotor speeds in rad/s. A negative speed only occurs with clamping
/// disabled and stands for reversed thrust (s|s| = commanded s^2).
template <typename Scalar = double>
struct RotorSpeeds {
  Vec4<Scalar> s = Vec4<Scalar>::Zero();
  std::array<bool, 4> saturated{false, false, false, false};

  bool any_saturated() const { return saturated[0] || saturated[1] || saturated[2] || saturated[3]; }
};

/// Maps squared rotor speeds to (p, tau_body).
template <typename Scalar>
Mat4<Scalar> mixer_matrix(const VehicleParams<Scalar>& params) {
  const Scalar f = params.kF;
  const Scalar fl = params.kF * params.L;
  const Scalar mz = params.kM;
  Mat4<Scalar> a;
  a << f, f, f, f,
       Scalar(0), -fl, Scalar(0), fl,
       -fl, Scalar(0), fl, Scalar(0),
       -mz, mz, -mz, mz;
  return a;
}

template <typename Scalar>
ControlCommand<Scalar> mixer_forward(const Vec4<Scalar>& s_sq, const VehicleParams<Scalar>& params) {
  const Vec4<Scalar> out = mixer_matrix(params) * s_sq;
  return {out(0), out.template tail<3>()};
}

/// Squared rotor speeds that realize cmd exactly; entries may be negative.
template <typename Scalar>
Vec4<Scalar> mixer_solve(const ControlCommand<Scalar>& cmd, const VehicleParams<Scalar>& params) {
  const Scalar a = cmd.p / params.kF;
  const Scalar b = cmd.tau.x() / (params.kF * params.L);
  const Scalar c = cmd.tau.y() / (params.kF * params.L);
  const Scalar d = cmd.tau.z() / params.kM;
  const Scalar even = Scalar(0.5) * (a + d);  // s2^2 + s4^2
  const Scalar odd = Scalar(0.5) * (a - d);   // s1^2 + s3^2
  return Vec4<Scalar>(Scalar(0.5) * (odd - c), Scalar(0.5) * (even - b), Scalar(0.5) * (odd + c),
                      Scalar(0.5) * (even + b));
}

/// Control allocation with clamping to [0, s_max]. Negative squared speeds
/// become 0 and speeds above s_max become s_max; both set the saturated flag.
template <typename Scalar>
RotorSpeeds<Scalar> mixer_inverse(const ControlCommand<Scalar>& cmd, const VehicleParams<Scalar>& params) {
  using std::abs;
  using std::sqrt;
  const Vec4<Scalar> s_sq = mixer_solve(cmd, params);
  RotorSpeeds<Scalar> out;
  for (int i = 0; i < 4; ++i) {
    if (!params.clamping()) {
      out.s(i) = s_sq(i) < Scalar(0) ? -sqrt(-s_sq(i)) : sqrt(s_sq(i));
    } else if (s_sq(i) < Scalar(0)) {
      out.s(i) = Scalar(0);
      out.saturated[i] = true;
    } else {
      const Scalar s = sqrt(s_sq(i));
      if (s > params.s_max) {
        out.s(i) = params.s_max;
        out.saturated[i] = true;
      } else {
        out.s(i) = s;
      }
    }
  }
  return out;
}

/// Thrust and torque actually produced by a set of rotor speeds.
template <typename Scalar>
ControlCommand<Scalar> actuated(const RotorSpeeds<Scalar>& speeds, const VehicleParams<Scalar>& params) {
  return mixer_forward<Scalar>(speeds.s.cwiseProduct(speeds.s.cwiseAbs()), params);
}

template <typename Scalar>
StateDerivative<Scalar> dynamics(const RigidState<Scalar>& x, const ControlCommand<Scalar>& cmd,
                                 const VehicleParams<Scalar>& params) {
  StateDerivative<Scalar> dx;
  dx.r_dot = x.v;
  dx.v_dot = (cmd.p * x.R.col(2) - params.m * params.g * world_k<Scalar>()) / params.m;
  dx.R_dot = x.R * hat(x.omega);
  const Vec3<Scalar> jw = params.J.cwiseProduct(x.omega);
  dx.omega_dot = (cmd.tau - x.omega.cross(jw)).cwiseQuotient(params.J);
  return dx;
}

namespace detail {
template <typename Scalar>
RigidState<Scalar> advance(const RigidState<Scalar>& x, const StateDerivative<Scalar>& dx, Scalar h) {
  RigidState<Scalar> y;
  y.r = x.r + h * dx.r_dot;
  y.v = x.v + h * dx.v_dot;
  y.R = x.R + h * dx.R_dot;
  y.omega = x.omega + h * dx.omega_dot;
  return y;
}
}  // namespace detail

/// Classical RK4 with the command held constant over the step; the attitude
/// is reorthonormalized afterwards.
template <typename Scalar>
RigidState<Scalar> rk4_step(const RigidState<Scalar>& x, const ControlCommand<Scalar>& cmd, Scalar dt,
                            const VehicleParams<Scalar>& params) {
  const Scalar half = Scalar(0.5) * dt;
  const auto k1 = dynamics(x, cmd, params);
  const auto k2 = dynamics(detail::advance(x, k1, half), cmd, params);
  const auto k3 = dynamics(detail::advance(x, k2, half), cmd, params);
  const auto k4 = dynamics(detail::advance(x, k3, dt), cmd, params);
  const Scalar w = dt / Scalar(6);
  RigidState<Scalar> y;
  y.r = x.r + w * (k1.r_dot + Scalar(2) * k2.r_dot + Scalar(2) * k3.r_dot + k4.r_dot);
  y.v = x.v + w * (k1.v_dot + Scalar(2) * k2.v_dot + Scalar(2) * k3.v_dot + k4.v_dot);
  y.R = reorthonormalize<Scalar>(x.R + w * (k1.R_dot + Scalar(2) * k2.R_dot + Scalar(2) * k3.R_dot + k4.R_dot));
  y.omega = x.omega + w * (k1.omega_dot + Scalar(2) * k2.omega_dot + Scalar(2) * k3.omega_dot + k4.omega_dot);
  return y;
}

}  // namespace quadflat
