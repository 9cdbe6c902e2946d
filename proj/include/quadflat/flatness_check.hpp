#pragma once

// Finite-difference audit of the flatness maps along a trajectory: the
// analytic body rates, angular accelerations and thrust derivatives are
// compared with central differences of the lower-order quantities.

#include "quadflat/flatness.hpp"
#include "quadflat/trajectory.hpp"

namespace quadflat {

struct FlatnessResiduals {
  double omega = 0.0;   // rad/s, omega vs vee(R^T dR/dt)
  double alpha = 0.0;   // rad/s^2, alpha vs d omega/dt
  double thrust = 0.0;  // max of |p' - dp/dt| and |p'' - dp'/dt|
};

struct FlatnessTolerances {
  double omega = 1e-6;
  double alpha = 1e-3;
  double thrust = 1e-5;
};

struct FlatnessCheckOptions {
  int samples = 1001;
  double h = 1e-4;
  /// Test hook: relative error injected into the reference jerk.
  double jerk_fault = 0.0;
};

/// Max residuals over `samples` evenly spaced times in [t0 + h, t1 - h].
FlatnessResiduals flatness_residuals(const Trajectory& traj, double t0, double t1,
                                     const VehicleParams<double>& params, const FlatnessCheckOptions& options = {});

bool within(const FlatnessResiduals& r, const FlatnessTolerances& tol = {});

}  // namespace quadflat
