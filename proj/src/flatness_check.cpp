#include "quadflat/flatness_check.hpp"

#include <algorithm>

namespace quadflat {

namespace {

FlatOutputs<double> outputs_at(const Trajectory& traj, double t, const VehicleParams<double>& params,
                               double jerk_fault) {
  FlatSample<double> s = traj(t);
  s.r[3] *= 1.0 + jerk_fault;
  return feedforward(s, params);
}

}  // namespace

FlatnessResiduals flatness_residuals(const Trajectory& traj, double t0, double t1,
                                     const VehicleParams<double>& params, const FlatnessCheckOptions& options) {
  const double h = options.h;
  const double a = t0 + h, b = t1 - h;
  const int n = std::max(options.samples, 2);
  FlatnessResiduals out;
  for (int k = 0; k < n; ++k) {
    const double t = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
    const auto mid = outputs_at(traj, t, params, options.jerk_fault);
    const auto lo = outputs_at(traj, t - h, params, options.jerk_fault);
    const auto hi = outputs_at(traj, t + h, params, options.jerk_fault);

    const Matrix3d m = mid.R.transpose() * (hi.R - lo.R) / (2.0 * h);
    const Vector3d omega_fd = vee(Matrix3d(0.5 * (m - m.transpose())));
    const Vector3d alpha_fd = (hi.omega - lo.omega) / (2.0 * h);
    const double p1_fd = (hi.p - lo.p) / (2.0 * h);
    const double p2_fd = (hi.p1 - lo.p1) / (2.0 * h);

    out.omega = std::max(out.omega, (mid.omega - omega_fd).lpNorm<Eigen::Infinity>());
    out.alpha = std::max(out.alpha, (mid.alpha - alpha_fd).lpNorm<Eigen::Infinity>());
    out.thrust = std::max({out.thrust, std::abs(mid.p1 - p1_fd), std::abs(mid.p2 - p2_fd)});
  }
  return out;
}

bool within(const FlatnessResiduals& r, const FlatnessTolerances& tol) {
  return r.omega <= tol.omega && r.alpha <= tol.alpha && r.thrust <= tol.thrust;
}

}  // namespace quadflat
