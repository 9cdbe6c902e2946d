#pragma once

// Pole-placement gain synthesis and second-order step responses.

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quadflat/mellinger_controller.hpp"
#include "quadflat/snap_controller.hpp"
#include "quadflat/vehicle.hpp"

namespace quadflat {

using Complex = std::complex<double>;

/// Closed-loop poles. Every pole lies strictly in the left half plane and
/// non-real poles come in conjugate pairs.
class PoleSet {
 public:
  PoleSet() = default;
  /// Throws UnstablePole or NonConjugateClosure.
  explicit PoleSet(std::vector<Complex> poles);

  const std::vector<Complex>& poles() const { return poles_; }
  std::size_t size() const { return poles_.size(); }

  /// Comma-separated entries, each `a`, `a+bj` or `a-bj`.
  static PoleSet parse(std::string_view text);
  std::string to_string() const;

 private:
  std::vector<Complex> poles_;
};

/// Coefficients of prod (s - p_i) in descending order, leading 1 omitted.
/// Throws NonConjugateClosure when the imaginary residue exceeds 1e-12.
std::vector<double> poly_from_poles(const std::vector<Complex>& poles);
inline std::vector<double> poly_from_poles(const PoleSet& poles) { return poly_from_poles(poles.poles()); }

/// Roots of the monic polynomial s^n + c[0] s^(n-1) + ... + c[n-1]
/// (companion-matrix eigenvalues).
std::vector<Complex> roots_of_monic(const std::vector<double>& coeffs);

SnapGains<double> snap_gains_from_poles(const PoleSet& position, const PoleSet& yaw);

/// Position loop per axis: Kv = m c0, Kp = m c1 from s^2 + c1 s + c0.
/// Attitude loop per axis: KR = c0, Komega = c1 (acting on torque directly).
MellingerGains<double> mellinger_gains_from_poles(const PoleSet& position, const PoleSet& attitude,
                                                  const VehicleParams<double>& params);

/// Default pole sets.
PoleSet default_snap_position_poles();
PoleSet default_snap_yaw_poles();
PoleSet default_mellinger_position_poles();
PoleSet mellinger_real_attitude_poles();
PoleSet mellinger_complex_attitude_poles();

struct StepSample {
  double t;
  double y;
  double cumulative_mean;
};

/// y'' + c1 y' + c0 y = 0 from y(0) = 1, y'(0) = 0, integrated with RK4.
/// The cumulative mean is the running average of the samples y_0..y_k.
std::vector<StepSample> step_response(const PoleSet& poles, double duration, double dt = 1e-3);

/// First time after which |cumulative mean| stays below `band` until the end
/// of the series; empty if it never settles.
std::optional<double> cumulative_settling_time(const std::vector<StepSample>& series, double band = 0.1);

}  // namespace quadflat
