#pragma once

// Closed-loop simulation: reference sampling, control, rotor allocation with
// clamping, RK4 integration and logging, plus sweeps over helix speeds.

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "quadflat/mellinger_controller.hpp"
#include "quadflat/snap_controller.hpp"
#include "quadflat/trajectory.hpp"
#include "quadflat/tuning.hpp"
#include "quadflat/vehicle.hpp"

namespace quadflat {

/// ||r - r_T|| beyond which a run is declared diverged.
inline constexpr double kDivergenceDistance = 25.0;
/// Default tracking error above which a sweep row counts as broken.
inline constexpr double kBreakingThreshold = 5.0;

enum class ControllerKind { Snap, Mellinger };
enum class RunStatus { Completed, Diverged };

std::string to_string(ControllerKind kind);
std::string to_string(RunStatus status);
ControllerKind parse_controller_kind(const std::string& name);

struct TrajectorySpec {
  enum class Kind { Helix, Hover };
  Kind kind = Kind::Helix;
  double omega = 0.5;
  double T = 10.0;
  YawPolicy yaw = YawPolicy::Zero;
  Vector3d point = Vector3d::Zero();
  double psi = 0.0;

  Trajectory build() const;
};

struct SimConfig {
  ControllerKind controller = ControllerKind::Snap;
  TrajectorySpec trajectory;
  /// Snap: 4 position poles. Mellinger: 2 position poles.
  PoleSet position_poles = default_snap_position_poles();
  /// Mellinger attitude loop.
  PoleSet attitude_poles = mellinger_complex_attitude_poles();
  /// Snap yaw loop.
  PoleSet yaw_poles = default_snap_yaw_poles();
  VehicleParams<double> params;
  double dt = 0.01;
  double duration = 10.0;
  /// Adds the reference snap and yaw acceleration to the Snap law.
  bool snap_reference_feedforward = false;

  /// Throws ConfigError.
  void validate() const;
};

/// Defaults for a controller: default poles and vehicle, dt = 10 ms, 10 s.
SimConfig default_config(ControllerKind kind);

/// Either controller behind one call surface.
class AnyController {
 public:
  explicit AnyController(SnapController<double> c) : impl_(std::move(c)) {}
  explicit AnyController(MellingerController<double> c) : impl_(std::move(c)) {}

  ControlCommand<double> update(const RigidState<double>& state, const FlatSample<double>& ref);

 private:
  std::variant<SnapController<double>, MellingerController<double>> impl_;
};

AnyController make_controller(const SimConfig& config);

struct SimRow {
  double t = 0.0;
  Vector3d r = Vector3d::Zero();
  Vector3d r_T = Vector3d::Zero();
  Vector3d v = Vector3d::Zero();
  double psi = 0.0;
  double psi_T = 0.0;
  double p_cmd = 0.0;
  Vector3d tau_cmd = Vector3d::Zero();
  Vec4<double> s = Vec4<double>::Zero();
  std::array<bool, 4> saturated{false, false, false, false};

  bool any_saturated() const { return saturated[0] || saturated[1] || saturated[2] || saturated[3]; }
  double tracking_error() const { return (r - r_T).norm(); }
};

struct SimLog {
  std::vector<SimRow> rows;
  RunStatus status = RunStatus::Completed;
  std::optional<double> divergence_time;
};

/// One control cycle: control, allocation with clamping, and the logged row.
/// `applied` is the thrust/torque the clamped rotors actually produce.
struct ControlCycle {
  SimRow row;
  ControlCommand<double> applied;
};

ControlCycle control_cycle(AnyController& controller, const RigidState<double>& state, const FlatSample<double>& ref,
                           double t, const VehicleParams<double>& params);

/// Non-finite values or tracking error beyond kDivergenceDistance.
bool row_diverged(const SimRow& row);

/// The vehicle starts at rest at the reference's t = 0 position, level, with
/// the reference's initial yaw.
RigidState<double> initial_state(const FlatSample<double>& ref0);

SimLog closed_loop(const SimConfig& config);

/// Max over rows of ||r - r_T||. Throws EmptyLog.
double max_tracking_error(const SimLog& log);

struct SaturationSummary {
  std::size_t count = 0;
  std::optional<double> first_time;
};

/// Rows with any saturated rotor, and the earliest such time. Throws EmptyLog.
SaturationSummary saturation_events(const SimLog& log);

struct SweepRow {
  double omega;
  double delta;
  RunStatus status;
  std::optional<double> first_saturation_time;
  std::optional<double> divergence_time;
};

/// Omega values min + k*step for k = 0.. while <= max (within 1e-9).
std::vector<double> sweep_grid(double omega_min, double omega_max, double omega_step);

/// One closed-loop helix run per Omega; the base trajectory's kind is forced
/// to helix. Rows are ordered by Omega regardless of `jobs`.
std::vector<SweepRow> sweep(const SimConfig& base, double omega_min, double omega_max, double omega_step,
                            unsigned jobs = 1);

/// Smallest Omega whose run diverged or whose delta exceeds the threshold.
std::optional<double> detect_breaking_point(const std::vector<SweepRow>& table,
                                            double threshold = kBreakingThreshold);

}  // namespace quadflat
