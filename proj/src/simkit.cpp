#include "quadflat/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "quadflat/errors.hpp"

namespace quadflat {

std::string to_string(ControllerKind kind) { return kind == ControllerKind::Snap ? "snap" : "mellinger"; }

std::string to_string(RunStatus status) { return status == RunStatus::Completed ? "completed" : "diverged"; }

ControllerKind parse_controller_kind(const std::string& name) {
  if (name == "snap") return ControllerKind::Snap;
  if (name == "mellinger") return ControllerKind::Mellinger;
  throw ConfigError("unknown controller '" + name + "'");
}

Trajectory TrajectorySpec::build() const {
  if (kind == Kind::Hover) return make_hover(point, psi);
  return make_helix(omega, T, yaw);
}

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(duration >= dt)) throw ConfigError("duration must be at least dt");
  if (!params.valid()) throw ConfigError("vehicle parameters must be strictly positive");
  if (trajectory.kind == TrajectorySpec::Kind::Helix && !(trajectory.T > 0.0)) {
    throw ConfigError("helix duration T must be positive");
  }
  if (controller == ControllerKind::Snap) {
    if (position_poles.size() != 4) throw ConfigError("snap needs 4 position poles");
    if (yaw_poles.size() != 2) throw ConfigError("snap needs 2 yaw poles");
  } else {
    if (position_poles.size() != 2) throw ConfigError("mellinger needs 2 position poles");
    if (attitude_poles.size() != 2) throw ConfigError("mellinger needs 2 attitude poles");
  }
}

SimConfig default_config(ControllerKind kind) {
  SimConfig c;
  c.controller = kind;
  c.position_poles =
      kind == ControllerKind::Snap ? default_snap_position_poles() : default_mellinger_position_poles();
  return c;
}

ControlCommand<double> AnyController::update(const RigidState<double>& state, const FlatSample<double>& ref) {
  return std::visit([&](auto& c) { return c.update(state, ref); }, impl_);
}

AnyController make_controller(const SimConfig& config) {
  if (config.controller == ControllerKind::Snap) {
    return AnyController(SnapController<double>(snap_gains_from_poles(config.position_poles, config.yaw_poles),
                                                config.params, config.dt, config.snap_reference_feedforward));
  }
  return AnyController(MellingerController<double>(
      mellinger_gains_from_poles(config.position_poles, config.attitude_poles, config.params), config.params));
}

ControlCycle control_cycle(AnyController& controller, const RigidState<double>& state, const FlatSample<double>& ref,
                           double t, const VehicleParams<double>& params) {
  const ControlCommand<double> cmd = controller.update(state, ref);
  const RotorSpeeds<double> speeds = mixer_inverse(cmd, params);

  ControlCycle out;
  SimRow& row = out.row;
  row.t = t;
  row.r = state.r;
  row.r_T = ref.r[0];
  row.v = state.v;
  row.psi = yaw_of(heading_of(state.R));
  row.psi_T = ref.psi;
  row.p_cmd = cmd.p;
  row.tau_cmd = cmd.tau;
  row.s = speeds.s;
  row.saturated = speeds.saturated;
  out.applied = actuated(speeds, params);
  return out;
}

bool row_diverged(const SimRow& row) {
  const bool finite = row.r.allFinite() && row.v.allFinite() && std::isfinite(row.p_cmd) && row.tau_cmd.allFinite() &&
                      row.s.allFinite();
  return !finite || !(row.tracking_error() <= kDivergenceDistance);
}

RigidState<double> initial_state(const FlatSample<double>& ref0) {
  RigidState<double> x;
  x.r = ref0.r[0];
  x.R = rotation_about_k(ref0.psi);
  return x;
}

SimLog closed_loop(const SimConfig& config) {
  config.validate();
  const Trajectory traj = config.trajectory.build();
  AnyController controller = make_controller(config);
  const auto steps = static_cast<long>(std::llround(config.duration / config.dt));

  SimLog log;
  log.rows.reserve(static_cast<std::size_t>(steps) + 1);
  RigidState<double> state = initial_state(traj(0.0));
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    try {
      const ControlCycle cycle = control_cycle(controller, state, traj(t), t, config.params);
      log.rows.push_back(cycle.row);
      if (row_diverged(cycle.row)) {
        log.status = RunStatus::Diverged;
        log.divergence_time = t;
        break;
      }
      if (k < steps) state = rk4_step(state, cycle.applied, config.dt, config.params);
    } catch (const Error&) {
      // Singular flatness maps or a blown-up attitude both mean loss of control.
      log.status = RunStatus::Diverged;
      log.divergence_time = t;
      break;
    }
  }
  return log;
}

double max_tracking_error(const SimLog& log) {
  if (log.rows.empty()) throw EmptyLog("max_tracking_error: empty log");
  double worst = 0.0;
  for (const SimRow& row : log.rows) worst = std::max(worst, row.tracking_error());
  return worst;
}

SaturationSummary saturation_events(const SimLog& log) {
  if (log.rows.empty()) throw EmptyLog("saturation_events: empty log");
  SaturationSummary out;
  for (const SimRow& row : log.rows) {
    if (!row.any_saturated()) continue;
    ++out.count;
    if (!out.first_time) out.first_time = row.t;
  }
  return out;
}

std::vector<double> sweep_grid(double omega_min, double omega_max, double omega_step) {
  if (!(omega_step > 0.0)) throw ConfigError("omega step must be positive");
  std::vector<double> grid;
  for (long k = 0;; ++k) {
    const double omega = omega_min + static_cast<double>(k) * omega_step;
    if (omega > omega_max + 1e-9) break;
    grid.push_back(omega);
  }
  return grid;
}

namespace {
SweepRow run_sweep_point(SimConfig config, double omega) {
  config.trajectory.kind = TrajectorySpec::Kind::Helix;
  config.trajectory.omega = omega;
  const SimLog log = closed_loop(config);
  SweepRow row{omega, log.rows.empty() ? std::numeric_limits<double>::infinity() : max_tracking_error(log), log.status,
               std::nullopt, log.divergence_time};
  if (!log.rows.empty()) row.first_saturation_time = saturation_events(log).first_time;
  return row;
}
}  // namespace

std::vector<SweepRow> sweep(const SimConfig& base, double omega_min, double omega_max, double omega_step,
                            unsigned jobs) {
  base.validate();
  const std::vector<double> grid = sweep_grid(omega_min, omega_max, omega_step);
  std::vector<SweepRow> table(grid.size());
  jobs = std::max(1u, jobs);
  for (std::size_t start = 0; start < grid.size(); start += jobs) {
    const std::size_t end = std::min(grid.size(), start + jobs);
    if (jobs == 1) {
      table[start] = run_sweep_point(base, grid[start]);
      continue;
    }
    std::vector<std::future<SweepRow>> pending;
    for (std::size_t i = start; i < end; ++i) {
      pending.push_back(std::async(std::launch::async, run_sweep_point, base, grid[i]));
    }
    for (std::size_t i = start; i < end; ++i) table[i] = pending[i - start].get();
  }
  return table;
}

std::optional<double> detect_breaking_point(const std::vector<SweepRow>& table, double threshold) {
  for (const SweepRow& row : table) {
    if (row.status == RunStatus::Diverged || row.delta > threshold) return row.omega;
  }
  return std::nullopt;
}

}  // namespace quadflat
