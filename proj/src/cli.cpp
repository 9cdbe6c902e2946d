#include "quadflat/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "quadflat/errors.hpp"
#include "quadflat/flatness_check.hpp"
#include "quadflat/formation.hpp"
#include "quadflat/io.hpp"

namespace quadflat {

namespace {

using nlohmann::json;

struct TrajFlags {
  std::string kind = "helix";
  double omega = 0.5;
  double T = 10.0;
  std::string yaw = "zero";
  std::vector<double> point{0.0, 0.0, 0.0};
  double psi = 0.0;
};

struct SimFlags {
  std::string controller;
  TrajFlags traj;
  double duration = 10.0;
  double dt = 0.01;
  std::string poles_pos, poles_att, poles_yaw;
  std::string params_file;
  std::string s_max;
  bool reference_feedforward = false;
  std::string out;
};

void add_traj_flags(CLI::App* app, TrajFlags& f) {
  app->add_option("--traj", f.kind, "Reference trajectory")->check(CLI::IsMember({"helix", "hover"}));
  app->add_option("--omega", f.omega, "Helix angular speed (rad/s)");
  app->add_option("--T", f.T, "Helix duration (s)");
  app->add_option("--yaw", f.yaw, "Helix yaw policy")->check(CLI::IsMember({"zero", "tangent"}));
  app->add_option("--point", f.point, "Hover point x y z")->expected(3);
  app->add_option("--psi", f.psi, "Hover yaw (rad)");
}

void add_vehicle_flags(CLI::App* app, SimFlags& f) {
  app->add_option("--params", f.params_file, "Vehicle parameters JSON");
  app->add_option("--s-max", f.s_max, "Rotor speed limit in rad/s, or 'inf' to disable clamping");
}

void add_sim_flags(CLI::App* app, SimFlags& f, const std::string& default_out) {
  app->add_option("--controller", f.controller, "snap or mellinger")->required();
  add_traj_flags(app, f.traj);
  add_vehicle_flags(app, f);
  app->add_option("--duration", f.duration, "Simulated time (s)");
  app->add_option("--dt", f.dt, "Control and integration step (s)");
  app->add_option("--poles-pos", f.poles_pos, "Position poles, e.g. \"-10,-10,-10,-10\"");
  app->add_option("--poles-att", f.poles_att, "Mellinger attitude poles");
  app->add_option("--poles-yaw", f.poles_yaw, "Snap yaw poles");
  app->add_flag("--reference-feedforward", f.reference_feedforward, "Add reference snap to the Snap law");
  f.out = default_out;
  app->add_option("--out", f.out, "Output CSV");
}

TrajectorySpec trajectory_spec(const TrajFlags& f) {
  TrajectorySpec spec;
  spec.kind = f.kind == "hover" ? TrajectorySpec::Kind::Hover : TrajectorySpec::Kind::Helix;
  spec.omega = f.omega;
  spec.T = f.T;
  spec.yaw = f.yaw == "tangent" ? YawPolicy::Tangent : YawPolicy::Zero;
  spec.point = Vector3d(f.point[0], f.point[1], f.point[2]);
  spec.psi = f.psi;
  return spec;
}

VehicleParams<double> vehicle(const SimFlags& f) {
  VehicleParams<double> p = f.params_file.empty() ? VehicleParams<double>{} : params_from_json(read_file(f.params_file));
  if (!f.s_max.empty()) {
    if (f.s_max == "inf") {
      p.s_max = std::numeric_limits<double>::infinity();
    } else {
      try {
        p.s_max = std::stod(f.s_max);
      } catch (const std::exception&) {
        throw ConfigError("--s-max must be a number or 'inf'");
      }
    }
  }
  if (!p.valid()) throw ConfigError("vehicle parameters must be strictly positive");
  return p;
}

SimConfig sim_config(const SimFlags& f) {
  SimConfig c = default_config(parse_controller_kind(f.controller));
  c.trajectory = trajectory_spec(f.traj);
  c.duration = f.duration;
  c.dt = f.dt;
  if (!f.poles_pos.empty()) c.position_poles = PoleSet::parse(f.poles_pos);
  if (!f.poles_att.empty()) c.attitude_poles = PoleSet::parse(f.poles_att);
  if (!f.poles_yaw.empty()) c.yaw_poles = PoleSet::parse(f.poles_yaw);
  c.params = vehicle(f);
  c.snap_reference_feedforward = f.reference_feedforward;
  c.validate();
  return c;
}

template <typename Writer>
std::string to_text(Writer&& write) {
  std::ostringstream os;
  write(os);
  return os.str();
}

/// Runs one subcommand body and writes its manifest exactly once, whatever
/// the outcome.
class Invocation {
 public:
  Invocation(std::string command, std::string manifest_path, std::ostream& err)
      : manifest_path_(std::move(manifest_path)), err_(err), start_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
  }

  RunManifest& manifest() { return manifest_; }

  template <typename Body>
  int run(Body&& body) {
    int code = kExitOk;
    try {
      code = body();
    } catch (const ConfigError& e) {
      err_ << "error: " << e.what() << '\n';
      code = kExitConfig;
    } catch (const Error& e) {
      err_ << "error: " << e.what() << '\n';
      code = kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
      err_ << "error: " << e.what() << '\n';
      code = kExitConfig;
    }
    manifest_.exit_code = code;
    manifest_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    try {
      write_file(manifest_path_, manifest_.to_json());
    } catch (const std::exception& e) {
      err_ << "error: cannot write manifest: " << e.what() << '\n';
      if (code == kExitOk) code = kExitConfig;
    }
    return code;
  }

 private:
  RunManifest manifest_;
  std::string manifest_path_;
  std::ostream& err_;
  std::chrono::steady_clock::time_point start_;
};

std::string manifest_path(const std::string& flag, const std::string& artifact) {
  return flag.empty() ? artifact + ".manifest.json" : flag;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadcopter flight-dynamics simulator with Snap and Mellinger controllers", "quadflat"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string manifest_flag;
  app.add_option("--manifest", manifest_flag, "Manifest JSON path (default: <output>.manifest.json)");

  SimFlags sim;
  CLI::App* sim_cmd = app.add_subcommand("sim", "Run one closed-loop simulation");
  add_sim_flags(sim_cmd, sim, "sim.csv");

  SimFlags sw;
  double omega_min = 0.0, omega_max = 2.0, omega_step = 0.1, threshold = kBreakingThreshold;
  unsigned jobs = 1;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Sweep the helix angular speed");
  add_sim_flags(sweep_cmd, sw, "sweep.csv");
  sweep_cmd->add_option("--omega-min", omega_min);
  sweep_cmd->add_option("--omega-max", omega_max);
  sweep_cmd->add_option("--omega-step", omega_step);
  sweep_cmd->add_option("--threshold", threshold, "Tracking error counted as a breaking point (m)");
  sweep_cmd->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  SimFlags fc;
  double inject_fault = 0.0;
  CLI::App* flat_cmd = app.add_subcommand("flatness-check", "Audit the flatness maps by finite differences");
  add_traj_flags(flat_cmd, fc.traj);
  add_vehicle_flags(flat_cmd, fc);
  flat_cmd->add_option("--inject-fault", inject_fault)->group("");

  std::string step_poles, step_out = "step.csv";
  double step_duration = 10.0, step_dt = 1e-3;
  CLI::App* step_cmd = app.add_subcommand("step-response", "Second-order response from 1 to 0 for a pole pair");
  step_cmd->add_option("--poles", step_poles, "Pole pair, e.g. \"-0.5+3j,-0.5-3j\"")->required();
  step_cmd->add_option("--duration", step_duration);
  step_cmd->add_option("--dt", step_dt);
  step_cmd->add_option("--out", step_out, "Output CSV");

  SimFlags form;
  std::string form_config, form_dir = "formation_out";
  CLI::App* form_cmd = app.add_subcommand("formation", "Run a leader/follower affine formation");
  form_cmd->add_option("--config", form_config, "Formation JSON")->required();
  form.controller = "snap";
  form_cmd->add_option("--controller", form.controller, "snap or mellinger");
  add_vehicle_flags(form_cmd, form);
  form_cmd->add_option("--duration", form.duration);
  form_cmd->add_option("--dt", form.dt);
  form_cmd->add_option("--poles-pos", form.poles_pos);
  form_cmd->add_option("--poles-att", form.poles_att);
  form_cmd->add_option("--poles-yaw", form.poles_yaw);
  form_cmd->add_option("--out-dir", form_dir, "Directory for per-agent CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitConfig;
  }

  if (*sim_cmd) {
    Invocation inv("sim", manifest_path(manifest_flag, sim.out), err);
    return inv.run([&] {
      const SimConfig config = sim_config(sim);
      inv.manifest().config_json = sim_config_json(config);
      const SimLog log = closed_loop(config);
      write_file(sim.out, to_text([&](std::ostream& os) { write_simlog_csv(os, log); }));
      inv.manifest().artifacts.push_back(sim.out);
      out << "status " << to_string(log.status) << ", max tracking error " << fmt(max_tracking_error(log)) << " m\n";
      return log.status == RunStatus::Completed ? kExitOk : kExitDiverged;
    });
  }

  if (*sweep_cmd) {
    Invocation inv("sweep", manifest_path(manifest_flag, sw.out), err);
    return inv.run([&] {
      if (!(omega_step > 0.0)) throw ConfigError("--omega-step must be positive");
      const SimConfig config = sim_config(sw);
      json echo = json::parse(sim_config_json(config));
      echo["sweep"] = {{"omega_min", omega_min}, {"omega_max", omega_max}, {"omega_step", omega_step},
                       {"threshold", threshold}, {"jobs", jobs}};
      inv.manifest().config_json = echo.dump();
      const auto table = sweep(config, omega_min, omega_max, omega_step, jobs);
      write_file(sw.out, to_text([&](std::ostream& os) { write_sweep_csv(os, table); }));
      inv.manifest().artifacts.push_back(sw.out);
      const auto star = detect_breaking_point(table, threshold);
      out << table.size() << " runs, breaking point " << (star ? fmt(*star) + " rad/s" : std::string("none")) << '\n';
      return kExitOk;
    });
  }

  if (*flat_cmd) {
    Invocation inv("flatness-check", manifest_path(manifest_flag, "flatness-check"), err);
    return inv.run([&] {
      const TrajectorySpec spec = trajectory_spec(fc.traj);
      const VehicleParams<double> params = vehicle(fc);
      if (spec.kind == TrajectorySpec::Kind::Helix && !(spec.T > 0.0)) throw ConfigError("--T must be positive");
      inv.manifest().config_json =
          json{{"trajectory", fc.traj.kind}, {"omega", spec.omega}, {"T", spec.T}, {"yaw", fc.traj.yaw},
               {"params", json::parse(params_to_json(params))}}
              .dump();
      FlatnessCheckOptions options;
      options.jerk_fault = inject_fault;
      const double t1 = spec.kind == TrajectorySpec::Kind::Helix ? spec.T : 10.0;
      const FlatnessResiduals r = flatness_residuals(spec.build(), 0.0, t1, params, options);
      const FlatnessTolerances tol;
      out << "omega residual  " << fmt(r.omega) << " rad/s   (tol " << fmt(tol.omega) << ")\n"
          << "alpha residual  " << fmt(r.alpha) << " rad/s^2 (tol " << fmt(tol.alpha) << ")\n"
          << "thrust residual " << fmt(r.thrust) << "         (tol " << fmt(tol.thrust) << ")\n";
      return within(r, tol) ? kExitOk : kExitInvariant;
    });
  }

  if (*step_cmd) {
    Invocation inv("step-response", manifest_path(manifest_flag, step_out), err);
    return inv.run([&] {
      const PoleSet poles = PoleSet::parse(step_poles);
      inv.manifest().config_json =
          json{{"poles", poles.to_string()}, {"duration", step_duration}, {"dt", step_dt}}.dump();
      const auto series = step_response(poles, step_duration, step_dt);
      write_file(step_out, to_text([&](std::ostream& os) { write_step_csv(os, series); }));
      inv.manifest().artifacts.push_back(step_out);
      const auto settle = cumulative_settling_time(series);
      out << "settling time (|cumulative mean| < 0.1): " << (settle ? fmt(*settle) + " s" : std::string("not reached"))
          << '\n';
      return kExitOk;
    });
  }

  if (*form_cmd) {
    Invocation inv("formation", manifest_path(manifest_flag, (std::filesystem::path(form_dir) / "formation").string()),
                   err);
    return inv.run([&] {
      const FormationConfig config = formation_from_json(read_file(form_config));
      SimConfig base = default_config(parse_controller_kind(form.controller));
      base.duration = form.duration;
      base.dt = form.dt;
      if (!form.poles_pos.empty()) base.position_poles = PoleSet::parse(form.poles_pos);
      if (!form.poles_att.empty()) base.attitude_poles = PoleSet::parse(form.poles_att);
      if (!form.poles_yaw.empty()) base.yaw_poles = PoleSet::parse(form.poles_yaw);
      base.params = vehicle(form);
      base.validate();
      json echo = json::parse(sim_config_json(base));
      echo.erase("trajectory");
      echo["formation"] = json::parse(read_file(form_config));
      inv.manifest().config_json = echo.dump();

      const FormationResult result = run_formation(config, base);
      bool diverged = false;
      for (std::size_t i = 0; i < result.logs.size(); ++i) {
        const std::string path = (std::filesystem::path(form_dir) / ("agent_" + std::to_string(i + 1) + ".csv")).string();
        write_file(path, to_text([&](std::ostream& os) { write_simlog_csv(os, result.logs[i]); }));
        inv.manifest().artifacts.push_back(path);
        diverged = diverged || result.logs[i].status == RunStatus::Diverged;
        out << "agent " << i + 1 << ": " << to_string(result.logs[i].status) << ", max tracking error "
            << fmt(max_tracking_error(result.logs[i])) << " m\n";
      }
      const std::string safety = (std::filesystem::path(form_dir) / "safety.csv").string();
      write_file(safety, to_text([&](std::ostream& os) { write_safety_csv(os, result.safety); }));
      inv.manifest().artifacts.push_back(safety);
      if (const auto t = result.first_unsafe_time()) out << "UnsafeTransform from t = " << fmt(*t) << " s\n";
      return diverged ? kExitDiverged : kExitOk;
    });
  }
  return kExitConfig;
}

}  // namespace quadflat
