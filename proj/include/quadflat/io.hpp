#pragma once

// CSV and JSON serialization for logs, sweeps, step responses, vehicle
// parameters, formation configs and run manifests.

#include <iosfwd>
#include <string>
#include <vector>

#include "quadflat/formation.hpp"
#include "quadflat/simkit.hpp"
#include "quadflat/tuning.hpp"

namespace quadflat {

inline constexpr const char* kSimLogHeader =
    "t,x,y,z,xT,yT,zT,vx,vy,vz,psi,psiT,p_cmd,taux,tauy,tauz,s1,s2,s3,s4,sat1,sat2,sat3,sat4";

/// Numbers are written with 9 significant digits.
void write_simlog_csv(std::ostream& os, const SimLog& log);
/// Reads rows back; the status is not part of the CSV. Throws ConfigError.
SimLog read_simlog_csv(std::istream& is);

/// Omega,delta,status,first_saturation_time ("none" when never saturated).
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& table);
void write_step_csv(std::ostream& os, const std::vector<StepSample>& series);
void write_safety_csv(std::ostream& os, const std::vector<SafetyRow>& rows);

/// Keys m, g, L, Jx, Jy, Jz, kF, kM, s_max (number or "inf"); missing keys
/// keep their defaults. Throws ConfigError.
VehicleParams<double> params_from_json(const std::string& text);
std::string params_to_json(const VehicleParams<double>& params);

/// See README for the document layout. Throws ConfigError.
FormationConfig formation_from_json(const std::string& text);

std::string read_file(const std::string& path);
/// Writes via a temporary file and rename. Throws ConfigError.
void write_file(const std::string& path, const std::string& contents);

struct RunManifest {
  std::string command;
  std::string config_json;  // resolved configuration, a JSON object
  std::vector<std::string> artifacts;
  double wall_seconds = 0.0;
  int exit_code = 0;

  std::string to_json() const;
};

/// JSON echo of everything that determines a closed-loop run.
std::string sim_config_json(const SimConfig& config);

}  // namespace quadflat
