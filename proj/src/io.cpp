#include "quadflat/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "quadflat/errors.hpp"

namespace quadflat {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void put(std::ostream& os, const Vector3d& v) { os << ',' << num(v.x()) << ',' << num(v.y()) << ',' << num(v.z()); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigError("bad number '" + s + "'");
    return v;
  } catch (const std::out_of_range&) {
    // Denormal output of %.9g; stod reports ERANGE but the value is usable.
    return std::strtod(s.c_str(), nullptr);
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad number '" + s + "'");
  }
}

double json_number(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    throw ConfigError(std::string("key '") + key + "' must be a number");
  }
  if (!v.is_number()) throw ConfigError(std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

json number_or_inf(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

Vector3d vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

int agent_index(const json& j, int n) {
  const int i = j.get<int>();
  if (i < 1 || i > n) throw ConfigError("agent index " + std::to_string(i) + " out of range");
  return i - 1;
}

json poles_json(const PoleSet& p) { return p.to_string(); }

}  // namespace

void write_simlog_csv(std::ostream& os, const SimLog& log) {
  os << kSimLogHeader << '\n';
  for (const SimRow& r : log.rows) {
    os << num(r.t);
    put(os, r.r);
    put(os, r.r_T);
    put(os, r.v);
    os << ',' << num(r.psi) << ',' << num(r.psi_T) << ',' << num(r.p_cmd);
    put(os, r.tau_cmd);
    for (int i = 0; i < 4; ++i) os << ',' << num(r.s(i));
    for (int i = 0; i < 4; ++i) os << ',' << (r.saturated[static_cast<std::size_t>(i)] ? 1 : 0);
    os << '\n';
  }
}

SimLog read_simlog_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSimLogHeader) throw ConfigError("simlog csv: unexpected header");
  SimLog log;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 24) throw ConfigError("simlog csv: expected 24 columns");
    std::vector<double> v;
    for (const auto& s : c) v.push_back(parse_double(s));
    SimRow r;
    r.t = v[0];
    r.r = {v[1], v[2], v[3]};
    r.r_T = {v[4], v[5], v[6]};
    r.v = {v[7], v[8], v[9]};
    r.psi = v[10];
    r.psi_T = v[11];
    r.p_cmd = v[12];
    r.tau_cmd = {v[13], v[14], v[15]};
    r.s = Vec4<double>(v[16], v[17], v[18], v[19]);
    for (std::size_t i = 0; i < 4; ++i) r.saturated[i] = v[20 + i] != 0.0;
    log.rows.push_back(r);
  }
  return log;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& table) {
  os << "Omega,delta,status,first_saturation_time\n";
  for (const SweepRow& r : table) {
    os << num(r.omega) << ',' << num(r.delta) << ',' << to_string(r.status) << ','
       << (r.first_saturation_time ? num(*r.first_saturation_time) : "none") << '\n';
  }
}

void write_step_csv(std::ostream& os, const std::vector<StepSample>& series) {
  os << "t,y,cumulative_mean\n";
  for (const StepSample& s : series) os << num(s.t) << ',' << num(s.y) << ',' << num(s.cumulative_mean) << '\n';
}

void write_safety_csv(std::ostream& os, const std::vector<SafetyRow>& rows) {
  os << "t,lambda_min,threshold,pass\n";
  for (const SafetyRow& r : rows) {
    os << num(r.t) << ',' << num(r.margin.lambda_min) << ',' << num(r.margin.threshold) << ','
       << (r.margin.pass ? "pass" : "UnsafeTransform") << '\n';
  }
}

VehicleParams<double> params_from_json(const std::string& text) {
  VehicleParams<double> p;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("vehicle params: expected a JSON object");
    const auto opt = [&](const char* key, double& field) {
      if (j.contains(key)) field = json_number(j, key);
    };
    opt("m", p.m);
    opt("g", p.g);
    opt("L", p.L);
    opt("Jx", p.J.x());
    opt("Jy", p.J.y());
    opt("Jz", p.J.z());
    opt("kF", p.kF);
    opt("kM", p.kM);
    opt("s_max", p.s_max);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("vehicle params: ") + e.what());
  }
  if (!p.valid()) throw ConfigError("vehicle params must be strictly positive");
  return p;
}

std::string params_to_json(const VehicleParams<double>& p) {
  const json j{{"m", p.m},         {"g", p.g},   {"L", p.L},   {"Jx", p.J.x()},
               {"Jy", p.J.y()},    {"Jz", p.J.z()}, {"kF", p.kF}, {"kM", p.kM},
               {"s_max", number_or_inf(p.s_max)}};
  return j.dump();
}

FormationConfig formation_from_json(const std::string& text) {
  FormationConfig c;
  try {
    const json j = json::parse(text);
    const int n = j.at("agents").get<int>();
    if (n < 1) throw ConfigError("formation: agents must be positive");
    const json& pos = j.at("initial_positions");
    if (!pos.is_array() || static_cast<int>(pos.size()) != n) {
      throw ConfigError("formation: initial_positions must list every agent");
    }
    for (const json& p : pos) c.initial_positions.push_back(vec3(p));
    for (const json& l : j.at("leaders")) c.leaders.push_back(agent_index(l, n));

    if (j.contains("neighbors")) {
      for (const auto& [key, list] : j.at("neighbors").items()) {
        const int i = agent_index(json(std::stoi(key)), n);
        auto& out = c.neighbors[i];
        for (const json& k : list) out.push_back(agent_index(k, n));
      }
    }
    if (j.contains("weights")) {
      for (const auto& [key, list] : j.at("weights").items()) {
        c.weights[agent_index(json(std::stoi(key)), n)] = list.get<std::vector<double>>();
      }
    }

    const json& tr = j.at("transform");
    const std::string kind = tr.at("kind").get<std::string>();
    const json params = tr.value("params", json::object());
    c.transform.T = tr.value("T", 10.0);
    if (kind == "translate") {
      c.transform.kind = AffineTransform::Kind::Translate;
      if (params.contains("offset")) c.transform.offset = vec3(params.at("offset"));
    } else if (kind == "scale") {
      c.transform.kind = AffineTransform::Kind::Scale;
      c.transform.factor = params.at("factor").get<double>();
    } else if (kind == "rotate_z") {
      c.transform.kind = AffineTransform::Kind::RotateZ;
      c.transform.angle = params.at("angle").get<double>();
    } else {
      throw ConfigError("formation: unknown transform kind '" + kind + "'");
    }

    if (j.contains("safety")) {
      const json& s = j.at("safety");
      c.safety.delta = s.value("delta", c.safety.delta);
      c.safety.epsilon = s.value("epsilon", c.safety.epsilon);
      c.safety.d_min = s.value("d_min", c.safety.d_min);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("formation: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError("formation: agent keys must be integers");
  }
  c.validate();
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << contents;
    if (!out) throw ConfigError("cannot write '" + path + "'");
  }
  std::filesystem::rename(tmp, target);
}

std::string RunManifest::to_json() const {
  json j;
  j["command"] = command;
  j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  j["artifacts"] = artifacts;
  j["wall_seconds"] = wall_seconds;
  j["exit_code"] = exit_code;
  return j.dump(2) + "\n";
}

std::string sim_config_json(const SimConfig& c) {
  json traj;
  if (c.trajectory.kind == TrajectorySpec::Kind::Helix) {
    traj = {{"kind", "helix"},
            {"omega", c.trajectory.omega},
            {"T", c.trajectory.T},
            {"yaw", c.trajectory.yaw == YawPolicy::Zero ? "zero" : "tangent"}};
  } else {
    traj = {{"kind", "hover"},
            {"point", {c.trajectory.point.x(), c.trajectory.point.y(), c.trajectory.point.z()}},
            {"psi", c.trajectory.psi}};
  }
  json j{{"controller", to_string(c.controller)},
         {"trajectory", traj},
         {"poles_pos", poles_json(c.position_poles)},
         {"params", json::parse(params_to_json(c.params))},
         {"dt", c.dt},
         {"duration", c.duration}};
  if (c.controller == ControllerKind::Snap) {
    j["poles_yaw"] = poles_json(c.yaw_poles);
    j["reference_feedforward"] = c.snap_reference_feedforward;
  } else {
    j["poles_att"] = poles_json(c.attitude_poles);
  }
  return j.dump();
}

}  // namespace quadflat
