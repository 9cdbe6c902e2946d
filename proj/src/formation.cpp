#include "quadflat/formation.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "quadflat/errors.hpp"

namespace quadflat {

namespace {

Jet4<double> blend(double t, double T) {
  if (t <= 0.0) return {0.0, 0.0, 0.0, 0.0, 0.0};
  if (t >= T) return {T, 0.0, 0.0, 0.0, 0.0};
  return sigma_T(t, T);
}

std::string agent_name(int i) { return "agent " + std::to_string(i + 1); }

}  // namespace

std::array<Matrix3d, 5> AffineTransform::Q(double t) const {
  std::array<Matrix3d, 5> out;
  out.fill(Matrix3d::Zero());
  out[0].setIdentity();
  // The blend is normalized to s = sigma_T / T in [0, 1].
  Jet4<double> s = blend(t, T);
  for (double& v : s) v /= T;
  switch (kind) {
    case Kind::Translate:
      break;
    case Kind::Scale:
      for (std::size_t n = 0; n < 5; ++n) out[n] += (factor - 1.0) * s[n] * Matrix3d::Identity();
      break;
    case Kind::RotateZ: {
      Jet4<double> theta;
      for (std::size_t n = 0; n < 5; ++n) theta[n] = angle * s[n];
      const Jet4<double> c = cos_jet(theta);
      const Jet4<double> sn = sin_jet(theta);
      for (std::size_t n = 0; n < 5; ++n) {
        out[n](0, 0) = c[n];
        out[n](0, 1) = -sn[n];
        out[n](1, 0) = sn[n];
        out[n](1, 1) = c[n];
      }
      break;
    }
  }
  return out;
}

std::array<Vector3d, 5> AffineTransform::d(double t) const {
  std::array<Vector3d, 5> out;
  out.fill(Vector3d::Zero());
  if (kind != Kind::Translate) return out;
  const Jet4<double> s = blend(t, T);
  for (std::size_t n = 0; n < 5; ++n) out[n] = s[n] / T * offset;
  return out;
}

bool FormationConfig::is_leader(int i) const { return std::find(leaders.begin(), leaders.end(), i) != leaders.end(); }

void FormationConfig::validate() const {
  const int n = static_cast<int>(size());
  if (n == 0) throw ConfigError("formation: no agents");
  if (leaders.empty()) throw ConfigError("formation: at least one leader is required");
  if (!(transform.T > 0.0)) throw ConfigError("formation: transform T must be positive");
  if (!(safety.delta >= 0.0 && safety.epsilon >= 0.0 && safety.d_min > 0.0)) {
    throw ConfigError("formation: safety needs delta, epsilon >= 0 and d_min > 0");
  }
  for (int l : leaders) {
    if (l < 0 || l >= n) throw ConfigError("formation: leader index out of range");
    if (neighbors.count(l) || weights.count(l)) throw ConfigError("formation: " + agent_name(l) + " is a leader and cannot have in-neighbors");
  }
  for (int i = 0; i < n; ++i) {
    if (is_leader(i)) continue;
    const auto nb = neighbors.find(i);
    const auto w = weights.find(i);
    if (nb == neighbors.end() || nb->second.empty()) throw ConfigError("formation: follower " + agent_name(i) + " has no in-neighbors");
    if (w == weights.end() || w->second.size() != nb->second.size()) {
      throw ConfigError("formation: follower " + agent_name(i) + " needs one weight per in-neighbor");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < nb->second.size(); ++k) {
      const int j = nb->second[k];
      if (j < 0 || j >= n || j == i) throw ConfigError("formation: bad in-neighbor of " + agent_name(i));
      if (!(w->second[k] > 0.0)) throw ConfigError("formation: weights of " + agent_name(i) + " must be positive");
      sum += w->second[k];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("formation: weights of " + agent_name(i) + " must sum to 1");
  }
  for (const auto& [i, nb] : neighbors) {
    if (i < 0 || i >= n) throw ConfigError("formation: neighbor entry for unknown agent");
  }
}

std::array<Vector3d, 5> leader_ref(int i, double t, const FormationConfig& config) {
  if (!config.is_leader(i)) throw NotALeader(agent_name(i) + " is not a leader");
  const auto q = config.transform.Q(t);
  const auto d = config.transform.d(t);
  const Vector3d& r0 = config.initial_positions[static_cast<std::size_t>(i)];
  std::array<Vector3d, 5> out;
  for (std::size_t n = 0; n < 5; ++n) out[n] = q[n] * r0 + d[n];
  return out;
}

Vector3d follower_ref(int i, const std::map<int, Vector3d>& positions, const FormationConfig& config) {
  const auto nb = config.neighbors.find(i);
  const auto w = config.weights.find(i);
  if (nb == config.neighbors.end() || w == config.weights.end()) throw MissingNeighbor(agent_name(i) + " has no in-neighbors");
  Vector3d out = Vector3d::Zero();
  for (std::size_t k = 0; k < nb->second.size(); ++k) {
    const auto it = positions.find(nb->second[k]);
    if (it == positions.end()) throw MissingNeighbor("position of " + agent_name(nb->second[k]) + " not supplied");
    out += w->second[k] * it->second;
  }
  return out;
}

SafetyMargin safety_margin(const Matrix3d& Q, const SafetyParams& safety) {
  const Eigen::JacobiSVD<Matrix3d> svd(Q);
  const double lambda_min = svd.singularValues().minCoeff();
  const double threshold = 2.0 * (safety.delta + safety.epsilon) / safety.d_min;
  return {lambda_min, threshold, lambda_min >= threshold};
}

std::vector<double> affine_weights(const Vector3d& target, const std::vector<Vector3d>& neighbors) {
  const auto k = static_cast<Eigen::Index>(neighbors.size());
  if (k < 4) throw ConfigError("affine_weights: needs at least 4 neighbors");
  Eigen::MatrixXd a(4, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    a.block<3, 1>(0, j) = neighbors[static_cast<std::size_t>(j)];
    a(3, j) = 1.0;
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  if (cod.rank() < 4) throw ConfigError("affine_weights: neighbors are coplanar");
  const Eigen::VectorXd w = cod.solve(Eigen::Vector4d(target.x(), target.y(), target.z(), 1.0));
  return {w.data(), w.data() + w.size()};
}

std::array<Vector3d, 4> backward_derivatives(const std::array<Vector3d, 5>& f, double h) {
  const double h2 = h * h;
  return {
      (25.0 * f[0] - 48.0 * f[1] + 36.0 * f[2] - 16.0 * f[3] + 3.0 * f[4]) / (12.0 * h),
      (35.0 * f[0] - 104.0 * f[1] + 114.0 * f[2] - 56.0 * f[3] + 11.0 * f[4]) / (12.0 * h2),
      (5.0 * f[0] - 18.0 * f[1] + 24.0 * f[2] - 14.0 * f[3] + 3.0 * f[4]) / (2.0 * h2 * h),
      (f[0] - 4.0 * f[1] + 6.0 * f[2] - 4.0 * f[3] + f[4]) / (h2 * h2),
  };
}

std::optional<double> FormationResult::first_unsafe_time() const {
  for (const SafetyRow& row : safety) {
    if (!row.margin.pass) return row.t;
  }
  return std::nullopt;
}

namespace {

struct Agent {
  AnyController controller;
  RigidState<double> state;
  SimLog log;
  bool active = true;
  std::deque<Vector3d> history;  // follower references, newest first
};

FlatSample<double> follower_sample(Agent& agent, const Vector3d& r, double dt) {
  if (agent.history.empty()) agent.history.assign(5, r);
  agent.history.push_front(r);
  agent.history.resize(5);
  std::array<Vector3d, 5> f;
  std::copy(agent.history.begin(), agent.history.end(), f.begin());
  const auto d = backward_derivatives(f, dt);
  FlatSample<double> s;
  s.r[0] = r;
  for (std::size_t n = 0; n < 4; ++n) s.r[n + 1] = d[n];
  return s;
}

}  // namespace

FormationResult run_formation(const FormationConfig& config, const SimConfig& base) {
  config.validate();
  base.validate();
  const int n = static_cast<int>(config.size());
  const auto steps = static_cast<long>(std::llround(base.duration / base.dt));

  std::vector<Agent> agents;
  agents.reserve(config.size());
  for (int i = 0; i < n; ++i) {
    Agent a{make_controller(base), {}, {}, true, {}};
    a.state.r = config.initial_positions[static_cast<std::size_t>(i)];
    agents.push_back(std::move(a));
  }

  FormationResult result;
  result.safety.reserve(static_cast<std::size_t>(steps) + 1);
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * base.dt;
    result.safety.push_back({t, safety_margin(config.transform.Q(t)[0], config.safety)});

    std::map<int, Vector3d> snapshot;
    for (int i = 0; i < n; ++i) snapshot[i] = agents[static_cast<std::size_t>(i)].state.r;

    for (int i = 0; i < n; ++i) {
      Agent& a = agents[static_cast<std::size_t>(i)];
      if (!a.active) continue;
      FlatSample<double> ref;
      if (config.is_leader(i)) {
        const auto r = leader_ref(i, t, config);
        for (std::size_t m = 0; m < 5; ++m) ref.r[m] = r[m];
      } else {
        ref = follower_sample(a, follower_ref(i, snapshot, config), base.dt);
      }
      try {
        const ControlCycle cycle = control_cycle(a.controller, a.state, ref, t, base.params);
        a.log.rows.push_back(cycle.row);
        if (row_diverged(cycle.row)) {
          a.log.status = RunStatus::Diverged;
          a.log.divergence_time = t;
          a.active = false;
          continue;
        }
        if (k < steps) a.state = rk4_step(a.state, cycle.applied, base.dt, base.params);
      } catch (const Error&) {
        a.log.status = RunStatus::Diverged;
        a.log.divergence_time = t;
        a.active = false;
      }
    }
  }
  for (Agent& a : agents) result.logs.push_back(std::move(a.log));
  return result;
}

}  // namespace quadflat
