#pragma once

// Leader/follower affine formations. Leaders fly the affine image
// Q(t) r_i(0) + d(t) of their initial position; each follower flies the
// weighted average of its in-neighbors' current positions.
//
// Agent indices are 0-based here; the JSON format uses 1-based indices.

#include <map>
#include <optional>
#include <vector>

#include "quadflat/simkit.hpp"

namespace quadflat {

/// Q(t), d(t) with derivatives through fourth order. Each kind blends from
/// the identity at t = 0 to its full value at t = T using sigma_T, and holds
/// afterwards.
struct AffineTransform {
  enum class Kind { Translate, Scale, RotateZ };
  Kind kind = Kind::Translate;
  Vector3d offset = Vector3d::Zero();  // translate
  double factor = 1.0;                 // scale
  double angle = 0.0;                  // rotate_z, rad
  double T = 10.0;

  /// Q^(n)(t) and d^(n)(t) for n = 0..4.
  std::array<Matrix3d, 5> Q(double t) const;
  std::array<Vector3d, 5> d(double t) const;
};

struct SafetyParams {
  double delta = 0.1;    // controller error bound, m
  double epsilon = 0.15;  // vehicle size, m
  double d_min = 1.0;    // minimum initial separation, m
};

struct FormationConfig {
  std::vector<Vector3d> initial_positions;
  std::vector<int> leaders;
  /// Follower index -> in-neighbor indices and matching weights.
  std::map<int, std::vector<int>> neighbors;
  std::map<int, std::vector<double>> weights;
  AffineTransform transform;
  SafetyParams safety;

  std::size_t size() const { return initial_positions.size(); }
  bool is_leader(int i) const;
  /// Throws ConfigError.
  void validate() const;
};

/// Q(t) r_i(0) + d(t) with derivatives. Throws NotALeader.
std::array<Vector3d, 5> leader_ref(int i, double t, const FormationConfig& config);

/// sum_j w_ij r_j over the in-neighbors of follower i. `positions` maps agent
/// index to position. Throws MissingNeighbor.
Vector3d follower_ref(int i, const std::map<int, Vector3d>& positions, const FormationConfig& config);

struct SafetyMargin {
  double lambda_min;
  double threshold;
  bool pass;
};

/// Smallest singular value of Q against 2 (delta + epsilon) / d_min.
SafetyMargin safety_margin(const Matrix3d& Q, const SafetyParams& safety);

/// Minimum-norm affine weights expressing `target` through the neighbor
/// positions (sum w = 1, sum w r = target). Needs at least 4 non-coplanar
/// neighbors; the result may contain non-positive weights, which
/// FormationConfig::validate then rejects. Throws ConfigError.
std::vector<double> affine_weights(const Vector3d& target, const std::vector<Vector3d>& neighbors);

/// Backward-difference derivatives (orders 1..4) of the newest of five
/// equally spaced samples, newest first.
std::array<Vector3d, 4> backward_derivatives(const std::array<Vector3d, 5>& newest_first, double h);

struct SafetyRow {
  double t;
  SafetyMargin margin;
};

struct FormationResult {
  std::vector<SimLog> logs;
  /// One row per step; rows with pass == false are UnsafeTransform warnings.
  std::vector<SafetyRow> safety;

  std::optional<double> first_unsafe_time() const;
};

/// Every agent runs its own controller built from `base` (controller kind,
/// poles, vehicle, dt, duration). Within a tick all follower references
/// are computed from the previous tick's positions. A diverged agent stops
/// and stays at its last position for its neighbors.
FormationResult run_formation(const FormationConfig& config, const SimConfig& base);

}  // namespace quadflat
