#include <cmath>
#include <numbers>

#include "quadflat/errors.hpp"
#include "quadflat/mellinger_controller.hpp"
#include "test_support.hpp"

using namespace quadflat;
using quadflat::testing::kI3;
using quadflat::testing::kZero3;
using quadflat::testing::random_rotation;

namespace {
const VehicleParams<double> P{};
const MellingerGains<double> G{};
const double kDeg = std::numbers::pi / 180.0;
}  // namespace

TEST(DesiredForce, GravityOnlyAtHover) {
  EXPECT_VEC_NEAR(desired_force(kZero3, kZero3, hover(kZero3), G, P), Vector3d(0, 0, 4.905),
                  1e-15);
}

TEST(DesiredForce, PositionErrorUsesKv) {
  MellingerGains<double> g;
  g.Kv = Vector3d::Constant(25.0);
  EXPECT_VEC_NEAR(desired_force(Vector3d(1, 0, 0), kZero3, hover(kZero3), g, P),
                  Vector3d(-25, 0, 4.905), 1e-15);
}

TEST(DesiredForce, VelocityErrorUsesKp) {
  EXPECT_VEC_NEAR(desired_force(kZero3, Vector3d(0, 1, 0), hover(kZero3), G, P),
                  Vector3d(0, -5, 4.905), 1e-15);
}

TEST(DesiredForce, ReferenceAccelerationFeedforward) {
  auto ref = hover(kZero3);
  ref.r[2] = Vector3d(0, 0, 9.81);
  EXPECT_VEC_NEAR(desired_force(kZero3, kZero3, ref, G, P), Vector3d(0, 0, 9.81), 1e-15);
}

TEST(DesiredAttitude, LevelHover) {
  const auto d = desired_attitude(Vector3d(0, 0, 4.905), kI3, 0.0);
  EXPECT_NEAR(d.p, 4.905, 1e-15);
  EXPECT_VEC_NEAR(d.R, kI3, 0.0);
}

TEST(DesiredAttitude, ThrustProjectsOnCurrentBodyAxis) {
  const Matrix3d r = Eigen::AngleAxisd(10 * kDeg, Vector3d::UnitY()).toRotationMatrix();
  const auto d = desired_attitude(Vector3d(0, 0, 4.905), r, 0.0);
  EXPECT_NEAR(d.p, 4.905 * std::cos(10 * kDeg), 1e-15);
  EXPECT_NEAR(d.p, 4.8305, 1e-4);
}

TEST(DesiredAttitude, TiltedForce) {
  const auto d = desired_attitude(Vector3d(4.905, 0, 4.905), kI3, 0.0);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_VEC_NEAR(Vector3d(d.R.col(2)), Vector3d(r, 0, r), 1e-15);
  EXPECT_VEC_NEAR(Vector3d(d.R.col(0)), Vector3d(r, 0, -r), 1e-15);
}

TEST(DesiredAttitude, ZeroForceIsSingular) {
  EXPECT_THROW(desired_attitude(kZero3, kI3, 0.0), ZeroForceSingularity);
}

TEST(AttitudeErrors, ZeroWhenAligned) {
  std::mt19937 rng(40);
  for (int k = 0; k < 100; ++k) {
    const Matrix3d r = random_rotation(rng);
    EXPECT_LE(attitude_errors(r, r, kZero3, kZero3).e_R.norm(), 1e-15);
  }
}

TEST(AttitudeErrors, YawRotation) {
  for (double theta : {0.1, -0.7, 2.0}) {
    const auto e = attitude_errors(rotation_about_k(theta), kI3, Vector3d(1, 2, 3), Vector3d(1, 2, 3));
    EXPECT_VEC_NEAR(e.e_R, Vector3d(0, 0, std::sin(theta)), 1e-15);
    EXPECT_TRUE(e.e_omega.isZero(0.0));
  }
}

TEST(AttitudeErrors, ArgumentIsExactlySkew) {
  std::mt19937 rng(41);
  for (int k = 0; k < 500; ++k) {
    const Matrix3d a = random_rotation(rng), b = random_rotation(rng);
    const Matrix3d m = 0.5 * (b.transpose() * a - a.transpose() * b);
    EXPECT_TRUE((m + m.transpose()).isZero(0.0));
    EXPECT_NO_THROW(attitude_errors(a, b, kZero3, kZero3));
  }
}

TEST(TrajectoryOmega, Hover) {
  EXPECT_TRUE(trajectory_omega(hover(kZero3), P).isZero(0.0));
  auto ref = hover(kZero3);
  ref.psi1 = 1.0;
  EXPECT_VEC_NEAR(trajectory_omega(ref, P), Vector3d(0, 0, 1), 0.0);
}

TEST(TrajectoryOmega, MatchesAttitudeDifferencesAlongHelix) {
  const double h = 1e-5;
  for (double t : {2.0, 5.0, 7.5}) {
    const Matrix3d lo = attitude_from_flat(helix(0.5, t - h, 10.0), P).R;
    const Matrix3d mid = attitude_from_flat(helix(0.5, t, 10.0), P).R;
    const Matrix3d hi = attitude_from_flat(helix(0.5, t + h, 10.0), P).R;
    const Matrix3d m = mid.transpose() * (hi - lo) / (2 * h);
    EXPECT_VEC_NEAR(trajectory_omega(helix(0.5, t, 10.0), P), vee(Matrix3d(0.5 * (m - m.transpose()))), 1e-4);
  }
}

TEST(MellingerOutput, ExactHover) {
  const auto cmd = mellinger_output(RigidState<double>{}, hover(kZero3), G, P);
  EXPECT_NEAR(cmd.p, 4.905, 1e-15);
  EXPECT_TRUE(cmd.tau.isZero(0.0));
}

TEST(MellingerOutput, YawOffsetTorque) {
  RigidState<double> x;
  x.R = rotation_about_k(0.1);
  const auto cmd = mellinger_output(x, hover(kZero3), G, P);
  EXPECT_VEC_NEAR(cmd.tau, Vector3d(0, 0, -9.25 * std::sin(0.1)), 1e-14);
}

TEST(MellingerOutput, RateErrorTorque) {
  RigidState<double> x;
  x.omega = Vector3d(0, 0, 0.5);
  const auto cmd = mellinger_output(x, hover(kZero3), G, P);
  EXPECT_VEC_NEAR(cmd.tau, Vector3d(0, 0, -0.5), 1e-15);
}

TEST(MellingerController, Stateless) {
  MellingerController<double> c(G, P);
  RigidState<double> x;
  x.r = Vector3d(0.1, -0.2, 0.3);
  x.v = Vector3d(0.5, 0.0, -0.1);
  x.R = rotation_about_k(0.4);
  x.omega = Vector3d(0.1, 0.2, -0.3);
  const auto ref = helix(0.5, 4.0, 10.0);
  const auto a = c.update(x, ref);
  const auto b = c.update(x, ref);
  EXPECT_EQ(a.p, b.p);
  EXPECT_EQ(a.tau, b.tau);
}

TEST(MellingerController, PinnedToHelixMatchesFeedforwardThrust) {
  for (int k = 0; k <= 1000; k += 9) {
    const auto s = helix(0.5, k * 0.01, 10.0);
    const auto ff = feedforward(s, P);
    RigidState<double> x;
    x.r = s.r[0];
    x.v = s.r[1];
    x.R = ff.R;
    x.omega = ff.omega;
    const auto cmd = mellinger_output(x, s, G, P);
    EXPECT_NEAR(cmd.p, ff.p, 1e-12);
    EXPECT_LE(cmd.tau.norm(), 1e-12);
  }
}
