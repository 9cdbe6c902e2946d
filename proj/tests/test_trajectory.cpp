#include <cmath>

#include "quadflat/errors.hpp"
#include "quadflat/trajectory.hpp"
#include "test_support.hpp"

using namespace quadflat;

namespace {

// Plain power-sum evaluation, independent of the Horner form in the library.
double sigma_ref(double t, int order) {
  const double c[8] = {0, 0, 0, 0, 35, -84, 70, -20};
  double sum = 0.0;
  for (int k = order; k < 8; ++k) {
    double f = 1.0;
    for (int j = 0; j < order; ++j) f *= k - j;
    sum += c[k] * f * std::pow(t, k - order);
  }
  return sum;
}

}  // namespace

TEST(Sigma, StartValues) {
  const auto s = sigma(0.0);
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[1], 0.0);
  EXPECT_EQ(s[2], 0.0);
  EXPECT_EQ(s[3], 0.0);
  // 35 t^4 contributes 4! * 35 to the fourth derivative.
  EXPECT_EQ(s[4], 840.0);
}

TEST(Sigma, EndValues) {
  const auto s = sigma(1.0);
  EXPECT_NEAR(s[0], 1.0, 1e-14);
  EXPECT_NEAR(s[1], 0.0, 1e-12);
  EXPECT_NEAR(s[2], 0.0, 1e-12);
  EXPECT_NEAR(s[3], 0.0, 1e-11);
  EXPECT_NEAR(s[4], -840.0, 1e-10);
}

TEST(Sigma, Midpoint) { EXPECT_NEAR(sigma(0.5)[0], 0.5, 1e-15); }

TEST(Sigma, MatchesPowerSumForm) {
  for (int k = 0; k <= 100; ++k) {
    const double t = k / 100.0;
    const auto s = sigma(t);
    for (int n = 0; n < 5; ++n) EXPECT_NEAR(s[static_cast<std::size_t>(n)], sigma_ref(t, n), 1e-10) << t << ' ' << n;
  }
}

TEST(Sigma, FactoredFirstDerivative) {
  for (double t : {0.1, 0.37, 0.8}) EXPECT_NEAR(sigma(t)[1], 140 * std::pow(t, 3) * std::pow(1 - t, 3), 1e-12);
}

TEST(Sigma, OutsideUnitIntervalThrows) {
  EXPECT_THROW(sigma(-1e-12), OutOfDomain);
  EXPECT_THROW(sigma(1.0 + 1e-12), OutOfDomain);
  EXPECT_THROW(sigma(std::nan("")), OutOfDomain);
}

TEST(SigmaT, ScaledValues) {
  EXPECT_EQ(sigma_T(0.0, 10.0)[0], 0.0);
  EXPECT_NEAR(sigma_T(10.0, 10.0)[0], 10.0, 1e-12);
  EXPECT_NEAR(sigma_T(5.0, 10.0)[0], 5.0, 1e-12);
  EXPECT_THROW(sigma_T(11.0, 10.0), OutOfDomain);
  EXPECT_THROW(sigma_T(1.0, 0.0), OutOfDomain);
}

TEST(SigmaT, ChainRuleScaling) {
  const double T = 7.0, t = 2.3;
  const auto s = sigma(t / T);
  const auto st = sigma_T(t, T);
  for (int n = 0; n < 5; ++n) {
    EXPECT_NEAR(st[static_cast<std::size_t>(n)], std::pow(T, 1 - n) * s[static_cast<std::size_t>(n)], 1e-12);
  }
}

TEST(Helix, StartsAtRestOnUnitCircle) {
  for (double omega : {0.0, 0.5, 2.0}) {
    const auto s = helix(omega, 0.0, 10.0);
    EXPECT_VEC_NEAR(s.r[0], Vector3d(1, 0, 0), 0.0);
    for (int n = 1; n <= 3; ++n) EXPECT_TRUE(s.r[static_cast<std::size_t>(n)].isZero(0.0));
    // Only the fourth derivative of the blend is nonzero at t = 0.
    EXPECT_VEC_NEAR(s.r[4], Vector3d(0, omega * 0.84, 0.084), 1e-15);
  }
}

TEST(Helix, EndPoint) {
  const auto s = helix(0.5, 10.0, 10.0);
  EXPECT_VEC_NEAR(s.r[0], Vector3d(std::cos(5.0), std::sin(5.0), 1.0), 1e-12);
  for (int n = 1; n <= 3; ++n) EXPECT_LE(s.r[static_cast<std::size_t>(n)].norm(), 1e-11);
}

TEST(Helix, ZeroSpeedIsVerticalClimb) {
  for (double t : {0.0, 2.5, 6.0, 10.0}) {
    const auto s = helix(0.0, t, 10.0);
    EXPECT_VEC_NEAR(s.r[0], Vector3d(1, 0, 0.1 * sigma_T(t, 10.0)[0]), 1e-15);
  }
}

TEST(Helix, DerivativesMatchCentralDifferences) {
  const double h = 1e-5;
  for (double omega : {0.5, 1.3}) {
    for (double t : {0.7, 3.1, 5.0, 8.8}) {
      const auto lo = helix(omega, t - h, 10.0), mid = helix(omega, t, 10.0), hi = helix(omega, t + h, 10.0);
      for (std::size_t n = 1; n < 5; ++n) {
        const Vector3d fd = (hi.r[n - 1] - lo.r[n - 1]) / (2 * h);
        EXPECT_LE((fd - mid.r[n]).norm(), 1e-5 * std::max(1.0, mid.r[n].norm())) << omega << ' ' << t << ' ' << n;
      }
    }
  }
}

TEST(Helix, ZeroYawPolicy) {
  const auto s = helix(0.5, 4.0, 10.0);
  EXPECT_EQ(s.psi, 0.0);
  EXPECT_EQ(s.psi1, 0.0);
  EXPECT_EQ(s.psi2, 0.0);
}

TEST(Helix, TangentYawFollowsHorizontalVelocity) {
  for (double omega : {0.5, -0.8}) {
    for (double t : {1.0, 4.0, 9.0}) {
      const auto s = helix(omega, t, 10.0, YawPolicy::Tangent);
      const Vector3d v(s.r[1].x(), s.r[1].y(), 0.0);
      EXPECT_NEAR(wrap_angle(s.psi - std::atan2(v.y(), v.x())), 0.0, 1e-12);
      const double h = 1e-5;
      const auto lo = helix(omega, t - h, 10.0, YawPolicy::Tangent), hi = helix(omega, t + h, 10.0, YawPolicy::Tangent);
      EXPECT_NEAR(wrap_angle(hi.psi - lo.psi) / (2 * h), s.psi1, 1e-7);
      EXPECT_NEAR((hi.psi1 - lo.psi1) / (2 * h), s.psi2, 1e-7);
    }
  }
}

TEST(Helix, OutsideDurationThrows) { EXPECT_THROW(helix(0.5, 10.5, 10.0), OutOfDomain); }

TEST(MakeHelix, HoldsEndPointAfterDuration) {
  const auto traj = make_helix(0.5, 10.0);
  const auto s = traj(12.0);
  EXPECT_VEC_NEAR(s.r[0], helix(0.5, 10.0, 10.0).r[0], 0.0);
  for (std::size_t n = 1; n < 5; ++n) EXPECT_TRUE(s.r[n].isZero(0.0));
}

TEST(Hover, ConstantSample) {
  const auto s = hover(Vector3d(0, 0, 1), std::numbers::pi / 4);
  EXPECT_VEC_NEAR(s.r[0], Vector3d(0, 0, 1), 0.0);
  for (std::size_t n = 1; n < 5; ++n) EXPECT_TRUE(s.r[n].isZero(0.0));
  EXPECT_EQ(s.psi, std::numbers::pi / 4);
  const auto traj = make_hover(Vector3d(0, 0, 1));
  EXPECT_VEC_NEAR((traj(3.0 + 1e-5).r[0] - traj(3.0 - 1e-5).r[0]), Vector3d::Zero(), 0.0);
}
