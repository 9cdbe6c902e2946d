#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "quadflat/errors.hpp"
#include "quadflat/io.hpp"
#include "test_support.hpp"

using namespace quadflat;

namespace {

bool same_at_9_digits(double a, double b) {
  char x[32];
  char y[32];
  std::snprintf(x, sizeof x, "%.9g", a);
  std::snprintf(y, sizeof y, "%.9g", b);
  return std::string(x) == y;
}

const char* kTetrahedronJson = R"({
  "agents": 5,
  "leaders": [1, 2, 3, 4],
  "neighbors": {"5": [1, 2, 3, 4]},
  "weights": {"5": [0.25, 0.25, 0.25, 0.25]},
  "initial_positions": [[0,0,1],[2,0,1],[0,2,1],[0,0,3],[0.5,0.5,1.5]],
  "transform": {"kind": "translate", "params": {"offset": [1, 0, 0]}, "T": 8},
  "safety": {"delta": 0.05, "epsilon": 0.1, "d_min": 2}
})";

}  // namespace

TEST(SimLogCsv, RoundTripAtNineDigits) {
  SimConfig c = default_config(ControllerKind::Snap);
  c.trajectory.omega = 1.3;
  c.duration = 2.0;
  const SimLog log = closed_loop(c);

  std::stringstream ss;
  write_simlog_csv(ss, log);
  const SimLog back = read_simlog_csv(ss);
  ASSERT_EQ(back.rows.size(), log.rows.size());
  for (std::size_t k = 0; k < log.rows.size(); ++k) {
    const SimRow& a = log.rows[k];
    const SimRow& b = back.rows[k];
    EXPECT_TRUE(same_at_9_digits(a.t, b.t));
    for (int i = 0; i < 3; ++i) {
      EXPECT_TRUE(same_at_9_digits(a.r(i), b.r(i)));
      EXPECT_TRUE(same_at_9_digits(a.r_T(i), b.r_T(i)));
      EXPECT_TRUE(same_at_9_digits(a.v(i), b.v(i)));
      EXPECT_TRUE(same_at_9_digits(a.tau_cmd(i), b.tau_cmd(i)));
    }
    EXPECT_TRUE(same_at_9_digits(a.psi, b.psi));
    EXPECT_TRUE(same_at_9_digits(a.p_cmd, b.p_cmd));
    for (int i = 0; i < 4; ++i) EXPECT_TRUE(same_at_9_digits(a.s(i), b.s(i)));
    EXPECT_EQ(a.saturated, b.saturated);
  }

  // Writing the parsed log again is byte-identical.
  std::stringstream again;
  write_simlog_csv(again, back);
  EXPECT_EQ(again.str(), ss.str());
}

TEST(SimLogCsv, HeaderAndRejects) {
  std::stringstream ss;
  write_simlog_csv(ss, SimLog{});
  EXPECT_EQ(ss.str(), std::string(kSimLogHeader) + "\n");

  std::stringstream bad_header("t,x\n");
  EXPECT_THROW(read_simlog_csv(bad_header), ConfigError);
  std::stringstream short_row(std::string(kSimLogHeader) + "\n0,1,2\n");
  EXPECT_THROW(read_simlog_csv(short_row), ConfigError);
}

TEST(SweepCsv, NoneWhenNeverSaturated) {
  std::stringstream ss;
  write_sweep_csv(ss, {{0.0, 0.001, RunStatus::Completed, std::nullopt, std::nullopt},
                       {1.5, 30.0, RunStatus::Diverged, 2.25, 4.0}});
  EXPECT_EQ(ss.str(), "Omega,delta,status,first_saturation_time\n0,0.001,completed,none\n1.5,30,diverged,2.25\n");
}

TEST(StepCsv, Layout) {
  std::stringstream ss;
  write_step_csv(ss, {{0.0, 1.0, 1.0}, {0.001, 0.5, 0.75}});
  EXPECT_EQ(ss.str(), "t,y,cumulative_mean\n0,1,1\n0.001,0.5,0.75\n");
}

TEST(ParamsJson, DefaultsAndOverrides) {
  const auto p = params_from_json(R"({"m": 0.75, "s_max": 500})");
  EXPECT_EQ(p.m, 0.75);
  EXPECT_EQ(p.s_max, 500.0);
  EXPECT_EQ(p.kF, 3e-5);
  EXPECT_EQ(p.J.z(), 0.0264);
}

TEST(ParamsJson, InfinityRoundTrip) {
  VehicleParams<double> p;
  p.s_max = std::numeric_limits<double>::infinity();
  p.L = 0.3;
  const auto back = params_from_json(params_to_json(p));
  EXPECT_TRUE(std::isinf(back.s_max));
  EXPECT_FALSE(back.clamping());
  EXPECT_EQ(back.L, 0.3);
  EXPECT_EQ(back.J, p.J);
}

TEST(ParamsJson, Rejects) {
  EXPECT_THROW(params_from_json("{"), ConfigError);
  EXPECT_THROW(params_from_json("[1,2]"), ConfigError);
  EXPECT_THROW(params_from_json(R"({"m": -1})"), ConfigError);
  EXPECT_THROW(params_from_json(R"({"m": "heavy"})"), ConfigError);
}

TEST(FormationJson, ParsesOneBasedIndices) {
  const FormationConfig c = formation_from_json(kTetrahedronJson);
  ASSERT_EQ(c.size(), 5u);
  EXPECT_EQ(c.leaders, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(c.neighbors.at(4), (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(c.transform.kind, AffineTransform::Kind::Translate);
  EXPECT_EQ(c.transform.offset, Vector3d(1, 0, 0));
  EXPECT_EQ(c.transform.T, 8.0);
  EXPECT_EQ(c.safety.d_min, 2.0);
  EXPECT_VEC_NEAR(c.initial_positions[4], Vector3d(0.5, 0.5, 1.5), 0.0);
}

TEST(FormationJson, OtherKinds) {
  std::string text = kTetrahedronJson;
  const auto swap = [&](const std::string& transform) {
    std::string s = text;
    const auto a = s.find("\"transform\"");
    const auto b = s.find("\"safety\"");
    return s.replace(a, b - a, "\"transform\": " + transform + ",\n  ");
  };
  auto c = formation_from_json(swap(R"({"kind": "scale", "params": {"factor": 0.5}})"));
  EXPECT_EQ(c.transform.kind, AffineTransform::Kind::Scale);
  EXPECT_EQ(c.transform.factor, 0.5);
  EXPECT_EQ(c.transform.T, 10.0);
  c = formation_from_json(swap(R"({"kind": "rotate_z", "params": {"angle": 1.5}})"));
  EXPECT_EQ(c.transform.angle, 1.5);
  EXPECT_THROW(formation_from_json(swap(R"({"kind": "shear"})")), ConfigError);
}

TEST(FormationJson, Rejects) {
  EXPECT_THROW(formation_from_json("not json"), ConfigError);
  std::string bad = kTetrahedronJson;
  bad.replace(bad.find("0.25, 0.25, 0.25, 0.25"), 22, "0.25, 0.25, 0.25, 0.20");
  EXPECT_THROW(formation_from_json(bad), ConfigError);
  bad = kTetrahedronJson;
  bad.replace(bad.find("[1, 2, 3, 4]}"), 12, "[1, 2, 3, 9]");
  EXPECT_THROW(formation_from_json(bad), ConfigError);
  bad = kTetrahedronJson;
  bad.replace(bad.find("\"agents\": 5"), 11, "\"agents\": 4");
  EXPECT_THROW(formation_from_json(bad), ConfigError);
}

TEST(Files, AtomicWriteCreatesDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "quadflat_io_test";
  std::filesystem::remove_all(dir);
  const std::string path = (dir / "nested" / "file.txt").string();
  write_file(path, "hello\n");
  EXPECT_EQ(read_file(path), "hello\n");
  write_file(path, "bye\n");
  EXPECT_EQ(read_file(path), "bye\n");
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
  EXPECT_THROW(read_file((dir / "missing").string()), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Manifest, JsonShape) {
  RunManifest m{"sim", R"({"dt":0.01})", {"sim.csv"}, 0.5, 0};
  const std::string text = m.to_json();
  EXPECT_NE(text.find("\"command\": \"sim\""), std::string::npos);
  EXPECT_NE(text.find("\"dt\": 0.01"), std::string::npos);
  EXPECT_NE(text.find("\"sim.csv\""), std::string::npos);
  EXPECT_NE(text.find("\"exit_code\": 0"), std::string::npos);
}
