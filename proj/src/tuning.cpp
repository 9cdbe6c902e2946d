#include "quadflat/tuning.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "quadflat/errors.hpp"

namespace quadflat {

namespace {

constexpr double kImagTol = 1e-12;

// Coefficients of prod (s - r_i), descending, leading 1 omitted.
std::vector<Complex> expand(const std::vector<Complex>& roots) {
  std::vector<Complex> c{1.0};
  for (const Complex& r : roots) {
    c.push_back(0.0);
    for (std::size_t k = c.size() - 1; k > 0; --k) c[k] -= r * c[k - 1];
  }
  c.erase(c.begin());
  return c;
}

bool conjugate_closed(const std::vector<Complex>& poles) {
  std::vector<bool> used(poles.size(), false);
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (used[i] || std::abs(poles[i].imag()) <= kImagTol) continue;
    used[i] = true;
    bool found = false;
    for (std::size_t j = 0; j < poles.size(); ++j) {
      if (used[j]) continue;
      const double tol = kImagTol * std::max(1.0, std::abs(poles[i]));
      if (std::abs(poles[j] - std::conj(poles[i])) <= tol) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

Complex parse_pole(const std::string& entry) {
  static const std::regex re(
      R"(^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?:\s*([+-])\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*j)?$)");
  std::smatch m;
  if (!std::regex_match(entry, m, re)) throw ConfigError("malformed pole entry '" + entry + "'");
  const double re_part = std::stod(m[1].str());
  double im_part = 0.0;
  if (m[2].matched) {
    im_part = m[3].matched && m[3].length() > 0 ? std::stod(m[3].str()) : 1.0;
    if (m[2].str() == "-") im_part = -im_part;
  }
  return {re_part, im_part};
}

}  // namespace

PoleSet::PoleSet(std::vector<Complex> poles) : poles_(std::move(poles)) {
  for (const Complex& p : poles_) {
    if (!(p.real() < 0.0)) throw UnstablePole("pole set: every pole needs a negative real part");
  }
  if (!conjugate_closed(poles_)) throw NonConjugateClosure("pole set: complex poles must come in conjugate pairs");
}

PoleSet PoleSet::parse(std::string_view text) {
  std::vector<Complex> poles;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    const std::string entry = trim(text.substr(start, end - start));
    if (entry.empty()) throw ConfigError("empty pole entry in '" + std::string(text) + "'");
    poles.push_back(parse_pole(entry));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return PoleSet(std::move(poles));
}

std::string PoleSet::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < poles_.size(); ++i) {
    if (i) os << ',';
    os << poles_[i].real();
    if (poles_[i].imag() != 0.0) os << (poles_[i].imag() > 0 ? "+" : "-") << std::abs(poles_[i].imag()) << 'j';
  }
  return os.str();
}

std::vector<double> poly_from_poles(const std::vector<Complex>& poles) {
  std::vector<Complex> c{Complex(1.0, 0.0)};
  for (const Complex& p : poles) {
    std::vector<Complex> next(c.size() + 1, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= p * c[i];
    }
    c = std::move(next);
  }
  std::vector<double> out;
  out.reserve(poles.size());
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (std::abs(c[i].imag()) > kImagTol * std::max(1.0, std::abs(c[i].real()))) {
      throw NonConjugateClosure("poly_from_poles: coefficients are not real");
    }
    out.push_back(c[i].real());
  }
  return out;
}

std::vector<Complex> roots_of_monic(const std::vector<double>& coeffs) {
  const auto n = static_cast<Eigen::Index>(coeffs.size());
  if (n == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) companion(0, j) = -coeffs[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<Complex> roots;
  for (Eigen::Index i = 0; i < n; ++i) roots.push_back(solver.eigenvalues()(i));

  // A k-fold root comes back as a ring of radius ~eps^(1/k); the ring's
  // centroid is accurate to roughly machine precision. Replace each tight
  // cluster by its centroid unless that visibly worsens the coefficients,
  // which is what happens when the cluster is genuinely distinct roots.
  std::vector<Complex> merged = roots;
  std::vector<bool> done(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (done[i]) continue;
    std::vector<std::size_t> cluster{i};
    done[i] = true;
    for (std::size_t c = 0; c < cluster.size(); ++c) {
      for (std::size_t j = 0; j < roots.size(); ++j) {
        if (!done[j] && std::abs(roots[j] - roots[cluster[c]]) <= 1e-2 * (1.0 + std::abs(roots[j]))) {
          done[j] = true;
          cluster.push_back(j);
        }
      }
    }
    Complex centroid = 0.0;
    for (std::size_t j : cluster) centroid += roots[j];
    centroid /= static_cast<double>(cluster.size());
    for (std::size_t j : cluster) merged[j] = centroid;
  }
  const auto residual = [&](const std::vector<Complex>& r) {
    const std::vector<Complex> c = expand(r);
    double worst = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      worst = std::max(worst, std::abs(c[k] - coeffs[k]) / (1.0 + std::abs(coeffs[k])));
    }
    return worst;
  };
  return residual(merged) <= 10.0 * residual(roots) + 1e-13 ? merged : roots;
}

SnapGains<double> snap_gains_from_poles(const PoleSet& position, const PoleSet& yaw) {
  if (position.size() != 4) throw WrongOrder("snap position loop needs 4 poles");
  if (yaw.size() != 2) throw WrongOrder("snap yaw loop needs 2 poles");
  const auto c = poly_from_poles(position);
  const auto y = poly_from_poles(yaw);
  SnapGains<double> g;
  g.K1 = Vector3d::Constant(c[0]);
  g.K2 = Vector3d::Constant(c[1]);
  g.K3 = Vector3d::Constant(c[2]);
  g.K4 = Vector3d::Constant(c[3]);
  g.K5 = y[0];
  g.K6 = y[1];
  return g;
}

MellingerGains<double> mellinger_gains_from_poles(const PoleSet& position, const PoleSet& attitude,
                                                  const VehicleParams<double>& params) {
  if (position.size() != 2) throw WrongOrder("mellinger position loop needs 2 poles");
  if (attitude.size() != 2) throw WrongOrder("mellinger attitude loop needs 2 poles");
  const auto c = poly_from_poles(position);
  const auto a = poly_from_poles(attitude);
  MellingerGains<double> g;
  g.Kp = Vector3d::Constant(params.m * c[0]);
  g.Kv = Vector3d::Constant(params.m * c[1]);
  g.Komega = Vector3d::Constant(a[0]);
  g.KR = Vector3d::Constant(a[1]);
  return g;
}

PoleSet default_snap_position_poles() { return PoleSet({-10.0, -10.0, -10.0, -10.0}); }
PoleSet default_snap_yaw_poles() { return PoleSet({-10.0, -10.0}); }
PoleSet default_mellinger_position_poles() { return PoleSet({-5.0, -5.0}); }
PoleSet mellinger_real_attitude_poles() { return PoleSet({-1.0, -1.0}); }
PoleSet mellinger_complex_attitude_poles() { return PoleSet({Complex(-0.5, 3.0), Complex(-0.5, -3.0)}); }

std::vector<StepSample> step_response(const PoleSet& poles, double duration, double dt) {
  if (poles.size() != 2) throw WrongOrder("step_response needs 2 poles");
  if (!(dt > 0.0)) throw ConfigError("step_response: dt must be positive");
  const auto c = poly_from_poles(poles);
  const double c1 = c[0], c0 = c[1];
  const auto f = [&](const Eigen::Vector2d& x) { return Eigen::Vector2d(x(1), -c1 * x(1) - c0 * x(0)); };

  const auto steps = static_cast<long>(std::llround(duration / dt));
  std::vector<StepSample> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  Eigen::Vector2d x(1.0, 0.0);
  double sum = 0.0;
  for (long k = 0; k <= steps; ++k) {
    sum += x(0);
    out.push_back({static_cast<double>(k) * dt, x(0), sum / static_cast<double>(k + 1)});
    const Eigen::Vector2d k1 = f(x);
    const Eigen::Vector2d k2 = f(x + 0.5 * dt * k1);
    const Eigen::Vector2d k3 = f(x + 0.5 * dt * k2);
    const Eigen::Vector2d k4 = f(x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return out;
}

std::optional<double> cumulative_settling_time(const std::vector<StepSample>& series, double band) {
  if (series.empty()) return std::nullopt;
  std::size_t i = series.size();
  while (i > 0 && std::abs(series[i - 1].cumulative_mean) < band) --i;
  if (i == series.size()) return std::nullopt;
  return series[i].t;
}

}  // namespace quadflat
