#pragma once

// Independent reference computations shared by the unit and acceptance
// tests. Nothing here calls the library's own closed forms or solvers.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ipva/params.hpp"
#include "ipva/road.hpp"

namespace oracle {

using cd = std::complex<double>;

// Frequency response of the two-mass benchmark in generalized coordinates
// (screw angle, wheel) to a road displacement, built directly from its
// mass, damping and stiffness matrices.
struct BenchmarkResponse {
  cd angle;   // theta / w
  cd wheel;   // x_us / w
};

inline BenchmarkResponse benchmark_response(const ipva::SuspensionParams& p,
                                            double ce, double omega) {
  const double R = p.screw_radius;
  const double Ms = p.sprung_mass;
  Eigen::Matrix2cd dyn;
  const cd s(0.0, omega);
  const double m11 = Ms * R * R + p.rotor_inertia;
  const double m12 = Ms * R;
  const double m22 = Ms + p.unsprung_mass;
  dyn(0, 0) = m11 * s * s + (p.mech_damping * R * R + ce) * s +
              p.suspension_stiffness * R * R;
  dyn(0, 1) = m12 * s * s;
  dyn(1, 0) = m12 * s * s;
  dyn(1, 1) = m22 * s * s + p.tire_stiffness;
  const Eigen::Vector2cd x =
      dyn.partialPivLu().solve(Eigen::Vector2cd(0.0, p.tire_stiffness));
  return {x(0), x(1)};
}

// (1/2pi) * integral over the real line of |H|^2 S_w, with S_w the road
// displacement spectrum 2 pi Gr V / omega^2 (no cutoff). Adaptive
// Gauss-Kronrod on quadratically graded panels, plus a mapped tail.
inline double road_integral(const std::function<double(double)>& gain2,
                            const ipva::RoadModel& road, double omega_max) {
  const double intensity = 2.0 * std::numbers::pi * road.roughness * road.speed;
  auto f = [&](double w) {
    if (w == 0.0) return 0.0;
    return gain2(w) * intensity / (w * w);
  };
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  const int panels = 80;
  double lo = 0.0;
  for (int i = 1; i <= panels; ++i) {
    const double hi = omega_max * std::pow(static_cast<double>(i) / panels, 2.0);
    total += gauss_kronrod<double, 61>::integrate(f, lo, hi, 10, 1e-12);
    lo = hi;
  }
  // Tail on [omega_max, inf) through w = omega_max / t.
  auto g = [&](double t) {
    if (t <= 0.0) return 0.0;
    const double w = omega_max / t;
    return f(w) * omega_max / (t * t);
  };
  total += gauss_kronrod<double, 61>::integrate(g, 0.0, 1.0, 10, 1e-12);
  // Both half-lines contribute equally.
  return 2.0 * total / (2.0 * std::numbers::pi);
}

struct StationaryStats {
  double avg_power = 0.0;
  double rms_accel = 0.0;
};

inline StationaryStats benchmark_stationary(const ipva::SuspensionParams& p,
                                            double ce,
                                            const ipva::RoadModel& road) {
  const double omega_max = 2000.0;
  const double R = p.screw_radius;
  auto accel2 = [&](double w) {
    const BenchmarkResponse h = benchmark_response(p, ce, w);
    return std::norm(-w * w * (R * h.angle + h.wheel));
  };
  auto rate2 = [&](double w) {
    const BenchmarkResponse h = benchmark_response(p, ce, w);
    return std::norm(cd(0.0, w) * h.angle);
  };
  StationaryStats out;
  out.rms_accel = std::sqrt(road_integral(accel2, road, omega_max));
  out.avg_power = ce * road_integral(rate2, road, omega_max);
  return out;
}

// Central-difference Jacobian of f: R^n -> R^m.
inline Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd j(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    const double step = h * std::max(1.0, std::abs(x(i)));
    xp(i) += step;
    xm(i) -= step;
    j.col(i) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return j;
}

// Equivalent gain of y = x^3 for x ~ N(0, sigma^2) by direct Monte Carlo of
// E[x y] / E[x^2], a route separate from the Jacobian expectation.
inline double cubic_gain_regression(double sigma, std::size_t n,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  double xy = 0.0, xx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = normal(rng);
    xy += x * x * x * x;
    xx += x * x;
  }
  return xy / xx;
}

}  // namespace oracle
