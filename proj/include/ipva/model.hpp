#pragma once

#include <Eigen/Dense>

#include "ipva/params.hpp"

namespace ipva {

// (theta, theta_dot, phi, phi_dot, x_us, x_us_dot)
using State = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;

// Benchmark state (theta, theta_dot, x_us, x_us_dot).
using BenchmarkState = Eigen::Vector4d;

struct ControlInput {
  enum class Form { kDamping, kTorque };

  Form form = Form::kDamping;
  double value = 0.0;

  static ControlInput damping(double ce) { return {Form::kDamping, ce}; }
  static ControlInput torque(double fd) { return {Form::kTorque, fd}; }

  // Generator torque u * (x4 - x2) transmitted at state `x`.
  double generator_torque(const State& x) const {
    return form == Form::kDamping ? value * (x(3) - x(1)) : value;
  }
};

struct CostWeights {
  double comfort = 1.0;  // alpha1
  double energy = 0.0;   // alpha2
};

// Inertia matrix over the accelerations (theta, phi, x_us).
Matrix3 inertia_matrix(const SuspensionParams& p, double phi);

// Full 6x6 G(x) of G(x) xdot = F(x, u, w).
Matrix6 mass_matrix(const SuspensionParams& p, const State& x);

// Right-hand side F(x, u, w).
State forcing(const SuspensionParams& p, const State& x,
              const ControlInput& u, double w);

// xdot = G(x)^-1 F(x, u, w). Throws kLinearSolveFailure if the solve fails.
State dynamics(const SuspensionParams& p, const State& x,
               const ControlInput& u, double w);
inline State dynamics(const SuspensionParams& p, const State& x, double ce,
                      double w) {
  return dynamics(p, x, ControlInput::damping(ce), w);
}

// G(x)^-1 (0, ..., 0, kt): the derivative's sensitivity to w.
State disturbance_direction(const SuspensionParams& p, const State& x);

BenchmarkState linear_benchmark_dynamics(const SuspensionParams& p,
                                         const BenchmarkState& x, double ce,
                                         double w);

// Benchmark embedded in the 6-state layout with the pendulum frozen at zero,
// so that power and acceleration channels are shared with the IPVA plant.
State benchmark_dynamics(const SuspensionParams& p, const State& x, double ce,
                         double w);

// Continuous state matrix of the benchmark, (theta, theta_dot, x_us, x_us_dot).
Eigen::Matrix4d benchmark_state_matrix(const SuspensionParams& p, double ce);

inline double sprung_acceleration(const SuspensionParams& p,
                                  const State& xdot) {
  return xdot(5) + p.screw_radius * xdot(1);
}

inline double harvested_power(const State& x, double ce) {
  const double rel = x(1) - x(3);
  return ce * rel * rel;
}

// alpha1 * (xdot6 + R xdot2)^2 - alpha2 * u * (x2 - x4)^2
double stage_cost(const SuspensionParams& p, const CostWeights& weights,
                  const State& x, const State& xdot, double u);

// Static equilibrium on a road at height w: springs unloaded, wheel at w.
inline State rest_state(double w) {
  State x = State::Zero();
  x(4) = w;
  return x;
}

// Kinetic plus potential energy (road displacement `w`).
double total_energy(const SuspensionParams& p, const State& x, double w);

}  // namespace ipva
