#include "ipva/model.hpp"

#include <cmath>

#include "ipva/error.hpp"

namespace ipva {

Matrix3 inertia_matrix(const SuspensionParams& p, double phi) {
  const double R = p.screw_radius;
  const double m = p.pendulum_mass;
  const double r = p.pendulum_length;
  const double Rp = p.carrier_radius;
  const double c = std::cos(phi);
  const double g22 = p.sprung_mass * R * R + p.carrier_inertia + m * Rp * Rp +
                     m * r * r + 2.0 * m * Rp * r * c + p.pendulum_inertia +
                     p.rotor_inertia;
  const double g24 =
      m * r * r + m * Rp * r * c + p.pendulum_inertia - p.rotor_inertia;
  const double g44 = m * r * r + p.pendulum_inertia + p.rotor_inertia;
  Matrix3 g;
  g << g22, g24, p.sprung_mass * R,
       g24, g44, 0.0,
       p.sprung_mass * R, 0.0, p.sprung_mass + p.unsprung_mass;
  return g;
}

Matrix6 mass_matrix(const SuspensionParams& p, const State& x) {
  const Matrix3 g = inertia_matrix(p, x(2));
  Matrix6 full = Matrix6::Identity();
  static constexpr int kAccelRows[3] = {1, 3, 5};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      full(kAccelRows[i], kAccelRows[j]) = g(i, j);
    }
  }
  return full;
}

State forcing(const SuspensionParams& p, const State& x,
              const ControlInput& u, double w) {
  const double R = p.screw_radius;
  const double mrr = p.coupling();
  const double s = std::sin(x(2));
  const double torque = u.generator_torque(x);
  State f;
  f(0) = x(1);
  f(1) = -p.mech_damping * R * R * x(1) + torque -
         p.suspension_stiffness * R * R * x(0) + 2.0 * mrr * x(3) * x(1) * s +
         mrr * s * x(3) * x(3);
  f(2) = x(3);
  f(3) = -torque - mrr * s * x(1) * x(1) - p.pendulum_stiffness * x(2);
  f(4) = x(5);
  f(5) = -p.tire_stiffness * (x(4) - w);
  return f;
}

namespace {

Vector3 solve_accelerations(const Matrix3& g, const Vector3& rhs) {
  const Eigen::LDLT<Matrix3> ldlt(g);
  const Vector3 acc = ldlt.solve(rhs);
  const double residual = (g * acc - rhs).norm();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      !acc.allFinite() || residual > 1e-9 * (1.0 + rhs.norm())) {
    throw Error(ErrorKind::kLinearSolveFailure,
                "inertia matrix solve failed (residual " +
                    std::to_string(residual) + ")");
  }
  return acc;
}

}  // namespace

State dynamics(const SuspensionParams& p, const State& x,
               const ControlInput& u, double w) {
  const State f = forcing(p, x, u, w);
  const Vector3 acc =
      solve_accelerations(inertia_matrix(p, x(2)), Vector3(f(1), f(3), f(5)));
  State xdot;
  xdot << x(1), acc(0), x(3), acc(1), x(5), acc(2);
  return xdot;
}

State disturbance_direction(const SuspensionParams& p, const State& x) {
  const Vector3 acc = solve_accelerations(inertia_matrix(p, x(2)),
                                          Vector3(0.0, 0.0, p.tire_stiffness));
  State d = State::Zero();
  d(1) = acc(0);
  d(3) = acc(1);
  d(5) = acc(2);
  return d;
}

BenchmarkState linear_benchmark_dynamics(const SuspensionParams& p,
                                         const BenchmarkState& x, double ce,
                                         double w) {
  const double R = p.screw_radius;
  Eigen::Matrix2d g;
  g << p.sprung_mass * R * R + p.rotor_inertia, R * p.sprung_mass,
      R * p.sprung_mass, p.sprung_mass + p.unsprung_mass;
  const Eigen::Vector2d rhs(
      -(p.mech_damping * R * R + ce) * x(1) -
          p.suspension_stiffness * R * R * x(0),
      -p.tire_stiffness * (x(2) - w));
  const Eigen::Vector2d acc = g.llt().solve(rhs);
  return {x(1), acc(0), x(3), acc(1)};
}

State benchmark_dynamics(const SuspensionParams& p, const State& x, double ce,
                         double w) {
  const BenchmarkState d =
      linear_benchmark_dynamics(p, BenchmarkState(x(0), x(1), x(4), x(5)), ce, w);
  State xdot;
  xdot << d(0), d(1), 0.0, 0.0, d(2), d(3);
  return xdot;
}

Eigen::Matrix4d benchmark_state_matrix(const SuspensionParams& p, double ce) {
  Eigen::Matrix4d a;
  for (int j = 0; j < 4; ++j) {
    a.col(j) = linear_benchmark_dynamics(p, BenchmarkState::Unit(j), ce, 0.0);
  }
  return a;
}

double stage_cost(const SuspensionParams& p, const CostWeights& weights,
                  const State& x, const State& xdot, double u) {
  const double acc = sprung_acceleration(p, xdot);
  return weights.comfort * acc * acc - weights.energy * harvested_power(x, u);
}

double total_energy(const SuspensionParams& p, const State& x, double w) {
  const double R = p.screw_radius;
  const double m = p.pendulum_mass;
  const double td = x(1);
  const double pd = x(3);
  const double xd = x(5);
  const double sum = td + pd;
  const double kinetic =
      0.5 * p.unsprung_mass * xd * xd +
      0.5 * p.sprung_mass * (R * td + xd) * (R * td + xd) +
      0.5 * p.carrier_inertia * td * td +
      0.5 * m *
          (p.carrier_radius * p.carrier_radius * td * td +
           p.pendulum_length * p.pendulum_length * sum * sum +
           2.0 * p.carrier_radius * p.pendulum_length * std::cos(x(2)) * td *
               sum) +
      0.5 * p.pendulum_inertia * sum * sum +
      0.5 * p.rotor_inertia * (pd - td) * (pd - td);
  const double potential =
      0.5 * p.suspension_stiffness * R * R * x(0) * x(0) +
      0.5 * p.pendulum_stiffness * x(2) * x(2) +
      0.5 * p.tire_stiffness * (x(4) - w) * (x(4) - w);
  return kinetic + potential;
}

}  // namespace ipva
