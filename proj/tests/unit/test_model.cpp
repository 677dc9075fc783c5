#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "ipva/error.hpp"
#include "ipva/model.hpp"
#include "ipva/params.hpp"
#include "ipva/sim.hpp"

using namespace ipva;

namespace {

State random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  State x;
  x << 0.5 * u(rng), 5.0 * u(rng), 3.0 * u(rng), 10.0 * u(rng),
      0.05 * u(rng), 0.5 * u(rng);
  return x;
}

}  // namespace

TEST_CASE("inertia matrix is symmetric positive definite over the design box") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int d = 0; d < 20; ++d) {
    SuspensionParams p = table_one_preset();
    p.carrier_radius = 0.05 + 0.15 * u(rng);
    p.pendulum_length = p.carrier_radius * (0.5 + 0.4 * u(rng));
    for (int i = 0; i < 72; ++i) {
      const Matrix3 g = inertia_matrix(p, 2.0 * std::numbers::pi * i / 72.0);
      CHECK((g - g.transpose()).norm() == doctest::Approx(0.0));
      CHECK(Eigen::SelfAdjointEigenSolver<Matrix3>(g).eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("dynamics solves G xdot = F") {
  const SuspensionParams p = table_one_preset();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const State x = random_state(rng);
    const State xd = dynamics(p, x, 0.1, 0.01);
    const State f = forcing(p, x, ControlInput::damping(0.1), 0.01);
    const State res = mass_matrix(p, x) * xd - f;
    CHECK(res.cwiseAbs().maxCoeff() < 1e-9 * (1.0 + f.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("dynamics is affine in the road input") {
  const SuspensionParams p = table_one_preset();
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const State x = random_state(rng);
    const State d0 = dynamics(p, x, 0.2, 0.0);
    const State dir = disturbance_direction(p, x);
    for (double w : {-0.1, 0.03, 0.2}) {
      const State d = dynamics(p, x, 0.2, w);
      CHECK((d - d0 - w * dir).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("torque and damping inputs agree") {
  const SuspensionParams p = table_one_preset();
  State x;
  x << 0.1, 2.0, 0.3, -1.0, 0.01, 0.2;
  const double ce = 0.15;
  const double fd = ce * (x(3) - x(1));
  const State a = dynamics(p, x, ControlInput::damping(ce), 0.0);
  const State b = dynamics(p, x, ControlInput::torque(fd), 0.0);
  CHECK((a - b).norm() < 1e-12);
}

TEST_CASE("benchmark accelerations match its two-mass model") {
  const SuspensionParams p = table_one_preset();
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    State x = random_state(rng);
    const State b = benchmark_dynamics(p, x, 0.0, 0.02);
    const Eigen::Matrix2d g{{p.sprung_mass * p.screw_radius * p.screw_radius +
                                 p.rotor_inertia,
                             p.sprung_mass * p.screw_radius},
                            {p.sprung_mass * p.screw_radius,
                             p.sprung_mass + p.unsprung_mass}};
    const Eigen::Vector2d rhs(
        -p.mech_damping * p.screw_radius * p.screw_radius * x(1) -
            p.suspension_stiffness * p.screw_radius * p.screw_radius * x(0),
        -p.tire_stiffness * (x(4) - 0.02));
    const Eigen::Vector2d acc = g.inverse() * rhs;
    CHECK(b(1) == doctest::Approx(acc(0)).epsilon(1e-12));
    CHECK(b(5) == doctest::Approx(acc(1)).epsilon(1e-12));
    CHECK(b(2) == 0.0);
    CHECK(b(3) == 0.0);
  }
}

TEST_CASE("rest on the road is an equilibrium") {
  const SuspensionParams p = table_one_preset();
  for (double w : {-0.2, 0.0, 0.13}) {
    CHECK(dynamics(p, rest_state(w), 0.225, w).norm() < 1e-12);
  }
}

TEST_CASE("energy balance: lossless drift shrinks at fourth order") {
  SuspensionParams p = table_one_preset();
  p.mech_damping = 0.0;
  const Plant plant(p, PlantKind::kIpva);
  State x0;
  x0 << 0.3, 2.0, 1.0, -3.0, 0.02, 0.1;
  std::vector<double> drift;
  for (double h : {0.004, 0.002, 0.001}) {
    State x = x0;
    for (int k = 0; k < static_cast<int>(std::llround(2.0 / h)); ++k) {
      x = plant.step(x, 0.0, 0.0, h);
    }
    drift.push_back(std::abs(total_energy(p, x, 0.0) - total_energy(p, x0, 0.0)));
  }
  CHECK(std::log2(drift[0] / drift[1]) > 3.5);
  CHECK(std::log2(drift[1] / drift[2]) > 3.5);
}

TEST_CASE("energy decreases by the dissipated work under damping") {
  const SuspensionParams p = table_one_preset();
  const Plant plant(p, PlantKind::kIpva);
  State x;
  x << 0.3, 2.0, 1.0, -3.0, 0.02, 0.1;
  const double ce = 0.2;
  const double h = 1e-4;
  const double e0 = total_energy(p, x, 0.0);
  double dissipated = 0.0;
  for (int k = 0; k < 10000; ++k) {
    // Trapezoid on the dissipation rate.
    const double r0 = ce * std::pow(x(1) - x(3), 2) +
                      p.mech_damping * std::pow(p.screw_radius * x(1), 2);
    x = plant.step(x, ce, 0.0, h);
    const double r1 = ce * std::pow(x(1) - x(3), 2) +
                      p.mech_damping * std::pow(p.screw_radius * x(1), 2);
    dissipated += 0.5 * h * (r0 + r1);
  }
  CHECK(total_energy(p, x, 0.0) + dissipated == doctest::Approx(e0).epsilon(1e-6));
}

TEST_CASE("stage cost combines acceleration and harvested power") {
  const SuspensionParams p = table_one_preset();
  State x;
  x << 0.0, 1.0, 0.0, 3.0, 0.0, 0.0;
  State xd = State::Zero();
  xd(1) = 2.0;
  xd(5) = 0.5;
  const double acc = 0.5 + p.screw_radius * 2.0;
  CHECK(stage_cost(p, {1.0, 0.0}, x, xd, 0.1) == doctest::Approx(acc * acc));
  CHECK(stage_cost(p, {0.0, 1.0}, x, xd, 0.1) == doctest::Approx(-0.1 * 4.0));
}

TEST_CASE("parameter validation rejects non-physical values") {
  SuspensionParams p = table_one_preset();
  p.sprung_mass = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  CHECK_THROWS_AS(preset("nope"), Error);
}
