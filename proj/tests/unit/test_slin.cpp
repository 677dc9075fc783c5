#include <doctest.h>

#include <filesystem>
#include <random>

#include "ipva/error.hpp"
#include "ipva/slin.hpp"
#include "support/oracles.hpp"

using namespace ipva;

namespace {

State random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  State x;
  x << 0.5 * u(rng), 5 * u(rng), 3 * u(rng), 8 * u(rng), 0.05 * u(rng), 0.5 * u(rng);
  return x;
}

}  // namespace

TEST_CASE("generalized form reproduces the nonlinear equations of motion") {
  const SuspensionParams p = preset("pareto3");
  const GeneralizedForm f = generalized_form(p);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const State x = random_state(rng);
    const double w = 0.02 * (i % 5 - 2);
    const double fd = 0.7 * (i % 3 - 1);
    const State xd = dynamics(p, x, ControlInput::torque(fd), w);
    const Vector3 q(x(0), x(2), x(4));
    const Vector3 qd(x(1), x(3), x(5));
    const Vector3 qdd(xd(1), xd(3), xd(5));
    const Vector3 lhs = f.ml * qdd + f.cl * qd + f.kl * q + phi_vector(p, q, qd, qdd);
    const Vector3 rhs = f.road_gain * w + f.torque_gain * fd;
    CHECK((lhs - rhs).norm() <= 1e-8 * (1.0 + rhs.norm() + (f.ml * qdd).norm()));
  }
}

TEST_CASE("Phi Jacobians agree with central differences") {
  const SuspensionParams p = preset("pareto3");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Vector3 q(u(rng), 3 * u(rng), 0.05 * u(rng));
    const Vector3 qd(5 * u(rng), 10 * u(rng), u(rng));
    const Vector3 qdd(50 * u(rng), 100 * u(rng), 10 * u(rng));
    const PhiJacobians j = phi_jacobians(p, q, qd, qdd);
    auto fa = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return phi_vector(p, q, qd, v); };
    auto fv = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return phi_vector(p, q, v, qdd); };
    auto fp = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return phi_vector(p, v, qd, qdd); };
    const double scale = 1.0 + j.d_pos.cwiseAbs().maxCoeff();
    CHECK((oracle::fd_jacobian(fa, qdd) - j.d_acc).cwiseAbs().maxCoeff() < 1e-6 * scale);
    CHECK((oracle::fd_jacobian(fv, qd) - j.d_vel).cwiseAbs().maxCoeff() < 1e-6 * scale);
    CHECK((oracle::fd_jacobian(fp, q) - j.d_pos).cwiseAbs().maxCoeff() < 1e-6 * scale);
  }
}

TEST_CASE("equivalent gain of a cubic matches the regression route") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 0.7);
  std::vector<double> xs(100000);
  for (double& x : xs) x = normal(rng);
  const ExpectationEstimate e = estimate_expectation(
      xs.size(), 20, [&](std::size_t i) {
        return Eigen::MatrixXd::Constant(1, 1, 3.0 * xs[i] * xs[i]);
      });
  const double regression = oracle::cubic_gain_regression(0.7, 100000, 6);
  CHECK(e.mean(0, 0) == doctest::Approx(regression).epsilon(0.03));
  CHECK(e.mean(0, 0) == doctest::Approx(3.0 * 0.49).epsilon(0.03));
  CHECK(e.std_error(0, 0) > 0.0);
  CHECK(e.sample_count == xs.size());
}

TEST_CASE("at the origin the equivalent and Jacobian models coincide") {
  const SuspensionParams p = preset("pareto3");
  const double ce = 0.1;
  const SlStateSpace sl = assemble_sl_statespace(p, origin_sl_matrices(p), ce, 0.01);
  const SlStateSpace dl = deterministic_linearize(p, ce, 0.01);
  CHECK((sl.a_nominal() - dl.a_nominal()).norm() <= 1e-9 * dl.a_nominal().norm());
  CHECK((sl.d - dl.d).norm() <= 1e-9 * dl.d.norm());
  // Both against a finite-difference Jacobian of the plant.
  auto f = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return dynamics(p, State(v), ce, 0.0);
  };
  const Eigen::MatrixXd fd = oracle::fd_jacobian(f, State::Zero().eval(), 1e-7);
  CHECK((fd - dl.a_nominal()).cwiseAbs().maxCoeff() < 1e-5 * fd.cwiseAbs().maxCoeff());
}

TEST_CASE("discretized model is consistent with its continuous part") {
  const SuspensionParams p = preset("pareto3");
  const SlStateSpace dl = deterministic_linearize(p, 0.2, 0.01);
  CHECK((dl.ad - expm(Eigen::MatrixXd(dl.a_free * 0.01))).norm() < 1e-10);
  CHECK(dl.stabilizability.stabilizable);
  CHECK_FALSE(dl.repair.repaired);
}

TEST_CASE("equivalent matrices survive a CSV round trip") {
  const SuspensionParams p = preset("pareto3");
  RoadModel road;
  road.seed = 2;
  SlSettings s;
  s.warmup = 20.0;
  s.sample_duration = 60.0;
  s.require_convergence = false;
  const SlMatrices sl = estimate_sl_matrices(p, 0.225, road, s);
  CHECK(sl.sample_count == 6000);
  CHECK(sl.me.allFinite());
  const SlStateSpace model = assemble_sl_statespace(p, sl, 0.225, 0.01);
  const auto path = std::filesystem::temp_directory_path() / "ipva_sl_roundtrip.csv";
  write_sl_model(path.string(), sl, model);
  const SlMatrices back = read_sl_matrices(path.string());
  CHECK((back.me - sl.me).norm() <= 1e-12 * (1.0 + sl.me.norm()));
  CHECK((back.ce - sl.ce).norm() <= 1e-12 * (1.0 + sl.ce.norm()));
  CHECK((back.ke - sl.ke).norm() <= 1e-12 * (1.0 + sl.ke.norm()));
  std::filesystem::remove(path);
}

TEST_CASE("unconverged expectations raise when convergence is required") {
  const SuspensionParams p = preset("pareto3");
  RoadModel road;
  SlSettings s;
  s.warmup = 1.0;
  s.sample_duration = 2.0;
  s.tolerance = 1e-6;
  CHECK_THROWS_AS(estimate_sl_matrices(p, 0.225, road, s), Error);
}
