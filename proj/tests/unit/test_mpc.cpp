#include <doctest.h>

#include <limits>

#include "ipva/error.hpp"
#include "ipva/mpc.hpp"

using namespace ipva;

namespace {

State moving_state() {
  State x;
  x << 0.05, 1.5, 0.4, -2.0, 0.01, 0.2;
  return x;
}

}  // namespace

TEST_CASE("damping recovered from a torque") {
  CHECK(recover_u(0.2, 0.0, 2.0, 0.225) == doctest::Approx(0.1));
  CHECK(recover_u(1.0, 0.0, 2.0, 0.225) == 0.225);   // clipped above
  CHECK(recover_u(-0.2, 0.0, 2.0, 0.225) == 0.0);    // active torque refused
  CHECK(recover_u(0.2, 1.0, 1.0 + 1e-9, 0.225) == 0.0);
}

TEST_CASE("NMPC with one and two steps matches a grid search") {
  const SuspensionParams p = preset("pareto3");
  const Plant plant(p, PlantKind::kIpva);
  for (const CostWeights w : {CostWeights{1.0, 0.0}, CostWeights{0.0, 1.0},
                              CostWeights{1.0, 0.05}}) {
    MpcConfig cfg;
    cfg.weights = w;
    cfg.max_iterations = 200;
    cfg.horizon = 1;
    Eigen::VectorXd preview = Eigen::VectorXd::Constant(1, 0.01);
    const MpcSolution s1 = nmpc_solve(plant, moving_state(), preview, cfg);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 2000; ++i) {
      Eigen::VectorXd u = Eigen::VectorXd::Constant(1, cfg.u_max * i / 2000.0);
      best = std::min(best, nmpc_cost(plant, moving_state(), u, preview, cfg));
    }
    CHECK(s1.cost <= best + 1e-9 * std::abs(best) + 1e-12);

    cfg.horizon = 2;
    preview = Eigen::VectorXd::Constant(2, 0.01);
    const MpcSolution s2 = nmpc_solve(plant, moving_state(), preview, cfg);
    best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 60; ++i) {
      for (int j = 0; j <= 60; ++j) {
        Eigen::VectorXd u(2);
        u << cfg.u_max * i / 60.0, cfg.u_max * j / 60.0;
        best = std::min(best, nmpc_cost(plant, moving_state(), u, preview, cfg));
      }
    }
    CHECK(s2.cost <= best + 1e-6 * std::abs(best) + 1e-12);
    CHECK((s2.controls.array() >= 0.0).all());
    CHECK((s2.controls.array() <= cfg.u_max).all());
  }
}

TEST_CASE("SL-MPC with one step matches a scan of the passive torque range") {
  const SuspensionParams p = preset("pareto3");
  const SlStateSpace model = deterministic_linearize(p, 0.2, 0.01);
  const State x0 = moving_state();
  const double rel = x0(3) - x0(1);
  for (const CostWeights w : {CostWeights{1.0, 0.0}, CostWeights{0.0, 1.0}}) {
    MpcConfig cfg;
    cfg.weights = w;
    cfg.horizon = 1;
    const SlMpcProblem problem(p, model, cfg);
    const Eigen::VectorXd preview = Eigen::VectorXd::Constant(1, 0.0);
    const MpcSolution s = problem.solve(x0, preview);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 4000; ++i) {
      const Eigen::VectorXd f = Eigen::VectorXd::Constant(1, cfg.u_max * rel * i / 4000.0);
      best = std::min(best, problem.cost(x0, preview, f));
    }
    CHECK(s.cost <= best + 1e-7 * std::abs(best) + 1e-12);
    CHECK(s.torques(0) * rel >= 0.0);
    CHECK(std::abs(s.torques(0)) <= cfg.u_max * std::abs(rel) * (1 + 1e-9));
  }
}

TEST_CASE("SL-MPC predictions follow the discrete recursion") {
  const SuspensionParams p = preset("pareto3");
  const SlStateSpace model = deterministic_linearize(p, 0.2, 0.01);
  MpcConfig cfg;
  cfg.horizon = 6;
  const SlMpcProblem problem(p, model, cfg);
  Eigen::VectorXd preview(6), torques(6);
  preview << 0.01, 0.02, 0.0, -0.01, 0.03, 0.0;
  torques << 0.1, -0.2, 0.0, 0.3, 0.05, -0.1;
  const Eigen::VectorXd stacked = problem.predict(moving_state(), preview, torques);
  State x = moving_state();
  for (int k = 0; k < 6; ++k) {
    x = model.ad * x + model.bd * torques(k) + model.dd * preview(k);
    CHECK((stacked.segment<6>(6 * k) - x).norm() < 1e-9 * (1.0 + x.norm()));
  }
}

TEST_CASE("closed loop keeps the generator passive and within bounds") {
  const SuspensionParams p = preset("pareto3");
  const SlStateSpace model = deterministic_linearize(p, 0.2, 0.01);
  RoadModel rm;
  rm.seed = 3;
  for (auto kind : {ControllerKind::kNmpc, ControllerKind::kSlMpc}) {
    ClosedLoopConfig cfg;
    cfg.controller = kind;
    cfg.duration = 1.0;
    const ClosedLoopResult r = closed_loop(p, &model, generate(rm, 1.2), cfg);
    CHECK(r.min_passivity_margin >= 0.0);
    CHECK(r.max_bound_excess <= 0.0);
    CHECK(r.trajectory.size() == 100);
  }
}

TEST_CASE("a preview past the end of the road is rejected") {
  const SuspensionParams p = preset("pareto3");
  RoadModel rm;
  ClosedLoopConfig cfg;
  cfg.controller = ControllerKind::kNmpc;
  cfg.duration = 1.0;
  CHECK_THROWS_AS(closed_loop(p, nullptr, generate(rm, 1.0), cfg), Error);
  cfg.controller = ControllerKind::kSlMpc;
  CHECK_THROWS_AS(closed_loop(p, nullptr, generate(rm, 1.2), cfg), Error);
}

TEST_CASE("passive closed loop reproduces the open-loop simulation") {
  const SuspensionParams p = preset("pareto3");
  RoadModel rm;
  rm.seed = 6;
  const RoadSignal road = generate(rm, 5.0);
  ClosedLoopConfig cfg;
  cfg.passive_ce = 0.18;
  cfg.duration = 5.0;
  const Metrics a = closed_loop(p, nullptr, road, cfg).metrics;
  const Metrics b = simulate_passive(Plant(p, PlantKind::kIpva), 0.18, road, 5.0);
  CHECK(a.avg_power == doctest::Approx(b.avg_power).epsilon(1e-12));
  CHECK(a.rms_accel == doctest::Approx(b.rms_accel).epsilon(1e-12));
}

TEST_CASE("controller names and config validation") {
  CHECK(parse_controller("sl-mpc") == ControllerKind::kSlMpc);
  CHECK(to_string(ControllerKind::kNmpc) == "nmpc");
  CHECK_THROWS_AS(parse_controller("pid"), Error);
  MpcConfig cfg;
  cfg.horizon = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
