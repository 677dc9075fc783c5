#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ipva/error.hpp"
#include "ipva/experiments.hpp"
#include "ipva/observer.hpp"
#include "ipva/sim.hpp"

using namespace ipva;

TEST_CASE("x6 derivative splits affinely in the road input") {
  const SuspensionParams p = preset("pareto3");
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    State x;
    x << 0.3 * u(rng), 4 * u(rng), 3 * u(rng), 6 * u(rng), 0.04 * u(rng), 0.4 * u(rng);
    const double ce = 0.1 + 0.1 * u(rng);
    const AffineSplit s = decompose_affine(p, x, ce);
    const double w = 0.05 * u(rng);
    CHECK(s.b1 + w * s.b2 == doctest::Approx(dynamics(p, x, ce, w)(5)).epsilon(1e-10));
    // The slope equals a dense solve of the inertia system for the tire term.
    const double slope = dynamics(p, x, ce, 1.0)(5) - dynamics(p, x, ce, 0.0)(5);
    CHECK(s.b2 == doctest::Approx(slope).epsilon(1e-9));
  }
}

TEST_CASE("road sensitivity of the wheel acceleration stays positive") {
  const SuspensionParams p = preset("pareto3");
  for (int i = 0; i < 72; ++i) {
    State x = State::Zero();
    x(2) = 2.0 * std::numbers::pi * i / 72.0;
    CHECK(decompose_affine(p, x, 0.2).b2 > 0.0);
  }
}

TEST_CASE("observer at rest on a constant road stays put") {
  const SuspensionParams p = preset("pareto3");
  const double w0 = 0.07;
  const State x = rest_state(w0);
  HgoConfig cfg;
  RoadObserver obs(p, cfg, hgo_init(p, x, 0.2, w0), w0);
  for (int k = 0; k < 200; ++k) {
    CHECK(obs.update(measurement(x), 0.2) == doctest::Approx(w0).epsilon(1e-9));
  }
  CHECK((obs.state().x_hat - x).norm() < 1e-9);
  CHECK(obs.degenerate_count() == 0);
}

TEST_CASE("gain polynomials must be Hurwitz") {
  HgoConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.a5 = 1.0;
  cfg.a6 = 1.0;
  cfg.a7 = 2.0;  // a5 a6 < a7
  CHECK_THROWS_AS(cfg.validate(), Error);
  HgoConfig neg;
  neg.eps2 = -0.01;
  CHECK_THROWS_AS(neg.validate(), Error);
  HgoConfig sub;
  sub.substeps = 0;
  CHECK_THROWS_AS(sub.validate(), Error);
}

TEST_CASE("degenerate inversion holds the previous estimate") {
  const SuspensionParams p = preset("pareto3");
  HgoConfig cfg;
  cfg.b2_guard = 1e30;
  const State x = rest_state(0.02);
  RoadObserver obs(p, cfg, hgo_init(p, x, 0.2, 0.02), 0.5);
  CHECK(obs.update(measurement(x), 0.2) == 0.5);
  CHECK(obs.update(measurement(x), 0.2) == 0.5);
  CHECK(obs.degenerate_count() == 2);
  CHECK_THROWS_AS(estimate_disturbance(p, obs.state(), 0.2, cfg), Error);
}

TEST_CASE("smaller epsilon removes an initial estimation error faster") {
  const SuspensionParams p = preset("pareto3");
  const State x = rest_state(0.0);
  auto error_after = [&](double eps, int steps) {
    HgoConfig cfg;
    cfg.eps1 = cfg.eps2 = cfg.eps3 = eps;
    cfg.substeps = 10;
    HgoState s = hgo_init(p, x, 0.2, 0.0);
    s.x_hat(1) += 0.5;
    s.x_hat(5) += 0.2;
    s.sigma_hat += 1.0;
    for (int k = 0; k < steps; ++k) s = hgo_step(s, measurement(x), cfg);
    return (s.x_hat - x).norm() + std::abs(s.sigma_hat);
  };
  CHECK(error_after(0.005, 10) < 0.5 * error_after(0.01, 10));
}

TEST_CASE("observer tracks the road of a passive run") {
  const SuspensionParams p = preset("pareto3");
  RoadModel rm;
  rm.seed = 9;
  const ObserverRun r = observe_road(p, 0.225, generate(rm, 5.0), HgoConfig{}, 1.0);
  CHECK(r.normalized_rms_error < 0.2);
  CHECK(r.trace.times.size() == 500);
}

TEST_CASE("measurement noise is seeded and off by default") {
  const SuspensionParams p = preset("pareto3");
  RoadModel rm;
  rm.seed = 2;
  const RoadSignal road = generate(rm, 2.0);
  HgoConfig cfg;
  const ObserverRun clean = observe_road(p, 0.225, road, cfg, 0.5);
  cfg.measurement_noise = 1e-4;
  cfg.noise_seed = 3;
  const ObserverRun a = observe_road(p, 0.225, road, cfg, 0.5);
  const ObserverRun b = observe_road(p, 0.225, road, cfg, 0.5);
  CHECK(a.trace.w_hat == b.trace.w_hat);
  CHECK(a.trace.w_hat != clean.trace.w_hat);
}
