#include <doctest.h>

#include <numbers>
#include <random>

#include "ipva/design_opt.hpp"
#include "ipva/error.hpp"
#include "support/oracles.hpp"

using namespace ipva;

TEST_CASE("closed form agrees with frequency-domain quadrature") {
  const SuspensionParams p = table_one_preset();
  RoadModel road;
  for (double ce : {0.02, 0.225, 3.0}) {
    const oracle::StationaryStats q = oracle::benchmark_stationary(p, ce, road);
    const ClosedForm cf = closed_form_linear(p, ce, road);
    CHECK(cf.avg_power == doctest::Approx(q.avg_power).epsilon(1e-8));
    CHECK(cf.rms_accel == doctest::Approx(q.rms_accel).epsilon(1e-8));
  }
}

TEST_CASE("the quadrature guard rejects the printed coefficient slip") {
  const SuspensionParams p = table_one_preset();
  RoadModel road;
  const oracle::StationaryStats q = oracle::benchmark_stationary(p, 0.225, road);
  CHECK(std::abs(printed_closed_form_rms(p, 0.225, road) / q.rms_accel - 1.0) > 0.5);
}

TEST_CASE("lossless benchmark harvests the full road input power") {
  SuspensionParams p = table_one_preset();
  p.mech_damping = 0.0;
  RoadModel road;
  const double input = std::numbers::pi * road.speed * road.roughness * p.tire_stiffness;
  for (double ce : {0.05, 0.5, 5.0}) {
    CHECK(closed_form_linear(p, ce, road).avg_power == doctest::Approx(input));
  }
  CHECK_THROWS_AS(closed_form_linear(p, 0.0, road), Error);
}

TEST_CASE("pareto flags match a brute-force dominance scan") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Metrics> pts(30);
    for (auto& m : pts) m = {u(rng), u(rng)};
    const std::vector<bool> flags = pareto_flags(pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        const bool no_worse = pts[j].avg_power >= pts[i].avg_power &&
                              pts[j].rms_accel <= pts[i].rms_accel;
        const bool better = pts[j].avg_power > pts[i].avg_power ||
                            pts[j].rms_accel < pts[i].rms_accel;
        dominated = dominated || (no_worse && better);
      }
      CHECK(flags[i] == !dominated);
    }
  }
}

TEST_CASE("design box constraints") {
  const SuspensionParams p = table_one_preset();
  const DesignBox box;
  CHECK(box.contains(p, {0.117, 0.0897, 0.225}));
  CHECK_FALSE(box.contains(p, {0.117, 0.11, 0.225}));   // eta > 0.9
  CHECK_FALSE(box.contains(p, {0.3, 0.2, 0.225}));      // mu_r too large
  CHECK_FALSE(box.contains(p, {0.117, 0.0897, 50.0}));  // xi_e > 1
  CHECK_THROWS_AS(box.require(p, {0.117, 0.11, 0.225}), Error);
}

TEST_CASE("grid search marks a non-empty front and evaluates every point") {
  const SuspensionParams p = table_one_preset();
  EvaluationSettings ev;
  ev.seeds = {1, 2};
  ev.duration = 20.0;
  const ParetoResult r = grid_search(p, GridSpec::uniform(p, 2, 2, 2), ev);
  CHECK(r.entries.size() == 8);
  CHECK_FALSE(r.front.empty());
  for (std::size_t i = 1; i < r.front.size(); ++i) {
    CHECK(r.entries[r.front[i - 1]].metrics.rms_accel <=
          r.entries[r.front[i]].metrics.rms_accel);
  }
}

TEST_CASE("first-mode calibration hits its target") {
  SuspensionParams p = table_one_preset();
  p.screw_radius = calibrate_screw_radius(p, 0.8);
  CHECK(benchmark_natural_frequencies(p)[0] / p.omega0() == doctest::Approx(0.8).epsilon(1e-9));
  CHECK_THROWS_AS(calibrate_screw_radius(p, 0.95), Error);
  const SuspensionParams q = table_one_preset();
  CHECK(q.damping_ratio(7.2) == doctest::Approx(1.0).epsilon(1e-6));
}
