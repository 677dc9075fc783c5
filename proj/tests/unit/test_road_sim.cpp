#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ipva/error.hpp"
#include "ipva/road.hpp"
#include "ipva/sim.hpp"
#include "ipva/spectral.hpp"

using namespace ipva;

TEST_CASE("road realization has the stationary variance and correlation") {
  RoadModel m;
  m.cutoff = 2.0;
  m.seed = 11;
  const RoadSignal r = generate(m, 4000.0);
  double mean = 0.0;
  for (double v : r.samples) mean += v;
  mean /= r.size();
  double var = 0.0, lag = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    var += (r[k] - mean) * (r[k] - mean);
    if (k > 0) lag += (r[k] - mean) * (r[k - 1] - mean);
  }
  lag /= var;
  var /= r.size();
  const double expected = std::numbers::pi * m.roughness * m.speed / m.cutoff;
  CHECK(m.stationary_variance() == doctest::Approx(expected));
  CHECK(var == doctest::Approx(expected).epsilon(0.05));
  CHECK(lag == doctest::Approx(std::exp(-m.cutoff * m.sample_period)).epsilon(1e-3));
}

TEST_CASE("road generation is seed deterministic") {
  RoadModel m;
  m.seed = 5;
  const RoadSignal a = generate(m, 10.0);
  const RoadSignal b = generate(m, 10.0);
  m.seed = 6;
  const RoadSignal c = generate(m, 10.0);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
  CHECK(a.size() == 1000);
}

TEST_CASE("noisy copy has the requested signal to noise ratio") {
  RoadModel m;
  m.seed = 3;
  m.cutoff = 1.0;
  const RoadSignal r = generate(m, 500.0);
  const RoadSignal n = corrupt(r, 10.0, 4);
  double noise = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) noise += std::pow(n[k] - r[k], 2);
  noise /= r.size();
  CHECK(r.power() / noise == doctest::Approx(10.0).epsilon(0.03));
}

TEST_CASE("preview windows") {
  RoadModel m;
  const RoadSignal r = generate(m, 1.0);
  const Eigen::VectorXd w = preview(r, 10, 5, PreviewMode::perfect(), 0.0);
  for (int i = 0; i < 5; ++i) CHECK(w(i) == r[10 + i]);
  const Eigen::VectorXd h = preview(r, 10, 5, PreviewMode::lrde(), 0.7);
  CHECK(h.isConstant(0.7));
  CHECK_THROWS_AS(preview(r, r.size() - 2, 5, PreviewMode::perfect(), 0.0), Error);
  CHECK(PreviewMode::parse("snr15").snr_db == 15.0);
  CHECK(PreviewMode::noisy(20).name() == "snr20");
  CHECK_THROWS_AS(PreviewMode::parse("fuzzy"), Error);
}

TEST_CASE("RK4 converges at fourth order") {
  // x'' = -x, exact solution cos t.
  auto f = [](const Eigen::Vector2d& x) { return Eigen::Vector2d(x(1), -x(0)); };
  std::vector<double> err;
  for (double h : {0.1, 0.05, 0.025}) {
    Eigen::Vector2d x(1.0, 0.0);
    const int n = static_cast<int>(std::llround(5.0 / h));
    for (int k = 0; k < n; ++k) x = rk4_step(f, x, h);
    err.push_back(std::abs(x(0) - std::cos(5.0)));
  }
  CHECK(std::log2(err[0] / err[1]) == doctest::Approx(4.0).epsilon(0.05));
  CHECK(std::log2(err[1] / err[2]) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("streamed passive metrics equal trajectory metrics") {
  const SuspensionParams p = table_one_preset();
  RoadModel m;
  m.seed = 2;
  const RoadSignal r = generate(m, 30.0);
  const Plant plant(p, PlantKind::kIpva);
  const Trajectory t = integrate(
      plant, rest_state(r[0]), [](std::size_t, const State&) { return 0.225; }, r,
      m.sample_period, 30.0);
  const Metrics a = metrics(t, 5.0);
  const Metrics b = simulate_passive(plant, 0.225, r, 30.0, 5.0);
  CHECK(a.avg_power == doctest::Approx(b.avg_power).epsilon(1e-12));
  CHECK(a.rms_accel == doctest::Approx(b.rms_accel).epsilon(1e-12));
}

TEST_CASE("metrics and stationarity edge cases") {
  Trajectory empty;
  CHECK_THROWS_AS(metrics(empty), Error);
  const std::vector<double> series = {1.0, 3.0, 2.0, 2.0};
  const std::vector<double> cm = cumulative_mean(series);
  CHECK(cm[1] == 2.0);
  CHECK(cm[3] == 2.0);
  std::vector<double> flat(1000, 5.0);
  CHECK(stationarity(cumulative_mean(flat), 0.01, 5.0, 1e-9).stationary);
}

TEST_CASE("spectrum integrates to the variance and locates a tone") {
  const double ts = 0.01;
  const double w0 = 2.0 * std::numbers::pi * 7.0;
  std::vector<double> x(200000);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = 3.0 * std::sin(w0 * k * ts);
  const Spectrum s = psd(x, ts, 8192);
  double integral = 0.0;
  for (std::size_t k = 1; k < s.omega.size(); ++k) {
    integral += s.density[k] * (s.omega[k] - s.omega[k - 1]);
  }
  CHECK(integral == doctest::Approx(4.5).epsilon(0.02));
  const long k = peak_index(s, 1.0, 100.0);
  CHECK(s.omega[static_cast<std::size_t>(k)] == doctest::Approx(w0).epsilon(0.01));
  CHECK_THROWS_AS(psd(std::vector<double>(100, 0.0), ts, 8192), Error);
}
