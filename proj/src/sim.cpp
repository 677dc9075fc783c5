#include "ipva/sim.hpp"

#include <cmath>

#include "ipva/csv.hpp"
#include "ipva/error.hpp"

namespace ipva {

Plant::Plant(SuspensionParams params, PlantKind kind)
    : params_(std::move(params)), kind_(kind) {
  params_.validate();
}

State Plant::derivative(const State& x, double u, double w) const {
  return kind_ == PlantKind::kIpva ? dynamics(params_, x, u, w)
                                   : benchmark_dynamics(params_, x, u, w);
}

State Plant::step(const State& x, double u, double w, double ts) const {
  return rk4_step([&](const State& s) { return derivative(s, u, w); }, x, ts);
}

namespace {

std::size_t step_count(const RoadSignal& road, double ts, double duration) {
  if (!(ts > 0.0) || !(duration > 0.0)) {
    throw Error(ErrorKind::kConfig, "ts and duration must be > 0");
  }
  if (std::abs(road.sample_period() - ts) > 1e-12 * ts) {
    throw Error(ErrorKind::kConfig, "integration step must match road period");
  }
  const double steps = duration / ts;
  const auto n = static_cast<std::size_t>(std::llround(steps));
  if (std::abs(steps - static_cast<double>(n)) > 1e-6) {
    throw Error(ErrorKind::kConfig, "duration must be a multiple of ts");
  }
  if (n > road.size()) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "road realization shorter than the simulation");
  }
  return n;
}

void check_finite(const State& x, std::size_t k) {
  if (!x.allFinite()) {
    throw Error(ErrorKind::kNonFiniteState,
                "state diverged at step " + std::to_string(k));
  }
}

}  // namespace

Trajectory integrate(const Plant& plant, const State& x0,
                     const ControlPolicy& policy, const RoadSignal& road,
                     double ts, double duration) {
  const std::size_t n = step_count(road, ts, duration);
  const double R = plant.params().screw_radius;
  Trajectory traj;
  traj.times.reserve(n);
  traj.states.reserve(n);
  traj.controls.reserve(n);
  traj.disturbances.reserve(n);
  traj.accelerations.reserve(n);
  traj.power.reserve(n);

  State x = x0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = policy(k, x);
    const double w = road[k];
    auto f = [&](const State& s) { return plant.derivative(s, u, w); };
    const State k1 = f(x);
    traj.times.push_back(static_cast<double>(k) * ts);
    traj.states.push_back(x);
    traj.controls.push_back(u);
    traj.disturbances.push_back(w);
    traj.accelerations.push_back(k1(5) + R * k1(1));
    traj.power.push_back(harvested_power(x, u));
    x = rk4_step(f, x, k1, ts);
    check_finite(x, k);
  }
  return traj;
}

Metrics simulate_passive(const Plant& plant, double ce, const RoadSignal& road,
                         double duration, double transient_skip) {
  const double ts = road.sample_period();
  const std::size_t n = step_count(road, ts, duration);
  const double R = plant.params().screw_radius;
  const auto skip = static_cast<std::size_t>(std::llround(transient_skip / ts));
  if (skip >= n) throw Error(ErrorKind::kEmptyTrajectory, "transient covers run");

  double power_sum = 0.0;
  double accel_sq_sum = 0.0;
  State x = rest_state(road.samples.empty() ? 0.0 : road[0]);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = road[k];
    auto f = [&](const State& s) { return plant.derivative(s, ce, w); };
    const State k1 = f(x);
    if (k >= skip) {
      const double acc = k1(5) + R * k1(1);
      power_sum += harvested_power(x, ce);
      accel_sq_sum += acc * acc;
    }
    x = rk4_step(f, x, k1, ts);
    check_finite(x, k);
  }
  const double count = static_cast<double>(n - skip);
  return {power_sum / count, std::sqrt(accel_sq_sum / count)};
}

Metrics metrics(const Trajectory& traj, double transient_skip) {
  double power_sum = 0.0;
  double accel_sq_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (traj.times[k] + 1e-12 < transient_skip) continue;
    power_sum += traj.power[k];
    accel_sq_sum += traj.accelerations[k] * traj.accelerations[k];
    ++count;
  }
  if (count == 0) {
    throw Error(ErrorKind::kEmptyTrajectory, "no samples in metric window");
  }
  const double c = static_cast<double>(count);
  return {power_sum / c, std::sqrt(accel_sq_sum / c)};
}

std::vector<double> cumulative_mean(std::span<const double> series) {
  std::vector<double> out(series.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    acc += series[k];
    out[k] = acc / static_cast<double>(k + 1);
  }
  return out;
}

StationarityReport stationarity(std::span<const double> cumulative_means,
                                double ts, double t_check, double band) {
  StationarityReport report;
  if (cumulative_means.empty()) return report;
  const double final_value = cumulative_means.back();
  const auto start = static_cast<std::size_t>(std::llround(t_check / ts));
  double worst = 0.0;
  for (std::size_t k = start; k < cumulative_means.size(); ++k) {
    const double dev = final_value != 0.0
                           ? std::abs(cumulative_means[k] / final_value - 1.0)
                           : std::abs(cumulative_means[k]);
    worst = std::max(worst, dev);
  }
  report.max_relative_deviation = worst;
  report.stationary = worst <= band;
  return report;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  CsvWriter csv(path);
  csv.header({"time_s", "x1", "x2", "x3", "x4", "x5", "x6", "u", "w",
              "accel", "power"});
  for (std::size_t k = 0; k < traj.size(); ++k) {
    csv.field(traj.times[k]);
    for (int i = 0; i < 6; ++i) csv.field(traj.states[k](i));
    csv.field(traj.controls[k])
        .field(traj.disturbances[k])
        .field(traj.accelerations[k])
        .field(traj.power[k]);
    csv.end_row();
  }
}

}  // namespace ipva
