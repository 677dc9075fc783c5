#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ipva/model.hpp"
#include "ipva/road.hpp"

namespace ipva {

// Classical fourth-order Runge-Kutta step of x' = f(x).
template <class Vec, class Deriv>
Vec rk4_step(const Deriv& f, const Vec& x, double h) {
  const Vec k1 = f(x);
  const Vec k2 = f(Vec(x + 0.5 * h * k1));
  const Vec k3 = f(Vec(x + 0.5 * h * k2));
  const Vec k4 = f(Vec(x + h * k3));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Same step when k1 = f(x) is already known.
template <class Vec, class Deriv>
Vec rk4_step(const Deriv& f, const Vec& x, const Vec& k1, double h) {
  const Vec k2 = f(Vec(x + 0.5 * h * k1));
  const Vec k3 = f(Vec(x + 0.5 * h * k2));
  const Vec k4 = f(Vec(x + h * k3));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

enum class PlantKind { kIpva, kBenchmark };

// A quarter-car plant in the common 6-state layout. The benchmark keeps the
// pendulum states at zero, so power is ce * x2^2 there.
class Plant {
 public:
  Plant(SuspensionParams params, PlantKind kind);

  State derivative(const State& x, double u, double w) const;
  // One RK4 step with u and w held over the step.
  State step(const State& x, double u, double w, double ts) const;

  const SuspensionParams& params() const { return params_; }
  PlantKind kind() const { return kind_; }

 private:
  SuspensionParams params_;
  PlantKind kind_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<double> controls;
  std::vector<double> disturbances;
  std::vector<double> accelerations;  // sprung mass, from the dynamics
  std::vector<double> power;          // instantaneous harvested power

  std::size_t size() const { return times.size(); }
};

struct Metrics {
  double avg_power = 0.0;
  double rms_accel = 0.0;
};

// u_k as a function of the step index and current state.
using ControlPolicy = std::function<double(std::size_t, const State&)>;

// Fixed-step RK4 over `duration` (a multiple of ts matching the road period).
// Sample k holds the state at t_k with the control and disturbance applied
// over [t_k, t_k + ts). Throws kNonFiniteState on divergence.
Trajectory integrate(const Plant& plant, const State& x0,
                     const ControlPolicy& policy, const RoadSignal& road,
                     double ts, double duration);

// Streaming equivalent of metrics(integrate(...)) for a constant control.
Metrics simulate_passive(const Plant& plant, double ce, const RoadSignal& road,
                         double duration, double transient_skip = 0.0);

// Time means over samples at t >= transient_skip. Throws kEmptyTrajectory.
Metrics metrics(const Trajectory& traj, double transient_skip = 0.0);

std::vector<double> cumulative_mean(std::span<const double> series);

struct StationarityReport {
  bool stationary = false;
  double max_relative_deviation = 0.0;  // after t_check, w.r.t. final value
};

// True iff the cumulative mean stays within `band` (relative) of its final
// value for all t >= t_check.
StationarityReport stationarity(std::span<const double> cumulative_means,
                                double ts, double t_check, double band);

void write_trajectory_csv(const std::string& path, const Trajectory& traj);

}  // namespace ipva
