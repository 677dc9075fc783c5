#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ipva/model.hpp"

namespace ipva {

// Three decoupled high-gain observers on the measured angles and wheel
// displacement; the third is extended with sigma = x6' as an extra state.
struct HgoConfig {
  double eps1 = 0.01;
  double eps2 = 0.01;
  double eps3 = 0.01;
  // s^2 + a1 s + a2, s^2 + a3 s + a4 and s^3 + a5 s^2 + a6 s + a7 Hurwitz.
  double a1 = 2.0, a2 = 1.0;
  double a3 = 2.0, a4 = 1.0;
  double a5 = 3.0, a6 = 3.0, a7 = 1.0;
  double sample_period = 0.01;
  // RK4 steps per sample; 1 integrates at the plant step.
  int substeps = 1;
  // Standard deviation of white noise added to each measured channel by
  // RoadObserver; zero means noise-free measurements.
  double measurement_noise = 0.0;
  std::uint64_t noise_seed = 0;
  // Inversion guard on |b2|.
  double b2_guard = 1e-9;

  // Throws Error(kConfig) on non-positive gains or non-Hurwitz polynomials.
  void validate() const;
};

struct HgoState {
  State x_hat = State::Zero();
  double sigma_hat = 0.0;
  // Measurements (x1, x3, x5) at the last two updates; the next update
  // integrates over the sample interval with the measurement interpolated
  // through them.
  Vector3 last_y = Vector3::Zero();
  Vector3 prev_y = Vector3::Zero();
  bool has_prev = false;
};

// Observer state that matches the plant state exactly (sigma from dynamics).
HgoState hgo_init(const SuspensionParams& p, const State& x, double u,
                  double w);

struct AffineSplit {
  double b1 = 0.0;  // x6' with w = 0
  double b2 = 0.0;  // d x6' / d w
};

// x6' = b1(x, u) + w b2(x).
AffineSplit decompose_affine(const SuspensionParams& p, const State& x,
                             double u);

// Advances the observer by one sample period to the new measurement y.
// Throws kNonFiniteState if the estimate diverges.
HgoState hgo_step(const HgoState& obs, const Vector3& y,
                  const HgoConfig& cfg);

// (sigma_hat - b1) / b2 at the current estimate. Throws
// kDegenerateInversion when |b2| <= guard.
double estimate_disturbance(const SuspensionParams& p, const HgoState& obs,
                            double u, const HgoConfig& cfg);

// Observer plus inversion with the previous estimate held when the
// inversion degenerates.
class RoadObserver {
 public:
  RoadObserver(SuspensionParams params, HgoConfig cfg, HgoState initial,
               double initial_w = 0.0);

  // Feeds the measurement at the end of a sample interval together with the
  // control held over that interval; returns the estimate of the road input
  // over the interval.
  double update(const Vector3& y, double u);

  const HgoState& state() const { return state_; }
  double w_hat() const { return w_hat_; }
  int degenerate_count() const { return degenerate_; }

 private:
  SuspensionParams params_;
  HgoConfig cfg_;
  HgoState state_;
  std::mt19937_64 rng_;
  double w_hat_;
  int degenerate_ = 0;
};

inline Vector3 measurement(const State& x) { return {x(0), x(2), x(4)}; }

struct ObserverTrace {
  std::vector<double> times;
  std::vector<double> w_true;
  std::vector<double> w_hat;
  std::vector<double> sigma_true;
  std::vector<double> sigma_hat;
};

void write_observer_csv(const std::string& path, const ObserverTrace& trace);

}  // namespace ipva
