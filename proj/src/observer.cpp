#include "ipva/observer.hpp"

#include <cmath>

#include "ipva/csv.hpp"
#include "ipva/error.hpp"
#include "ipva/sim.hpp"

namespace ipva {

void HgoConfig::validate() const {
  if (!(eps1 > 0.0 && eps2 > 0.0 && eps3 > 0.0)) {
    throw Error(ErrorKind::kConfig, "observer eps values must be positive");
  }
  if (!(measurement_noise >= 0.0)) {
    throw Error(ErrorKind::kConfig, "measurement noise must be non-negative");
  }
  if (!(sample_period > 0.0) || substeps < 1) {
    throw Error(ErrorKind::kConfig, "observer sample period must be positive");
  }
  // Routh: s^2 + a s + b needs a, b > 0; s^3 + a s^2 + b s + c needs
  // a, b, c > 0 and a b > c.
  if (!(a1 > 0.0 && a2 > 0.0)) {
    throw Error(ErrorKind::kConfig, "observer gains (a1, a2) not Hurwitz");
  }
  if (!(a3 > 0.0 && a4 > 0.0)) {
    throw Error(ErrorKind::kConfig, "observer gains (a3, a4) not Hurwitz");
  }
  if (!(a5 > 0.0 && a6 > 0.0 && a7 > 0.0 && a5 * a6 > a7)) {
    throw Error(ErrorKind::kConfig, "observer gains (a5, a6, a7) not Hurwitz");
  }
}

AffineSplit decompose_affine(const SuspensionParams& p, const State& x,
                             double u) {
  return {dynamics(p, x, u, 0.0)(5), disturbance_direction(p, x)(5)};
}

HgoState hgo_init(const SuspensionParams& p, const State& x, double u,
                  double w) {
  HgoState obs;
  obs.x_hat = x;
  obs.sigma_hat = dynamics(p, x, u, w)(5);
  obs.last_y = measurement(x);
  return obs;
}

namespace {

using ObsVec = Eigen::Matrix<double, 7, 1>;

}  // namespace

HgoState hgo_step(const HgoState& obs, const Vector3& y,
                  const HgoConfig& cfg) {
  const double ts = cfg.sample_period;
  const double h = ts / cfg.substeps;
  // Measurement over the interval: the parabola through the previous two
  // samples and the new one once available, a straight line before that.
  const Vector3 y0 = obs.last_y;
  const Vector3 slope = obs.has_prev ? Vector3((y - obs.prev_y) / (2.0 * ts))
                                     : Vector3((y - y0) / ts);
  const Vector3 curve = obs.has_prev
                            ? Vector3((y - 2.0 * y0 + obs.prev_y) / (2.0 * ts * ts))
                            : Vector3::Zero();
  auto rhs = [&](double tau, const ObsVec& z) {
    const Vector3 meas = y0 + tau * slope + tau * tau * curve;
    const double e1 = meas(0) - z(0);
    const double e2 = meas(1) - z(2);
    const double e3 = meas(2) - z(4);
    ObsVec d;
    d(0) = z(1) + cfg.a1 / cfg.eps1 * e1;
    d(1) = cfg.a2 / (cfg.eps1 * cfg.eps1) * e1;
    d(2) = z(3) + cfg.a3 / cfg.eps2 * e2;
    d(3) = cfg.a4 / (cfg.eps2 * cfg.eps2) * e2;
    d(4) = z(5) + cfg.a5 / cfg.eps3 * e3;
    d(5) = z(6) + cfg.a6 / (cfg.eps3 * cfg.eps3) * e3;
    d(6) = cfg.a7 / (cfg.eps3 * cfg.eps3 * cfg.eps3) * e3;
    return d;
  };
  ObsVec z;
  z << obs.x_hat, obs.sigma_hat;
  for (int i = 0; i < cfg.substeps; ++i) {
    const double t = i * h;
    const ObsVec k1 = rhs(t, z);
    const ObsVec k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1);
    const ObsVec k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2);
    const ObsVec k4 = rhs(t + h, z + h * k3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!z.allFinite()) {
    throw Error(ErrorKind::kNonFiniteState,
                "observer estimate diverged; reduce the sample period or "
                "increase eps");
  }
  HgoState next;
  next.x_hat = z.head<6>();
  next.sigma_hat = z(6);
  next.last_y = y;
  next.prev_y = y0;
  next.has_prev = true;
  return next;
}

double estimate_disturbance(const SuspensionParams& p, const HgoState& obs,
                            double u, const HgoConfig& cfg) {
  const AffineSplit split = decompose_affine(p, obs.x_hat, u);
  if (!(std::abs(split.b2) > cfg.b2_guard)) {
    throw Error(ErrorKind::kDegenerateInversion,
                "disturbance gain below guard");
  }
  return (obs.sigma_hat - split.b1) / split.b2;
}

RoadObserver::RoadObserver(SuspensionParams params, HgoConfig cfg,
                           HgoState initial, double initial_w)
    : params_(std::move(params)),
      cfg_(cfg),
      state_(std::move(initial)),
      rng_(cfg.noise_seed ^ 0x2545f4914f6cdd1dULL),
      w_hat_(initial_w) {
  cfg_.validate();
}

double RoadObserver::update(const Vector3& y_clean, double u) {
  Vector3 y = y_clean;
  if (cfg_.measurement_noise > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg_.measurement_noise);
    for (int i = 0; i < 3; ++i) y(i) += noise(rng_);
  }
  state_ = hgo_step(state_, y, cfg_);
  try {
    w_hat_ = estimate_disturbance(params_, state_, u, cfg_);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kDegenerateInversion) throw;
    ++degenerate_;
  }
  return w_hat_;
}

void write_observer_csv(const std::string& path, const ObserverTrace& trace) {
  CsvWriter out(path);
  out.header({"time_s", "w_true_m", "w_hat_m", "sigma_true", "sigma_hat"});
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    out.field(trace.times[k])
        .field(trace.w_true[k])
        .field(trace.w_hat[k])
        .field(trace.sigma_true[k])
        .field(trace.sigma_hat[k]);
    out.end_row();
  }
}

}  // namespace ipva
