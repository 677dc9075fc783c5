#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ipva {

// First-order filtered white-noise road, PSD 2 pi Gr V / (omega^2 + wc^2).
struct RoadModel {
  double roughness = 2.56e-6;  // Gr
  double speed = 20.0;         // V, m/s
  double cutoff = 0.01;        // wc, rad/s
  double sample_period = 0.01; // Ts, s
  std::uint64_t seed = 1;

  // Intensity 2 pi Gr V of the driving white noise.
  double intensity() const;
  // Stationary variance pi Gr V / wc (infinite when wc == 0).
  double stationary_variance() const;
  // 2 pi Gr V / (w^2 + wc^2); variance is (1/2pi) times its integral over
  // the whole real line, so the one-sided rad/s density is psd(w) / pi.
  double psd(double omega) const;
  void validate() const;
};

struct RoadSignal {
  std::vector<double> samples;
  RoadModel model;

  std::size_t size() const { return samples.size(); }
  double sample_period() const { return model.sample_period; }
  double duration() const { return sample_period() * samples.size(); }
  double operator[](std::size_t k) const { return samples[k]; }
  // Mean square of the samples.
  double power() const;
};

// Exact discretization of xr' = -wc xr + n(t) over Ts; starts from the
// stationary distribution when wc > 0 and from zero otherwise.
RoadSignal generate(const RoadModel& model, double duration);

// Adds white Gaussian noise with mean-square ratio 10^(snr_db / 10)
// relative to the whole realization.
RoadSignal corrupt(const RoadSignal& signal, double snr_db,
                   std::uint64_t seed);

struct PreviewMode {
  enum class Kind { kPerfect, kLrde, kNoisy };

  Kind kind = Kind::kPerfect;
  double snr_db = 0.0;

  static PreviewMode perfect() { return {Kind::kPerfect, 0.0}; }
  static PreviewMode lrde() { return {Kind::kLrde, 0.0}; }
  static PreviewMode noisy(double snr_db) { return {Kind::kNoisy, snr_db}; }

  // "perfect", "lrde", "snr10", ...
  std::string name() const;
  static PreviewMode parse(const std::string& name);
};

// Supplies controller previews for one run. The corrupted copy used by the
// noisy mode is drawn once so its noise level is fixed over the run.
class PreviewSource {
 public:
  PreviewSource(const RoadSignal& signal, PreviewMode mode,
                std::uint64_t noise_seed);

  // N samples starting at step k; `w_hat` fills the LRDE window.
  Eigen::VectorXd window(std::size_t k, int horizon, double w_hat) const;

  const PreviewMode& mode() const { return mode_; }
  const RoadSignal& previewed() const { return noisy_.samples.empty() ? *signal_ : noisy_; }

 private:
  const RoadSignal* signal_;
  PreviewMode mode_;
  RoadSignal noisy_;
};

// One-shot preview; throws kIndexOutOfRange past the end of the realization.
Eigen::VectorXd preview(const RoadSignal& signal, std::size_t k, int horizon,
                        const PreviewMode& mode, double w_hat,
                        std::uint64_t noise_seed = 0);

void write_road_csv(const std::string& path, const RoadSignal& signal);
RoadSignal read_road_csv(const std::string& path);

}  // namespace ipva
