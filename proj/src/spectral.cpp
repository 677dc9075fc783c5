#include "ipva/spectral.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "ipva/csv.hpp"
#include "ipva/error.hpp"

namespace ipva {

namespace {

struct FftwPlan {
  fftw_plan plan = nullptr;
  double* in = nullptr;
  fftw_complex* out = nullptr;

  explicit FftwPlan(std::size_t n) {
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~FftwPlan() {
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
};

}  // namespace

Spectrum psd(std::span<const double> signal, double ts,
             std::size_t segment_length) {
  const std::size_t len = segment_length;
  const std::size_t hop = len / 2;
  if (len < 4 || signal.size() < len + hop) {
    throw Error(ErrorKind::kTooShort,
                "signal of " + std::to_string(signal.size()) +
                    " samples holds fewer than two segments of " +
                    std::to_string(len));
  }
  std::vector<double> window(len);
  double window_sq = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                     static_cast<double>(i) /
                                     static_cast<double>(len));
    window_sq += window[i] * window[i];
  }

  const std::size_t bins = len / 2 + 1;
  std::vector<double> accum(bins, 0.0);
  std::size_t segments = 0;
  // Planner calls are not thread safe in FFTW.
  static std::mutex planner_mutex;
  std::unique_ptr<FftwPlan> plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan = std::make_unique<FftwPlan>(len);
  }
  for (std::size_t start = 0; start + len <= signal.size(); start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < len; ++i) mean += signal[start + i];
    mean /= static_cast<double>(len);
    for (std::size_t i = 0; i < len; ++i) {
      plan->in[i] = (signal[start + i] - mean) * window[i];
    }
    fftw_execute(plan->plan);
    for (std::size_t b = 0; b < bins; ++b) {
      accum[b] += plan->out[b][0] * plan->out[b][0] +
                  plan->out[b][1] * plan->out[b][1];
    }
    ++segments;
  }

  // One-sided density per Hz is 2 |X|^2 Ts / sum(w^2); divide by 2 pi for rad/s.
  const double scale = ts / (window_sq * static_cast<double>(segments)) /
                       (2.0 * std::numbers::pi);
  Spectrum out;
  out.omega.resize(bins);
  out.density.resize(bins);
  const double d_omega =
      2.0 * std::numbers::pi / (static_cast<double>(len) * ts);
  for (std::size_t b = 0; b < bins; ++b) {
    const bool edge = b == 0 || (len % 2 == 0 && b == bins - 1);
    out.omega[b] = static_cast<double>(b) * d_omega;
    out.density[b] = accum[b] * scale * (edge ? 1.0 : 2.0);
  }
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan.reset();
  }
  return out;
}

long peak_index(const Spectrum& s, double lo, double hi) {
  long best = -1;
  for (std::size_t i = 0; i < s.omega.size(); ++i) {
    if (s.omega[i] < lo || s.omega[i] > hi) continue;
    if (best < 0 || s.density[i] > s.density[static_cast<std::size_t>(best)]) {
      best = static_cast<long>(i);
    }
  }
  return best;
}

double band_mean(const Spectrum& s, double lo, double hi) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.omega.size(); ++i) {
    if (s.omega[i] < lo || s.omega[i] > hi) continue;
    acc += s.density[i];
    ++n;
  }
  return n ? acc / static_cast<double>(n) : 0.0;
}

double band_power(const Spectrum& s, double lo, double hi) {
  double acc = 0.0;
  for (std::size_t i = 1; i < s.omega.size(); ++i) {
    const double a = s.omega[i - 1];
    const double b = s.omega[i];
    if (b < lo || a > hi) continue;
    acc += 0.5 * (s.density[i - 1] + s.density[i]) * (b - a);
  }
  return acc;
}

void write_spectrum_csv(const std::string& path, const Spectrum& s,
                        double omega0) {
  CsvWriter csv(path);
  if (omega0 > 0.0) {
    csv.header({"omega_rad_s", "omega_normalized", "density"});
  } else {
    csv.header({"omega_rad_s", "density"});
  }
  for (std::size_t i = 0; i < s.omega.size(); ++i) {
    csv.field(s.omega[i]);
    if (omega0 > 0.0) csv.field(s.omega[i] / omega0);
    csv.field(s.density[i]);
    csv.end_row();
  }
}

}  // namespace ipva
