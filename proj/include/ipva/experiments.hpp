#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ipva/config.hpp"
#include "ipva/design_opt.hpp"
#include "ipva/mpc.hpp"
#include "ipva/observer.hpp"
#include "ipva/params.hpp"
#include "ipva/road.hpp"
#include "ipva/slin.hpp"

namespace ipva {

// Config readers. Keys: Gr, V, wc, Ts, seed | N, alpha1, alpha2, u_max,
// mpc_max_iterations, mpc_tolerance, warm_start, sl_passes | eps1..eps3,
// obs_a1..obs_a7, obs_substeps, obs_noise, obs_noise_seed | sl_warmup, sl_duration, sl_batches, sl_tolerance.
RoadModel road_from_config(const KeyValueConfig& cfg);
MpcConfig mpc_from_config(const KeyValueConfig& cfg, const SuspensionParams& p,
                          double ts);
HgoConfig observer_from_config(const KeyValueConfig& cfg, double ts);
SlSettings sl_settings_from_config(const KeyValueConfig& cfg);
std::vector<std::uint64_t> seeds_from_config(
    const KeyValueConfig& cfg, const std::vector<std::uint64_t>& fallback);

// 64-bit FNV-1a of the config entries except `out` and `workers`, as 16
// hex digits.
std::string config_hash(const KeyValueConfig& cfg);

// Independent road realizations used by every experiment: seed s drives
// the road generator directly, the preview noise uses a derived seed.
std::uint64_t preview_noise_seed(std::uint64_t seed);

struct MpcCase {
  ControllerKind controller = ControllerKind::kPassive;
  PreviewMode preview = PreviewMode::perfect();
  CostWeights weights{0.0, 1.0};
};

// Closed-loop runs of every case on every seed (common random numbers),
// ordered case-major. Runs execute on the worker pool unless `sequential`.
std::vector<RunRecord> run_mpc_cases(const SuspensionParams& p,
                                     const SlStateSpace& model,
                                     const RoadModel& road,
                                     std::span<const std::uint64_t> seeds,
                                     double duration,
                                     const std::vector<MpcCase>& cases,
                                     const MpcConfig& base,
                                     const HgoConfig& observer,
                                     bool sequential = false);

// Seed-averaged (avg_power, rms_accel) of consecutive blocks of rows.
std::vector<Metrics> block_means(const std::vector<RunRecord>& rows,
                                 std::size_t block);

// x3 RMS errors of the equivalent and Jacobian linear models against the
// nonlinear plant for one realization, all started from rest.
struct LinearizationError {
  double sl = 0.0;
  double dl = 0.0;
  double nonlinear_rms = 0.0;
};
LinearizationError linearization_error(const SuspensionParams& p,
                                       const SlStateSpace& sl,
                                       const SlStateSpace& dl,
                                       const RoadSignal& road, double ce);

struct ObserverRun {
  ObserverTrace trace;
  double normalized_rms_error = 0.0;  // after the transient
  double sigma_rms_error = 0.0;       // after the transient
};
// Passive plant with the observer running alongside.
ObserverRun observe_road(const SuspensionParams& p, double ce,
                         const RoadSignal& road, const HgoConfig& cfg,
                         double transient);

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "pareto",     "stationarity", "psd",         "sl-accuracy", "mpc-energy",
      "mpc-comfort", "mpc-mixed",   "observer",    "timing",      "simulate"};
  return names;
}

struct ExperimentSpec {
  std::string name;
  KeyValueConfig config;
  std::string output_dir;

  // Reads `experiment` and `out` from the config; throws Error(kConfig).
  static ExperimentSpec from_config(const KeyValueConfig& cfg);
  void validate() const;
};

struct ExperimentReport {
  std::vector<std::string> files;
  std::string manifest_path;
  std::string hash;
  double wall_seconds = 0.0;
};

// Writes the experiment's CSVs and a manifest into spec.output_dir. The
// manifest holds the full config as `key = value` lines (loadable as a
// config) with run metadata in comment lines. Numeric CSVs are identical
// across reruns of the same spec; timing.csv holds wall-clock data.
ExperimentReport run_experiment(const ExperimentSpec& spec);

}  // namespace ipva
