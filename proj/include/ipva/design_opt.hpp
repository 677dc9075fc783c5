#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ipva/params.hpp"
#include "ipva/road.hpp"
#include "ipva/sim.hpp"

namespace ipva {

struct DesignPoint {
  double carrier_radius = 0.117;   // Rp
  double pendulum_length = 0.0897; // r
  double ce = 0.225;
};

// Open box 0.5 < eta < 0.9, 0.05 < mu_r < 0.2, xi_e < 1 (and ce >= 0).
struct DesignBox {
  double eta_min = 0.5;
  double eta_max = 0.9;
  double mu_min = 0.05;
  double mu_max = 0.2;
  double xi_max = 1.0;

  bool contains(const SuspensionParams& p, const DesignPoint& d) const;
  // Throws kConstraintViolation naming the offending quantity.
  void require(const SuspensionParams& p, const DesignPoint& d) const;
};

SuspensionParams with_design(SuspensionParams p, const DesignPoint& d);

// Monte Carlo settings shared by every design point (common random numbers).
struct EvaluationSettings {
  RoadModel road;
  std::vector<std::uint64_t> seeds;
  double duration = 200.0;
  double transient_skip = 0.0;
};

// Seed-averaged metrics of the passive nonlinear plant at constant u = ce.
Metrics evaluate_design(const SuspensionParams& p, const DesignPoint& d,
                        const EvaluationSettings& settings,
                        const DesignBox& box = {});

// Seed-averaged metrics of the linear benchmark at damping ce.
Metrics evaluate_benchmark(const SuspensionParams& p, double ce,
                           const EvaluationSettings& settings);

// Non-dominated flags for (maximize avg_power, minimize rms_accel).
std::vector<bool> pareto_flags(std::span<const Metrics> points);

struct ParetoEntry {
  DesignPoint design;
  Metrics metrics;
  bool on_front = false;
};

struct ParetoResult {
  std::vector<ParetoEntry> entries;
  std::vector<std::size_t> front;  // entry indices sorted by rms_accel
};

ParetoResult make_pareto(std::vector<ParetoEntry> entries);

// Grid over carrier radius (via mu_r), eta and ce; r = eta * Rp.
struct GridSpec {
  std::vector<double> mass_ratio;
  std::vector<double> eta;
  std::vector<double> ce;

  // n points per axis at interval midpoints of the design box, ce in
  // (0, ce_max].
  static GridSpec uniform(const SuspensionParams& p, int n_mu, int n_eta,
                          int n_ce, const DesignBox& box = {});
  std::vector<DesignPoint> points(const SuspensionParams& p) const;
};

ParetoResult grid_search(const SuspensionParams& p, const GridSpec& grid,
                         const EvaluationSettings& settings,
                         const DesignBox& box = {});

ParetoResult linear_benchmark_optimum(const SuspensionParams& p,
                                      std::span<const double> ce_grid,
                                      const EvaluationSettings& settings);

struct ClosedForm {
  double avg_power = 0.0;
  double rms_accel = 0.0;
};

// Stationary benchmark power and RMS sprung acceleration under a road with
// white velocity of intensity 2 pi Gr V (cutoff taken as zero).
ClosedForm closed_form_linear(const SuspensionParams& p, double ce,
                              const RoadModel& road);

// Same formula with an a1 that omits kt on the ce^2 term and Jr^2 on the
// kt^2 term. Tests use it to check that the quadrature guard catches
// coefficient slips of this kind.
double printed_closed_form_rms(const SuspensionParams& p, double ce,
                               const RoadModel& road);

void write_pareto_csv(const std::string& path, const SuspensionParams& p,
                      const ParetoResult& result);

}  // namespace ipva
