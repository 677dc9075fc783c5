#include "ipva/design_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ipva/csv.hpp"
#include "ipva/error.hpp"
#include "ipva/parallel.hpp"

namespace ipva {

SuspensionParams with_design(SuspensionParams p, const DesignPoint& d) {
  p.carrier_radius = d.carrier_radius;
  p.pendulum_length = d.pendulum_length;
  return p;
}

bool DesignBox::contains(const SuspensionParams& p,
                         const DesignPoint& d) const {
  try {
    require(p, d);
    return true;
  } catch (const Error&) {
    return false;
  }
}

void DesignBox::require(const SuspensionParams& p, const DesignPoint& d) const {
  const SuspensionParams q = with_design(p, d);
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kConstraintViolation, what);
  };
  if (!(d.carrier_radius > 0.0) || !(d.pendulum_length > 0.0)) {
    fail("Rp and r must be positive");
  }
  const double eta = q.eta();
  if (!(eta > eta_min && eta < eta_max)) {
    fail("eta = " + std::to_string(eta) + " outside (" +
         std::to_string(eta_min) + ", " + std::to_string(eta_max) + ")");
  }
  const double mu = q.mass_ratio();
  if (!(mu > mu_min && mu < mu_max)) {
    fail("mu_r = " + std::to_string(mu) + " outside (" +
         std::to_string(mu_min) + ", " + std::to_string(mu_max) + ")");
  }
  if (!(d.ce >= 0.0) || !(q.damping_ratio(d.ce) < xi_max)) {
    fail("xi_e = " + std::to_string(q.damping_ratio(d.ce)) +
         " outside [0, " + std::to_string(xi_max) + ")");
  }
}

namespace {

Metrics seed_run(const Plant& plant, double ce,
                 const EvaluationSettings& settings, std::uint64_t seed) {
  RoadModel road = settings.road;
  road.seed = seed;
  const RoadSignal signal = generate(road, settings.duration);
  return simulate_passive(plant, ce, signal, settings.duration,
                          settings.transient_skip);
}

Metrics average(std::span<const Metrics> runs) {
  Metrics m;
  for (const auto& r : runs) {
    m.avg_power += r.avg_power;
    m.rms_accel += r.rms_accel;
  }
  m.avg_power /= static_cast<double>(runs.size());
  m.rms_accel /= static_cast<double>(runs.size());
  return m;
}

void require_seeds(const EvaluationSettings& settings) {
  if (settings.seeds.empty()) {
    throw Error(ErrorKind::kConfig, "seed list must be non-empty");
  }
}

// Evaluates (plant, ce) cases for every seed in one flat parallel batch and
// reduces per case in seed order.
std::vector<Metrics> evaluate_batch(
    const std::vector<std::pair<Plant, double>>& cases,
    const EvaluationSettings& settings) {
  require_seeds(settings);
  const std::size_t n_seeds = settings.seeds.size();
  const auto runs = parallel_map<Metrics>(
      cases.size() * n_seeds, [&](std::size_t i) {
        const auto& [plant, ce] = cases[i / n_seeds];
        return seed_run(plant, ce, settings, settings.seeds[i % n_seeds]);
      });
  std::vector<Metrics> out(cases.size());
  for (std::size_t c = 0; c < cases.size(); ++c) {
    out[c] = average(std::span<const Metrics>(runs).subspan(c * n_seeds,
                                                           n_seeds));
  }
  return out;
}

}  // namespace

Metrics evaluate_design(const SuspensionParams& p, const DesignPoint& d,
                        const EvaluationSettings& settings,
                        const DesignBox& box) {
  box.require(p, d);
  return evaluate_batch({{Plant(with_design(p, d), PlantKind::kIpva), d.ce}},
                        settings)[0];
}

Metrics evaluate_benchmark(const SuspensionParams& p, double ce,
                           const EvaluationSettings& settings) {
  return evaluate_batch({{Plant(p, PlantKind::kBenchmark), ce}}, settings)[0];
}

std::vector<bool> pareto_flags(std::span<const Metrics> points) {
  std::vector<bool> flags(points.size(), true);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size() && flags[i]; ++j) {
      if (i == j) continue;
      const auto& a = points[j];
      const auto& b = points[i];
      const bool no_worse =
          a.avg_power >= b.avg_power && a.rms_accel <= b.rms_accel;
      const bool better = a.avg_power > b.avg_power || a.rms_accel < b.rms_accel;
      if (no_worse && better) flags[i] = false;
    }
  }
  return flags;
}

ParetoResult make_pareto(std::vector<ParetoEntry> entries) {
  std::vector<Metrics> m;
  m.reserve(entries.size());
  for (const auto& e : entries) m.push_back(e.metrics);
  const auto flags = pareto_flags(m);
  ParetoResult result;
  result.entries = std::move(entries);
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    result.entries[i].on_front = flags[i];
    if (flags[i]) result.front.push_back(i);
  }
  std::stable_sort(result.front.begin(), result.front.end(),
                   [&](std::size_t a, std::size_t b) {
                     return result.entries[a].metrics.rms_accel <
                            result.entries[b].metrics.rms_accel;
                   });
  return result;
}

GridSpec GridSpec::uniform(const SuspensionParams& p, int n_mu, int n_eta,
                           int n_ce, const DesignBox& box) {
  if (n_mu < 1 || n_eta < 1 || n_ce < 1) {
    throw Error(ErrorKind::kConfig, "grid sizes must be >= 1");
  }
  auto midpoints = [](double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * (i + 0.5) / n;
    return v;
  };
  GridSpec g;
  g.mass_ratio = midpoints(box.mu_min, box.mu_max, n_mu);
  g.eta = midpoints(box.eta_min, box.eta_max, n_eta);
  g.ce.resize(static_cast<std::size_t>(n_ce));
  for (int i = 0; i < n_ce; ++i) g.ce[i] = p.ce_max * (i + 1) / n_ce;
  return g;
}

std::vector<DesignPoint> GridSpec::points(const SuspensionParams& p) const {
  std::vector<DesignPoint> out;
  for (double mu : mass_ratio) {
    const double rp = p.screw_radius * std::sqrt(mu * p.sprung_mass /
                                                 p.pendulum_mass);
    for (double e : eta) {
      for (double c : ce) out.push_back({rp, e * rp, c});
    }
  }
  return out;
}

ParetoResult grid_search(const SuspensionParams& p, const GridSpec& grid,
                         const EvaluationSettings& settings,
                         const DesignBox& box) {
  const auto designs = grid.points(p);
  std::vector<std::pair<Plant, double>> cases;
  cases.reserve(designs.size());
  for (const auto& d : designs) {
    box.require(p, d);
    cases.emplace_back(Plant(with_design(p, d), PlantKind::kIpva), d.ce);
  }
  const auto metrics = evaluate_batch(cases, settings);
  std::vector<ParetoEntry> entries;
  for (std::size_t i = 0; i < designs.size(); ++i) {
    entries.push_back({designs[i], metrics[i], false});
  }
  return make_pareto(std::move(entries));
}

ParetoResult linear_benchmark_optimum(const SuspensionParams& p,
                                      std::span<const double> ce_grid,
                                      const EvaluationSettings& settings) {
  const DesignBox box;
  std::vector<std::pair<Plant, double>> cases;
  for (double ce : ce_grid) {
    if (!(ce >= 0.0) || !(p.damping_ratio(ce) < box.xi_max)) {
      throw Error(ErrorKind::kConstraintViolation,
                  "benchmark ce = " + std::to_string(ce) + " violates xi_e < 1");
    }
    cases.emplace_back(Plant(p, PlantKind::kBenchmark), ce);
  }
  const auto metrics = evaluate_batch(cases, settings);
  std::vector<ParetoEntry> entries;
  for (std::size_t i = 0; i < ce_grid.size(); ++i) {
    entries.push_back({{0.0, 0.0, ce_grid[i]}, metrics[i], false});
  }
  return make_pareto(std::move(entries));
}

namespace {

struct RmsCoefficients {
  double c, a0, a1, a2, a3;
};

RmsCoefficients rms_coefficients(const SuspensionParams& p, double ce) {
  const double Ms = p.sprung_mass;
  const double Mus = p.unsprung_mass;
  const double M = Ms + Mus;
  const double ks = p.suspension_stiffness;
  const double kt = p.tire_stiffness;
  const double cm = p.mech_damping;
  const double Jr = p.rotor_inertia;
  const double R2 = p.screw_radius * p.screw_radius;
  RmsCoefficients k;
  k.c = R2 * Ms * Ms * (ce + R2 * cm) * (Jr * M + R2 * Ms * Mus);
  k.a0 = Jr * kt * ce * ce * M + Jr * Jr * Jr * kt * kt;
  k.a1 = 2.0 * ce * cm * Jr * M * kt + ce * ce * Ms * Mus * kt +
         Jr * Jr * Ms * kt * kt - 2.0 * Jr * Jr * ks * M * kt;
  k.a2 = 2.0 * ce * cm * kt * Ms * Mus + cm * cm * Jr * kt * M +
         ks * ks * Jr * M * M - 2.0 * kt * ks * Jr * Ms * Mus;
  k.a3 = Ms * Mus * cm * cm * kt + ks * ks * Ms * Mus * M;
  return k;
}

double rms_from(const RmsCoefficients& k, double R2, const RoadModel& road) {
  const double poly = k.a0 + k.a1 * R2 + k.a2 * R2 * R2 + k.a3 * R2 * R2 * R2;
  return std::sqrt(std::numbers::pi * road.speed * road.roughness * poly / k.c);
}

}  // namespace

ClosedForm closed_form_linear(const SuspensionParams& p, double ce,
                              const RoadModel& road) {
  const double R2 = p.screw_radius * p.screw_radius;
  const double total = ce + R2 * p.mech_damping;
  if (total == 0.0) {
    throw Error(ErrorKind::kDivisionByZero, "ce + R^2 cm = 0");
  }
  ClosedForm out;
  out.avg_power = ce * std::numbers::pi * road.speed * road.roughness *
                  p.tire_stiffness / total;
  out.rms_accel = rms_from(rms_coefficients(p, ce), R2, road);
  return out;
}

double printed_closed_form_rms(const SuspensionParams& p, double ce,
                               const RoadModel& road) {
  const double R2 = p.screw_radius * p.screw_radius;
  if (ce + R2 * p.mech_damping == 0.0) {
    throw Error(ErrorKind::kDivisionByZero, "ce + R^2 cm = 0");
  }
  RmsCoefficients k = rms_coefficients(p, ce);
  const double Ms = p.sprung_mass;
  const double M = Ms + p.unsprung_mass;
  const double kt = p.tire_stiffness;
  const double Jr = p.rotor_inertia;
  k.a1 = 2.0 * ce * p.mech_damping * Jr * M * kt +
         ce * ce * Ms * p.unsprung_mass + kt * kt * Ms -
         2.0 * Jr * Jr * p.suspension_stiffness * M * kt;
  return rms_from(k, R2, road);
}

void write_pareto_csv(const std::string& path, const SuspensionParams& p,
                      const ParetoResult& result) {
  CsvWriter csv(path);
  csv.header({"Rp", "r", "ce", "eta", "mu_r", "xi_e", "avg_power",
              "rms_accel", "on_front"});
  for (const auto& e : result.entries) {
    const SuspensionParams q = with_design(p, e.design);
    const bool has_pendulum = e.design.carrier_radius > 0.0;
    csv.field(e.design.carrier_radius)
        .field(e.design.pendulum_length)
        .field(e.design.ce)
        .field(has_pendulum ? q.eta() : 0.0)
        .field(has_pendulum ? q.mass_ratio() : 0.0)
        .field(p.damping_ratio(e.design.ce))
        .field(e.metrics.avg_power)
        .field(e.metrics.rms_accel)
        .field(e.on_front ? 1L : 0L);
    csv.end_row();
  }
}

}  // namespace ipva
