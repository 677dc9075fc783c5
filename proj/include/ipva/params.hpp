#pragma once

#include <array>
#include <string>

#include "ipva/config.hpp"

namespace ipva {

// Physical constants of the quarter car with the inerter pendulum absorber.
// SI units throughout; rotational damping and stiffness act on the screw
// angle, so `cm` is a translational coefficient that enters as cm * R^2.
struct SuspensionParams {
  double sprung_mass = 250.0;          // Ms, kg
  double unsprung_mass = 35.0;         // Mus, kg
  double suspension_stiffness = 55e3;  // ks, N/m
  double tire_stiffness = 150e3;       // kt, N/m
  double mech_damping = 150.0;         // cm, N s/m
  double screw_radius = 0.0311584307;  // R = L / 2pi, m
  double pendulum_mass = 2.5;          // m, kg
  double carrier_radius = 0.117;       // Rp, m
  double pendulum_length = 0.0897;     // r, m
  double carrier_inertia = 0.0;        // J, kg m^2
  double pendulum_inertia = 0.0;       // Jp, kg m^2
  double rotor_inertia = 0.000121;     // Jr, kg m^2
  double pendulum_stiffness = 0.0;     // kp, N m/rad
  double ce_max = 0.225;               // upper bound on electrical damping, N s m

  double omega0() const;
  double eta() const { return pendulum_length / carrier_radius; }
  double mass_ratio() const;                  // mu_r
  double damping_ratio(double ce) const;      // xi_e
  // m * Rp * r, the coefficient of every pendulum coupling term.
  double coupling() const {
    return pendulum_mass * carrier_radius * pendulum_length;
  }

  // Throws Error(kConfig) on non-physical values.
  void validate() const;
};

// Reference vehicle constants with the Pareto point 3 geometry.
SuspensionParams table_one_preset();
// Looks up a named preset ("table1" or "pareto3"); throws on unknown names.
SuspensionParams preset(const std::string& name);

// Applies `preset` and per-field overrides (Ms, Mus, ks, kt, cm, R, m, Rp, r,
// J, Jp, Jr, kp, ce_max) from a flat config.
SuspensionParams params_from_config(const KeyValueConfig& cfg);
void params_to_config(const SuspensionParams& p, KeyValueConfig& cfg);

// Undamped natural frequencies (rad/s, ascending) of the linear benchmark.
std::array<double, 2> benchmark_natural_frequencies(const SuspensionParams& p);

// Screw radius at which xi_e = 1 for ce = `ce_bound`.
double screw_radius_from_damping_bound(const SuspensionParams& p,
                                       double ce_bound = 7.2);

// Screw radius placing the first benchmark mode at `ratio` * omega0.
// The ratio saturates near 0.851 as R grows, so targets above that throw.
double calibrate_screw_radius(const SuspensionParams& p, double ratio = 0.85);

}  // namespace ipva
