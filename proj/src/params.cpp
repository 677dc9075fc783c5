#include "ipva/params.hpp"

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "ipva/error.hpp"

namespace ipva {

double SuspensionParams::omega0() const {
  return std::sqrt(suspension_stiffness / sprung_mass);
}

double SuspensionParams::mass_ratio() const {
  return pendulum_mass * carrier_radius * carrier_radius /
         (sprung_mass * screw_radius * screw_radius);
}

double SuspensionParams::damping_ratio(double ce) const {
  return ce / (2.0 * omega0() * sprung_mass * screw_radius * screw_radius);
}

void SuspensionParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::kConfig, what);
  };
  auto finite = [](double v) { return std::isfinite(v); };
  require(finite(sprung_mass) && sprung_mass > 0, "Ms must be > 0");
  require(finite(unsprung_mass) && unsprung_mass > 0, "Mus must be > 0");
  require(finite(suspension_stiffness) && suspension_stiffness > 0,
          "ks must be > 0");
  require(finite(tire_stiffness) && tire_stiffness > 0, "kt must be > 0");
  require(finite(screw_radius) && screw_radius > 0, "R must be > 0");
  require(finite(pendulum_mass) && pendulum_mass > 0, "m must be > 0");
  require(finite(carrier_radius) && carrier_radius > 0, "Rp must be > 0");
  require(finite(pendulum_length) && pendulum_length > 0, "r must be > 0");
  require(finite(mech_damping) && mech_damping >= 0, "cm must be >= 0");
  require(finite(carrier_inertia) && carrier_inertia >= 0, "J must be >= 0");
  require(finite(pendulum_inertia) && pendulum_inertia >= 0,
          "Jp must be >= 0");
  require(finite(rotor_inertia) && rotor_inertia >= 0, "Jr must be >= 0");
  require(finite(pendulum_stiffness) && pendulum_stiffness >= 0,
          "kp must be >= 0");
  require(finite(ce_max) && ce_max >= 0, "ce_max must be >= 0");
}

SuspensionParams table_one_preset() { return SuspensionParams{}; }

SuspensionParams preset(const std::string& name) {
  if (name == "table1" || name == "pareto3") return table_one_preset();
  throw Error(ErrorKind::kConfig, "unknown parameter preset '" + name + "'");
}

SuspensionParams params_from_config(const KeyValueConfig& cfg) {
  SuspensionParams p = preset(cfg.get_string("preset", "table1"));
  p.sprung_mass = cfg.get_double("Ms", p.sprung_mass);
  p.unsprung_mass = cfg.get_double("Mus", p.unsprung_mass);
  p.suspension_stiffness = cfg.get_double("ks", p.suspension_stiffness);
  p.tire_stiffness = cfg.get_double("kt", p.tire_stiffness);
  p.mech_damping = cfg.get_double("cm", p.mech_damping);
  p.screw_radius = cfg.get_double("R", p.screw_radius);
  p.pendulum_mass = cfg.get_double("m", p.pendulum_mass);
  p.carrier_radius = cfg.get_double("Rp", p.carrier_radius);
  p.pendulum_length = cfg.get_double("r", p.pendulum_length);
  p.carrier_inertia = cfg.get_double("J", p.carrier_inertia);
  p.pendulum_inertia = cfg.get_double("Jp", p.pendulum_inertia);
  p.rotor_inertia = cfg.get_double("Jr", p.rotor_inertia);
  p.pendulum_stiffness = cfg.get_double("kp", p.pendulum_stiffness);
  p.ce_max = cfg.get_double("ce_max", p.ce_max);
  p.validate();
  return p;
}

void params_to_config(const SuspensionParams& p, KeyValueConfig& cfg) {
  auto put = [&](const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    cfg.set(key, buf);
  };
  put("Ms", p.sprung_mass);
  put("Mus", p.unsprung_mass);
  put("ks", p.suspension_stiffness);
  put("kt", p.tire_stiffness);
  put("cm", p.mech_damping);
  put("R", p.screw_radius);
  put("m", p.pendulum_mass);
  put("Rp", p.carrier_radius);
  put("r", p.pendulum_length);
  put("J", p.carrier_inertia);
  put("Jp", p.pendulum_inertia);
  put("Jr", p.rotor_inertia);
  put("kp", p.pendulum_stiffness);
  put("ce_max", p.ce_max);
}

std::array<double, 2> benchmark_natural_frequencies(const SuspensionParams& p) {
  const double R = p.screw_radius;
  Eigen::Matrix2d mass;
  mass << p.sprung_mass * R * R + p.rotor_inertia, R * p.sprung_mass,
      R * p.sprung_mass, p.sprung_mass + p.unsprung_mass;
  Eigen::Matrix2d stiffness = Eigen::Vector2d(p.suspension_stiffness * R * R,
                                              p.tire_stiffness)
                                  .asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> solver(stiffness,
                                                                   mass);
  const auto& ev = solver.eigenvalues();
  return {std::sqrt(ev(0)), std::sqrt(ev(1))};
}

double screw_radius_from_damping_bound(const SuspensionParams& p,
                                       double ce_bound) {
  return std::sqrt(ce_bound / (2.0 * p.omega0() * p.sprung_mass));
}

double calibrate_screw_radius(const SuspensionParams& p, double ratio) {
  auto residual = [&](double R) {
    SuspensionParams q = p;
    q.screw_radius = R;
    return benchmark_natural_frequencies(q)[0] / q.omega0() - ratio;
  };
  double lo = 1e-4;
  double hi = 10.0;
  if (residual(lo) >= 0.0 || residual(hi) <= 0.0) {
    throw Error(ErrorKind::kNotConverged,
                "first-mode ratio target is not bracketed by R in [1e-4, 10]");
  }
  std::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(50);
  auto [a, b] = boost::math::tools::toms748_solve(residual, lo, hi, tol, iters);
  return 0.5 * (a + b);
}

}  // namespace ipva
