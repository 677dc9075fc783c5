#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ipva/design_opt.hpp"
#include "ipva/error.hpp"
#include "ipva/experiments.hpp"
#include "ipva/mpc.hpp"
#include "ipva/spectral.hpp"

namespace py = pybind11;
using namespace ipva;

namespace {

RoadSignal as_signal(const std::vector<double>& samples, const RoadModel& model) {
  RoadSignal s;
  s.samples = samples;
  s.model = model;
  return s;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["avg_power"] = m.avg_power;
  d["rms_accel"] = m.rms_accel;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ipva, m) {
  m.doc() = "Inerter pendulum vibration absorber: simulation, design and control";

  static py::exception<Error> error(m, "IpvaError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<SuspensionParams>(m, "SuspensionParams")
      .def(py::init<>())
      .def_readwrite("sprung_mass", &SuspensionParams::sprung_mass)
      .def_readwrite("unsprung_mass", &SuspensionParams::unsprung_mass)
      .def_readwrite("suspension_stiffness", &SuspensionParams::suspension_stiffness)
      .def_readwrite("tire_stiffness", &SuspensionParams::tire_stiffness)
      .def_readwrite("mech_damping", &SuspensionParams::mech_damping)
      .def_readwrite("screw_radius", &SuspensionParams::screw_radius)
      .def_readwrite("pendulum_mass", &SuspensionParams::pendulum_mass)
      .def_readwrite("carrier_radius", &SuspensionParams::carrier_radius)
      .def_readwrite("pendulum_length", &SuspensionParams::pendulum_length)
      .def_readwrite("carrier_inertia", &SuspensionParams::carrier_inertia)
      .def_readwrite("pendulum_inertia", &SuspensionParams::pendulum_inertia)
      .def_readwrite("rotor_inertia", &SuspensionParams::rotor_inertia)
      .def_readwrite("pendulum_stiffness", &SuspensionParams::pendulum_stiffness)
      .def_readwrite("ce_max", &SuspensionParams::ce_max)
      .def("omega0", &SuspensionParams::omega0)
      .def("mass_ratio", &SuspensionParams::mass_ratio)
      .def("damping_ratio", &SuspensionParams::damping_ratio)
      .def("validate", &SuspensionParams::validate);

  m.def("preset", &preset, py::arg("name"));
  m.def("benchmark_natural_frequencies", &benchmark_natural_frequencies);

  py::class_<RoadModel>(m, "RoadModel")
      .def(py::init<>())
      .def_readwrite("roughness", &RoadModel::roughness)
      .def_readwrite("speed", &RoadModel::speed)
      .def_readwrite("cutoff", &RoadModel::cutoff)
      .def_readwrite("sample_period", &RoadModel::sample_period)
      .def_readwrite("seed", &RoadModel::seed)
      .def("stationary_variance", &RoadModel::stationary_variance)
      .def("psd", &RoadModel::psd);

  m.def("generate_road",
        [](const RoadModel& model, double duration) {
          return generate(model, duration).samples;
        },
        py::arg("model"), py::arg("duration"));

  m.def("closed_form_linear",
        [](const SuspensionParams& p, double ce, const RoadModel& road) {
          const ClosedForm c = closed_form_linear(p, ce, road);
          return metrics_dict({c.avg_power, c.rms_accel});
        },
        py::arg("params"), py::arg("ce"), py::arg("road") = RoadModel{});

  m.def("simulate_passive",
        [](const SuspensionParams& p, double ce, const std::vector<double>& road,
           const RoadModel& model, double duration, bool benchmark) {
          const Plant plant(p, benchmark ? PlantKind::kBenchmark : PlantKind::kIpva);
          return metrics_dict(
              simulate_passive(plant, ce, as_signal(road, model), duration));
        },
        py::arg("params"), py::arg("ce"), py::arg("road"),
        py::arg("model") = RoadModel{}, py::arg("duration"),
        py::arg("benchmark") = false);

  m.def("evaluate_design",
        [](const SuspensionParams& p, double carrier_radius, double pendulum_length,
           double ce, const std::vector<std::uint64_t>& seeds, double duration) {
          EvaluationSettings ev;
          ev.seeds = seeds;
          ev.duration = duration;
          return metrics_dict(
              evaluate_design(p, {carrier_radius, pendulum_length, ce}, ev));
        },
        py::arg("params"), py::arg("carrier_radius"), py::arg("pendulum_length"),
        py::arg("ce"), py::arg("seeds"), py::arg("duration") = 200.0);

  m.def("psd",
        [](const std::vector<double>& signal, double ts, std::size_t segment) {
          const Spectrum s = psd(signal, ts, segment);
          return py::make_tuple(s.omega, s.density);
        },
        py::arg("signal"), py::arg("ts"), py::arg("segment_length") = 16384);

  m.def("closed_loop",
        [](const SuspensionParams& p, const std::string& controller,
           const std::string& preview, const std::vector<double>& road,
           const RoadModel& model, double duration, double comfort,
           double energy, int horizon) {
          ClosedLoopConfig cfg;
          cfg.controller = parse_controller(controller);
          cfg.preview = PreviewMode::parse(preview);
          cfg.duration = duration;
          cfg.passive_ce = p.ce_max;
          cfg.mpc.u_max = p.ce_max;
          cfg.mpc.weights = {comfort, energy};
          cfg.mpc.horizon = horizon;
          const SlStateSpace dl =
              deterministic_linearize(p, p.ce_max, model.sample_period);
          const ClosedLoopResult r =
              closed_loop(p, &dl, as_signal(road, model), cfg);
          py::dict d = metrics_dict(r.metrics);
          d["controls"] = r.trajectory.controls;
          d["min_passivity_margin"] = r.min_passivity_margin;
          d["max_bound_excess"] = r.max_bound_excess;
          return d;
        },
        py::arg("params"), py::arg("controller"), py::arg("preview") = "perfect",
        py::arg("road"), py::arg("model") = RoadModel{}, py::arg("duration") = 1.0,
        py::arg("comfort") = 0.0, py::arg("energy") = 1.0, py::arg("horizon") = 15);

  m.def("run_experiment",
        [](const std::string& config_text, const std::string& out) {
          KeyValueConfig cfg = KeyValueConfig::parse(config_text);
          cfg.set("out", out);
          const ExperimentReport r = run_experiment(ExperimentSpec::from_config(cfg));
          py::dict d;
          d["files"] = r.files;
          d["manifest"] = r.manifest_path;
          d["hash"] = r.hash;
          return d;
        },
        py::arg("config"), py::arg("out"));
}
