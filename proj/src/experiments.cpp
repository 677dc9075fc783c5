#include "ipva/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ipva/csv.hpp"
#include "ipva/error.hpp"
#include "ipva/parallel.hpp"
#include "ipva/spectral.hpp"

namespace ipva {

namespace fs = std::filesystem;

RoadModel road_from_config(const KeyValueConfig& cfg) {
  RoadModel road;
  road.roughness = cfg.get_double("Gr", road.roughness);
  road.speed = cfg.get_double("V", road.speed);
  road.cutoff = cfg.get_double("wc", road.cutoff);
  road.sample_period = cfg.get_double("Ts", road.sample_period);
  road.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  road.validate();
  return road;
}

MpcConfig mpc_from_config(const KeyValueConfig& cfg, const SuspensionParams& p,
                          double ts) {
  MpcConfig mpc;
  mpc.sample_period = ts;
  mpc.u_max = cfg.get_double("u_max", p.ce_max);
  mpc.horizon = static_cast<int>(cfg.get_int("N", mpc.horizon));
  mpc.weights.comfort = cfg.get_double("alpha1", mpc.weights.comfort);
  mpc.weights.energy = cfg.get_double("alpha2", mpc.weights.energy);
  mpc.max_iterations =
      static_cast<int>(cfg.get_int("mpc_max_iterations", mpc.max_iterations));
  mpc.tolerance = cfg.get_double("mpc_tolerance", mpc.tolerance);
  mpc.warm_start = cfg.get_bool("warm_start", mpc.warm_start);
  mpc.convexification_passes = static_cast<int>(
      cfg.get_int("sl_passes", mpc.convexification_passes));
  mpc.validate();
  return mpc;
}

HgoConfig observer_from_config(const KeyValueConfig& cfg, double ts) {
  HgoConfig h;
  h.sample_period = ts;
  h.eps1 = cfg.get_double("eps1", h.eps1);
  h.eps2 = cfg.get_double("eps2", h.eps2);
  h.eps3 = cfg.get_double("eps3", h.eps3);
  h.a1 = cfg.get_double("obs_a1", h.a1);
  h.a2 = cfg.get_double("obs_a2", h.a2);
  h.a3 = cfg.get_double("obs_a3", h.a3);
  h.a4 = cfg.get_double("obs_a4", h.a4);
  h.a5 = cfg.get_double("obs_a5", h.a5);
  h.a6 = cfg.get_double("obs_a6", h.a6);
  h.a7 = cfg.get_double("obs_a7", h.a7);
  h.substeps = static_cast<int>(cfg.get_int("obs_substeps", h.substeps));
  h.measurement_noise = cfg.get_double("obs_noise", h.measurement_noise);
  h.noise_seed = static_cast<std::uint64_t>(cfg.get_int("obs_noise_seed", 0));
  h.validate();
  return h;
}

SlSettings sl_settings_from_config(const KeyValueConfig& cfg) {
  SlSettings s;
  s.warmup = cfg.get_double("sl_warmup", s.warmup);
  s.sample_duration = cfg.get_double("sl_duration", s.sample_duration);
  s.batches = static_cast<int>(cfg.get_int("sl_batches", s.batches));
  s.tolerance = cfg.get_double("sl_tolerance", s.tolerance);
  if (!(s.sample_duration > 0.0) || s.warmup < 0.0 || s.batches < 2) {
    throw Error(ErrorKind::kConfig, "invalid SL sampling settings");
  }
  return s;
}

std::vector<std::uint64_t> seeds_from_config(
    const KeyValueConfig& cfg, const std::vector<std::uint64_t>& fallback) {
  if (!cfg.has("seeds")) return fallback;
  std::vector<std::uint64_t> out;
  for (double v : cfg.get_list("seeds", {})) {
    if (v < 0 || v != std::floor(v)) {
      throw Error(ErrorKind::kConfig, "seeds must be non-negative integers");
    }
    out.push_back(static_cast<std::uint64_t>(v));
  }
  if (out.empty()) throw Error(ErrorKind::kConfig, "seed list is empty");
  return out;
}

std::string config_hash(const KeyValueConfig& cfg) {
  // Where results go and how many threads compute them do not change them.
  std::string text;
  for (const auto& [key, value] : cfg.entries()) {
    if (key == "out" || key == "workers") continue;
    text += key + " = " + value + "\n";
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t preview_noise_seed(std::uint64_t seed) {
  return seed * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL;
}

std::vector<RunRecord> run_mpc_cases(const SuspensionParams& p,
                                     const SlStateSpace& model,
                                     const RoadModel& road,
                                     std::span<const std::uint64_t> seeds,
                                     double duration,
                                     const std::vector<MpcCase>& cases,
                                     const MpcConfig& base,
                                     const HgoConfig& observer,
                                     bool sequential) {
  const std::size_t ns = seeds.size();
  const std::size_t total = cases.size() * ns;
  auto one = [&](std::size_t i) {
    const MpcCase& c = cases[i / ns];
    const std::uint64_t seed = seeds[i % ns];
    RoadModel rm = road;
    rm.seed = seed;
    const RoadSignal signal =
        generate(rm, duration + (base.horizon + 1) * rm.sample_period);
    ClosedLoopConfig cl;
    cl.controller = c.controller;
    cl.passive_ce = base.u_max;
    cl.mpc = base;
    cl.mpc.weights = c.weights;
    cl.preview = c.preview;
    cl.noise_seed = preview_noise_seed(seed);
    cl.duration = duration;
    cl.observer = observer;
    const ClosedLoopResult r = closed_loop(p, &model, signal, cl);
    RunRecord rec;
    rec.controller = to_string(c.controller);
    rec.preview = c.preview.name();
    rec.comfort_weight = c.weights.comfort;
    rec.energy_weight = c.weights.energy;
    rec.seed = seed;
    rec.avg_power = r.metrics.avg_power;
    rec.rms_accel = r.metrics.rms_accel;
    rec.wall_ms_per_1000_steps = r.wall_ms_per_1000_steps;
    rec.solver_iterations = r.solver_iterations;
    rec.stalled_steps = r.stalled_steps;
    rec.fallback_steps = r.fallback_steps;
    if (r.min_passivity_margin < 0.0 || r.max_bound_excess > 0.0) {
      throw Error(ErrorKind::kInfeasible,
                  "applied control left the passive set");
    }
    return rec;
  };
  if (sequential) {
    std::vector<RunRecord> rows;
    rows.reserve(total);
    for (std::size_t i = 0; i < total; ++i) rows.push_back(one(i));
    return rows;
  }
  return parallel_map<RunRecord>(total, one);
}

std::vector<Metrics> block_means(const std::vector<RunRecord>& rows,
                                 std::size_t block) {
  std::vector<Metrics> out;
  for (std::size_t start = 0; start + block <= rows.size(); start += block) {
    Metrics m;
    for (std::size_t i = start; i < start + block; ++i) {
      m.avg_power += rows[i].avg_power;
      m.rms_accel += rows[i].rms_accel;
    }
    m.avg_power /= static_cast<double>(block);
    m.rms_accel /= static_cast<double>(block);
    out.push_back(m);
  }
  return out;
}

LinearizationError linearization_error(const SuspensionParams& p,
                                       const SlStateSpace& sl,
                                       const SlStateSpace& dl,
                                       const RoadSignal& road, double ce) {
  const Plant plant(p, PlantKind::kIpva);
  const Trajectory traj = integrate(
      plant, rest_state(road[0]), [ce](std::size_t, const State&) { return ce; },
      road, road.sample_period(), road.duration());
  const std::vector<State> a = linear_response(sl, road);
  const std::vector<State> b = linear_response(dl, road);
  LinearizationError err;
  const double n = static_cast<double>(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double truth = traj.states[k](2);
    err.sl += (a[k](2) - truth) * (a[k](2) - truth);
    err.dl += (b[k](2) - truth) * (b[k](2) - truth);
    err.nonlinear_rms += truth * truth;
  }
  err.sl = std::sqrt(err.sl / n);
  err.dl = std::sqrt(err.dl / n);
  err.nonlinear_rms = std::sqrt(err.nonlinear_rms / n);
  return err;
}

ObserverRun observe_road(const SuspensionParams& p, double ce,
                         const RoadSignal& road, const HgoConfig& cfg,
                         double transient) {
  const Plant plant(p, PlantKind::kIpva);
  const double ts = road.sample_period();
  State x = rest_state(road[0]);
  RoadObserver obs(p, cfg, hgo_init(p, x, ce, road[0]), road[0]);
  ObserverRun run;
  double err = 0.0, ref = 0.0, sig = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < road.size(); ++k) {
    const double w = road[k];
    const State xd = plant.derivative(x, ce, w);
    x = rk4_step([&](const State& s) { return plant.derivative(s, ce, w); }, x,
                 xd, ts);
    if (!x.allFinite()) {
      throw Error(ErrorKind::kNonFiniteState, "observer plant run diverged");
    }
    const double w_hat = obs.update(measurement(x), ce);
    // The estimate refers to the interval just simulated; compare with the
    // plant's own x6' at its end under the same held input.
    const double sigma = plant.derivative(x, ce, w)(5);
    const double t = static_cast<double>(k + 1) * ts;
    run.trace.times.push_back(t);
    run.trace.w_true.push_back(w);
    run.trace.w_hat.push_back(w_hat);
    run.trace.sigma_true.push_back(sigma);
    run.trace.sigma_hat.push_back(obs.state().sigma_hat);
    if (t > transient) {
      err += (w_hat - w) * (w_hat - w);
      ref += w * w;
      sig += (obs.state().sigma_hat - sigma) * (obs.state().sigma_hat - sigma);
      ++count;
    }
  }
  if (count == 0 || ref == 0.0) {
    throw Error(ErrorKind::kEmptyTrajectory, "observer run shorter than transient");
  }
  run.normalized_rms_error = std::sqrt(err / ref);
  run.sigma_rms_error = std::sqrt(sig / static_cast<double>(count));
  return run;
}

ExperimentSpec ExperimentSpec::from_config(const KeyValueConfig& cfg) {
  ExperimentSpec spec;
  spec.config = cfg;
  spec.name = cfg.get_string("experiment", "");
  spec.output_dir = cfg.get_string("out", "");
  spec.validate();
  return spec;
}

void ExperimentSpec::validate() const {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw Error(ErrorKind::kConfig, "experiment: unknown name '" + name + "'");
  }
  if (output_dir.empty()) {
    throw Error(ErrorKind::kConfig, "out: output directory is required");
  }
  params_from_config(config);
  seeds_from_config(config, {1});
}

namespace {

struct Context {
  const ExperimentSpec& spec;
  const KeyValueConfig& cfg;
  SuspensionParams params;
  RoadModel road;
  std::vector<std::uint64_t> seeds;
  ExperimentReport& report;

  std::string path(const std::string& file) {
    const std::string p = (fs::path(spec.output_dir) / file).string();
    report.files.push_back(file);
    return p;
  }
};

DesignPoint design_of(const Context& c) {
  return {c.params.carrier_radius, c.params.pendulum_length,
          c.cfg.get_double("ce", c.params.ce_max)};
}

void run_simulate(Context& c) {
  const double duration = c.cfg.get_double("duration", 200.0);
  const std::string plant_name = c.cfg.get_string("plant", "ipva");
  if (plant_name != "ipva" && plant_name != "benchmark") {
    throw Error(ErrorKind::kConfig, "plant: expected ipva or benchmark");
  }
  const PlantKind kind =
      plant_name == "ipva" ? PlantKind::kIpva : PlantKind::kBenchmark;
  const double ce = design_of(c).ce;
  RoadModel rm = c.road;
  rm.seed = c.seeds.front();
  const RoadSignal road = generate(rm, duration);
  const Plant plant(c.params, kind);
  const Trajectory traj =
      integrate(plant, rest_state(road[0]),
                [ce](std::size_t, const State&) { return ce; }, road,
                rm.sample_period, duration);
  write_trajectory_csv(c.path("trajectory.csv"), traj);
  const Metrics m = metrics(traj, c.cfg.get_double("transient_skip", 0.0));
  CsvWriter out(c.path("metrics.csv"));
  out.header({"plant", "seed", "avg_power", "rms_accel"});
  out.field(plant_name).field(static_cast<long>(rm.seed)).field(m.avg_power)
      .field(m.rms_accel);
  out.end_row();
}

void run_pareto(Context& c) {
  EvaluationSettings ev;
  ev.road = c.road;
  ev.seeds = c.seeds;
  ev.duration = c.cfg.get_double("duration", 200.0);
  ev.transient_skip = c.cfg.get_double("transient_skip", 0.0);
  const int n_mu = static_cast<int>(c.cfg.get_int("grid_mu", 8));
  const int n_eta = static_cast<int>(c.cfg.get_int("grid_eta", 8));
  const int n_ce = static_cast<int>(c.cfg.get_int("grid_ce", 8));
  const ParetoResult ipva =
      grid_search(c.params, GridSpec::uniform(c.params, n_mu, n_eta, n_ce), ev);
  write_pareto_csv(c.path("pareto.csv"), c.params, ipva);

  std::vector<double> ce_grid;
  for (int i = 1; i <= n_ce; ++i) {
    ce_grid.push_back(c.params.ce_max * i / n_ce);
  }
  const ParetoResult bench = linear_benchmark_optimum(c.params, ce_grid, ev);
  CsvWriter out(c.path("benchmark.csv"));
  out.header({"ce", "xi_e", "avg_power", "rms_accel", "closed_form_power",
              "closed_form_rms", "on_front"});
  for (const ParetoEntry& e : bench.entries) {
    const ClosedForm cf = closed_form_linear(c.params, e.design.ce, c.road);
    out.field(e.design.ce)
        .field(c.params.damping_ratio(e.design.ce))
        .field(e.metrics.avg_power)
        .field(e.metrics.rms_accel)
        .field(cf.avg_power)
        .field(cf.rms_accel)
        .field(e.on_front ? 1L : 0L);
    out.end_row();
  }
}

void run_stationarity(Context& c) {
  const double duration = c.cfg.get_double("duration", 2000.0);
  const double t_check = c.cfg.get_double("t_check", 1200.0);
  const double band = c.cfg.get_double("band", 0.002);
  const SuspensionParams p = with_design(c.params, design_of(c));
  const double ce = design_of(c).ce;
  struct Row {
    double final_mean;
    StationarityReport rep;
    std::vector<double> cummean;
  };
  const std::vector<Row> rows = parallel_map<Row>(c.seeds.size(), [&](std::size_t i) {
    RoadModel rm = c.road;
    rm.seed = c.seeds[i];
    const RoadSignal road = generate(rm, duration);
    const Trajectory traj =
        integrate(Plant(p, PlantKind::kIpva), rest_state(road[0]),
                  [ce](std::size_t, const State&) { return ce; }, road,
                  rm.sample_period, duration);
    Row row;
    row.cummean = cumulative_mean(traj.power);
    row.final_mean = row.cummean.back();
    row.rep = stationarity(row.cummean, rm.sample_period, t_check, band);
    if (i != 0) row.cummean.clear();
    return row;
  });
  CsvWriter out(c.path("stationarity.csv"));
  out.header({"seed", "final_mean_power", "max_relative_deviation",
              "stationary"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.field(static_cast<long>(c.seeds[i]))
        .field(rows[i].final_mean)
        .field(rows[i].rep.max_relative_deviation)
        .field(rows[i].rep.stationary ? 1L : 0L);
    out.end_row();
  }
  CsvWriter trace(c.path("cumulative_mean.csv"));
  trace.header({"time_s", "cumulative_mean_power"});
  const auto stride = static_cast<std::size_t>(std::llround(1.0 / c.road.sample_period));
  for (std::size_t k = stride - 1; k < rows[0].cummean.size(); k += stride) {
    trace.field(static_cast<double>(k + 1) * c.road.sample_period)
        .field(rows[0].cummean[k]);
    trace.end_row();
  }
}

void run_psd(Context& c) {
  const double duration = c.cfg.get_double("duration", 2000.0);
  const auto segment =
      static_cast<std::size_t>(c.cfg.get_int("segment", 16384));
  const DesignPoint d = design_of(c);
  const SuspensionParams p = with_design(c.params, d);
  RoadModel rm = c.road;
  rm.seed = c.seeds.front();
  const RoadSignal road = generate(rm, duration);
  const double w0 = p.omega0();
  for (const auto& [name, kind] :
       {std::pair{std::string("ipva"), PlantKind::kIpva},
        std::pair{std::string("benchmark"), PlantKind::kBenchmark}}) {
    const Trajectory traj =
        integrate(Plant(p, kind), rest_state(road[0]),
                  [ce = d.ce](std::size_t, const State&) { return ce; }, road,
                  rm.sample_period, duration);
    write_spectrum_csv(c.path("psd_" + name + "_accel.csv"),
                       psd(traj.accelerations, rm.sample_period, segment), w0);
    write_spectrum_csv(c.path("psd_" + name + "_power.csv"),
                       psd(traj.power, rm.sample_period, segment), w0);
  }
}

void run_sl_accuracy(Context& c) {
  const double ce = design_of(c).ce;
  const SuspensionParams p = with_design(c.params, design_of(c));
  const double duration = c.cfg.get_double("duration", 20.0);
  const SlMatrices sl =
      estimate_sl_matrices(p, ce, c.road, sl_settings_from_config(c.cfg));
  const SlStateSpace slm = assemble_sl_statespace(p, sl, ce, c.road.sample_period);
  const SlStateSpace dlm = deterministic_linearize(p, ce, c.road.sample_period);
  write_sl_model(c.path("sl_model.csv"), sl, slm);
  write_sl_model(c.path("dl_model.csv"), origin_sl_matrices(p), dlm);
  const std::vector<LinearizationError> errs =
      parallel_map<LinearizationError>(c.seeds.size(), [&](std::size_t i) {
        RoadModel rm = c.road;
        rm.seed = c.seeds[i];
        return linearization_error(p, slm, dlm, generate(rm, duration), ce);
      });
  CsvWriter out(c.path("sl_accuracy.csv"));
  out.header({"seed", "sl_rms_error", "dl_rms_error", "nonlinear_rms",
              "sl_better"});
  for (std::size_t i = 0; i < errs.size(); ++i) {
    out.field(static_cast<long>(c.seeds[i]))
        .field(errs[i].sl)
        .field(errs[i].dl)
        .field(errs[i].nonlinear_rms)
        .field(errs[i].sl < errs[i].dl ? 1L : 0L);
    out.end_row();
  }
  // x3 traces on the first realization.
  RoadModel rm = c.road;
  rm.seed = c.seeds.front();
  const RoadSignal road = generate(rm, duration);
  const Trajectory traj = integrate(
      Plant(p, PlantKind::kIpva), rest_state(road[0]),
      [ce](std::size_t, const State&) { return ce; }, road, rm.sample_period,
      duration);
  const auto a = linear_response(slm, road);
  const auto b = linear_response(dlm, road);
  CsvWriter trace(c.path("x3_trace.csv"));
  trace.header({"time_s", "nonlinear", "sl", "dl"});
  for (std::size_t k = 0; k < traj.size(); ++k) {
    trace.field(traj.times[k]).field(traj.states[k](2)).field(a[k](2))
        .field(b[k](2));
    trace.end_row();
  }
}

std::vector<PreviewMode> previews_of(const KeyValueConfig& cfg,
                                     const std::string& fallback) {
  std::vector<PreviewMode> out;
  std::string list = cfg.get_string("previews", fallback);
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = list.find(',', start);
    std::string item = list.substr(start, comma == std::string::npos
                                              ? std::string::npos
                                              : comma - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(PreviewMode::parse(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw Error(ErrorKind::kConfig, "previews: empty list");
  return out;
}

std::vector<ControllerKind> controllers_of(const KeyValueConfig& cfg,
                                           const std::string& fallback) {
  std::vector<ControllerKind> out;
  const std::string list = cfg.get_string("controllers", fallback);
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = list.find(',', start);
    std::string item = list.substr(start, comma == std::string::npos
                                              ? std::string::npos
                                              : comma - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(parse_controller(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw Error(ErrorKind::kConfig, "controllers: empty list");
  return out;
}

void write_timing(Context& c, const std::vector<RunRecord>& rows) {
  CsvWriter out(c.path("timing.csv"));
  out.header({"controller", "preview", "alpha1", "alpha2", "seed",
              "wall_ms_per_1000_steps"});
  for (const RunRecord& r : rows) {
    out.field(r.controller).field(r.preview).field(r.comfort_weight)
        .field(r.energy_weight).field(static_cast<long>(r.seed))
        .field(r.wall_ms_per_1000_steps);
    out.end_row();
  }
}

void run_mpc(Context& c, const std::string& objective) {
  const double ts = c.road.sample_period;
  const MpcConfig mpc = mpc_from_config(c.cfg, c.params, ts);
  const HgoConfig obs = observer_from_config(c.cfg, ts);
  const double duration = c.cfg.get_double("duration", 10.0);
  const double ce_nominal = c.cfg.get_double("sl_ce", mpc.u_max);
  RoadModel sl_road = c.road;
  sl_road.seed = static_cast<std::uint64_t>(c.cfg.get_int("sl_seed", 1));
  const SlMatrices sl = estimate_sl_matrices(c.params, ce_nominal, sl_road,
                                             sl_settings_from_config(c.cfg));
  const SlStateSpace model = assemble_sl_statespace(c.params, sl, ce_nominal, ts);
  write_sl_model(c.path("sl_model.csv"), sl, model);

  std::vector<MpcCase> cases;
  const bool timing = objective == "timing";
  const auto controllers =
      controllers_of(c.cfg, timing ? "nmpc,slmpc" : "passive,nmpc,slmpc");
  if (objective == "mixed") {
    const double a1 = c.cfg.get_double("alpha1", 1.0);
    std::vector<double> a2s = c.cfg.get_list("alpha2_list", {});
    if (a2s.empty()) {
      for (int i = 0; i < 10; ++i) a2s.push_back(0.01 * std::pow(10.0, i / 9.0));
    }
    const auto previews = previews_of(c.cfg, "perfect");
    for (ControllerKind k : controllers) {
      for (const PreviewMode& pm : previews) {
        if (k == ControllerKind::kPassive) {
          cases.push_back({k, pm, {a1, 0.0}});
          continue;
        }
        for (double a2 : a2s) cases.push_back({k, pm, {a1, a2}});
      }
    }
  } else {
    CostWeights w = mpc.weights;
    if (objective == "energy") w = {0.0, 1.0};
    if (objective == "comfort") w = {1.0, 0.0};
    w.comfort = c.cfg.get_double("alpha1", w.comfort);
    w.energy = c.cfg.get_double("alpha2", w.energy);
    const auto previews = previews_of(
        c.cfg, timing ? "perfect" : "perfect,lrde,snr10,snr15,snr20");
    for (ControllerKind k : controllers) {
      for (const PreviewMode& pm : previews) {
        // The passive design ignores the preview; one entry suffices.
        if (k == ControllerKind::kPassive && &pm != &previews.front()) continue;
        cases.push_back({k, pm, w});
      }
    }
  }
  const std::vector<RunRecord> rows = run_mpc_cases(
      c.params, model, c.road, c.seeds, duration, cases, mpc, obs, timing);
  if (!timing) {
    // Wall time is not reproducible; it lives in timing.csv only.
    write_run_ledger(c.path("runs.csv"), rows);
    const std::vector<Metrics> means = block_means(rows, c.seeds.size());
    CsvWriter sum(c.path("summary.csv"));
    sum.header({"controller", "preview", "alpha1", "alpha2", "mean_power",
                "mean_rms_accel"});
    for (std::size_t i = 0; i < means.size(); ++i) {
      const RunRecord& r = rows[i * c.seeds.size()];
      sum.field(r.controller).field(r.preview).field(r.comfort_weight)
          .field(r.energy_weight).field(means[i].avg_power)
          .field(means[i].rms_accel);
      sum.end_row();
    }
  }
  write_timing(c, rows);
}

void run_observer(Context& c) {
  const double ts = c.road.sample_period;
  const HgoConfig obs = observer_from_config(c.cfg, ts);
  const double duration = c.cfg.get_double("duration", 20.0);
  const double transient = c.cfg.get_double("transient", 1.0);
  const double ce = design_of(c).ce;
  CsvWriter sum(c.path("observer_summary.csv"));
  sum.header({"seed", "normalized_rms_error", "sigma_rms_error"});
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    RoadModel rm = c.road;
    rm.seed = c.seeds[i];
    const ObserverRun run =
        observe_road(c.params, ce, generate(rm, duration), obs, transient);
    if (i == 0) write_observer_csv(c.path("observer_trace.csv"), run.trace);
    sum.field(static_cast<long>(rm.seed)).field(run.normalized_rms_error)
        .field(run.sigma_rms_error);
    sum.end_row();
  }
}

void write_manifest(const ExperimentSpec& spec, const KeyValueConfig& cfg,
                    const std::vector<std::uint64_t>& seeds,
                    ExperimentReport& report) {
  report.manifest_path = (fs::path(spec.output_dir) / "manifest.txt").string();
  std::ofstream out(report.manifest_path);
  if (!out) {
    throw Error(ErrorKind::kConfig, "cannot write " + report.manifest_path);
  }
  out << "# experiment manifest\n";
  out << "# config_hash = " << report.hash << "\n";
  out << "# seeds =";
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    out << (i ? "," : " ") << seeds[i];
  }
  out << "\n# wall_seconds = " << format_double(report.wall_seconds) << "\n";
  for (const std::string& f : report.files) out << "# file = " << f << "\n";
  out << cfg.serialize();
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(spec.output_dir, ec);
  if (ec) {
    throw Error(ErrorKind::kConfig,
                "cannot create output directory " + spec.output_dir);
  }
  ExperimentReport report;
  report.hash = config_hash(spec.config);
  const KeyValueConfig& cfg = spec.config;
  Context c{spec, cfg, params_from_config(cfg), road_from_config(cfg),
            seeds_from_config(cfg, {1}), report};
  cfg.get_string("experiment", "");
  cfg.get_string("out", "");
  if (cfg.has("workers")) {
    worker_count_override() = static_cast<std::size_t>(cfg.get_int("workers", 0));
  }

  const std::string& n = spec.name;
  if (n == "simulate") run_simulate(c);
  else if (n == "pareto") run_pareto(c);
  else if (n == "stationarity") run_stationarity(c);
  else if (n == "psd") run_psd(c);
  else if (n == "sl-accuracy") run_sl_accuracy(c);
  else if (n == "mpc-energy") run_mpc(c, "energy");
  else if (n == "mpc-comfort") run_mpc(c, "comfort");
  else if (n == "mpc-mixed") run_mpc(c, "mixed");
  else if (n == "timing") run_mpc(c, "timing");
  else if (n == "observer") run_observer(c);

  const std::vector<std::string> unused = cfg.unused_keys();
  if (!unused.empty()) {
    std::string list;
    for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
    throw Error(ErrorKind::kConfig, "unknown config keys: " + list);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  write_manifest(spec, cfg, c.seeds, report);
  return report;
}

}  // namespace ipva
