#include <chrono>
#include <cmath>
#include <optional>

#include "ipva/csv.hpp"
#include "ipva/error.hpp"
#include "ipva/mpc.hpp"

namespace ipva {

std::string to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::kPassive: return "passive";
    case ControllerKind::kNmpc: return "nmpc";
    case ControllerKind::kSlMpc: return "slmpc";
  }
  return "unknown";
}

ControllerKind parse_controller(const std::string& name) {
  if (name == "passive") return ControllerKind::kPassive;
  if (name == "nmpc") return ControllerKind::kNmpc;
  if (name == "slmpc" || name == "sl-mpc") return ControllerKind::kSlMpc;
  throw Error(ErrorKind::kConfig, "unknown controller '" + name + "'");
}

namespace {

Eigen::VectorXd shifted(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  out.head(v.size() - 1) = v.tail(v.size() - 1);
  out(v.size() - 1) = v(v.size() - 1);
  return out;
}

}  // namespace

ClosedLoopResult closed_loop(const SuspensionParams& p,
                             const SlStateSpace* sl_model,
                             const RoadSignal& road,
                             const ClosedLoopConfig& cfg) {
  const MpcConfig& mpc = cfg.mpc;
  mpc.validate();
  const double ts = mpc.sample_period;
  if (std::abs(road.sample_period() - ts) > 1e-12 * ts) {
    throw Error(ErrorKind::kConfig, "road and controller sample periods differ");
  }
  const auto steps = static_cast<std::size_t>(std::llround(cfg.duration / ts));
  if (steps == 0) throw Error(ErrorKind::kEmptyTrajectory, "zero-length run");
  const bool is_mpc = cfg.controller != ControllerKind::kPassive;
  const bool reads_future =
      is_mpc && cfg.preview.kind != PreviewMode::Kind::kLrde;
  const std::size_t needed = steps + (reads_future ? mpc.horizon : 0);
  if (road.size() < needed) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "road realization too short for the run and its preview");
  }

  const Plant plant(p, PlantKind::kIpva);
  const PreviewSource source(road, cfg.preview, cfg.noise_seed);
  std::optional<SlMpcProblem> sl_problem;
  if (cfg.controller == ControllerKind::kSlMpc) {
    if (sl_model == nullptr) {
      throw Error(ErrorKind::kConfig, "SL-MPC requires a linear model");
    }
    sl_problem.emplace(p, *sl_model, mpc);
  }

  State x = rest_state(road[0]);
  const bool lrde_observer = is_mpc &&
                             cfg.preview.kind == PreviewMode::Kind::kLrde &&
                             cfg.lrde_source == LrdeSource::kObserver;
  std::optional<RoadObserver> observer;
  if (lrde_observer || cfg.run_observer) {
    observer.emplace(p, cfg.observer, hgo_init(p, x, 0.0, road[0]), road[0]);
  }

  ClosedLoopResult result;
  Trajectory& traj = result.trajectory;
  traj.times.reserve(steps);
  traj.states.reserve(steps);
  traj.controls.reserve(steps);
  traj.disturbances.reserve(steps);
  traj.accelerations.reserve(steps);
  traj.power.reserve(steps);
  result.min_passivity_margin = std::numeric_limits<double>::infinity();
  result.max_bound_excess = -std::numeric_limits<double>::infinity();

  Eigen::VectorXd warm;
  bool have_warm = false;
  double w_hat = road[0];
  std::chrono::steady_clock::duration controller_time{};

  for (std::size_t k = 0; k < steps; ++k) {
    double u = cfg.passive_ce;
    if (is_mpc) {
      const double last =
          cfg.lrde_source == LrdeSource::kTrueLast ? road[k] : w_hat;
      const auto t0 = std::chrono::steady_clock::now();
      const Eigen::VectorXd window = source.window(k, mpc.horizon, last);
      MpcSolution sol;
      try {
        if (cfg.controller == ControllerKind::kNmpc) {
          sol = nmpc_solve(plant, x, window, mpc, have_warm ? &warm : nullptr);
          warm = shifted(sol.controls);
        } else {
          sol = sl_problem->solve(x, window, have_warm ? &warm : nullptr);
          warm = shifted(sol.torques);
        }
      } catch (const Error& e) {
        throw Error(e.kind(), std::string(e.what()) + " at step " +
                                  std::to_string(k));
      }
      controller_time += std::chrono::steady_clock::now() - t0;
      have_warm = true;
      u = sol.controls(0);
      result.solver_iterations += sol.iterations;
      if (sol.status == SolveStatus::kStalled) ++result.stalled_steps;
      if (sol.status == SolveStatus::kFallback) ++result.fallback_steps;
    }

    const double w = road[k];
    const State xd = plant.derivative(x, u, w);
    const double rel = x(1) - x(3);
    const double power = u * rel * rel;
    traj.times.push_back(static_cast<double>(k) * ts);
    traj.states.push_back(x);
    traj.controls.push_back(u);
    traj.disturbances.push_back(w);
    traj.accelerations.push_back(sprung_acceleration(p, xd));
    traj.power.push_back(power);
    result.min_passivity_margin = std::min(result.min_passivity_margin, power);
    result.max_bound_excess =
        std::max(result.max_bound_excess, std::max(u - mpc.u_max, -u));

    x = rk4_step([&](const State& s) { return plant.derivative(s, u, w); }, x,
                 xd, ts);
    if (!x.allFinite()) {
      throw Error(ErrorKind::kNonFiniteState,
                  "closed-loop state diverged at step " + std::to_string(k));
    }
    if (observer) {
      w_hat = observer->update(measurement(x), u);
      result.w_hat.push_back(w_hat);
    }
  }

  result.metrics = metrics(traj);
  const double seconds =
      std::chrono::duration<double>(controller_time).count();
  result.wall_ms_per_1000_steps =
      1e3 * seconds * 1000.0 / static_cast<double>(steps);
  return result;
}

void write_run_ledger(const std::string& path,
                      const std::vector<RunRecord>& rows) {
  CsvWriter out(path);
  out.header({"controller", "preview", "alpha1", "alpha2", "seed",
              "avg_power", "rms_accel", "solver_iterations", "stalled_steps", "fallback_steps"});
  for (const RunRecord& r : rows) {
    out.field(r.controller)
        .field(r.preview)
        .field(r.comfort_weight)
        .field(r.energy_weight)
        .field(static_cast<long>(r.seed))
        .field(r.avg_power)
        .field(r.rms_accel)
        .field(r.solver_iterations)
        .field(r.stalled_steps)
        .field(r.fallback_steps);
    out.end_row();
  }
}

}  // namespace ipva
