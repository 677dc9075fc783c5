#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipva/model.hpp"
#include "ipva/observer.hpp"
#include "ipva/road.hpp"
#include "ipva/sim.hpp"
#include "ipva/slin.hpp"

namespace ipva {

struct MpcConfig {
  int horizon = 15;
  double sample_period = 0.01;
  CostWeights weights{0.0, 1.0};
  double u_max = 0.225;
  int max_iterations = 20;
  double tolerance = 1e-9;  // relative cost decrease / projected step
  bool warm_start = true;
  double fd_step = 1e-7;    // forward-difference step on u (NMPC)
  int convexification_passes = 5;  // SL-MPC
  double zero_velocity = 1e-6;     // recover_u guard, rad/s

  void validate() const;
};

enum class SolveStatus { kConverged, kIterationLimit, kStalled, kFallback };

std::string to_string(SolveStatus s);

struct MpcSolution {
  Eigen::VectorXd controls;  // damping u per step, in [0, u_max]
  Eigen::VectorXd torques;   // generator torque Fd per step (SL-MPC)
  double cost = 0.0;         // predicted cost of the returned sequence
  int iterations = 0;
  SolveStatus status = SolveStatus::kConverged;
};

// Predicted cost sum_k Ts * l(x_k, u_k, w_k) of a control sequence on the
// nonlinear plant rolled out with RK4 at the sample period.
// Throws kNonFiniteState if the rollout diverges.
double nmpc_cost(const Plant& plant, const State& x0,
                 const Eigen::VectorXd& controls,
                 const Eigen::VectorXd& preview, const MpcConfig& cfg);

// Single-shooting projected gradient (Barzilai-Borwein steps with Armijo
// backtracking, forward-difference gradient) over [0, u_max]^N.
// `warm` (length N) seeds the iteration when cfg.warm_start is set.
// Trial sequences whose prediction diverges are rejected; if no start point
// has a finite prediction the status is kFallback and the warm plan (or
// u_max) is returned.
MpcSolution nmpc_solve(const Plant& plant, const State& x0,
                       const Eigen::VectorXd& preview, const MpcConfig& cfg,
                       const Eigen::VectorXd* warm = nullptr);

// Damping that realizes torque Fd at relative velocity x4 - x2, clipped to
// [0, u_max]; zero when the relative velocity is below the guard.
double recover_u(double fd, double x2, double x4, double u_max,
                 double zero_velocity = 1e-6);

// Condensed SL-MPC problem. The cost is quadratic in the torque sequence;
// its Hessian depends only on the model and weights, so it is factored
// once. Passivity (Fd (x4 - x2) >= 0, |Fd| <= u_max |x4 - x2|) is enforced
// as a box around each predicted relative velocity, re-linearized over a
// few convexification passes.
class SlMpcProblem {
 public:
  SlMpcProblem(const SuspensionParams& params, const SlStateSpace& model,
               const MpcConfig& cfg);

  MpcSolution solve(const State& x0, const Eigen::VectorXd& preview,
                    const Eigen::VectorXd* warm_torques = nullptr) const;

  // Exact quadratic cost of a torque sequence under the linear model.
  double cost(const State& x0, const Eigen::VectorXd& preview,
              const Eigen::VectorXd& torques) const;

  // Predicted states x_1..x_N stacked (6N).
  Eigen::VectorXd predict(const State& x0, const Eigen::VectorXd& preview,
                          const Eigen::VectorXd& torques) const;

  const MpcConfig& config() const { return cfg_; }

 private:
  struct Linear {
    Eigen::VectorXd g;  // linear term
    double c = 0.0;     // constant term
  };
  Linear linear_terms(const State& x0, const Eigen::VectorXd& preview) const;
  Eigen::VectorXd relative_velocity(const State& x0,
                                    const Eigen::VectorXd& preview,
                                    const Eigen::VectorXd& torques) const;

  MpcConfig cfg_;
  int n_;
  double radius_;
  SlStateSpace model_;
  // x_k = phi_k x0 + sum_j gamma_kj F_j + sum_j psi_kj w_j  (k = 0..N)
  Eigen::MatrixXd free_state_;   // 6(N+1) x 6
  Eigen::MatrixXd torque_map_;   // 6(N+1) x N
  Eigen::MatrixXd road_map_;     // 6(N+1) x N
  Eigen::MatrixXd hessian_;      // exact, possibly indefinite
  Eigen::MatrixXd convex_part_;  // PSD part of the Hessian
  Eigen::MatrixXd concave_part_; // NSD remainder
  double lipschitz_ = 1.0;
};

MpcSolution slmpc_solve(const SuspensionParams& p, const SlStateSpace& model,
                        const State& x0, const Eigen::VectorXd& preview,
                        const MpcConfig& cfg,
                        const Eigen::VectorXd* warm_torques = nullptr);

enum class ControllerKind { kPassive, kNmpc, kSlMpc };

std::string to_string(ControllerKind k);
ControllerKind parse_controller(const std::string& name);

// Where the LRDE preview value comes from.
enum class LrdeSource { kObserver, kTrueLast };

struct ClosedLoopConfig {
  ControllerKind controller = ControllerKind::kPassive;
  double passive_ce = 0.225;
  MpcConfig mpc;
  PreviewMode preview = PreviewMode::perfect();
  std::uint64_t noise_seed = 0;
  double duration = 10.0;
  LrdeSource lrde_source = LrdeSource::kObserver;
  HgoConfig observer;
  bool run_observer = false;  // also run the observer outside LRDE mode
};

struct ClosedLoopResult {
  Trajectory trajectory;
  Metrics metrics;
  double wall_ms_per_1000_steps = 0.0;  // controller time only
  long solver_iterations = 0;
  int stalled_steps = 0;
  int fallback_steps = 0;
  // Smallest u (x4 - x2)^2 and worst bound excess over all steps; passivity
  // holds iff the first is >= 0 and the second is <= 0.
  double min_passivity_margin = 0.0;
  double max_bound_excess = 0.0;
  std::vector<double> w_hat;  // observer estimate per step (if run)
};

// Receding-horizon loop on the nonlinear plant from rest on the initial road
// height. `road` must extend at least horizon samples past the run for
// preview modes that read the future. `sl_model` is required for SL-MPC.
ClosedLoopResult closed_loop(const SuspensionParams& p,
                             const SlStateSpace* sl_model,
                             const RoadSignal& road,
                             const ClosedLoopConfig& cfg);

// Per-run row of the experiment ledger.
struct RunRecord {
  std::string controller;
  std::string preview;
  double comfort_weight = 0.0;
  double energy_weight = 0.0;
  std::uint64_t seed = 0;
  double avg_power = 0.0;
  double rms_accel = 0.0;
  double wall_ms_per_1000_steps = 0.0;
  long solver_iterations = 0;
  int stalled_steps = 0;
  int fallback_steps = 0;
};

// Wall time is left out so that the file is reproducible byte for byte.
void write_run_ledger(const std::string& path,
                      const std::vector<RunRecord>& rows);

}  // namespace ipva
