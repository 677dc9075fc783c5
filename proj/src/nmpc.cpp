#include <algorithm>
#include <cmath>
#include <limits>

#include "ipva/error.hpp"
#include "ipva/mpc.hpp"

namespace ipva {

void MpcConfig::validate() const {
  if (horizon < 1) throw Error(ErrorKind::kConfig, "mpc horizon must be >= 1");
  if (!(sample_period > 0.0)) {
    throw Error(ErrorKind::kConfig, "mpc sample period must be positive");
  }
  if (weights.comfort < 0.0 || weights.energy < 0.0) {
    throw Error(ErrorKind::kConfig, "mpc weights must be non-negative");
  }
  if (!(u_max > 0.0)) throw Error(ErrorKind::kConfig, "u_max must be positive");
  if (max_iterations < 1 || convexification_passes < 1) {
    throw Error(ErrorKind::kConfig, "solver iteration caps must be >= 1");
  }
  if (!(fd_step > 0.0) || !(zero_velocity > 0.0)) {
    throw Error(ErrorKind::kConfig, "solver tolerances must be positive");
  }
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kIterationLimit: return "iteration_limit";
    case SolveStatus::kStalled: return "stalled";
    case SolveStatus::kFallback: return "fallback";
  }
  return "unknown";
}

double recover_u(double fd, double x2, double x4, double u_max,
                 double zero_velocity) {
  const double rel = x4 - x2;
  if (std::abs(rel) < zero_velocity) return 0.0;
  return std::clamp(fd / rel, 0.0, u_max);
}

namespace {

bool diverged(const Error& e) {
  return e.kind() == ErrorKind::kNonFiniteState ||
         e.kind() == ErrorKind::kLinearSolveFailure;
}

class Shooting {
 public:
  Shooting(const Plant& plant, const State& x0, const Eigen::VectorXd& preview,
           const MpcConfig& cfg)
      : plant_(plant), x0_(x0), w_(preview), cfg_(cfg), n_(cfg.horizon) {
    if (preview.size() < n_) {
      throw Error(ErrorKind::kIndexOutOfRange, "preview shorter than horizon");
    }
    states_.resize(n_);
    prefix_.resize(n_ + 1);
  }

  // Cost from step j onward starting at state x with controls u[j..].
  double suffix(State x, const Eigen::VectorXd& u, int j) const {
    double total = 0.0;
    const double ts = cfg_.sample_period;
    for (int k = j; k < n_; ++k) {
      const double uk = u(k);
      const double wk = w_(k);
      const State xd = plant_.derivative(x, uk, wk);
      total += ts * stage_cost(plant_.params(), cfg_.weights, x, xd, uk);
      if (k + 1 < n_) {
        x = rk4_step([&](const State& s) { return plant_.derivative(s, uk, wk); },
                     x, xd, ts);
        if (!x.allFinite()) {
          throw Error(ErrorKind::kNonFiniteState, "prediction rollout diverged");
        }
      }
    }
    return total;
  }

  // Like evaluate, but a diverging prediction costs +inf.
  double try_evaluate(const Eigen::VectorXd& u) {
    try {
      return evaluate(u);
    } catch (const Error& e) {
      if (!diverged(e)) throw;
      return std::numeric_limits<double>::infinity();
    }
  }

  // Full rollout that records the states and running costs.
  double evaluate(const Eigen::VectorXd& u) {
    State x = x0_;
    const double ts = cfg_.sample_period;
    prefix_[0] = 0.0;
    for (int k = 0; k < n_; ++k) {
      states_[k] = x;
      const double uk = u(k);
      const double wk = w_(k);
      const State xd = plant_.derivative(x, uk, wk);
      prefix_[k + 1] =
          prefix_[k] + ts * stage_cost(plant_.params(), cfg_.weights, x, xd, uk);
      if (k + 1 < n_) {
        x = rk4_step([&](const State& s) { return plant_.derivative(s, uk, wk); },
                     x, xd, ts);
        if (!x.allFinite()) {
          throw Error(ErrorKind::kNonFiniteState, "prediction rollout diverged");
        }
      }
    }
    return prefix_[n_];
  }

  // Forward differences about the last evaluated sequence; perturbing u_j
  // only changes the rollout from step j on.
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const {
    Eigen::VectorXd g(n_);
    Eigen::VectorXd v = u;
    const double base = prefix_[n_];
    for (int j = 0; j < n_; ++j) {
      double h = cfg_.fd_step;
      if (u(j) + h > cfg_.u_max) h = -h;
      v(j) = u(j) + h;
      // A perturbation that makes the rollout diverge carries no slope.
      try {
        const double moved = prefix_[j] + suffix(states_[j], v, j);
        g(j) = (moved - base) / h;
      } catch (const Error& e) {
        if (!diverged(e)) throw;
        g(j) = 0.0;
      }
      v(j) = u(j);
    }
    return g;
  }

 private:
  const Plant& plant_;
  State x0_;
  const Eigen::VectorXd& w_;
  const MpcConfig& cfg_;
  int n_;
  std::vector<State> states_;
  std::vector<double> prefix_;
};

Eigen::VectorXd project(const Eigen::VectorXd& u, double u_max) {
  return u.cwiseMax(0.0).cwiseMin(u_max);
}

}  // namespace

double nmpc_cost(const Plant& plant, const State& x0,
                 const Eigen::VectorXd& controls,
                 const Eigen::VectorXd& preview, const MpcConfig& cfg) {
  Shooting shooting(plant, x0, preview, cfg);
  return shooting.suffix(x0, controls, 0);
}

MpcSolution nmpc_solve(const Plant& plant, const State& x0,
                       const Eigen::VectorXd& preview, const MpcConfig& cfg,
                       const Eigen::VectorXd* warm) {
  const int n = cfg.horizon;
  Shooting shooting(plant, x0, preview, cfg);

  Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 0.5 * cfg.u_max);
  double cost = shooting.try_evaluate(u);
  const bool have_warm = cfg.warm_start && warm != nullptr && warm->size() == n;
  if (have_warm) {
    // Start from whichever guess is better so warm starts never hurt.
    const Eigen::VectorXd guess = project(*warm, cfg.u_max);
    const double warm_cost = shooting.try_evaluate(guess);
    if (warm_cost <= cost) {
      u = guess;
      cost = warm_cost;
    }
  }
  if (!std::isfinite(cost)) {
    // The prediction diverges from every start (e.g. a preview too noisy to
    // integrate): keep the previous plan, or hold full damping.
    MpcSolution sol;
    sol.controls = have_warm ? project(*warm, cfg.u_max)
                             : Eigen::VectorXd::Constant(n, cfg.u_max);
    sol.cost = cost;
    sol.status = SolveStatus::kFallback;
    return sol;
  }
  cost = shooting.evaluate(u);

  MpcSolution sol;
  sol.status = SolveStatus::kIterationLimit;
  Eigen::VectorXd g = shooting.gradient(u);
  double step = 0.1 * cfg.u_max / std::max(g.cwiseAbs().maxCoeff(), 1e-300);
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    sol.iterations = it;
    Eigen::VectorXd trial;
    double trial_cost = cost;
    bool accepted = false;
    bool tiny = false;
    for (int backtrack = 0; backtrack < 30; ++backtrack) {
      trial = project(u - step * g, cfg.u_max);
      const Eigen::VectorXd d = trial - u;
      if (d.cwiseAbs().maxCoeff() <= cfg.tolerance * cfg.u_max) {
        tiny = true;
        break;
      }
      trial_cost = shooting.try_evaluate(trial);
      if (trial_cost <= cost + 1e-4 * g.dot(d)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (tiny) {
      sol.status = SolveStatus::kConverged;
      break;
    }
    if (!accepted) {
      sol.status = SolveStatus::kStalled;
      break;
    }
    const double decrease = cost - trial_cost;
    const Eigen::VectorXd s = trial - u;
    u = trial;
    cost = trial_cost;
    const Eigen::VectorXd g_new = shooting.gradient(u);
    const double sy = s.dot(g_new - g);
    g = g_new;
    step = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * step;
    if (decrease <= cfg.tolerance * (std::abs(cost) + 1e-12)) {
      sol.status = SolveStatus::kConverged;
      break;
    }
  }
  // The line search only accepts decreases, so u is the best iterate.
  sol.controls = u;
  sol.cost = shooting.evaluate(u);
  return sol;
}

}  // namespace ipva
