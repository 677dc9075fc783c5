#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "ipva/error.hpp"
#include "ipva/mpc.hpp"

namespace ipva {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Sprung-mass acceleration and relative velocity as row functionals.
Eigen::RowVectorXd accel_row(double radius) {
  Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(6);
  c(5) = 1.0;
  c(1) = radius;
  return c;
}

Eigen::RowVectorXd relvel_row() {
  Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(6);
  s(3) = 1.0;
  s(1) = -1.0;
  return s;
}

double quad_value(const MatrixXd& h, const VectorXd& g, const VectorXd& x) {
  return 0.5 * x.dot(h * x) + g.dot(x);
}

// min 0.5 x'Hx + g'x  s.t. lo <= x <= hi, H positive definite.
// Projected Newton with a backtracking search along the projection arc.
VectorXd box_qp(const MatrixXd& h, const VectorXd& g, const VectorXd& lo,
                const VectorXd& hi, VectorXd x) {
  const Eigen::Index n = x.size();
  x = x.cwiseMax(lo).cwiseMin(hi);
  const double scale = 1.0 + hi.cwiseAbs().maxCoeff() + lo.cwiseAbs().maxCoeff();
  for (int it = 0; it < 100; ++it) {
    const VectorXd grad = h * x + g;
    std::vector<Eigen::Index> free;
    free.reserve(n);
    double pg = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = x(i) <= lo(i) + 1e-14 * scale && grad(i) > 0.0;
      const bool at_hi = x(i) >= hi(i) - 1e-14 * scale && grad(i) < 0.0;
      const bool fixed = lo(i) == hi(i);
      if (!(at_lo || at_hi || fixed)) {
        free.push_back(i);
        pg = std::max(pg, std::abs(grad(i)));
      }
    }
    if (free.empty() || pg <= 1e-13 * (1.0 + g.cwiseAbs().maxCoeff())) break;
    const auto m = static_cast<Eigen::Index>(free.size());
    MatrixXd hf(m, m);
    VectorXd gf(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      gf(a) = grad(free[a]);
      for (Eigen::Index b = 0; b < m; ++b) hf(a, b) = h(free[a], free[b]);
    }
    const VectorXd step = hf.ldlt().solve(-gf);
    VectorXd dir = VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < m; ++a) dir(free[a]) = step(a);

    const double f0 = quad_value(h, g, x);
    double t = 1.0;
    VectorXd next = x;
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt) {
      next = (x + t * dir).cwiseMax(lo).cwiseMin(hi);
      if (quad_value(h, g, next) <= f0 + 1e-4 * grad.dot(next - x)) {
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
    const double change = (next - x).cwiseAbs().maxCoeff();
    x = next;
    if (change <= 1e-15 * scale) break;
  }
  return x;
}

}  // namespace

SlMpcProblem::SlMpcProblem(const SuspensionParams& params,
                           const SlStateSpace& model, const MpcConfig& cfg)
    : cfg_(cfg),
      n_(cfg.horizon),
      radius_(params.screw_radius),
      model_(model) {
  cfg_.validate();
  if (std::abs(model.sample_period - cfg.sample_period) >
      1e-12 * cfg.sample_period) {
    throw Error(ErrorKind::kConfig,
                "linear model and controller sample periods differ");
  }
  const int n = n_;
  free_state_ = MatrixXd::Zero(6 * (n + 1), 6);
  torque_map_ = MatrixXd::Zero(6 * (n + 1), n);
  road_map_ = MatrixXd::Zero(6 * (n + 1), n);
  free_state_.topRows(6) = MatrixXd::Identity(6, 6);
  for (int k = 0; k < n; ++k) {
    free_state_.middleRows(6 * (k + 1), 6) =
        model.ad * free_state_.middleRows(6 * k, 6);
    torque_map_.middleRows(6 * (k + 1), 6) =
        model.ad * torque_map_.middleRows(6 * k, 6);
    road_map_.middleRows(6 * (k + 1), 6) =
        model.ad * road_map_.middleRows(6 * k, 6);
    torque_map_.block(6 * (k + 1), k, 6, 1) += model.bd;
    road_map_.block(6 * (k + 1), k, 6, 1) += model.dd;
  }

  // a_k = a0_k + r_k' F,  v_k = v0_k + q_k' F
  const Eigen::RowVectorXd ca = accel_row(radius_) * model.a_free;
  const double cb = accel_row(radius_) * model.b;
  const Eigen::RowVectorXd sv = relvel_row();
  MatrixXd r(n, n);
  MatrixXd q(n, n);
  for (int k = 0; k < n; ++k) {
    r.row(k) = ca * torque_map_.middleRows(6 * k, 6);
    r(k, k) += cb;
    q.row(k) = sv * torque_map_.middleRows(6 * k, 6);
  }
  const double ts = cfg.sample_period;
  const double a1 = cfg.weights.comfort;
  const double a2 = cfg.weights.energy;
  const MatrixXd power = 0.5 * (q + q.transpose());
  hessian_ = 2.0 * ts * (a1 * r.transpose() * r - a2 * power);
  hessian_ = 0.5 * (hessian_ + hessian_.transpose());

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(hessian_);
  const VectorXd lam = es.eigenvalues();
  const double top = std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  const VectorXd pos = lam.cwiseMax(1e-9 * top);
  convex_part_ = es.eigenvectors() * pos.asDiagonal() *
                 es.eigenvectors().transpose();
  concave_part_ = hessian_ - convex_part_;
  lipschitz_ = top;
}

SlMpcProblem::Linear SlMpcProblem::linear_terms(
    const State& x0, const VectorXd& preview) const {
  const int n = n_;
  const double ts = cfg_.sample_period;
  const Eigen::RowVectorXd ca = accel_row(radius_) * model_.a_free;
  const double cd = accel_row(radius_) * model_.d;
  const Eigen::RowVectorXd sv = relvel_row();
  const VectorXd w = preview.head(n);
  VectorXd a0(n);
  VectorXd v0(n);
  MatrixXd r(n, n);
  for (int k = 0; k < n; ++k) {
    const VectorXd xk = free_state_.middleRows(6 * k, 6) * x0 +
                        road_map_.middleRows(6 * k, 6) * w;
    a0(k) = ca * xk + cd * w(k);
    v0(k) = sv * xk;
    r.row(k) = ca * torque_map_.middleRows(6 * k, 6);
    r(k, k) += accel_row(radius_) * model_.b;
  }
  Linear lin;
  lin.g = ts * (2.0 * cfg_.weights.comfort * r.transpose() * a0 -
                cfg_.weights.energy * v0);
  lin.c = ts * cfg_.weights.comfort * a0.squaredNorm();
  return lin;
}

VectorXd SlMpcProblem::predict(const State& x0, const VectorXd& preview,
                               const VectorXd& torques) const {
  const VectorXd w = preview.head(n_);
  const VectorXd all = free_state_ * x0 + torque_map_ * torques + road_map_ * w;
  return all.tail(6 * n_);
}

VectorXd SlMpcProblem::relative_velocity(const State& x0,
                                         const VectorXd& preview,
                                         const VectorXd& torques) const {
  const VectorXd w = preview.head(n_);
  VectorXd v(n_);
  for (int k = 0; k < n_; ++k) {
    const VectorXd xk = free_state_.middleRows(6 * k, 6) * x0 +
                        torque_map_.middleRows(6 * k, 6) * torques +
                        road_map_.middleRows(6 * k, 6) * w;
    v(k) = xk(3) - xk(1);
  }
  return v;
}

double SlMpcProblem::cost(const State& x0, const VectorXd& preview,
                          const VectorXd& torques) const {
  const Linear lin = linear_terms(x0, preview);
  return quad_value(hessian_, lin.g, torques) + lin.c;
}

MpcSolution SlMpcProblem::solve(const State& x0_in, const VectorXd& preview,
                                const VectorXd* warm_torques) const {
  if (preview.size() < n_) {
    throw Error(ErrorKind::kIndexOutOfRange, "preview shorter than horizon");
  }
  // The equivalent model is periodic in the pendulum angle only through its
  // statistics; predict from the wrapped angle.
  State x0 = x0_in;
  x0(2) = std::remainder(x0(2), 2.0 * std::numbers::pi);

  const int n = n_;
  const Linear lin = linear_terms(x0, preview);
  const double rho = 1e-9 * lipschitz_ + 1e-300;
  const MatrixXd h_model = convex_part_ + rho * MatrixXd::Identity(n, n);

  VectorXd ref = VectorXd::Zero(n);
  if (cfg_.warm_start && warm_torques != nullptr &&
      warm_torques->size() == n) {
    ref = *warm_torques;
  }
  MpcSolution sol;
  sol.status = SolveStatus::kIterationLimit;
  VectorXd torques = ref;
  VectorXd rel;
  for (int pass = 1; pass <= cfg_.convexification_passes; ++pass) {
    sol.iterations = pass;
    rel = relative_velocity(x0, preview, ref);
    VectorXd lo(n);
    VectorXd hi(n);
    for (int k = 0; k < n; ++k) {
      const double v = rel(k);
      if (std::abs(v) < cfg_.zero_velocity) {
        lo(k) = hi(k) = 0.0;
      } else if (v > 0.0) {
        lo(k) = 0.0;
        hi(k) = cfg_.u_max * v;
      } else {
        lo(k) = cfg_.u_max * v;
        hi(k) = 0.0;
      }
    }
    const VectorXd g = lin.g + concave_part_ * ref - rho * ref;
    torques = box_qp(h_model, g, lo, hi, ref);
    if (!torques.allFinite()) break;
    const double change = (torques - ref).cwiseAbs().maxCoeff();
    ref = torques;
    if (change <= 1e-9 * (1.0 + torques.cwiseAbs().maxCoeff())) {
      sol.status = SolveStatus::kConverged;
      break;
    }
  }
  if (!torques.allFinite()) {
    torques = VectorXd::Zero(n);
    sol.status = SolveStatus::kFallback;
  }
  rel = relative_velocity(x0, preview, torques);
  sol.torques = torques;
  sol.controls.resize(n);
  sol.controls(0) = recover_u(torques(0), x0(1), x0(3), cfg_.u_max,
                              cfg_.zero_velocity);
  for (int k = 1; k < n; ++k) {
    sol.controls(k) =
        recover_u(torques(k), 0.0, rel(k), cfg_.u_max, cfg_.zero_velocity);
  }
  sol.cost = quad_value(hessian_, lin.g, torques) + lin.c;
  return sol;
}

MpcSolution slmpc_solve(const SuspensionParams& p, const SlStateSpace& model,
                        const State& x0, const VectorXd& preview,
                        const MpcConfig& cfg, const VectorXd* warm_torques) {
  return SlMpcProblem(p, model, cfg).solve(x0, preview, warm_torques);
}

}  // namespace ipva
