#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "ipva/error.hpp"
#include "ipva/linear_systems.hpp"

namespace ipva {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd expm(const MatrixXd& a) {
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  }
  const MatrixXd scaled = a / std::ldexp(1.0, squarings);
  MatrixXd sum = MatrixXd::Identity(a.rows(), a.cols());
  MatrixXd term = sum;
  for (int k = 1; k < 40; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <=
        std::numeric_limits<double>::epsilon() * sum.cwiseAbs().maxCoeff()) {
      break;
    }
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

DiscreteSystem zoh(const MatrixXd& a, const MatrixXd& b, double ts) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  MatrixXd aug = MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a * ts;
  aug.topRightCorner(n, m) = b * ts;
  const MatrixXd e = expm(aug);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

CtrbDecomposition ctrb_decompose(const MatrixXd& a, const MatrixXd& b,
                                 double rank_tol) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n) {
    throw Error(ErrorKind::kConfig, "ctrb_decompose: dimension mismatch");
  }
  // Orthogonal staircase: grow an orthonormal basis of the Krylov space
  // span{B, AB, ...}, keeping only directions that are new to tolerance.
  MatrixXd basis(n, 0);
  MatrixXd block = b;
  for (Eigen::Index step = 0; step < n && block.cols() > 0; ++step) {
    const double block_norm =
        block.size() ? Eigen::JacobiSVD<MatrixXd>(block).singularValues()(0)
                     : 0.0;
    if (block_norm == 0.0) break;
    MatrixXd w = block;
    for (int pass = 0; pass < 2 && basis.cols() > 0; ++pass) {
      w -= basis * (basis.transpose() * w);
    }
    Eigen::JacobiSVD<MatrixXd> svd(w, Eigen::ComputeThinU);
    const VectorXd& sv = svd.singularValues();
    Eigen::Index keep = 0;
    while (keep < sv.size() && sv(keep) > rank_tol * block_norm &&
           basis.cols() + keep < n) {
      ++keep;
    }
    if (keep == 0) break;
    const MatrixXd fresh = svd.matrixU().leftCols(keep);
    MatrixXd grown(n, basis.cols() + keep);
    grown << basis, fresh;
    basis = std::move(grown);
    block = a * fresh;
  }

  CtrbDecomposition out;
  out.rank = static_cast<int>(basis.cols());
  if (out.rank == n) {
    out.transform = MatrixXd::Identity(n, n);
  } else {
    Eigen::HouseholderQR<MatrixXd> qr(basis);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, n);
    out.transform.resize(n, n);
    out.transform << basis, q.rightCols(n - out.rank);
  }
  out.a_hat = out.transform.transpose() * a * out.transform;
  out.b_hat = out.transform.transpose() * b;
  if (out.rank < n) {
    const Eigen::Index rest = n - out.rank;
    out.structure_residual =
        std::max(out.a_hat.bottomLeftCorner(rest, out.rank).cwiseAbs().maxCoeff(),
                 out.b_hat.bottomRows(rest).cwiseAbs().maxCoeff());
  }
  return out;
}

int controllability_rank(const MatrixXd& a, const MatrixXd& b,
                         double rank_tol) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  MatrixXd c(n, n * m);
  MatrixXd block = b;
  for (Eigen::Index k = 0; k < n; ++k) {
    // Normalizing each block leaves the column space unchanged.
    const double norm = block.norm();
    c.middleCols(k * m, m) = norm > 0 ? MatrixXd(block / norm) : block;
    block = a * c.middleCols(k * m, m);
  }
  Eigen::JacobiSVD<MatrixXd> svd(c);
  const VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rank_tol * sv(0)) ++rank;
  }
  return rank;
}

namespace {

bool eigenvalues_stable(const Eigen::VectorXcd& ev, TimeDomain domain) {
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (domain == TimeDomain::kContinuous ? ev(i).real() >= 0.0
                                          : std::abs(ev(i)) >= 1.0) {
      return false;
    }
  }
  return true;
}

double max_real_eigenvalue(const MatrixXd& a) {
  return Eigen::EigenSolver<MatrixXd>(a, false).eigenvalues().real().maxCoeff();
}

}  // namespace

StabilizabilityReport stabilizability_check(const MatrixXd& a,
                                            const MatrixXd& b,
                                            TimeDomain domain,
                                            double rank_tol) {
  const CtrbDecomposition dec = ctrb_decompose(a, b, rank_tol);
  StabilizabilityReport report;
  report.controllable_rank = dec.rank;
  if (dec.rank == dec.n()) {
    report.stabilizable = true;
    return report;
  }
  report.uncontrollable_eigenvalues =
      Eigen::EigenSolver<MatrixXd>(dec.a22(), false).eigenvalues();
  report.stabilizable =
      eigenvalues_stable(report.uncontrollable_eigenvalues, domain);
  return report;
}

MatrixXd solve_lyapunov(const MatrixXd& a, const MatrixXd& q) {
  const Eigen::Index n = a.rows();
  // vec(A^T P + P A) = (I kron A^T + A^T kron I) vec(P)
  MatrixXd k = MatrixXd::Zero(n * n, n * n);
  const MatrixXd at = a.transpose();
  for (Eigen::Index col = 0; col < n; ++col) {
    k.block(col * n, col * n, n, n) += at;
    for (Eigen::Index row = 0; row < n; ++row) {
      k.block(row * n, col * n, n, n) +=
          MatrixXd::Identity(n, n) * at(row, col);
    }
  }
  const VectorXd rhs = -Eigen::Map<const VectorXd>(q.data(), n * n);
  const VectorXd sol = k.fullPivLu().solve(rhs);
  MatrixXd p = Eigen::Map<const MatrixXd>(sol.data(), n, n);
  return 0.5 * (p + p.transpose());
}

namespace {

MatrixXd psd_projection(const MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (s + s.transpose()));
  const VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clipped.asDiagonal() *
         es.eigenvectors().transpose();
}

// argmin ||X - target||_F^2  s.t.  X^T P + P X + 2 margin P + eps I <= 0,
// solved by ADMM on the splitting  L(X) + S = H, S >= 0.
MatrixXd nearest_certified_block(const MatrixXd& target, const MatrixXd& p,
                                 double margin, double eps) {
  const Eigen::Index n = target.rows();
  const Eigen::Index nn = n * n;
  auto lyap = [&](const MatrixXd& x) -> MatrixXd {
    return x.transpose() * p + p * x;
  };
  MatrixXd lmat(nn, nn);
  for (Eigen::Index k = 0; k < nn; ++k) {
    MatrixXd e = MatrixXd::Zero(n, n);
    e(k % n, k / n) = 1.0;
    const MatrixXd l = lyap(e);
    lmat.col(k) = Eigen::Map<const VectorXd>(l.data(), nn);
  }
  const MatrixXd h = -(2.0 * margin * p + eps * MatrixXd::Identity(n, n));
  const double rho = 1.0;
  const Eigen::LDLT<MatrixXd> kkt(2.0 * MatrixXd::Identity(nn, nn) +
                                  rho * lmat.transpose() * lmat);
  const VectorXd target_vec = Eigen::Map<const VectorXd>(target.data(), nn);

  MatrixXd s = MatrixXd::Zero(n, n);
  MatrixXd u = MatrixXd::Zero(n, n);
  VectorXd x = target_vec;
  const double scale = 1.0 + target.norm() + h.norm();
  for (int it = 0; it < 20000; ++it) {
    const MatrixXd shift = s - h + u;
    x = kkt.solve(2.0 * target_vec -
                  rho * lmat.transpose() *
                      Eigen::Map<const VectorXd>(shift.data(), nn));
    const VectorXd lx_vec = lmat * x;
    const MatrixXd lx = Eigen::Map<const MatrixXd>(lx_vec.data(), n, n);
    const MatrixXd s_prev = s;
    s = psd_projection(h - lx - u);
    const MatrixXd primal = lx + s - h;
    u += primal;
    const MatrixXd ds = s - s_prev;
    const double dual =
        rho * (lmat.transpose() * Eigen::Map<const VectorXd>(ds.data(), nn))
                  .norm();
    if (primal.norm() < 1e-12 * scale && dual < 1e-12 * scale) break;
  }
  MatrixXd result = Eigen::Map<const MatrixXd>(x.data(), n, n);
  // Restore exact feasibility with a diagonal shift if ADMM stopped short.
  const MatrixXd slack = lyap(result) - h;
  const double worst =
      Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (slack + slack.transpose()))
          .eigenvalues()
          .maxCoeff();
  if (worst > 0.0) {
    const double p_min =
        Eigen::SelfAdjointEigenSolver<MatrixXd>(p).eigenvalues().minCoeff();
    result -= (worst / (2.0 * p_min)) * (1.0 + 1e-9) *
              MatrixXd::Identity(n, n);
  }
  return result;
}

}  // namespace

RepairResult repair_stabilizability(const MatrixXd& a, const MatrixXd& b,
                                    const RepairOptions& options) {
  RepairResult result;
  result.a = a;
  const CtrbDecomposition dec = ctrb_decompose(a, b);
  if (dec.rank == dec.n()) return result;
  const MatrixXd target = dec.a22();
  result.record.a22_before = target;
  if (eigenvalues_stable(
          Eigen::EigenSolver<MatrixXd>(target, false).eigenvalues(),
          TimeDomain::kContinuous)) {
    result.record.a22_after = target;
    return result;
  }

  const Eigen::Index n2 = target.rows();
  const MatrixXd id = MatrixXd::Identity(n2, n2);
  const double margin = options.decay_margin;
  MatrixXd block = target - (max_real_eigenvalue(target) + 2.0 * margin) * id;
  double objective = (block - target).squaredNorm();
  MatrixXd certificate = id;
  auto& record = result.record;
  record.repaired = true;
  record.converged = false;
  record.objective_history.push_back(objective);

  for (int it = 1; it <= options.max_iterations; ++it) {
    // Fix the block: Lyapunov certificate for the margin-shifted block.
    MatrixXd p = solve_lyapunov(block + margin * id, id);
    p /= p.norm();
    // Fix the certificate: nearest block it certifies.
    const MatrixXd candidate =
        nearest_certified_block(target, p, margin, options.lmi_epsilon);
    const double cand_obj = (candidate - target).squaredNorm();
    double decrease = 0.0;
    if (cand_obj <= objective &&
        max_real_eigenvalue(candidate) < 0.0) {
      decrease = objective - cand_obj;
      block = candidate;
      objective = cand_obj;
      certificate = p;
    }
    record.objective_history.push_back(objective);
    record.iterations = it;
    if (decrease <= options.tolerance * (1.0 + objective)) {
      record.converged = true;
      break;
    }
  }

  record.a22_after = block;
  record.lyapunov_certificate = certificate;
  MatrixXd a_hat = dec.a_hat;
  a_hat.bottomRightCorner(n2, n2) = block;
  result.a = dec.transform * a_hat * dec.transform.transpose();
  record.repair_norm = (result.a - a).norm();
  return result;
}

}  // namespace ipva
