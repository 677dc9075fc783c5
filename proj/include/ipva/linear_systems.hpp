#pragma once

#include <vector>

#include <Eigen/Dense>

namespace ipva {

enum class TimeDomain { kContinuous, kDiscrete };

// Matrix exponential by scaling and squaring of a Taylor series truncated
// at machine precision.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

struct DiscreteSystem {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
};

// Zero-order-hold discretization of x' = A x + B u over `ts`.
DiscreteSystem zoh(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                   double ts);

// Kalman controllability decomposition. T = [X Y] is orthogonal, X spans the
// controllable subspace, and T^T A T is block upper triangular.
struct CtrbDecomposition {
  Eigen::MatrixXd transform;  // T
  Eigen::MatrixXd a_hat;      // T^-1 A T
  Eigen::MatrixXd b_hat;      // T^-1 B
  int rank = 0;               // q
  double structure_residual = 0.0;  // max |entry| of the zero blocks

  int n() const { return static_cast<int>(a_hat.rows()); }
  Eigen::MatrixXd a11() const { return a_hat.topLeftCorner(rank, rank); }
  Eigen::MatrixXd a12() const {
    return a_hat.topRightCorner(rank, n() - rank);
  }
  Eigen::MatrixXd a22() const {
    return a_hat.bottomRightCorner(n() - rank, n() - rank);
  }
  Eigen::MatrixXd b1() const { return b_hat.topRows(rank); }
};

// Rank decisions treat singular values below rank_tol * sigma_max as zero.
CtrbDecomposition ctrb_decompose(const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b,
                                 double rank_tol = 1e-9);

// Rank of [B, AB, ..., A^(n-1) B] with the same tolerance rule.
int controllability_rank(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         double rank_tol = 1e-9);

struct StabilizabilityReport {
  bool stabilizable = false;
  int controllable_rank = 0;
  Eigen::VectorXcd uncontrollable_eigenvalues;
};

StabilizabilityReport stabilizability_check(
    const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
    TimeDomain domain = TimeDomain::kContinuous, double rank_tol = 1e-9);

struct RepairOptions {
  double decay_margin = 1e-3;  // repaired block satisfies Re(lambda) <= -margin
  double lmi_epsilon = 1e-6;   // strictness of the Lyapunov inequality
  int max_iterations = 100;
  double tolerance = 1e-10;    // relative objective decrease to stop
};

struct RepairRecord {
  bool repaired = false;
  bool converged = true;
  int iterations = 0;
  Eigen::MatrixXd a22_before;
  Eigen::MatrixXd a22_after;
  Eigen::MatrixXd lyapunov_certificate;   // P of the final iterate
  std::vector<double> objective_history;  // ||Aeq - A22||_F^2 per iteration
  double repair_norm = 0.0;               // ||A' - A||_F
};

struct RepairResult {
  Eigen::MatrixXd a;
  RepairRecord record;
};

// Replaces the uncontrollable block of a non-stabilizable continuous pair by
// the nearest (Frobenius) block satisfying a Lyapunov decay certificate,
// alternating between the certificate P and the block. Already stabilizable
// input is returned unchanged. A non-converged run returns the best iterate
// with record.converged = false.
RepairResult repair_stabilizability(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& b,
                                    const RepairOptions& options = {});

// Solves A^T P + P A = -Q for P (dense Kronecker solve).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& q);

}  // namespace ipva
