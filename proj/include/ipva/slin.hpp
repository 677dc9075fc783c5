#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipva/linear_systems.hpp"
#include "ipva/model.hpp"
#include "ipva/road.hpp"

namespace ipva {

// Ml q'' + Cl q' + Kl q + Phi(q, q', q'') = Q(t) over q = (theta, phi, x_us).
// Ml is the angle-independent part of the inertia matrix; the cos(phi)
// coupling lives in Phi. Cl holds the mechanical damping only, the generator
// enters through the relative-velocity channel.
struct GeneralizedForm {
  Matrix3 ml;
  Matrix3 cl;
  Matrix3 kl;
  // Q(t) = road_gain * w
  Vector3 road_gain;
  // Generator torque Fd acts on the coordinates through this vector.
  Vector3 torque_gain;
};

GeneralizedForm generalized_form(const SuspensionParams& p);

// (1, -1, 0)(1, -1, 0)^T: the damping pattern of the relative velocity.
Matrix3 relative_damping_pattern();

Vector3 phi_vector(const SuspensionParams& p, const Vector3& q,
                   const Vector3& qd, const Vector3& qdd);

struct PhiJacobians {
  Matrix3 d_acc;  // dPhi/dq''
  Matrix3 d_vel;  // dPhi/dq'
  Matrix3 d_pos;  // dPhi/dq
};

PhiJacobians phi_jacobians(const SuspensionParams& p, const Vector3& q,
                           const Vector3& qd, const Vector3& qdd);

struct ExpectationEstimate {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd std_error;  // batch-means standard error per entry
  std::size_t sample_count = 0;
};

// Sample mean of sample(i), i < n, with batch-means standard errors.
ExpectationEstimate estimate_expectation(
    std::size_t n, int batches,
    const std::function<Eigen::MatrixXd(std::size_t)>& sample);

struct SlSettings {
  double warmup = 1200.0;          // s of nonlinear simulation discarded
  double sample_duration = 4800.0; // s of sampled trajectory
  int stride = 1;                  // keep every stride-th step
  int batches = 20;
  // NotConverged when an entry's standard error exceeds tolerance times the
  // largest entry of its matrix.
  double tolerance = 0.05;
  bool require_convergence = true;
};

struct SlMatrices {
  Matrix3 me = Matrix3::Zero();
  Matrix3 ce = Matrix3::Zero();
  Matrix3 ke = Matrix3::Zero();
  Matrix3 me_error = Matrix3::Zero();
  Matrix3 ce_error = Matrix3::Zero();
  Matrix3 ke_error = Matrix3::Zero();
  std::size_t sample_count = 0;
  double worst_relative_error = 0.0;
};

// Expectations of the Phi Jacobians along a nonlinear passive trajectory
// (generator damping ce) driven by a realization of `road`.
SlMatrices estimate_sl_matrices(const SuspensionParams& p, double ce,
                                const RoadModel& road,
                                const SlSettings& settings = {});

// Same estimate from explicit (q, q', q'') samples.
SlMatrices sl_matrices_from_samples(const SuspensionParams& p,
                                    const std::vector<State>& states,
                                    const std::vector<State>& derivatives,
                                    int batches);

// Expectations under a point mass at the origin.
SlMatrices origin_sl_matrices(const SuspensionParams& p);

// Linear model in the plant's state ordering with the generator torque Fd as
// input:  x' = A_free x + B Fd + D w.  With a constant damping u the torque is
// Fd = u (x4 - x2), giving x' = (A_free + u N) x + D w.
struct SlStateSpace {
  Matrix6 a_free = Matrix6::Zero();
  State b = State::Zero();
  State d = State::Zero();
  Matrix6 bilinear = Matrix6::Zero();  // N
  double ce_nominal = 0.0;
  double sample_period = 0.0;

  // Zero-order-hold discretization of (A_free, [B D]).
  Matrix6 ad = Matrix6::Zero();
  State bd = State::Zero();
  State dd = State::Zero();

  StabilizabilityReport stabilizability;
  RepairRecord repair;

  Matrix6 a_nominal() const { return a_free + ce_nominal * bilinear; }
};

// (Ml + Me) q'' + (Cl + Ce) q' + (Kl + Ke) q = Q + torque_gain Fd, in first
// order form, checked for stabilizability and repaired when needed.
// Throws kSingularInertia if Ml + Me is ill-conditioned.
SlStateSpace assemble_sl_statespace(const SuspensionParams& p,
                                    const SlMatrices& sl, double ce_nominal,
                                    double sample_period);

// Jacobian linearization of the nonlinear plant at the origin.
SlStateSpace deterministic_linearize(const SuspensionParams& p, double ce,
                                     double sample_period);

// Response of x' = A_nominal x + D w from rest with w held over each step
// (exact discretization); entry k is the state at t_k.
std::vector<State> linear_response(const SlStateSpace& model,
                                   const RoadSignal& road);

// Flat CSV (block, row, col, value) of the equivalent matrices and the
// assembled model; read_sl_matrices restores the equivalent matrices.
void write_sl_model(const std::string& path, const SlMatrices& sl,
                    const SlStateSpace& model);
SlMatrices read_sl_matrices(const std::string& path);

}  // namespace ipva
