#include "ipva/slin.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "ipva/csv.hpp"
#include "ipva/error.hpp"
#include "ipva/sim.hpp"

namespace ipva {

namespace {

constexpr int kPos[3] = {0, 2, 4};
constexpr int kVel[3] = {1, 3, 5};

Vector3 positions(const State& x) { return {x(0), x(2), x(4)}; }
Vector3 velocities(const State& x) { return {x(1), x(3), x(5)}; }

}  // namespace

GeneralizedForm generalized_form(const SuspensionParams& p) {
  const double R = p.screw_radius;
  GeneralizedForm form;
  // cos(pi/2) = 0 strips the angle-dependent coupling from the inertia.
  form.ml = inertia_matrix(p, std::numbers::pi / 2.0);
  form.cl = Matrix3::Zero();
  form.cl(0, 0) = p.mech_damping * R * R;
  form.kl = Vector3(p.suspension_stiffness * R * R, p.pendulum_stiffness,
                    p.tire_stiffness)
                .asDiagonal();
  form.road_gain = Vector3(0.0, 0.0, p.tire_stiffness);
  form.torque_gain = Vector3(1.0, -1.0, 0.0);
  return form;
}

Matrix3 relative_damping_pattern() {
  const Vector3 e(1.0, -1.0, 0.0);
  return e * e.transpose();
}

Vector3 phi_vector(const SuspensionParams& p, const Vector3& q,
                   const Vector3& qd, const Vector3& qdd) {
  const double c = p.coupling();
  const double cs = std::cos(q(1));
  const double sn = std::sin(q(1));
  const double th_d = qd(0);
  const double ph_d = qd(1);
  return {c * (2.0 * cs * qdd(0) + cs * qdd(1) - 2.0 * sn * ph_d * th_d -
               sn * ph_d * ph_d),
          c * (cs * qdd(0) + sn * th_d * th_d), 0.0};
}

PhiJacobians phi_jacobians(const SuspensionParams& p, const Vector3& q,
                           const Vector3& qd, const Vector3& qdd) {
  const double c = p.coupling();
  const double cs = std::cos(q(1));
  const double sn = std::sin(q(1));
  const double th_d = qd(0);
  const double ph_d = qd(1);
  PhiJacobians j;
  j.d_acc << 2.0 * c * cs, c * cs, 0.0,
             c * cs, 0.0, 0.0,
             0.0, 0.0, 0.0;
  j.d_vel << -2.0 * c * sn * ph_d, -2.0 * c * sn * (th_d + ph_d), 0.0,
             2.0 * c * sn * th_d, 0.0, 0.0,
             0.0, 0.0, 0.0;
  j.d_pos << 0.0,
             c * (-2.0 * sn * qdd(0) - sn * qdd(1) - 2.0 * cs * ph_d * th_d -
                  cs * ph_d * ph_d),
             0.0,
             0.0, c * (-sn * qdd(0) + cs * th_d * th_d), 0.0,
             0.0, 0.0, 0.0;
  return j;
}

ExpectationEstimate estimate_expectation(
    std::size_t n, int batches,
    const std::function<Eigen::MatrixXd(std::size_t)>& sample) {
  if (n == 0) {
    throw Error(ErrorKind::kEmptyTrajectory, "no samples for expectation");
  }
  const std::size_t nb =
      std::max<std::size_t>(1, std::min<std::size_t>(batches, n));
  std::vector<Eigen::MatrixXd> sums(nb);
  std::vector<std::size_t> counts(nb, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i * nb / n;
    const Eigen::MatrixXd s = sample(i);
    if (counts[b] == 0) {
      sums[b] = s;
    } else {
      sums[b] += s;
    }
    ++counts[b];
  }
  ExpectationEstimate est;
  est.sample_count = n;
  est.mean = Eigen::MatrixXd::Zero(sums[0].rows(), sums[0].cols());
  for (std::size_t b = 0; b < nb; ++b) est.mean += sums[b];
  est.mean /= static_cast<double>(n);
  est.std_error = Eigen::MatrixXd::Zero(est.mean.rows(), est.mean.cols());
  if (nb > 1) {
    Eigen::MatrixXd sq = est.std_error;
    for (std::size_t b = 0; b < nb; ++b) {
      const Eigen::MatrixXd dev =
          sums[b] / static_cast<double>(counts[b]) - est.mean;
      sq += dev.cwiseProduct(dev);
    }
    const double d = static_cast<double>(nb);
    est.std_error = (sq / ((d - 1.0) * d)).cwiseSqrt();
  }
  return est;
}

SlMatrices sl_matrices_from_samples(const SuspensionParams& p,
                                    const std::vector<State>& states,
                                    const std::vector<State>& derivatives,
                                    int batches) {
  if (states.size() != derivatives.size()) {
    throw Error(ErrorKind::kConfig, "state/derivative sample count mismatch");
  }
  const ExpectationEstimate est = estimate_expectation(
      states.size(), batches, [&](std::size_t i) -> Eigen::MatrixXd {
        const PhiJacobians j =
            phi_jacobians(p, positions(states[i]), velocities(states[i]),
                          velocities(derivatives[i]));
        Eigen::Matrix<double, 3, 9> row;
        row << j.d_acc, j.d_vel, j.d_pos;
        return row;
      });
  SlMatrices sl;
  sl.me = est.mean.middleCols(0, 3);
  sl.ce = est.mean.middleCols(3, 3);
  sl.ke = est.mean.middleCols(6, 3);
  sl.me_error = est.std_error.middleCols(0, 3);
  sl.ce_error = est.std_error.middleCols(3, 3);
  sl.ke_error = est.std_error.middleCols(6, 3);
  sl.sample_count = est.sample_count;
  auto worst = [](const Matrix3& m, const Matrix3& e) {
    const double scale = m.cwiseAbs().maxCoeff();
    return scale > 0.0 ? e.maxCoeff() / scale : 0.0;
  };
  sl.worst_relative_error = std::max(
      {worst(sl.me, sl.me_error), worst(sl.ce, sl.ce_error),
       worst(sl.ke, sl.ke_error)});
  return sl;
}

SlMatrices estimate_sl_matrices(const SuspensionParams& p, double ce,
                                const RoadModel& road,
                                const SlSettings& settings) {
  const double ts = road.sample_period;
  const double total = settings.warmup + settings.sample_duration;
  const RoadSignal signal = generate(road, total);
  const Plant plant(p, PlantKind::kIpva);
  const auto warm = static_cast<std::size_t>(std::llround(settings.warmup / ts));
  const std::size_t stride = std::max(1, settings.stride);

  std::vector<State> states;
  std::vector<State> derivs;
  states.reserve((signal.size() - std::min(warm, signal.size())) / stride + 1);
  derivs.reserve(states.capacity());
  State x = rest_state(signal.size() ? signal[0] : 0.0);
  for (std::size_t k = 0; k < signal.size(); ++k) {
    const State xd = plant.derivative(x, ce, signal[k]);
    if (k >= warm && (k - warm) % stride == 0) {
      states.push_back(x);
      derivs.push_back(xd);
    }
    x = rk4_step([&](const State& s) { return plant.derivative(s, ce, signal[k]); },
                 x, xd, ts);
    if (!x.allFinite()) {
      throw Error(ErrorKind::kNonFiniteState,
                  "sampling trajectory diverged at step " + std::to_string(k));
    }
  }
  SlMatrices sl = sl_matrices_from_samples(p, states, derivs, settings.batches);
  if (settings.require_convergence &&
      sl.worst_relative_error > settings.tolerance) {
    throw Error(ErrorKind::kNotConverged,
                "equivalent matrix standard error " +
                    format_double(sl.worst_relative_error) +
                    " exceeds tolerance");
  }
  return sl;
}

SlMatrices origin_sl_matrices(const SuspensionParams& p) {
  SlMatrices sl;
  sl.me = phi_jacobians(p, Vector3::Zero(), Vector3::Zero(), Vector3::Zero())
              .d_acc;
  sl.sample_count = 1;
  return sl;
}

namespace {

void discretize(SlStateSpace& ss) {
  Eigen::Matrix<double, 6, 2> inputs;
  inputs << ss.b, ss.d;
  const DiscreteSystem disc = zoh(ss.a_free, inputs, ss.sample_period);
  ss.ad = disc.a;
  ss.bd = disc.b.col(0);
  ss.dd = disc.b.col(1);
}

void certify(SlStateSpace& ss) {
  ss.stabilizability = stabilizability_check(ss.a_free, ss.b);
  if (!ss.stabilizability.stabilizable) {
    const RepairResult fix = repair_stabilizability(ss.a_free, ss.b);
    ss.a_free = fix.a;
    ss.repair = fix.record;
    ss.stabilizability = stabilizability_check(ss.a_free, ss.b);
  }
  discretize(ss);
}

}  // namespace

SlStateSpace assemble_sl_statespace(const SuspensionParams& p,
                                    const SlMatrices& sl, double ce_nominal,
                                    double sample_period) {
  const GeneralizedForm form = generalized_form(p);
  const Matrix3 m = form.ml + sl.me;
  const Eigen::JacobiSVD<Matrix3> svd(m);
  const double smin = svd.singularValues()(2);
  if (!m.allFinite() || !(smin > 1e-12 * svd.singularValues()(0))) {
    throw Error(ErrorKind::kSingularInertia,
                "equivalent inertia matrix is singular");
  }
  const Matrix3 minv = m.inverse();
  const Matrix3 acc_vel = -minv * (form.cl + sl.ce);
  const Matrix3 acc_pos = -minv * (form.kl + sl.ke);
  const Matrix3 acc_bilinear = -minv * relative_damping_pattern();
  const Vector3 acc_torque = minv * form.torque_gain;
  const Vector3 acc_road = minv * form.road_gain;

  SlStateSpace ss;
  ss.ce_nominal = ce_nominal;
  ss.sample_period = sample_period;
  for (int i = 0; i < 3; ++i) {
    ss.a_free(kPos[i], kVel[i]) = 1.0;
    for (int j = 0; j < 3; ++j) {
      ss.a_free(kVel[i], kVel[j]) = acc_vel(i, j);
      ss.a_free(kVel[i], kPos[j]) = acc_pos(i, j);
      ss.bilinear(kVel[i], kVel[j]) = acc_bilinear(i, j);
    }
    ss.b(kVel[i]) = acc_torque(i);
    ss.d(kVel[i]) = acc_road(i);
  }
  certify(ss);
  return ss;
}

SlStateSpace deterministic_linearize(const SuspensionParams& p, double ce,
                                     double sample_period) {
  const double R = p.screw_radius;
  // dF/dx, dF/dFd and dF/dw at the origin.
  Matrix6 jac = Matrix6::Zero();
  jac(0, 1) = 1.0;
  jac(1, 0) = -p.suspension_stiffness * R * R;
  jac(1, 1) = -p.mech_damping * R * R;
  jac(2, 3) = 1.0;
  jac(3, 2) = -p.pendulum_stiffness;
  jac(4, 5) = 1.0;
  jac(5, 4) = -p.tire_stiffness;
  State torque = State::Zero();
  torque(1) = 1.0;
  torque(3) = -1.0;
  State road = State::Zero();
  road(5) = p.tire_stiffness;
  // Fd = u (x4 - x2) contributes u * dFd/dx.
  Matrix6 rel = Matrix6::Zero();
  rel.row(1) << 0.0, -1.0, 0.0, 1.0, 0.0, 0.0;
  rel.row(3) = -rel.row(1);

  const auto g = mass_matrix(p, State::Zero()).partialPivLu();
  SlStateSpace ss;
  ss.ce_nominal = ce;
  ss.sample_period = sample_period;
  ss.a_free = g.solve(jac);
  ss.bilinear = g.solve(rel);
  ss.b = g.solve(torque);
  ss.d = g.solve(road);
  certify(ss);
  return ss;
}

std::vector<State> linear_response(const SlStateSpace& model,
                                   const RoadSignal& road) {
  const DiscreteSystem disc =
      zoh(model.a_nominal(), model.d, road.sample_period());
  const Matrix6 ad = disc.a;
  const State dd = disc.b.col(0);
  std::vector<State> out;
  out.reserve(road.size());
  State x = rest_state(road.size() ? road[0] : 0.0);
  for (std::size_t k = 0; k < road.size(); ++k) {
    out.push_back(x);
    x = ad * x + dd * road[k];
  }
  return out;
}

namespace {

template <class M>
void write_block(CsvWriter& out, const std::string& name, const M& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out.field(name).field(static_cast<long>(i)).field(static_cast<long>(j))
          .field(m(i, j));
      out.end_row();
    }
  }
}

}  // namespace

void write_sl_model(const std::string& path, const SlMatrices& sl,
                    const SlStateSpace& model) {
  CsvWriter out(path);
  out.header({"block", "row", "col", "value"});
  write_block(out, "me", sl.me);
  write_block(out, "ce", sl.ce);
  write_block(out, "ke", sl.ke);
  write_block(out, "me_error", sl.me_error);
  write_block(out, "ce_error", sl.ce_error);
  write_block(out, "ke_error", sl.ke_error);
  Eigen::Matrix<double, 1, 4> scalars(
      static_cast<double>(sl.sample_count), sl.worst_relative_error,
      model.ce_nominal, model.sample_period);
  write_block(out, "scalars", scalars);
  write_block(out, "a_free", model.a_free);
  write_block(out, "b", model.b);
  write_block(out, "d", model.d);
  write_block(out, "bilinear", model.bilinear);
  write_block(out, "ad", model.ad);
  write_block(out, "bd", model.bd);
  write_block(out, "dd", model.dd);
}

SlMatrices read_sl_matrices(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open " + path);
  std::map<std::string, Matrix3*> blocks;
  SlMatrices sl;
  blocks["me"] = &sl.me;
  blocks["ce"] = &sl.ce;
  blocks["ke"] = &sl.ke;
  blocks["me_error"] = &sl.me_error;
  blocks["ce_error"] = &sl.ce_error;
  blocks["ke_error"] = &sl.ke_error;
  std::string line;
  std::getline(in, line);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string name, row, col, value;
    std::getline(ss, name, ',');
    std::getline(ss, row, ',');
    std::getline(ss, col, ',');
    std::getline(ss, value, ',');
    try {
      const int i = std::stoi(row);
      const int j = std::stoi(col);
      const double v = std::stod(value);
      if (name == "scalars") {
        if (j == 0) sl.sample_count = static_cast<std::size_t>(v);
        if (j == 1) sl.worst_relative_error = v;
        continue;
      }
      const auto it = blocks.find(name);
      if (it == blocks.end()) continue;
      if (i < 0 || i > 2 || j < 0 || j > 2) throw std::out_of_range("index");
      (*it->second)(i, j) = v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::kConfig,
                  path + ":" + std::to_string(line_no) + ": malformed entry");
    }
  }
  return sl;
}

}  // namespace ipva
