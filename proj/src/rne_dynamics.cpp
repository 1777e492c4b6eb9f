#include "armlab/rne_dynamics.hpp"

#include <stdexcept>
#include <string>

namespace armlab {
namespace {

const Vec3 kAxisZ(0.0, 0.0, 1.0);

void check_length(const Vec& v, int n, const char* what) {
  if (v.size() != n)
    throw std::invalid_argument(std::string(what) + ": expected length " +
                                std::to_string(n) + ", got " + std::to_string(v.size()));
}

struct RneInputs {
  Vec3 gravity;
  Vec3 base_omega;
  Vec3 base_omega_dot;
  Vec3 base_acc;
  Vec3 end_force;
  Vec3 end_torque;
};

KinematicPropagation propagate(const RobotModel& model, const Vec& q, const Vec& qd,
                               const Vec& qdd, const RneInputs& in,
                               std::vector<Mat3>* rotations, std::vector<Vec3>* gravities) {
  const int n = model.dof();
  KinematicPropagation prop;
  prop.omega.resize(n);
  prop.omega_dot.resize(n);
  prop.origin_acc.resize(n);
  prop.com_acc.resize(n);
  if (rotations) rotations->resize(n);
  if (gravities) gravities->resize(n);

  Vec3 omega_prev = in.base_omega;
  Vec3 omega_dot_prev = in.base_omega_dot;
  Vec3 acc_prev = in.base_acc;
  Vec3 g_prev = in.gravity;

  for (int i = 0; i < n; ++i) {
    const LinkParams& link = model.links[i];
    const Mat3 r = rot_z(q[i]) * link.fixed_rotation;  // frame {i} -> frame {i-1}
    const Mat3 rt = r.transpose();

    const Vec3 omega = rt * (omega_prev + qd[i] * kAxisZ);
    const Vec3 omega_dot =
        rt * (omega_dot_prev + qdd[i] * kAxisZ + qd[i] * omega_prev.cross(kAxisZ));
    const Vec3 anchor_acc = rt * acc_prev;  // proximal joint, own-frame coords
    const Vec3 com_acc = anchor_acc + omega_dot.cross(link.com_offset) +
                         omega.cross(omega.cross(link.com_offset));
    const Vec3 origin_acc = anchor_acc + omega_dot.cross(link.joint_offset) +
                            omega.cross(omega.cross(link.joint_offset));

    prop.omega[i] = omega;
    prop.omega_dot[i] = omega_dot;
    prop.com_acc[i] = com_acc;
    prop.origin_acc[i] = origin_acc;
    if (rotations) (*rotations)[i] = r;
    if (gravities) (*gravities)[i] = rt * g_prev;

    omega_prev = omega;
    omega_dot_prev = omega_dot;
    acc_prev = origin_acc;
    if (gravities) g_prev = (*gravities)[i];
  }
  return prop;
}

Vec rne_core(const RobotModel& model, const Vec& q, const Vec& qd, const Vec& qdd,
             const RneInputs& in) {
  const int n = model.dof();
  std::vector<Mat3> rot;
  std::vector<Vec3> grav;
  const KinematicPropagation prop = propagate(model, q, qd, qdd, in, &rot, &grav);

  Vec tau(n);
  Vec3 f_below = in.end_force;    // wrench from the chain below, child-frame coords
  Vec3 tau_below = in.end_torque;
  for (int i = n - 1; i >= 0; --i) {
    const LinkParams& link = model.links[i];
    // Wrench from the child expressed in this link's frame. For the last
    // link the load is already given in its frame.
    const Vec3 f_child = (i == n - 1) ? f_below : Vec3(rot[i + 1] * f_below);
    const Vec3 tau_child = (i == n - 1) ? tau_below : Vec3(rot[i + 1] * tau_below);

    const Vec3 inertial = link.mass * (prop.com_acc[i] - grav[i]);
    const Vec3 f = f_child + inertial;
    const Vec3 torque = tau_child + link.com_offset.cross(inertial) +
                        link.joint_offset.cross(f_child) +
                        link.inertia * prop.omega_dot[i] +
                        prop.omega[i].cross(link.inertia * prop.omega[i]);

    // Project onto the joint axis (z of the parent frame).
    tau[i] = torque.dot(rot[i].transpose() * kAxisZ);

    f_below = f;
    tau_below = torque;
  }
  return tau;
}

RneInputs full_inputs(const RobotModel& model, const SpatialLoad& load) {
  return RneInputs{model.gravity,
                   model.base_angular_velocity,
                   model.base_angular_acceleration,
                   model.base_linear_acceleration,
                   load.end_force,
                   load.end_torque};
}

RneInputs inertial_probe_inputs() {
  return RneInputs{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                   Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
}

}  // namespace

KinematicPropagation propagate_kinematics(const RobotModel& model, const Vec& q,
                                          const Vec& qd, const Vec& qdd) {
  const int n = model.dof();
  check_length(q, n, "propagate_kinematics: q");
  check_length(qd, n, "propagate_kinematics: qd");
  check_length(qdd, n, "propagate_kinematics: qdd");
  return propagate(model, q, qd, qdd, full_inputs(model, {}), nullptr, nullptr);
}

Vec rneida(const RobotModel& model, const Vec& q, const Vec& qd, const Vec& qdd,
           const SpatialLoad& load) {
  const int n = model.dof();
  check_length(q, n, "rneida: q");
  check_length(qd, n, "rneida: qd");
  check_length(qdd, n, "rneida: qdd");
  if (!load.end_force.allFinite() || !load.end_torque.allFinite())
    throw std::invalid_argument("rneida: load must be finite");
  return rne_core(model, q, qd, qdd, full_inputs(model, load));
}

Mat mass_matrix(const RobotModel& model, const Vec& q) {
  const int n = model.dof();
  check_length(q, n, "mass_matrix: q");
  Mat m(n, n);
  const Vec zero = Vec::Zero(n);
  const RneInputs probe = inertial_probe_inputs();
  Vec unit = Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    unit[j] = 1.0;
    m.col(j) = rne_core(model, q, zero, unit, probe);
    unit[j] = 0.0;
  }
  return m;
}

Vec bias_vector(const RobotModel& model, const Vec& q, const Vec& qd,
                const SpatialLoad& load) {
  const int n = model.dof();
  check_length(q, n, "bias_vector: q");
  check_length(qd, n, "bias_vector: qd");
  return rne_core(model, q, qd, Vec::Zero(n), full_inputs(model, load));
}

Vec gravity_vector(const RobotModel& model, const Vec& q) {
  const int n = model.dof();
  check_length(q, n, "gravity_vector: q");
  return rne_core(model, q, Vec::Zero(n), Vec::Zero(n), full_inputs(model, {}));
}

Vec rnefda(const RobotModel& model, const Vec& q, const Vec& qd, const Vec& tau,
           const SpatialLoad& load) {
  const int n = model.dof();
  check_length(tau, n, "rnefda: tau");
  const Vec h = bias_vector(model, q, qd, load);
  const Mat m = mass_matrix(model, q);
  const Vec rhs = tau - h;

  Eigen::LLT<Mat> llt(m);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);

  // Cholesky rejected the matrix; fall back to a pivoted solve.
  Eigen::FullPivLU<Mat> lu(m);
  if (!lu.isInvertible())
    throw std::runtime_error("rnefda: mass matrix is not positive definite (model defect)");
  return lu.solve(rhs);
}

JointState semi_implicit_step(const RobotModel& model, const JointState& state,
                              const Vec& tau, double dt, const SpatialLoad& load) {
  const Vec qdd = rnefda(model, state.q, state.qd, tau, load);
  JointState next;
  next.qd = state.qd + dt * qdd;
  next.q = state.q + dt * next.qd;
  return next;
}

}  // namespace armlab
