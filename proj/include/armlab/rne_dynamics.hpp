#pragma once

#include <vector>

#include "armlab/robot_model.hpp"
#include "armlab/types.hpp"

namespace armlab {

/// Joint positions and velocities.
struct JointState {
  Vec q;
  Vec qd;
};

/// Wrench at the tool point, expressed in the last link's frame. Initializes
/// the backward recursion, i.e. it is the reaction the chain must support.
struct SpatialLoad {
  Vec3 end_force = Vec3::Zero();   ///< [N]
  Vec3 end_torque = Vec3::Zero();  ///< [N m]
};

/// Per-link kinematic quantities in each link's own frame.
struct KinematicPropagation {
  std::vector<Vec3> omega;       ///< angular velocity
  std::vector<Vec3> omega_dot;   ///< angular acceleration
  std::vector<Vec3> origin_acc;  ///< linear acceleration of the distal frame origin
  std::vector<Vec3> com_acc;     ///< linear acceleration of the CoM
};

/// Outward recursion over the chain. Gravity does not enter here; it is
/// handled by the force recursion.
KinematicPropagation propagate_kinematics(const RobotModel& model, const Vec& q,
                                          const Vec& qd, const Vec& qdd);

/// Inverse dynamics: joint torques satisfying
///   M(q) qdd + C(q, qd) qd + G(q) + load effect = tau.
Vec rneida(const RobotModel& model, const Vec& q, const Vec& qd, const Vec& qdd,
           const SpatialLoad& load = {});

/// Joint-space inertia matrix, built column-by-column from unit-acceleration
/// inverse-dynamics probes with gravity, base motion and loads zeroed.
/// Symmetric positive definite for any valid model.
Mat mass_matrix(const RobotModel& model, const Vec& q);

/// Nonlinear effects h(q, qd) = C(q, qd) qd + G(q) plus the load effect.
Vec bias_vector(const RobotModel& model, const Vec& q, const Vec& qd,
                const SpatialLoad& load = {});

/// Gravity torque G(q).
Vec gravity_vector(const RobotModel& model, const Vec& q);

/// Forward dynamics: solves M(q) qdd = tau - h(q, qd) with a Cholesky
/// factorization (pivoted fallback; throws if the system is singular).
Vec rnefda(const RobotModel& model, const Vec& q, const Vec& qd, const Vec& tau,
           const SpatialLoad& load = {});

/// One semi-implicit Euler step of the free dynamics:
/// qd' = qd + dt * rnefda(...), q' = q + dt * qd'.
JointState semi_implicit_step(const RobotModel& model, const JointState& state,
                              const Vec& tau, double dt, const SpatialLoad& load = {});

}  // namespace armlab
