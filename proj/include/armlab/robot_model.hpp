#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "armlab/types.hpp"

namespace armlab {

/// Error raised when a model file cannot be parsed or violates an invariant.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rigid-body parameters of one link of a serial revolute chain.
///
/// Frame convention: frame {i} is fixed to link i with its origin at the
/// link's distal joint (at the tool point for the last link). Joint i turns
/// about the z axis of frame {i-1}, so the frame-{i} -> frame-{i-1} rotation
/// is Rz(q_i) * fixed_rotation. All per-link vectors and the inertia tensor
/// are expressed in frame {i}.
struct LinkParams {
  double mass = 0.0;                 ///< [kg]
  Vec3 com_offset = Vec3::Zero();    ///< proximal joint -> CoM [m]
  Vec3 joint_offset = Vec3::Zero();  ///< proximal joint -> distal joint [m]
  Mat3 inertia = Mat3::Zero();       ///< about the CoM [kg m^2]
  Mat3 fixed_rotation = Mat3::Identity();
};

/// A serial chain plus the base-frame conditions the recursions start from.
struct RobotModel {
  std::string name = "model";
  std::vector<LinkParams> links;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);          ///< base frame [m/s^2]
  Vec3 base_angular_velocity = Vec3::Zero();     ///< [rad/s]
  Vec3 base_angular_acceleration = Vec3::Zero(); ///< [rad/s^2]
  Vec3 base_linear_acceleration = Vec3::Zero();  ///< [m/s^2]

  int dof() const { return static_cast<int>(links.size()); }
};

/// Orthonormal rotation + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

/// Throws ModelError naming the first violated invariant. Checks masses,
/// inertia symmetry/positive-semidefiniteness, finiteness and rotation
/// orthonormality (1e-10 tolerances on R'R = I and det R = +1).
void validate_model(const RobotModel& model);

/// Desk-scale 6-link arm: segment lengths 0.40, 0.20, 0.20, 0.17, 0.17,
/// 0.126 m, masses 3.0, 0.5, 0.5, 0.5, 0.5, 0.4 kg, CoM at segment midpoints,
/// thin-rod inertia about the CoM padded with 1e-4 on the diagonal. Joint 1
/// turns about the base z axis, joints 2-4 about a common lateral axis,
/// joints 5 and 6 alternate. Gravity [0, 0, -9.81], base at rest.
RobotModel ur5_default();

/// Reads the flat key/value model format. Throws ModelError with line/field
/// context on parse failures and names the violated invariant on bad values.
RobotModel load_model(const std::string& path);

/// Writes the canonical serialized form (round-trips exactly through
/// load_model).
void save_model(const RobotModel& model, const std::string& path);

/// Pose of the last link's distal frame relative to the base.
Pose forward_kinematics(const RobotModel& model, const Vec& q);

}  // namespace armlab
