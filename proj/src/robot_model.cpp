#include "armlab/robot_model.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace armlab {
namespace {

constexpr double kRotationTol = 1e-10;
constexpr double kInertiaPad = 1e-4;

bool finite(const Vec3& v) { return v.allFinite(); }

void check_rotation(const Mat3& r, const std::string& what) {
  if (!r.allFinite()) throw ModelError(what + ": non-finite rotation");
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > kRotationTol)
    throw ModelError(what + ": rotation not orthonormal (|R'R - I| = " +
                     std::to_string(ortho) + ")");
  if (std::abs(r.determinant() - 1.0) > kRotationTol)
    throw ModelError(what + ": rotation determinant != +1");
}

/// Thin uniform rod of mass m and length len along unit direction u,
/// about its CoM, plus a small diagonal pad to keep the tensor PD.
Mat3 rod_inertia(double mass, double len, const Vec3& u) {
  const double i_perp = mass * len * len / 12.0;
  return i_perp * (Mat3::Identity() - u * u.transpose()) +
         kInertiaPad * Mat3::Identity();
}

struct Tokenized {
  int line_no;
  std::string key;
  std::vector<double> values;
};

std::vector<double> parse_numbers(const std::vector<std::string>& toks, int line_no,
                                  const std::string& key) {
  std::vector<double> out;
  for (size_t i = 1; i < toks.size(); ++i) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(toks[i], &pos));
      if (pos != toks[i].size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw ModelError("line " + std::to_string(line_no) + ": field '" + key +
                       "': cannot parse number '" + toks[i] + "'");
    }
  }
  return out;
}

void expect_count(const Tokenized& t, size_t n) {
  if (t.values.size() != n)
    throw ModelError("line " + std::to_string(t.line_no) + ": field '" + t.key +
                     "' expects " + std::to_string(n) + " numbers, got " +
                     std::to_string(t.values.size()));
}

Vec3 as_vec3(const Tokenized& t) {
  expect_count(t, 3);
  return Vec3(t.values[0], t.values[1], t.values[2]);
}

}  // namespace

void validate_model(const RobotModel& model) {
  if (model.links.empty()) throw ModelError("model: needs at least one link");
  if (!finite(model.gravity)) throw ModelError("model: gravity must be finite");
  if (!finite(model.base_angular_velocity) || !finite(model.base_angular_acceleration) ||
      !finite(model.base_linear_acceleration))
    throw ModelError("model: base motion must be finite");
  for (size_t i = 0; i < model.links.size(); ++i) {
    const LinkParams& link = model.links[i];
    const std::string what = "link " + std::to_string(i + 1);
    if (!(link.mass > 0.0)) throw ModelError(what + ": mass > 0 violated");
    if (!finite(link.com_offset)) throw ModelError(what + ": com_offset must be finite");
    if (!finite(link.joint_offset)) throw ModelError(what + ": joint_offset must be finite");
    if (!link.inertia.allFinite()) throw ModelError(what + ": inertia must be finite");
    if ((link.inertia - link.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw ModelError(what + ": inertia must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> es(link.inertia);
    if (es.eigenvalues().minCoeff() < -1e-12)
      throw ModelError(what + ": inertia must be positive semidefinite");
    check_rotation(link.fixed_rotation, what + ": fixed_rotation");
  }
}

RobotModel ur5_default() {
  const double lengths[6] = {0.40, 0.20, 0.20, 0.17, 0.17, 0.126};
  const double masses[6] = {3.0, 0.5, 0.5, 0.5, 0.5, 0.4};

  // Fixed rotations place joint 1 on the base z axis, joints 2-4 on a common
  // lateral axis and joints 5/6 alternating; at q = 0 the arm is a vertical
  // riser followed by a horizontal reach along base x.
  Mat3 fixed[6];
  fixed[0] = rot_x(-M_PI / 2.0);
  fixed[1] = Mat3::Identity();
  fixed[2] = Mat3::Identity();
  fixed[3] = rot_x(M_PI / 2.0);
  fixed[4] = rot_x(-M_PI / 2.0);
  fixed[5] = rot_x(M_PI / 2.0);

  // Segment direction expressed in the link's own frame: link 1 rises along
  // base z = -y of its frame; the rest extend along their local x.
  Vec3 dirs[6];
  dirs[0] = Vec3(0.0, -1.0, 0.0);
  for (int i = 1; i < 6; ++i) dirs[i] = Vec3(1.0, 0.0, 0.0);

  RobotModel model;
  model.name = "ur5_default";
  model.links.resize(6);
  for (int i = 0; i < 6; ++i) {
    LinkParams& link = model.links[i];
    link.mass = masses[i];
    link.joint_offset = lengths[i] * dirs[i];
    link.com_offset = 0.5 * link.joint_offset;
    link.inertia = rod_inertia(masses[i], lengths[i], dirs[i]);
    link.fixed_rotation = fixed[i];
  }
  validate_model(model);
  return model;
}

RobotModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file: " + path);

  RobotModel model;
  int declared_links = -1;
  int current_link = 0;  // 0 = global section, 1-based link index otherwise
  std::string line;
  int line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ss(line);
    std::vector<std::string> toks;
    for (std::string tok; ss >> tok;) toks.push_back(tok);
    if (toks.empty()) continue;

    const std::string& key = toks[0];
    if (key == "name") {
      if (toks.size() != 2)
        throw ModelError("line " + std::to_string(line_no) + ": name expects one token");
      model.name = toks[1];
      continue;
    }
    Tokenized t{line_no, key, parse_numbers(toks, line_no, key)};

    if (key == "links") {
      expect_count(t, 1);
      declared_links = static_cast<int>(t.values[0]);
      if (declared_links < 1)
        throw ModelError("line " + std::to_string(line_no) + ": links must be >= 1");
      model.links.resize(declared_links);
      continue;
    }
    if (key == "link") {
      expect_count(t, 1);
      current_link = static_cast<int>(t.values[0]);
      if (declared_links < 0)
        throw ModelError("line " + std::to_string(line_no) + ": 'links' count must precede link blocks");
      if (current_link < 1 || current_link > declared_links)
        throw ModelError("line " + std::to_string(line_no) + ": link index " +
                         std::to_string(current_link) + " out of range");
      continue;
    }

    if (current_link == 0) {
      if (key == "gravity") model.gravity = as_vec3(t);
      else if (key == "base_angular_velocity") model.base_angular_velocity = as_vec3(t);
      else if (key == "base_angular_acceleration") model.base_angular_acceleration = as_vec3(t);
      else if (key == "base_linear_acceleration") model.base_linear_acceleration = as_vec3(t);
      else
        throw ModelError("line " + std::to_string(line_no) + ": unknown global field '" + key + "'");
      continue;
    }

    LinkParams& link = model.links[current_link - 1];
    if (key == "mass") {
      expect_count(t, 1);
      link.mass = t.values[0];
    } else if (key == "com_offset") {
      link.com_offset = as_vec3(t);
    } else if (key == "joint_offset") {
      link.joint_offset = as_vec3(t);
    } else if (key == "inertia") {
      expect_count(t, 6);  // xx yy zz xy xz yz
      const auto& v = t.values;
      link.inertia << v[0], v[3], v[4], v[3], v[1], v[5], v[4], v[5], v[2];
    } else if (key == "fixed_rotation") {
      expect_count(t, 9);  // row-major
      const auto& v = t.values;
      link.fixed_rotation << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
    } else {
      throw ModelError("line " + std::to_string(line_no) + ": unknown link field '" + key + "'");
    }
  }

  validate_model(model);
  return model;
}

void save_model(const RobotModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write model file: " + path);
  out << std::setprecision(17);

  auto put3 = [&out](const char* key, const Vec3& v) {
    out << key << ' ' << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  };

  out << "name " << model.name << '\n';
  out << "links " << model.links.size() << '\n';
  put3("gravity", model.gravity);
  put3("base_angular_velocity", model.base_angular_velocity);
  put3("base_angular_acceleration", model.base_angular_acceleration);
  put3("base_linear_acceleration", model.base_linear_acceleration);

  for (size_t i = 0; i < model.links.size(); ++i) {
    const LinkParams& link = model.links[i];
    out << "\nlink " << (i + 1) << '\n';
    out << "mass " << link.mass << '\n';
    put3("com_offset", link.com_offset);
    put3("joint_offset", link.joint_offset);
    const Mat3& in = link.inertia;
    out << "inertia " << in(0, 0) << ' ' << in(1, 1) << ' ' << in(2, 2) << ' '
        << in(0, 1) << ' ' << in(0, 2) << ' ' << in(1, 2) << '\n';
    out << "fixed_rotation";
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out << ' ' << link.fixed_rotation(r, c);
    out << '\n';
  }
}

Pose forward_kinematics(const RobotModel& model, const Vec& q) {
  if (q.size() != model.dof())
    throw std::invalid_argument("forward_kinematics: q has wrong length");
  Pose pose;
  for (int i = 0; i < model.dof(); ++i) {
    const Mat3 r = rot_z(q[i]) * model.links[i].fixed_rotation;
    pose.rotation = pose.rotation * r;
    pose.translation += pose.rotation * model.links[i].joint_offset;
  }
  return pose;
}

}  // namespace armlab
