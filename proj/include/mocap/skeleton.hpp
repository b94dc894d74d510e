#pragma once

#include "mocap/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mocap {

enum class AngleUnit { Degrees, Radians };

/// One degree-of-freedom channel of a joint, in the order the motion file
/// supplies values for it.
enum class Dof { RX, RY, RZ, TX, TY, TZ };

struct Joint {
  std::string name;
  int parent = -1;                 // -1 for the root
  Vec3 direction = Vec3::Zero();   // unit bone direction in parent space
  double length = 0.0;
  std::vector<Dof> dofs;
  Mat3 axis = Mat3::Identity();    // local coordinate frame of the joint
};

struct SkeletonDefinition {
  std::vector<Joint> joints;       // topological order, joints[0] is the root
  std::vector<Dof> root_order;     // channel order of the root line in AMC
  AngleUnit angle_unit = AngleUnit::Degrees;
  Mat3 root_axis = Mat3::Identity();

  int find_joint(const std::string& name) const {
    for (int i = 0; i < static_cast<int>(joints.size()); ++i)
      if (joints[i].name == name) return i;
    return -1;
  }

  void validate() const;
};

struct PoseFrame {
  std::vector<Vec3> joint_positions;  // world space, one per skeleton joint
  Vec3 root_position = Vec3::Zero();
  Mat3 root_orientation = Mat3::Identity();
};

struct MotionSequence {
  std::vector<PoseFrame> frames;
  double frame_rate = 120.0;
  std::string label;               // empty = unlabeled
  std::string source_id;
  std::vector<std::string> joint_names;
  std::vector<int> joint_parents;  // -1 for root
  bool needs_alignment = false;    // no stored root orientation; align via template

  std::size_t num_frames() const { return frames.size(); }
};

inline void SkeletonDefinition::validate() const {
  if (joints.empty()) throw ParseError("skeleton has no joints");
  int roots = 0;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const Joint& j = joints[i];
    if (j.parent < 0) {
      ++roots;
    } else if (j.parent >= static_cast<int>(i)) {
      throw ParseError("joint '" + j.name + "' appears before its parent");
    }
    if (j.length < 0.0) throw ParseError("joint '" + j.name + "' has negative length");
    if (j.length > 0.0 && std::abs(j.direction.norm() - 1.0) > 1e-9)
      throw ParseError("joint '" + j.name + "' direction is not unit length");
  }
  if (roots != 1) throw ParseError("skeleton must have exactly one root");
}

inline Mat3 axis_rotation(Dof axis, double angle) {
  Mat3 r;
  switch (axis) {
    case Dof::RX:
      r = Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix();
      break;
    case Dof::RY:
      r = Eigen::AngleAxisd(angle, Vec3::UnitY()).toRotationMatrix();
      break;
    case Dof::RZ:
      r = Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
      break;
    default:
      r.setIdentity();
  }
  return r;
}

/// Poses one frame by walking the hierarchy: each joint sits at
/// parent position + parent global rotation * (direction * length), with
/// joint-local rotations expressed in the joint's axis frame.
inline PoseFrame forward_kinematics(const SkeletonDefinition& skel,
                                    const std::vector<std::vector<double>>& channels,
                                    const std::vector<double>& root_channels) {
  const double to_rad = skel.angle_unit == AngleUnit::Degrees ? M_PI / 180.0 : 1.0;

  PoseFrame out;
  out.joint_positions.resize(skel.joints.size());

  Vec3 root_pos = Vec3::Zero();
  std::vector<double> root_angles;
  root_angles.reserve(3);
  std::vector<Dof> root_rot_order;
  std::size_t ci = 0;
  for (Dof d : skel.root_order) {
    const double v = root_channels.at(ci++);
    switch (d) {
      case Dof::TX: root_pos.x() = v; break;
      case Dof::TY: root_pos.y() = v; break;
      case Dof::TZ: root_pos.z() = v; break;
      default:
        root_rot_order.push_back(d);
        root_angles.push_back(v * to_rad);
    }
  }
  Mat3 root_rot = Mat3::Identity();
  for (std::size_t i = 0; i < root_rot_order.size(); ++i)
    root_rot = axis_rotation(root_rot_order[i], root_angles[i]) * root_rot;
  root_rot = skel.root_axis * root_rot * skel.root_axis.transpose();

  out.root_position = root_pos;
  out.root_orientation = root_rot;

  std::vector<Mat3> global_rot(skel.joints.size());
  for (std::size_t i = 0; i < skel.joints.size(); ++i) {
    const Joint& j = skel.joints[i];
    if (j.parent < 0) {
      global_rot[i] = root_rot;
      out.joint_positions[i] = root_pos;
      continue;
    }
    std::vector<double> angles(channels.at(i).size());
    for (std::size_t a = 0; a < angles.size(); ++a) angles[a] = channels[i][a] * to_rad;
    Mat3 local = Mat3::Identity();
    std::size_t ai = 0;
    for (Dof d : j.dofs) {
      if (d == Dof::RX || d == Dof::RY || d == Dof::RZ)
        local = axis_rotation(d, angles.at(ai)) * local;
      ++ai;
    }
    local = j.axis * local * j.axis.transpose();
    global_rot[i] = global_rot[j.parent] * local;
    out.joint_positions[i] =
        out.joint_positions[j.parent] + global_rot[i] * (j.direction * j.length);
  }
  return out;
}

}  // namespace mocap
