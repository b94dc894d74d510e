#pragma once

#include "mocap/skeleton.hpp"

#include <cctype>
#include <sstream>
#include <vector>

namespace mocap {
namespace detail {

struct Line {
  int number = 0;
  std::vector<std::string> tokens;
};

inline std::vector<Line> tokenize_lines(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (auto pos = raw.find('#'); pos != std::string::npos) raw.erase(pos);
    Line line;
    line.number = number;
    std::istringstream ls(raw);
    std::string tok;
    while (ls >> tok) line.tokens.push_back(tok);
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

[[noreturn]] inline void parse_fail(int line, const std::string& why) {
  throw ParseError("line " + std::to_string(line) + ": " + why);
}

inline double to_double(const std::string& tok, int line) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) parse_fail(line, "bad number '" + tok + "'");
    return v;
  } catch (const std::invalid_argument&) {
    parse_fail(line, "bad number '" + tok + "'");
  } catch (const std::out_of_range&) {
    parse_fail(line, "number out of range '" + tok + "'");
  }
}

inline Dof dof_from_token(std::string tok, int line) {
  for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (tok == "rx") return Dof::RX;
  if (tok == "ry") return Dof::RY;
  if (tok == "rz") return Dof::RZ;
  if (tok == "tx") return Dof::TX;
  if (tok == "ty") return Dof::TY;
  if (tok == "tz") return Dof::TZ;
  parse_fail(line, "unknown dof '" + tok + "'");
}

/// Axis matrix from three angles and an order string like "XYZ";
/// the first listed axis is applied first.
inline Mat3 axis_matrix(double ax, double ay, double az, const std::string& order,
                        AngleUnit unit, int line) {
  const double s = unit == AngleUnit::Degrees ? M_PI / 180.0 : 1.0;
  Mat3 r = Mat3::Identity();
  if (order.size() != 3) parse_fail(line, "axis order must name three axes");
  for (char c : order) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
      case 'X': r = axis_rotation(Dof::RX, ax * s) * r; break;
      case 'Y': r = axis_rotation(Dof::RY, ay * s) * r; break;
      case 'Z': r = axis_rotation(Dof::RZ, az * s) * r; break;
      default: parse_fail(line, std::string("unknown axis '") + c + "'");
    }
  }
  return r;
}

}  // namespace detail

/// Parses an Acclaim ASF document. Joint order follows the document:
/// the root first, then bones in :bonedata order.
inline SkeletonDefinition parse_asf(const std::string& text) {
  using namespace detail;
  const auto lines = tokenize_lines(text);

  SkeletonDefinition skel;
  Joint root;
  root.name = "root";
  root.parent = -1;
  skel.joints.push_back(root);
  skel.root_order = {Dof::TX, Dof::TY, Dof::TZ, Dof::RX, Dof::RY, Dof::RZ};

  enum class Section { None, Units, Root, Bonedata, Hierarchy };
  Section section = Section::None;
  Joint bone;
  bool in_bone = false;
  bool in_hierarchy_block = false;
  double root_axis_angles[3] = {0, 0, 0};
  std::string root_axis_order = "XYZ";
  int root_axis_line = 0;
  bool saw_hierarchy = false;

  for (const Line& line : lines) {
    const auto& t = line.tokens;
    if (t[0][0] == ':') {
      const std::string& key = t[0];
      if (key == ":units") section = Section::Units;
      else if (key == ":root") section = Section::Root;
      else if (key == ":bonedata") section = Section::Bonedata;
      else if (key == ":hierarchy") { section = Section::Hierarchy; saw_hierarchy = true; }
      else section = Section::None;  // :version, :name, :documentation, ...
      continue;
    }
    switch (section) {
      case Section::Units:
        if (t[0] == "angle" && t.size() >= 2)
          skel.angle_unit = t[1] == "rad" ? AngleUnit::Radians : AngleUnit::Degrees;
        break;
      case Section::Root:
        if (t[0] == "order") {
          skel.root_order.clear();
          for (std::size_t i = 1; i < t.size(); ++i)
            skel.root_order.push_back(dof_from_token(t[i], line.number));
        } else if (t[0] == "axis" && t.size() >= 2) {
          root_axis_order = t[1];
          root_axis_line = line.number;
        }
        break;
      case Section::Bonedata:
        if (t[0] == "begin") {
          bone = Joint{};
          in_bone = true;
        } else if (t[0] == "end") {
          if (!in_bone) parse_fail(line.number, "'end' outside a bone block");
          if (bone.name.empty()) parse_fail(line.number, "bone block missing a name");
          bone.parent = 0;  // provisional; :hierarchy overrides
          skel.joints.push_back(bone);
          in_bone = false;
        } else if (in_bone) {
          if (t[0] == "name" && t.size() >= 2) {
            bone.name = t[1];
          } else if (t[0] == "direction" && t.size() >= 4) {
            bone.direction = Vec3(to_double(t[1], line.number), to_double(t[2], line.number),
                                  to_double(t[3], line.number));
            const double n = bone.direction.norm();
            if (n > 0) bone.direction /= n;
          } else if (t[0] == "length" && t.size() >= 2) {
            bone.length = to_double(t[1], line.number);
            if (bone.length < 0) parse_fail(line.number, "negative bone length");
          } else if (t[0] == "axis" && t.size() >= 5) {
            bone.axis = axis_matrix(to_double(t[1], line.number), to_double(t[2], line.number),
                                    to_double(t[3], line.number), t[4], skel.angle_unit,
                                    line.number);
          } else if (t[0] == "dof") {
            for (std::size_t i = 1; i < t.size(); ++i)
              bone.dofs.push_back(dof_from_token(t[i], line.number));
          }
          // id / limits / bodymass / cofmass are ignored
        }
        break;
      case Section::Hierarchy:
        if (t[0] == "begin") {
          in_hierarchy_block = true;
        } else if (t[0] == "end") {
          in_hierarchy_block = false;
        } else if (in_hierarchy_block) {
          const int parent = skel.find_joint(t[0]);
          if (parent < 0) parse_fail(line.number, "hierarchy parent '" + t[0] + "' not declared");
          for (std::size_t i = 1; i < t.size(); ++i) {
            const int child = skel.find_joint(t[i]);
            if (child < 0) parse_fail(line.number, "hierarchy child '" + t[i] + "' not declared");
            if (parent >= child)
              parse_fail(line.number, "joint '" + t[i] + "' declared before its parent");
            skel.joints[child].parent = parent;
          }
        }
        break;
      default:
        break;
    }
  }
  if (in_bone) throw ParseError("unterminated bone block at end of document");
  if (!saw_hierarchy && skel.joints.size() > 1)
    throw ParseError("ASF document has bones but no :hierarchy section");

  skel.root_axis = detail::axis_matrix(root_axis_angles[0], root_axis_angles[1],
                                       root_axis_angles[2], root_axis_order, skel.angle_unit,
                                       root_axis_line);
  skel.validate();
  return skel;
}

/// Parses an AMC motion file against its skeleton, running forward
/// kinematics per frame. Frame numbers must be 1,2,3,... without gaps.
inline MotionSequence parse_amc(const std::string& text, const SkeletonDefinition& skel,
                                double frame_rate = 120.0) {
  using namespace detail;
  const auto lines = tokenize_lines(text);

  MotionSequence seq;
  seq.frame_rate = frame_rate;
  for (const Joint& j : skel.joints) {
    seq.joint_names.push_back(j.name);
    seq.joint_parents.push_back(j.parent);
  }

  std::vector<std::vector<double>> channels(skel.joints.size());
  std::vector<double> root_channels(skel.root_order.size(), 0.0);
  bool in_frame = false;
  int expected_frame = 1;

  auto flush_frame = [&]() {
    seq.frames.push_back(forward_kinematics(skel, channels, root_channels));
  };

  for (const Line& line : lines) {
    const auto& t = line.tokens;
    if (t[0][0] == ':') continue;  // :FULLY-SPECIFIED, :DEGREES, ...

    // a bare integer starts a new frame
    bool is_number = t.size() == 1;
    if (is_number)
      for (char c : t[0])
        if (!std::isdigit(static_cast<unsigned char>(c))) { is_number = false; break; }

    if (is_number) {
      const int frame = std::stoi(t[0]);
      if (in_frame) flush_frame();
      if (frame != expected_frame)
        parse_fail(line.number, "expected frame " + std::to_string(expected_frame) + ", got " +
                                    std::to_string(frame));
      ++expected_frame;
      in_frame = true;
      for (auto& c : channels) c.assign(c.size(), 0.0);
      for (std::size_t i = 0; i < skel.joints.size(); ++i)
        channels[i].assign(skel.joints[i].dofs.size(), 0.0);
      root_channels.assign(skel.root_order.size(), 0.0);
      continue;
    }

    if (!in_frame) parse_fail(line.number, "channel data before the first frame number");
    if (t[0] == "root") {
      if (t.size() - 1 != skel.root_order.size())
        parse_fail(line.number, "root expects " + std::to_string(skel.root_order.size()) +
                                    " channels, got " + std::to_string(t.size() - 1));
      for (std::size_t i = 1; i < t.size(); ++i)
        root_channels[i - 1] = to_double(t[i], line.number);
    } else {
      const int ji = skel.find_joint(t[0]);
      if (ji < 0) parse_fail(line.number, "joint '" + t[0] + "' not in the skeleton");
      if (t.size() - 1 != skel.joints[ji].dofs.size())
        parse_fail(line.number, "joint '" + t[0] + "' expects " +
                                    std::to_string(skel.joints[ji].dofs.size()) +
                                    " channels, got " + std::to_string(t.size() - 1));
      for (std::size_t i = 1; i < t.size(); ++i)
        channels[ji][i - 1] = to_double(t[i], line.number);
    }
  }
  if (in_frame) flush_frame();
  if (seq.frames.empty()) throw ParseError("AMC document contains no frames");
  return seq;
}

}  // namespace mocap
