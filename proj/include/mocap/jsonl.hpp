#pragma once

#include "mocap/skeleton.hpp"

#include <json.hpp>

#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace mocap {

using json = nlohmann::json;

/// Line-delimited interchange format for position-only skeleton data.
/// One record per line: {"joints": [...], "fps": f, "frames": [[[x,y,z],...],...],
/// "parents": [...]?, "root_orientation": [[9 values],...]?, "label": "..."?}.
/// A leading record holding only "_config" is treated as a header and skipped.
inline std::vector<MotionSequence> load_jsonl(std::istream& in) {
  std::vector<MotionSequence> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (rec.contains("_config")) continue;

    MotionSequence seq;
    if (!rec.contains("joints") || !rec.contains("frames"))
      throw ParseError("line " + std::to_string(line_no) + ": record needs 'joints' and 'frames'");
    seq.joint_names = rec.at("joints").get<std::vector<std::string>>();
    seq.frame_rate = rec.value("fps", 120.0);
    if (seq.frame_rate <= 0)
      throw ParseError("line " + std::to_string(line_no) + ": fps must be positive");
    seq.label = rec.value("label", std::string());
    seq.source_id = rec.value("source_id", "jsonl:" + std::to_string(line_no));

    const std::size_t nj = seq.joint_names.size();
    if (rec.contains("parents")) {
      seq.joint_parents = rec.at("parents").get<std::vector<int>>();
      if (seq.joint_parents.size() != nj)
        throw ParseError("line " + std::to_string(line_no) + ": parents/joints length mismatch");
    } else {
      // no hierarchy given: assume a chain rooted at joint 0
      seq.joint_parents.resize(nj);
      for (std::size_t i = 0; i < nj; ++i) seq.joint_parents[i] = static_cast<int>(i) - 1;
    }

    const bool has_orient = rec.contains("root_orientation");
    seq.needs_alignment = !has_orient;

    const auto& frames = rec.at("frames");
    for (std::size_t fi = 0; fi < frames.size(); ++fi) {
      const auto& f = frames[fi];
      if (f.size() != nj)
        throw ParseError("line " + std::to_string(line_no) + ": frame " + std::to_string(fi + 1) +
                         " has " + std::to_string(f.size()) + " joints, expected " +
                         std::to_string(nj));
      PoseFrame pose;
      pose.joint_positions.resize(nj);
      for (std::size_t ji = 0; ji < nj; ++ji) {
        for (int d = 0; d < 3; ++d) {
          const double v = f[ji][d].get<double>();
          if (!std::isfinite(v))
            throw ParseError("line " + std::to_string(line_no) + ": non-finite coordinate at frame " +
                             std::to_string(fi + 1));
          pose.joint_positions[ji][d] = v;
        }
      }
      pose.root_position = pose.joint_positions[0];
      if (has_orient) {
        const auto& m = rec.at("root_orientation")[fi];
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) pose.root_orientation(r, c) = m[3 * r + c].get<double>();
      }
      seq.frames.push_back(std::move(pose));
    }
    if (seq.frames.empty())
      throw ParseError("line " + std::to_string(line_no) + ": record has no frames");
    out.push_back(std::move(seq));
  }
  return out;
}

inline json sequence_to_json(const MotionSequence& seq) {
  json rec;
  rec["joints"] = seq.joint_names;
  rec["parents"] = seq.joint_parents;
  rec["fps"] = seq.frame_rate;
  if (!seq.label.empty()) rec["label"] = seq.label;
  rec["source_id"] = seq.source_id;
  json frames = json::array();
  json orients = json::array();
  for (const PoseFrame& f : seq.frames) {
    json jf = json::array();
    for (const Vec3& p : f.joint_positions) jf.push_back({p.x(), p.y(), p.z()});
    frames.push_back(std::move(jf));
    json m = json::array();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m.push_back(f.root_orientation(r, c));
    orients.push_back(std::move(m));
  }
  rec["frames"] = std::move(frames);
  if (!seq.needs_alignment) rec["root_orientation"] = std::move(orients);
  return rec;
}

inline void save_jsonl(std::ostream& out, const std::vector<MotionSequence>& seqs,
                       const json& config = json()) {
  if (!config.is_null()) out << json{{"_config", config}}.dump() << "\n";
  for (const MotionSequence& s : seqs) out << sequence_to_json(s).dump() << "\n";
}

}  // namespace mocap
