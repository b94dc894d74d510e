#pragma once

#include "mocap/skeleton.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace mocap {

struct FeatureConfig {
  std::vector<std::string> po_joints = {"head", "lhand", "rhand", "lfoot", "rfoot"};
  double td_offset_seconds = 0.3;
  bool include_nt = true;

  void validate() const {
    if (po_joints.empty()) throw std::invalid_argument("po_joints must not be empty");
    if (td_offset_seconds <= 0) throw std::invalid_argument("td_offset_seconds must be > 0");
  }

  // 3n coordinates each for PO and TD, plus the 3-D trajectory
  int dimension() const {
    return static_cast<int>(po_joints.size()) * 6 + (include_nt ? 3 : 0);
  }
};

struct FrameFeature {
  VecX po;
  VecX td;
  Vec3 nt = Vec3::Zero();
  bool has_nt = false;
  int frame_index = 0;  // 1-based

  VecX concat() const {
    VecX out(po.size() + td.size() + (has_nt ? 3 : 0));
    out.head(po.size()) = po;
    out.segment(po.size(), td.size()) = td;
    if (has_nt) out.tail(3) = nt;
    return out;
  }
};

struct NormalizedPose {
  std::vector<Vec3> joint_positions;  // root at origin, identity orientation, unit bones
};

/// Re-expresses a frame in root coordinates and rescales every bone to unit
/// length, walking the hierarchy outward so each bone keeps its direction.
inline NormalizedPose normalize_pose(const PoseFrame& frame, const std::vector<int>& parents,
                                     const std::vector<std::string>& names) {
  const std::size_t nj = frame.joint_positions.size();
  if (parents.size() != nj)
    throw std::invalid_argument("normalize_pose: parents/positions length mismatch");

  std::vector<Vec3> local(nj);
  const Mat3 rt = frame.root_orientation.transpose();
  for (std::size_t i = 0; i < nj; ++i)
    local[i] = rt * (frame.joint_positions[i] - frame.root_position);

  NormalizedPose out;
  out.joint_positions.resize(nj);
  for (std::size_t i = 0; i < nj; ++i) {
    const int p = parents[i];
    if (p < 0) {
      out.joint_positions[i] = Vec3::Zero();
      continue;
    }
    if (p >= static_cast<int>(i))
      throw std::invalid_argument("normalize_pose: joints are not in topological order");
    Vec3 bone = local[i] - local[p];
    const double len = bone.norm();
    if (len < 1e-12)
      throw std::invalid_argument("normalize_pose: zero-length bone at joint '" +
                                  (i < names.size() ? names[i] : std::to_string(i)) + "'");
    out.joint_positions[i] = out.joint_positions[p] + bone / len;
  }
  return out;
}

/// Kabsch / orthogonal Procrustes: the rotation R minimizing
/// sum ||R (p_i - pbar) - (q_i - qbar)||^2, with det(R) = +1.
inline Mat3 estimate_template_rotation(const std::vector<Vec3>& frame_points,
                                       const std::vector<Vec3>& template_points) {
  if (frame_points.size() != template_points.size() || frame_points.size() < 3)
    throw std::invalid_argument("estimate_template_rotation: need >= 3 matched points");
  const double n = static_cast<double>(frame_points.size());
  Vec3 pbar = Vec3::Zero(), qbar = Vec3::Zero();
  for (const Vec3& p : frame_points) pbar += p;
  for (const Vec3& q : template_points) qbar += q;
  pbar /= n;
  qbar /= n;

  Mat3 h = Mat3::Zero();
  double scale = 0;
  for (std::size_t i = 0; i < frame_points.size(); ++i) {
    const Vec3 p = frame_points[i] - pbar;
    const Vec3 q = template_points[i] - qbar;
    h += p * q.transpose();
    scale += p.squaredNorm() + q.squaredNorm();
  }
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (scale < 1e-18 || sv(1) < 1e-9 * std::max(1.0, sv(0)))
    throw std::invalid_argument(
        "estimate_template_rotation: degenerate (collinear or coincident) point set");

  Mat3 r = svd.matrixV() * svd.matrixU().transpose();
  if (r.determinant() < 0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1;  // flip the smallest singular direction
    r = svd.matrixV() * flip * svd.matrixU().transpose();
  }
  return r;
}

/// Concatenated 3-D coordinates of the selected joints, in config order.
inline VecX extract_po(const NormalizedPose& pose, const FeatureConfig& config,
                       const std::vector<std::string>& names) {
  VecX out(3 * config.po_joints.size());
  for (std::size_t k = 0; k < config.po_joints.size(); ++k) {
    int idx = -1;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == config.po_joints[k]) { idx = static_cast<int>(i); break; }
    if (idx < 0)
      throw std::invalid_argument("extract_po: joint '" + config.po_joints[k] +
                                  "' not in the sequence");
    out.segment<3>(3 * k) = pose.joint_positions[idx];
  }
  return out;
}

/// Temporal-difference features: the first m-1 frames copy PO verbatim,
/// later frames hold the unit-normalized difference to the frame m-1 steps
/// back. A displacement below 1e-12 yields the zero vector.
inline std::vector<VecX> extract_td(const std::vector<VecX>& po_seq, int m) {
  const int n = static_cast<int>(po_seq.size());
  if (n < 2) throw std::invalid_argument("extract_td: sequence shorter than 2 frames");
  if (m < 2) throw std::invalid_argument("extract_td: offset m must be >= 2");
  std::vector<VecX> out(po_seq.size());
  for (int i = 1; i <= n; ++i) {
    if (i < m) {
      out[i - 1] = po_seq[i - 1];
    } else {
      VecX diff = po_seq[i - 1] - po_seq[i - m];  // frame i-m+1, 1-based
      const double norm = diff.norm();
      out[i - 1] = norm < 1e-12 ? VecX::Zero(diff.size()).eval() : VecX(diff / norm);
    }
  }
  return out;
}

/// Root displacement from the first frame, in the first frame's root
/// coordinates, scaled per dimension to [-1, 1] by maximum magnitude.
inline std::vector<Vec3> extract_nt(const std::vector<Vec3>& root_positions,
                                    const Mat3& first_orientation) {
  if (root_positions.empty()) throw std::invalid_argument("extract_nt: empty sequence");
  const Mat3 rt = first_orientation.transpose();
  std::vector<Vec3> raw(root_positions.size());
  Vec3 max_abs = Vec3::Zero();
  for (std::size_t i = 0; i < root_positions.size(); ++i) {
    raw[i] = rt * (root_positions[i] - root_positions[0]);
    max_abs = max_abs.cwiseMax(raw[i].cwiseAbs());
  }
  // A dimension whose entire range is negligible against the overall
  // displacement carries only round-off; scaling it to [-1,1] would amplify
  // that noise, so it maps to zero instead.
  const double floor = 1e-9 * max_abs.maxCoeff();
  for (Vec3& v : raw)
    for (int d = 0; d < 3; ++d) v[d] = max_abs[d] > floor ? v[d] / max_abs[d] : 0.0;
  return raw;
}

/// The effective TD offset in frames: round(seconds * fps), clamped so the
/// second branch of the difference rule stays in range.
inline int td_frame_offset(double td_offset_seconds, double frame_rate, int num_frames) {
  int m = static_cast<int>(std::lround(td_offset_seconds * frame_rate));
  const int hi = std::max(2, num_frames - 1);
  return std::clamp(m, 2, hi);
}

struct FeatureSequence {
  std::string label;
  std::string source_id;
  std::vector<VecX> frames;  // concatenated [PO | TD | NT] per frame
};

/// Per-frame [PO | TD | NT] for one sequence. Sequences lacking stored root
/// orientations are aligned to `template_frame` (joint positions of a
/// designated reference pose) via the Procrustes rotation.
inline std::vector<FrameFeature> assemble_features(const MotionSequence& seq,
                                                   const FeatureConfig& config,
                                                   const PoseFrame* template_frame = nullptr) {
  config.validate();
  if (seq.frames.empty()) throw std::invalid_argument("assemble_features: empty sequence");

  const int n = static_cast<int>(seq.frames.size());

  // resolve per-frame root orientations
  std::vector<Mat3> orient(n);
  for (int i = 0; i < n; ++i) {
    if (seq.needs_alignment) {
      const PoseFrame& tpl = template_frame ? *template_frame : seq.frames.front();
      orient[i] =
          estimate_template_rotation(seq.frames[i].joint_positions, tpl.joint_positions)
              .transpose();
    } else {
      orient[i] = seq.frames[i].root_orientation;
    }
  }

  std::vector<VecX> po(n);
  for (int i = 0; i < n; ++i) {
    PoseFrame f = seq.frames[i];
    f.root_orientation = orient[i];
    po[i] = extract_po(normalize_pose(f, seq.joint_parents, seq.joint_names), config,
                       seq.joint_names);
  }

  std::vector<VecX> td;
  if (n >= 2) {
    const int m = td_frame_offset(config.td_offset_seconds, seq.frame_rate, n);
    td = extract_td(po, m);
  } else {
    td = po;  // single frame: the copy branch applies throughout
  }

  std::vector<Vec3> nt;
  if (config.include_nt) {
    std::vector<Vec3> roots(n);
    for (int i = 0; i < n; ++i) roots[i] = seq.frames[i].root_position;
    nt = extract_nt(roots, orient[0]);
  }

  std::vector<FrameFeature> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].po = po[i];
    out[i].td = td[i];
    out[i].has_nt = config.include_nt;
    if (config.include_nt) out[i].nt = nt[i];
    out[i].frame_index = i + 1;
  }
  return out;
}

inline FeatureSequence featurize_sequence(const MotionSequence& seq, const FeatureConfig& config,
                                          const PoseFrame* template_frame = nullptr) {
  FeatureSequence out;
  out.label = seq.label;
  out.source_id = seq.source_id;
  for (const FrameFeature& f : assemble_features(seq, config, template_frame))
    out.frames.push_back(f.concat());
  return out;
}

/// Featurizes a whole corpus. The first needs-alignment sequence's first
/// frame becomes the shared template; it is returned through
/// `template_out` (when non-null) so the model artifact can record it.
inline std::vector<FeatureSequence> featurize_all(const std::vector<MotionSequence>& seqs,
                                                  const FeatureConfig& config,
                                                  PoseFrame* template_out = nullptr) {
  const PoseFrame* tpl = nullptr;
  for (const MotionSequence& s : seqs) {
    if (s.needs_alignment) {
      tpl = &s.frames.front();
      break;
    }
  }
  if (tpl && template_out) *template_out = *tpl;
  std::vector<FeatureSequence> out;
  out.reserve(seqs.size());
  for (const MotionSequence& s : seqs) out.push_back(featurize_sequence(s, config, tpl));
  return out;
}

// ---- feature file I/O (JSONL, one record per sequence) ----

inline void save_features(std::ostream& out, const std::vector<FeatureSequence>& seqs,
                          const nlohmann::json& config = nlohmann::json()) {
  if (!config.is_null()) out << nlohmann::json{{"_config", config}}.dump() << "\n";
  for (const FeatureSequence& s : seqs) {
    nlohmann::json rec;
    rec["label"] = s.label;
    rec["source_id"] = s.source_id;
    nlohmann::json frames = nlohmann::json::array();
    for (const VecX& v : s.frames) {
      nlohmann::json row = nlohmann::json::array();
      for (int i = 0; i < v.size(); ++i) row.push_back(v[i]);
      frames.push_back(std::move(row));
    }
    rec["frames"] = std::move(frames);
    out << rec.dump() << "\n";
  }
}

inline std::vector<FeatureSequence> load_features(std::istream& in) {
  std::vector<FeatureSequence> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (rec.contains("_config")) continue;
    FeatureSequence s;
    s.label = rec.value("label", std::string());
    s.source_id = rec.value("source_id", std::string());
    for (const auto& row : rec.at("frames")) {
      VecX v(row.size());
      for (std::size_t i = 0; i < row.size(); ++i) v[i] = row[i].get<double>();
      s.frames.push_back(std::move(v));
    }
    if (s.frames.empty())
      throw ParseError("line " + std::to_string(line_no) + ": feature record has no frames");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace mocap
