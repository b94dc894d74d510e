#pragma once

#include "mocap/skeleton.hpp"

#include <json.hpp>

#include <random>
#include <string>
#include <vector>

namespace mocap {

enum class Trajectory { Straight, LeftCircle, RightCircle };

inline Trajectory trajectory_from_string(const std::string& s) {
  if (s == "straight") return Trajectory::Straight;
  if (s == "left-circle") return Trajectory::LeftCircle;
  if (s == "right-circle") return Trajectory::RightCircle;
  throw ParseError("unknown trajectory kind '" + s + "'");
}

inline std::string to_string(Trajectory t) {
  switch (t) {
    case Trajectory::Straight: return "straight";
    case Trajectory::LeftCircle: return "left-circle";
    case Trajectory::RightCircle: return "right-circle";
  }
  return "straight";
}

/// Per-class motion recipe: one sinusoid per limb joint, a root trajectory.
struct SynthClassSpec {
  std::string name;
  std::vector<double> freq;   // Hz, one per limb joint
  std::vector<double> amp;    // skeleton units
  std::vector<double> phase;  // radians
  Trajectory trajectory = Trajectory::Straight;
  double radius = 2.0;        // circle trajectories only
};

struct SynthConfig {
  std::vector<SynthClassSpec> class_specs;
  int sequences_per_class = 10;
  int frames_min = 40;
  int frames_max = 70;
  double noise_sigma = 0.0;
  double fps = 30.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (class_specs.empty()) throw ParseError("synth config needs at least one class");
    if (sequences_per_class < 1) throw ParseError("sequences_per_class must be >= 1");
    if (frames_min < 2) throw ParseError("frames_min must be >= 2");
    if (frames_max < frames_min) throw ParseError("frames_max must be >= frames_min");
    if (noise_sigma < 0) throw ParseError("noise_sigma must be >= 0");
    if (fps <= 0) throw ParseError("fps must be positive");
  }
};

namespace synth_detail {

// The generated skeleton: a star of five end-effectors around the root.
inline const std::vector<std::string>& joint_names() {
  static const std::vector<std::string> names = {"root",  "head",  "lhand",
                                                 "rhand", "lfoot", "rfoot"};
  return names;
}

inline const std::vector<Vec3>& base_offsets() {
  static const std::vector<Vec3> offsets = {
      Vec3(0, 0, 0),        Vec3(0, 1.0, 0),      Vec3(-0.2, 0.6, -0.7),
      Vec3(-0.2, 0.6, 0.7), Vec3(0.1, -1.0, -0.3), Vec3(0.1, -1.0, 0.3)};
  return offsets;
}

inline const std::vector<Vec3>& osc_directions() {
  static const std::vector<Vec3> dirs = {Vec3(0, 0, 0),  Vec3(0, 0, 1), Vec3(1, 0, 0),
                                         Vec3(1, 0, 0), Vec3(1, 0, 0), Vec3(1, 0, 0)};
  return dirs;
}

struct RootState {
  Vec3 position;
  Mat3 orientation;
};

inline RootState root_at(Trajectory traj, double radius, double t) {
  const double speed = 1.0;        // straight-line speed, units/s
  const double omega = 1.2;        // circle angular speed, rad/s
  RootState out;
  switch (traj) {
    case Trajectory::Straight:
      out.position = Vec3(speed * t, 0, 0);
      out.orientation = Mat3::Identity();
      break;
    case Trajectory::LeftCircle: {
      const double th = omega * t;
      out.position = Vec3(radius * std::sin(th), 0, radius * (1 - std::cos(th)));
      out.orientation = Eigen::AngleAxisd(-th, Vec3::UnitY()).toRotationMatrix();
      break;
    }
    case Trajectory::RightCircle: {
      const double th = omega * t;
      out.position = Vec3(radius * std::sin(th), 0, -radius * (1 - std::cos(th)));
      out.orientation = Eigen::AngleAxisd(th, Vec3::UnitY()).toRotationMatrix();
      break;
    }
  }
  return out;
}

inline double class_param(const std::vector<double>& v, std::size_t limb, double fallback) {
  if (v.empty()) return fallback;
  return v[limb % v.size()];
}

}  // namespace synth_detail

/// Deterministic labeled gesture generator. Limb joints oscillate
/// sinusoidally in the root's local frame while the root follows its
/// trajectory, so two classes sharing limb parameters but opposite circle
/// directions have matching local poses and mirrored trajectories.
inline std::vector<MotionSequence> synth_generate(const SynthConfig& config) {
  using namespace synth_detail;
  config.validate();

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> frame_count(config.frames_min, config.frames_max);
  std::normal_distribution<double> noise(0.0, 1.0);

  const auto& names = joint_names();
  const auto& base = base_offsets();
  const auto& osc = osc_directions();
  const std::size_t nj = names.size();

  std::vector<MotionSequence> out;
  for (const SynthClassSpec& spec : config.class_specs) {
    for (int s = 0; s < config.sequences_per_class; ++s) {
      MotionSequence seq;
      seq.joint_names = names;
      seq.joint_parents.assign(nj, 0);
      seq.joint_parents[0] = -1;
      seq.frame_rate = config.fps;
      seq.label = spec.name;
      seq.source_id = spec.name + "_" + std::to_string(s);

      const int n = frame_count(rng);
      seq.frames.reserve(n);
      for (int f = 0; f < n; ++f) {
        const double t = f / config.fps;
        const RootState root = root_at(spec.trajectory, spec.radius, t);
        PoseFrame pose;
        pose.root_position = root.position;
        pose.root_orientation = root.orientation;
        pose.joint_positions.resize(nj);
        pose.joint_positions[0] = root.position;
        for (std::size_t j = 1; j < nj; ++j) {
          const double fr = class_param(spec.freq, j - 1, 1.0);
          const double am = class_param(spec.amp, j - 1, 0.3);
          const double ph = class_param(spec.phase, j - 1, 0.0);
          Vec3 local = base[j] + am * std::sin(2 * M_PI * fr * t + ph) * osc[j];
          if (config.noise_sigma > 0)
            local += config.noise_sigma * Vec3(noise(rng), noise(rng), noise(rng));
          pose.joint_positions[j] = root.position + root.orientation * local;
        }
        seq.frames.push_back(std::move(pose));
      }
      out.push_back(std::move(seq));
    }
  }
  return out;
}

inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.sequences_per_class = j.value("sequences_per_class", 10);
  c.frames_min = j.value("frames_min", 40);
  c.frames_max = j.value("frames_max", 70);
  c.noise_sigma = j.value("noise_sigma", 0.0);
  c.fps = j.value("fps", 30.0);
  c.seed = j.value("seed", 0ull);
  if (!j.contains("class")) throw ParseError("synth config needs [[class]] entries");
  for (const auto& cj : j.at("class")) {
    SynthClassSpec spec;
    spec.name = cj.at("name").get<std::string>();
    spec.trajectory = trajectory_from_string(cj.value("trajectory", "straight"));
    spec.radius = cj.value("radius", 2.0);
    if (cj.contains("freq")) spec.freq = cj.at("freq").get<std::vector<double>>();
    if (cj.contains("amp")) spec.amp = cj.at("amp").get<std::vector<double>>();
    if (cj.contains("phase")) spec.phase = cj.at("phase").get<std::vector<double>>();
    c.class_specs.push_back(std::move(spec));
  }
  c.validate();
  return c;
}

inline nlohmann::json synth_config_to_json(const SynthConfig& c) {
  nlohmann::json j;
  j["sequences_per_class"] = c.sequences_per_class;
  j["frames_min"] = c.frames_min;
  j["frames_max"] = c.frames_max;
  j["noise_sigma"] = c.noise_sigma;
  j["fps"] = c.fps;
  j["seed"] = c.seed;
  j["class"] = nlohmann::json::array();
  for (const auto& s : c.class_specs) {
    nlohmann::json cj;
    cj["name"] = s.name;
    cj["trajectory"] = to_string(s.trajectory);
    cj["radius"] = s.radius;
    cj["freq"] = s.freq;
    cj["amp"] = s.amp;
    cj["phase"] = s.phase;
    j["class"].push_back(std::move(cj));
  }
  return j;
}

/// The six-class benchmark used by the synthetic evaluation: four straight
/// walkers with distinct limb signatures plus a left/right circle pair with
/// identical limb motion.
inline SynthConfig benchmark_config(std::uint64_t seed, int sequences_per_class,
                                    double noise_sigma = 0.05) {
  SynthConfig c;
  c.seed = seed;
  c.sequences_per_class = sequences_per_class;
  c.frames_min = 40;
  c.frames_max = 70;
  c.noise_sigma = noise_sigma;
  c.fps = 30.0;

  auto cls = [](std::string name, std::vector<double> freq, std::vector<double> amp,
                std::vector<double> phase, Trajectory traj) {
    SynthClassSpec s;
    s.name = std::move(name);
    s.freq = std::move(freq);
    s.amp = std::move(amp);
    s.phase = std::move(phase);
    s.trajectory = traj;
    s.radius = 2.0;
    return s;
  };
  c.class_specs = {
      cls("waveBoth", {0.5, 1.5, 1.5, 0.8, 0.8}, {0.1, 0.45, 0.45, 0.1, 0.1},
          {0, 0, M_PI, 0, M_PI}, Trajectory::Straight),
      cls("punchAlt", {0.3, 2.2, 2.2, 0.5, 0.5}, {0.05, 0.5, 0.5, 0.05, 0.05},
          {0, 0, M_PI / 2, 0, 0}, Trajectory::Straight),
      cls("stomp", {0.4, 0.6, 0.6, 1.8, 1.8}, {0.05, 0.1, 0.1, 0.4, 0.4},
          {0, 0, 0, 0, M_PI}, Trajectory::Straight),
      cls("nodWalk", {1.6, 0.9, 0.9, 0.9, 0.9}, {0.35, 0.15, 0.15, 0.25, 0.25},
          {0, 0, M_PI, M_PI, 0}, Trajectory::Straight),
      cls("jogLeftCircle", {0.7, 1.2, 1.2, 1.2, 1.2}, {0.1, 0.3, 0.3, 0.3, 0.3},
          {0, 0, M_PI, M_PI, 0}, Trajectory::LeftCircle),
      cls("jogRightCircle", {0.7, 1.2, 1.2, 1.2, 1.2}, {0.1, 0.3, 0.3, 0.3, 0.3},
          {0, 0, M_PI, M_PI, 0}, Trajectory::RightCircle),
  };
  return c;
}

}  // namespace mocap
