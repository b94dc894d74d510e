#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mocap/acclaim.hpp"
#include "mocap/jsonl.hpp"
#include "mocap/synth.hpp"

#include <random>
#include <sstream>

using namespace mocap;

namespace {

const char* kMinimalAsf = R"(:version 1.10
:name test
:units
  angle deg
:root
  order TX TY TZ RX RY RZ
  axis XYZ
  position 0 0 0
  orientation 0 0 0
:bonedata
  begin
    id 1
    name head
    direction 0 1 0
    length 2
    axis 0 0 0 XYZ
    dof rx ry rz
  end
:hierarchy
  begin
    root head
  end
)";

const char* kTwoFrameAmc = R"(:FULLY-SPECIFIED
:DEGREES
1
root 0 0 0 0 0 0
head 0 0 0
2
root 1 2 3 0 0 0
head 10 0 0
)";

}  // namespace

TEST_CASE("parse_asf minimal skeleton") {
  const auto skel = parse_asf(kMinimalAsf);
  REQUIRE(skel.joints.size() == 2);
  CHECK(skel.joints[0].name == "root");
  CHECK(skel.joints[1].name == "head");
  CHECK(skel.joints[1].parent == 0);
  CHECK(skel.joints[1].length == doctest::Approx(2.0));
  CHECK(skel.joints[1].direction.isApprox(Vec3(0, 1, 0), 1e-12));
  CHECK(skel.angle_unit == AngleUnit::Degrees);
}

TEST_CASE("parse_asf zero-length bone accepted") {
  std::string text = kMinimalAsf;
  text.replace(text.find("length 2"), 8, "length 0");
  const auto skel = parse_asf(text);
  CHECK(skel.joints[1].length == 0.0);
}

TEST_CASE("parse_asf undeclared parent rejected") {
  std::string text = kMinimalAsf;
  text.replace(text.find("root head"), 9, "neck head");
  CHECK_THROWS_AS(parse_asf(text), ParseError);
}

TEST_CASE("parse_asf determinism") {
  const auto a = parse_asf(kMinimalAsf);
  const auto b = parse_asf(kMinimalAsf);
  REQUIRE(a.joints.size() == b.joints.size());
  for (std::size_t i = 0; i < a.joints.size(); ++i) {
    CHECK(a.joints[i].name == b.joints[i].name);
    CHECK(a.joints[i].parent == b.joints[i].parent);
    CHECK(a.joints[i].direction == b.joints[i].direction);
  }
}

TEST_CASE("parse_amc two frames") {
  const auto skel = parse_asf(kMinimalAsf);
  const auto seq = parse_amc(kTwoFrameAmc, skel);
  REQUIRE(seq.frames.size() == 2);
  CHECK(seq.frame_rate == doctest::Approx(120.0));
  CHECK(seq.frames[0].joint_positions[1].isApprox(Vec3(0, 2, 0), 1e-12));
  // frame 2: root moved to (1,2,3), so the head shifts with it
  CHECK(seq.frames[1].root_position.isApprox(Vec3(1, 2, 3), 1e-12));
}

TEST_CASE("parse_amc unknown joint") {
  const auto skel = parse_asf(kMinimalAsf);
  std::string text = kTwoFrameAmc;
  text.replace(text.find("head 0 0 0"), 4, "hand");
  CHECK_THROWS_AS(parse_amc(text, skel), ParseError);
}

TEST_CASE("parse_amc empty body") {
  const auto skel = parse_asf(kMinimalAsf);
  CHECK_THROWS_AS(parse_amc(":FULLY-SPECIFIED\n:DEGREES\n", skel), ParseError);
}

TEST_CASE("parse_amc frame gap") {
  const auto skel = parse_asf(kMinimalAsf);
  std::string text = kTwoFrameAmc;
  text.replace(text.find("\n2\n"), 3, "\n3\n");
  CHECK_THROWS_AS(parse_amc(text, skel), ParseError);
}

TEST_CASE("parse_amc channel count mismatch") {
  const auto skel = parse_asf(kMinimalAsf);
  std::string text = kTwoFrameAmc;
  text.replace(text.find("head 0 0 0"), 10, "head 0 0");
  CHECK_THROWS_AS(parse_amc(text, skel), ParseError);
}

TEST_CASE("forward_kinematics identity pose") {
  const auto skel = parse_asf(kMinimalAsf);
  const auto pose = forward_kinematics(skel, {{}, {0, 0, 0}}, {0, 0, 0, 0, 0, 0});
  CHECK(pose.joint_positions[0].isApprox(Vec3::Zero(), 1e-12));
  CHECK(pose.joint_positions[1].isApprox(Vec3(0, 2, 0), 1e-12));
}

TEST_CASE("forward_kinematics rigid translation") {
  const auto skel = parse_asf(kMinimalAsf);
  const auto base = forward_kinematics(skel, {{}, {10, 20, 30}}, {0, 0, 0, 0, 0, 0});
  const auto moved = forward_kinematics(skel, {{}, {10, 20, 30}}, {1, 2, 3, 0, 0, 0});
  for (int j = 0; j < 2; ++j)
    CHECK(moved.joint_positions[j].isApprox(base.joint_positions[j] + Vec3(1, 2, 3), 1e-9));
}

TEST_CASE("forward_kinematics root rotated 90 degrees about z") {
  const auto skel = parse_asf(kMinimalAsf);
  const auto pose = forward_kinematics(skel, {{}, {0, 0, 0}}, {0, 0, 0, 0, 0, 90});
  // +y bone of length 2 rotates to -x
  CHECK(pose.joint_positions[1].isApprox(Vec3(-2, 0, 0), 1e-9));
}

TEST_CASE("forward_kinematics rigidity under root transforms") {
  const auto skel = parse_asf(kMinimalAsf);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(-180, 180), tr(-5, 5);
  for (int trial = 0; trial < 25; ++trial) {
    const std::vector<double> joint_angles = {ang(rng), ang(rng), ang(rng)};
    const double rx = ang(rng), ry = ang(rng), rz = ang(rng);
    const Vec3 t(tr(rng), tr(rng), tr(rng));

    const auto base = forward_kinematics(skel, {{}, joint_angles}, {0, 0, 0, 0, 0, 0});
    const auto moved =
        forward_kinematics(skel, {{}, joint_angles}, {t.x(), t.y(), t.z(), rx, ry, rz});

    const double d = M_PI / 180.0;
    const Mat3 r = (Eigen::AngleAxisd(rz * d, Vec3::UnitZ()) *
                    Eigen::AngleAxisd(ry * d, Vec3::UnitY()) *
                    Eigen::AngleAxisd(rx * d, Vec3::UnitX()))
                       .toRotationMatrix();
    for (int j = 0; j < 2; ++j)
      CHECK((moved.joint_positions[j] - (r * base.joint_positions[j] + t)).norm() < 1e-9);
  }
}

TEST_CASE("load_jsonl basic record") {
  std::istringstream in(
      R"({"joints":["a","b","c","d","e"],"fps":30,"label":"wave","frames":[)"
      R"([[0,0,0],[1,0,0],[2,0,0],[3,0,0],[4,0,0]],)"
      R"([[0,0,1],[1,0,1],[2,0,1],[3,0,1],[4,0,1]],)"
      R"([[0,0,2],[1,0,2],[2,0,2],[3,0,2],[4,0,2]]]})"
      "\n");
  const auto seqs = load_jsonl(in);
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].frames.size() == 3);
  CHECK(seqs[0].label == "wave");
  CHECK(seqs[0].needs_alignment);  // no root_orientation stored
}

TEST_CASE("load_jsonl NaN coordinate rejected with line number") {
  std::istringstream in(
      "\n"
      R"({"joints":["a"],"frames":[[[0,NaN,0]]]})"
      "\n");
  try {
    load_jsonl(in);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("load_jsonl inconsistent joint count rejected") {
  std::istringstream in(R"({"joints":["a","b"],"frames":[[[0,0,0],[1,1,1]],[[0,0,0]]]})" "\n");
  CHECK_THROWS_AS(load_jsonl(in), ParseError);
}

TEST_CASE("jsonl round trip keeps orientation flag") {
  const auto seqs = synth_generate(benchmark_config(3, 1));
  std::ostringstream out;
  save_jsonl(out, seqs);
  std::istringstream in(out.str());
  const auto back = load_jsonl(in);
  REQUIRE(back.size() == seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    CHECK_FALSE(back[i].needs_alignment);
    CHECK(back[i].frames.size() == seqs[i].frames.size());
    CHECK(back[i].label == seqs[i].label);
  }
}

TEST_CASE("synth_generate counts and balance") {
  SynthConfig config = benchmark_config(1, 3);
  config.class_specs.resize(2);
  const auto seqs = synth_generate(config);
  REQUIRE(seqs.size() == 6);
  int first = 0;
  for (const auto& s : seqs)
    if (s.label == config.class_specs[0].name) ++first;
  CHECK(first == 3);
}

TEST_CASE("synth_generate deterministic for a fixed seed") {
  const SynthConfig config = benchmark_config(42, 2);
  const auto a = synth_generate(config);
  const auto b = synth_generate(config);
  REQUIRE(a.size() == b.size());
  for (std::size_t s = 0; s < a.size(); ++s) {
    REQUIRE(a[s].frames.size() == b[s].frames.size());
    for (std::size_t f = 0; f < a[s].frames.size(); ++f)
      for (std::size_t j = 0; j < a[s].frames[f].joint_positions.size(); ++j)
        CHECK(a[s].frames[f].joint_positions[j] == b[s].frames[f].joint_positions[j]);
  }
}

TEST_CASE("synth_generate left circle stays on the configured radius") {
  SynthConfig config = benchmark_config(7, 1, /*noise_sigma=*/0.0);
  SynthClassSpec left;
  for (const auto& spec : config.class_specs)
    if (spec.trajectory == Trajectory::LeftCircle) left = spec;
  config.class_specs = {left};
  const auto seqs = synth_generate(config);
  REQUIRE(seqs.size() == 1);
  const Vec3 center(0, 0, left.radius);
  for (const auto& f : seqs[0].frames)
    CHECK(std::abs((f.root_position - center).norm() - left.radius) < 1e-9);
}
