#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <random>

#include "rascore/checkpoint.hpp"
#include "rascore/detect.hpp"

using namespace rascore;

TEST_CASE("box_iou on hand-computed cases") {
  BBoxNorm a{0.5, 0.5, 0.2, 0.2};
  CHECK(box_iou(a, a) == doctest::Approx(1.0));
  BBoxNorm b{0.9, 0.9, 0.1, 0.1};
  CHECK(box_iou(a, b) == 0.0);
  // Half-overlapping equal squares: inter 0.1x0.2, union 0.06.
  BBoxNorm c{0.6, 0.5, 0.2, 0.2};
  CHECK(box_iou(a, c) == doctest::Approx(0.02 / 0.06).epsilon(1e-12));
}

TEST_CASE("encode_box then decode_box is the identity") {
  DetectorSpec spec = DetectorSpec::with_default_anchors();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.05, 0.95);
  for (int i = 0; i < 100; ++i) {
    BBoxNorm box{d(rng), d(rng), 0.05 + 0.2 * d(rng), 0.05 + 0.2 * d(rng)};
    const int cx = std::min(spec.grid - 1, static_cast<int>(box.cx * spec.grid));
    const int cy = std::min(spec.grid - 1, static_cast<int>(box.cy * spec.grid));
    const int a = static_cast<int>(rng() % spec.anchors);
    Tensor raw({spec.head_channels(), spec.grid, spec.grid});
    encode_box(spec, box, cx, cy, a, raw.data.data());
    const BBoxNorm out = decode_box(spec, raw.data.data(), cx, cy, a);
    CHECK(out.cx == doctest::Approx(box.cx).epsilon(1e-9));
    CHECK(out.cy == doctest::Approx(box.cy).epsilon(1e-9));
    CHECK(out.w == doctest::Approx(box.w).epsilon(1e-9));
    CHECK(out.h == doctest::Approx(box.h).epsilon(1e-9));
  }
}

TEST_CASE("decoded boxes always satisfy the box invariants") {
  DetectorSpec spec = DetectorSpec::with_default_anchors();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-6, 6);
  Tensor raw({spec.head_channels(), spec.grid, spec.grid});
  for (int i = 0; i < 20; ++i) {
    for (auto& v : raw.data) v = d(rng);
    for (int y = 0; y < spec.grid; ++y)
      for (int x = 0; x < spec.grid; ++x)
        for (int a = 0; a < spec.anchors; ++a)
          CHECK_NOTHROW(decode_box(spec, raw.data.data(), x, y, a).validate());
  }
}

TEST_CASE("detector head geometry: 3 anchors x (5 + 2 classes) = 21 channels") {
  DetectorSpec spec = DetectorSpec::with_default_anchors();
  CHECK(spec.head_channels() == 21);
  const Graph g = build_detector(spec);
  CHECK(g.nodes.back().out_ch == 21);
}

TEST_CASE("expected joint counts per limb") {
  CHECK(expected_joint_count(LimbKind::HandLeft) == 10);
  CHECK(expected_joint_count(LimbKind::HandRight) == 10);
  CHECK(expected_joint_count(LimbKind::FootLeft) == 6);
  CHECK(expected_joint_count(LimbKind::FootRight) == 6);
}

namespace {

Detection det(double cx, double cy, JointClass c, double conf = 0.9) {
  return {{cx, cy, 0.08, 0.08}, c, conf};
}

// Well-formed right-hand layout: PIP row above MCP row, digits 1..5
// left to right for a right limb.
std::vector<Detection> right_hand_layout() {
  std::vector<Detection> d;
  for (int i = 0; i < 5; ++i) d.push_back(det(0.15 + 0.17 * i, 0.35, JointClass::PIP));
  for (int i = 0; i < 5; ++i) d.push_back(det(0.15 + 0.17 * i, 0.65, JointClass::MCP));
  return d;
}

std::string label_at(const std::vector<std::pair<Detection, JointIdentity>>& out, double cx,
                     double cy) {
  for (const auto& [d, id] : out)
    if (std::abs(d.bbox.cx - cx) < 1e-9 && std::abs(d.bbox.cy - cy) < 1e-9) return id.label();
  return "?";
}

}  // namespace

TEST_CASE("primary identification: class counts match the layout") {
  const auto dets = right_hand_layout();
  const auto out = identify_joints(dets, LimbKind::HandRight);
  CHECK(label_at(out, 0.15, 0.35) == "PIP1");
  CHECK(label_at(out, 0.83, 0.35) == "PIP5");
  CHECK(label_at(out, 0.15, 0.65) == "MCP1");
  CHECK(label_at(out, 0.49, 0.65) == "MCP3");
}

TEST_CASE("left limbs assign digits in descending cx order") {
  const auto out = identify_joints(right_hand_layout(), LimbKind::HandLeft);
  CHECK(label_at(out, 0.15, 0.35) == "PIP5");
  CHECK(label_at(out, 0.83, 0.35) == "PIP1");
  CHECK(label_at(out, 0.83, 0.65) == "MCP1");
}

TEST_CASE("backup identification reconstructs rows when classes are wrong") {
  auto dets = right_hand_layout();
  dets[2].joint_class = JointClass::MCP;  // corrupt one class: 4 PIP / 6 MCP
  const auto out = identify_joints(dets, LimbKind::HandRight);
  // Row geometry still resolves the identities.
  CHECK(label_at(out, 0.49, 0.35) == "PIP3");
  CHECK(label_at(out, 0.49, 0.65) == "MCP3");
}

TEST_CASE("foot backup: the smallest-cy detection is the great-toe PIP") {
  std::vector<Detection> dets;
  for (int i = 0; i < 5; ++i)
    dets.push_back(det(0.18 + 0.16 * i, 0.42 + 0.03 * i, JointClass::MTP));
  dets.push_back(det(0.18, 0.22, JointClass::MTP));  // wrong class on purpose
  const auto out = identify_joints(dets, LimbKind::FootRight);
  CHECK(label_at(out, 0.18, 0.22) == "PIP1");
  CHECK(label_at(out, 0.18, 0.42) == "MTP1");
  CHECK(label_at(out, 0.82, 0.54) == "MTP5");
}

TEST_CASE("shortfall leaves all detections unidentified") {
  auto dets = right_hand_layout();
  dets.resize(7);
  const auto out = identify_joints(dets, LimbKind::HandRight);
  for (const auto& [d, id] : out) {
    CHECK(!id.identified());
    CHECK(id.label() == "Unidentified");
  }
}

TEST_CASE("identification is invariant to the input order") {
  auto dets = right_hand_layout();
  auto shuffled = dets;
  std::mt19937_64 rng(9);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto a = identify_joints(dets, LimbKind::HandRight);
  const auto b = identify_joints(shuffled, LimbKind::HandRight);
  for (const auto& [d, id] : a) CHECK(label_at(b, d.bbox.cx, d.bbox.cy) == id.label());
}

TEST_CASE("detector checkpoints round-trip the spec and anchor priors") {
  DetectorSpec spec = DetectorSpec::with_default_anchors();
  TrainedDetector net;
  net.spec = spec;
  net.graph = build_detector(spec);
  net.params = init_params(net.graph, 77);
  net.seed = 77;
  net.hand = false;

  const std::string path = "/tmp/rascore_det_ckpt.txt";
  save_checkpoint(detector_to_checkpoint(net, "t"), path);
  const auto r = detector_from_checkpoint(load_checkpoint(path));
  std::remove(path.c_str());
  CHECK(r.spec.grid == spec.grid);
  CHECK(r.spec.anchors == spec.anchors);
  CHECK(r.spec.input_size == spec.input_size);
  CHECK(r.hand == false);
  REQUIRE(r.spec.anchor_priors.size() == spec.anchor_priors.size());
  for (std::size_t i = 0; i < spec.anchor_priors.size(); ++i) {
    CHECK(r.spec.anchor_priors[i].w == doctest::Approx(spec.anchor_priors[i].w));
    CHECK(r.spec.anchor_priors[i].h == doctest::Approx(spec.anchor_priors[i].h));
  }
  CHECK(r.params.entries.size() == net.params.entries.size());
}
