#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "rascore/synth.hpp"

using namespace rascore;
namespace fs = std::filesystem;

TEST_CASE("generation is bit-identical for the same config") {
  SynthConfig cfg;
  cfg.hands = 3;
  cfg.feet = 2;
  cfg.noise_density = 0.002;
  const auto a = generate_synthetic(cfg);
  const auto b = generate_synthetic(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].patient_id == b[i].patient_id);
    CHECK(a[i].limb == b[i].limb);
    CHECK(a[i].image.data == b[i].image.data);
    CHECK(a[i].silhouette.data == b[i].silhouette.data);
    REQUIRE(a[i].joints.size() == b[i].joints.size());
    for (std::size_t j = 0; j < a[i].joints.size(); ++j) {
      CHECK(a[i].joints[j].label == b[i].joints[j].label);
      CHECK(a[i].joints[j].narrowing == b[i].joints[j].narrowing);
      CHECK(a[i].joints[j].erosion == b[i].joints[j].erosion);
      CHECK(a[i].joints[j].box.cx == b[i].joints[j].box.cx);
    }
  }
}

TEST_CASE("hands carry 10 joints, feet 6, sides alternate") {
  SynthConfig cfg;
  cfg.hands = 4;
  cfg.feet = 4;
  const auto s = generate_synthetic(cfg);
  REQUIRE(s.size() == 8);
  CHECK(s[0].limb == LimbKind::HandRight);
  CHECK(s[1].limb == LimbKind::HandLeft);
  CHECK(s[4].limb == LimbKind::FootRight);
  CHECK(s[5].limb == LimbKind::FootLeft);
  for (int i = 0; i < 4; ++i) {
    CHECK(s[i].joints.size() == 10);
    CHECK(s[4 + i].joints.size() == 6);
  }
  // Labels match the limb's applicable set, no duplicates.
  for (const auto& sample : s) {
    std::set<std::string> seen;
    for (const auto& j : sample.joints) {
      CHECK(joint_applicable(j.label, sample.limb));
      CHECK(seen.insert(j.label).second);
    }
  }
}

TEST_CASE("rendered joint-space width decreases linearly with narrowing") {
  SynthConfig cfg;
  cfg.hands = 12;
  cfg.feet = 12;
  for (const auto& sample : generate_synthetic(cfg))
    for (const auto& j : sample.joints) {
      CHECK(j.narrowing >= 0);
      CHECK(j.narrowing <= 4);
      CHECK(j.gap_px ==
            doctest::Approx(cfg.gap_base_px - j.narrowing * cfg.gap_step_px).epsilon(1e-12));
    }
}

TEST_CASE("truth boxes are valid and centered inside the silhouette") {
  SynthConfig cfg;
  cfg.hands = 4;
  cfg.feet = 4;
  for (const auto& sample : generate_synthetic(cfg))
    for (const auto& j : sample.joints) {
      CHECK_NOTHROW(j.box.validate());
      const int px = static_cast<int>(j.box.cx * sample.image.width);
      const int py = static_cast<int>(j.box.cy * sample.image.height);
      CHECK(sample.silhouette.at(px, py));
    }
}

TEST_CASE("erosion scores stay within the limb scale") {
  SynthConfig cfg;
  cfg.hands = 20;
  cfg.feet = 20;
  int max_hand = 0, max_foot = 0;
  for (const auto& sample : generate_synthetic(cfg))
    for (const auto& j : sample.joints) {
      CHECK(j.erosion >= 0);
      if (is_hand(sample.limb)) {
        CHECK(j.erosion <= 5);
        max_hand = std::max(max_hand, j.erosion);
      } else {
        CHECK(j.erosion <= 10);
        max_foot = std::max(max_foot, j.erosion);
      }
    }
  // Non-degenerate sampling: some damage shows up in a 40-image run.
  CHECK(max_hand > 0);
  CHECK(max_foot > 0);
}

TEST_CASE("negative images have empty silhouettes and no joints") {
  SynthConfig cfg;
  cfg.hands = 1;
  cfg.feet = 1;
  cfg.negatives = 2;
  const auto s = generate_synthetic(cfg);
  REQUIRE(s.size() == 4);
  for (std::size_t i = 2; i < 4; ++i) {
    CHECK(s[i].joints.empty());
    int on = 0;
    for (int y = 0; y < s[i].silhouette.height; ++y)
      for (int x = 0; x < s[i].silhouette.width; ++x) on += s[i].silhouette.at(x, y);
    CHECK(on == 0);
  }
}

TEST_CASE("speckle noise brightens background pixels") {
  SynthConfig quiet;
  quiet.hands = 1;
  quiet.feet = 0;
  SynthConfig noisy = quiet;
  noisy.noise_density = 0.01;
  const auto a = generate_synthetic(quiet);
  const auto b = generate_synthetic(noisy);
  int bright_a = 0, bright_b = 0;
  for (int y = 0; y < a[0].image.height; ++y)
    for (int x = 0; x < a[0].image.width; ++x)
      if (!a[0].silhouette.at(x, y)) {
        bright_a += a[0].image.at(x, y) > 0;
        bright_b += b[0].image.at(x, y) > 0;
      }
  CHECK(bright_a == 0);
  CHECK(bright_b > 50);
}

TEST_CASE("write_synthetic then read_synthetic round-trips the corpus") {
  const fs::path dir = fs::temp_directory_path() / "rascore_synth_rt";
  fs::remove_all(dir);
  SynthConfig cfg;
  cfg.hands = 2;
  cfg.feet = 2;
  cfg.negatives = 1;
  const auto orig = generate_synthetic(cfg);
  write_synthetic(orig, dir.string());
  const auto back = read_synthetic(dir.string());
  fs::remove_all(dir);
  REQUIRE(back.size() == orig.size());
  for (std::size_t i = 0; i < orig.size(); ++i) {
    CHECK(back[i].patient_id == orig[i].patient_id);
    CHECK(back[i].limb == orig[i].limb);
    CHECK(back[i].image.data == orig[i].image.data);
    CHECK(back[i].silhouette.data == orig[i].silhouette.data);
    REQUIRE(back[i].joints.size() == orig[i].joints.size());
    for (std::size_t j = 0; j < orig[i].joints.size(); ++j) {
      const auto& o = orig[i].joints[j];
      const auto& r = back[i].joints[j];
      CHECK(r.label == o.label);
      CHECK(r.joint_class == o.joint_class);
      CHECK(r.digit == o.digit);
      CHECK(r.narrowing == o.narrowing);
      CHECK(r.erosion == o.erosion);
      // boxes.csv stores six decimals.
      CHECK(std::abs(r.box.cx - o.box.cx) < 1e-6);
      CHECK(std::abs(r.box.w - o.box.w) < 1e-6);
    }
  }
}

TEST_CASE("record_of exposes the truth scores in dataset form") {
  SynthConfig cfg;
  cfg.hands = 1;
  cfg.feet = 0;
  const auto s = generate_synthetic(cfg);
  const auto rec = record_of(s[0]);
  CHECK(rec.patient_id == s[0].patient_id);
  CHECK(rec.limb == s[0].limb);
  REQUIRE(rec.joints.size() == s[0].joints.size());
  for (const auto& j : s[0].joints) {
    REQUIRE(rec.joints.count(j.label) == 1);
    CHECK(rec.joints.at(j.label).narrowing == j.narrowing);
    CHECK(rec.joints.at(j.label).erosion == j.erosion);
  }
}

TEST_CASE("config validation rejects gaps that would close below one pixel") {
  SynthConfig bad;
  bad.gap_base_px = 8.0;
  bad.gap_step_px = 2.0;  // 8 - 4*2 = 0
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}
