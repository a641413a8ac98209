#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rascore/pipeline.hpp"

using namespace rascore;
namespace fs = std::filesystem;

namespace {

// Models with freshly initialized (untrained) parameters: enough to
// exercise the pipeline plumbing deterministically.
ModelBundle untrained_bundle(bool hand) {
  ModelBundle b;
  b.hand = hand;
  b.unet.spec = UNetSpec{48, 2, 4, {1, 3, 5}};
  b.unet.graph = build_unet(b.unet.spec);
  b.unet.params = init_params(b.unet.graph, 1);
  b.detector.spec = DetectorSpec::with_default_anchors();
  b.detector.graph = build_detector(b.detector.spec);
  b.detector.params = init_params(b.detector.graph, 2);
  b.detector.hand = hand;
  TrainedTrunk trunk;
  trunk.graph = build_scorer_trunk();
  trunk.params = init_params(trunk.graph, 3);
  for (auto& e : trunk.params.entries) e.frozen = true;
  trunk.hand = hand;
  b.narrowing = build_scorer(
      trunk, hand ? ScoreScale::narrowing_hand() : ScoreScale::narrowing_foot(), 4);
  b.erosion =
      build_scorer(trunk, hand ? ScoreScale::erosion_hand() : ScoreScale::erosion_foot(), 5);
  return b;
}

}  // namespace

TEST_CASE("preprocess geometry on a conforming 4:5 raw image") {
  GrayRaster raw(240, 300, 120);
  const auto pre = preprocess_image(raw, LimbKind::HandRight);
  CHECK(pre.scaled_w == 1200);
  CHECK(pre.scaled_h == 1500);
  CHECK(pre.off_x == 0);
  CHECK(pre.off_y == 0);
  CHECK(pre.padded_w == 1200);
  CHECK(pre.cropped_h == 1500 - 1500 / 7);
  CHECK(pre.unit.width == 1200);
  CHECK(pre.unit.height == pre.cropped_h);

  const auto foot = preprocess_image(raw, LimbKind::FootLeft);
  CHECK(foot.cropped_h == 1500 - 1500 / 4);
}

TEST_CASE("preprocess centers narrow content horizontally") {
  GrayRaster raw(100, 300, 90);  // aspect forces x padding
  const auto pre = preprocess_image(raw, LimbKind::HandLeft);
  CHECK(pre.scaled_w == 500);
  CHECK(pre.scaled_h == 1500);
  CHECK(pre.off_x == 350);
  CHECK(pre.off_y == 0);
}

TEST_CASE("map_box_raw_to_pre matches the geometry by hand") {
  GrayRaster raw(100, 300, 90);
  const auto pre = preprocess_image(raw, LimbKind::HandLeft);
  BBoxNorm box{0.5, 0.3, 0.2, 0.1};
  const auto out = map_box_raw_to_pre(pre, box);
  CHECK(out.cx == doctest::Approx((0.5 * 500 + 350) / 1200).epsilon(1e-12));
  CHECK(out.cy == doctest::Approx(0.3 * 1500 / pre.cropped_h).epsilon(1e-12));
  CHECK(out.w == doctest::Approx(0.2 * 500 / 1200).epsilon(1e-12));
  CHECK(out.h == doctest::Approx(0.1 * 1500 / pre.cropped_h).epsilon(1e-12));
}

TEST_CASE("transform_mask_raw_to_pre lands truth pixels where boxes map") {
  SynthConfig cfg;
  cfg.hands = 1;
  const auto s = generate_synthetic(cfg)[0];
  const auto pre = preprocess_image(s.image, s.limb);
  const auto mask = transform_mask_raw_to_pre(pre, s.silhouette);
  CHECK(mask.width == pre.unit.width);
  CHECK(mask.height == pre.unit.height);
  for (const auto& j : s.joints) {
    const auto b = map_box_raw_to_pre(pre, j.box);
    CHECK(mask.at(static_cast<int>(b.cx * mask.width), static_cast<int>(b.cy * mask.height)));
  }
}

TEST_CASE("extract_crop keeps constants and center values") {
  UnitRaster img(200, 200, 0.37);
  const auto crop = extract_crop(img, {0.5, 0.5, 0.2, 0.2});
  CHECK(crop.image.width == kCropSize);
  CHECK(crop.image.height == kCropSize);
  for (double v : crop.image.data) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));

  // A bright spot at the box center dominates the crop center.
  UnitRaster img2(200, 200, 0.0);
  for (int y = 95; y < 105; ++y)
    for (int x = 95; x < 105; ++x) img2.at(x, y) = 1.0;
  const auto c2 = extract_crop(img2, {0.5, 0.5, 0.2, 0.2});
  CHECK(c2.image.at(kCropSize / 2, kCropSize / 2) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(c2.image.at(0, 0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("run_pipeline rejects a bundle of the wrong limb type") {
  SynthConfig cfg;
  cfg.hands = 1;
  const auto s = generate_synthetic(cfg)[0];
  const auto bundle = untrained_bundle(false);  // foot models vs hand image
  CHECK_THROWS_AS(run_pipeline(s.image, s.limb, "x", bundle), InvalidInput);
}

TEST_CASE("run_pipeline produces a coherent report with untrained models") {
  SynthConfig cfg;
  cfg.hands = 1;
  const auto s = generate_synthetic(cfg)[0];
  const auto bundle = untrained_bundle(true);
  const auto rep = run_pipeline(s.image, s.limb, "P000-RH", bundle);
  CHECK(rep.image_id == "P000-RH");
  CHECK(rep.limb == s.limb);
  CHECK((rep.mask_provenance == "unet" || rep.mask_provenance == "fallback-entropy"));
  CHECK(rep.mask_coverage > 0.0);
  CHECK(rep.mask_coverage < 1.0);
  int total_n = 0, total_e = 0;
  for (const auto& j : rep.joints) {
    total_n += j.narrowing.score;
    total_e += j.erosion.score;
  }
  CHECK(rep.sheet.total_narrowing == total_n);
  CHECK(rep.sheet.total_erosion == total_e);
  CHECK(rep.sheet.overall_total == total_n + total_e);
  CHECK(!rep.timings_ms.empty());
}

TEST_CASE("identical inputs give identical reports in deterministic mode") {
  SynthConfig cfg;
  cfg.hands = 1;
  const auto s = generate_synthetic(cfg)[0];
  const auto bundle = untrained_bundle(true);
  PipelineOptions opts;
  opts.collect_timings = false;
  const auto a = run_pipeline(s.image, s.limb, "P000-RH", bundle, opts);
  const auto b = run_pipeline(s.image, s.limb, "P000-RH", bundle, opts);
  CHECK(a.mask_provenance == b.mask_provenance);
  CHECK(a.mask_coverage == b.mask_coverage);
  REQUIRE(a.joints.size() == b.joints.size());
  for (std::size_t i = 0; i < a.joints.size(); ++i) {
    CHECK(a.joints[i].detection.confidence == b.joints[i].detection.confidence);
    CHECK(a.joints[i].narrowing.ordinal == b.joints[i].narrowing.ordinal);
    CHECK(a.joints[i].erosion.ordinal == b.joints[i].erosion.ordinal);
  }
  CHECK(a.sheet.overall_total == b.sheet.overall_total);
}

TEST_CASE("write_report emits the full artifact set and a manifest") {
  const fs::path dir = fs::temp_directory_path() / "rascore_report_t";
  fs::remove_all(dir);
  SynthConfig cfg;
  cfg.hands = 1;
  const auto s = generate_synthetic(cfg)[0];
  const auto bundle = untrained_bundle(true);
  const auto rep = run_pipeline(s.image, s.limb, "P000-RH", bundle);
  const auto written = write_report(rep, s.image, dir.string());
  for (const auto& p : written) CHECK(fs::exists(p));
  const std::string base = (dir / "P000-RH").string();
  CHECK(fs::exists(base + "_scores.csv"));
  CHECK(fs::exists(base + "_detections.csv"));
  CHECK(fs::exists(base + "_totals.csv"));
  CHECK(fs::exists(base + "_annotated.png"));
  CHECK(fs::exists(base + "_manifest.txt"));

  // The manifest lists every written file.
  std::ifstream man(base + "_manifest.txt");
  std::string content((std::istreambuf_iterator<char>(man)), std::istreambuf_iterator<char>());
  for (const auto& p : written)
    if (p.find("_manifest") == std::string::npos)
      CHECK(content.find(fs::path(p).filename().string()) != std::string::npos);

  // The scores CSV carries the dataset schema header.
  std::ifstream scores(base + "_scores.csv");
  std::string header;
  std::getline(scores, header);
  CHECK(header.rfind("patient_id,limb,", 0) == 0);
  CHECK(header.find("MCP1_narrowing") != std::string::npos);
  CHECK(header.find("MTP5_erosion") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("training-sample builders honor limb filtering and sizes") {
  SynthConfig cfg;
  cfg.hands = 2;
  cfg.feet = 3;
  cfg.negatives = 1;
  const auto samples = generate_synthetic(cfg);

  const auto hand_masks = make_mask_samples(samples, true, 48);
  CHECK(hand_masks.size() == 3);  // 2 hands + 1 negative
  for (const auto& m : hand_masks) {
    CHECK(m.image.width == 48);
    CHECK(m.mask.height == 48);
  }

  const auto foot_dets = make_detector_samples(samples, false, 64);
  CHECK(foot_dets.size() == 3);
  for (const auto& d : foot_dets) {
    CHECK(d.image.width == 64);
    CHECK(d.boxes.size() == 6);
  }

  const auto pretext = make_pretext_samples(samples, true);
  CHECK(pretext.size() == 20);  // 2 hands x 10 joints
  int lower = 0;
  for (const auto& p : pretext) {
    CHECK(p.crop.image.width == kCropSize);
    lower += p.is_lower_row;
  }
  CHECK(lower == 10);  // MCP row

  const auto scores = make_score_samples(samples, ScoreScale::narrowing_foot());
  CHECK(scores.size() == 18);  // 3 feet x 6 joints
  for (const auto& sc : scores) {
    CHECK(sc.score >= 0);
    CHECK(sc.score < 5);
  }
}
