#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "rascore/dataset.hpp"
#include "rascore/image_io.hpp"

using namespace rascore;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

DatasetRecord make_record(const std::string& pid, LimbKind limb) {
  DatasetRecord r;
  r.patient_id = pid;
  r.limb = limb;
  int k = 0;
  for (const auto& label : joint_labels_for(limb)) r.joints[label] = {k % 5, ++k % 6};
  return r;
}

}  // namespace

TEST_CASE("joint label applicability per limb type") {
  CHECK(joint_labels_for(LimbKind::HandLeft).size() == 10);
  CHECK(joint_labels_for(LimbKind::FootRight).size() == 6);
  CHECK(joint_applicable("MCP3", LimbKind::HandLeft));
  CHECK(!joint_applicable("MCP3", LimbKind::FootLeft));
  CHECK(joint_applicable("PIP1", LimbKind::FootLeft));
  CHECK(!joint_applicable("PIP2", LimbKind::FootLeft));
  CHECK(!joint_applicable("MTP1", LimbKind::HandRight));
}

TEST_CASE("score scales per limb and task") {
  CHECK(scale_for(LimbKind::HandLeft, ScoreTask::Narrowing).classes == 5);
  CHECK(scale_for(LimbKind::FootLeft, ScoreTask::Narrowing).classes == 5);
  CHECK(scale_for(LimbKind::HandRight, ScoreTask::Erosion).classes == 6);
  CHECK(scale_for(LimbKind::FootRight, ScoreTask::Erosion).classes == 11);
}

TEST_CASE("score CSVs round-trip through write and read") {
  TempDir dir("rascore_ds1");
  const std::string csv = (dir.path / "scores.csv").string();
  std::vector<DatasetRecord> recs = {make_record("A1", LimbKind::HandLeft),
                                     make_record("A2", LimbKind::FootRight)};
  write_scores_csv(recs, csv);
  const auto back = read_scores_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].patient_id == "A1");
  CHECK(back[0].limb == LimbKind::HandLeft);
  CHECK(back[0].joints == recs[0].joints);
  CHECK(back[1].joints == recs[1].joints);
}

TEST_CASE("ingest joins images, warns on missing ones, rejects bad rows") {
  TempDir dir("rascore_ds2");
  const std::string img_dir = (dir.path / "images").string();
  fs::create_directories(img_dir);
  save_png(GrayRaster(8, 8, 100), img_dir + "/A1-LH.png");
  // A2-RF.png deliberately absent.

  const std::string csv = (dir.path / "scores.csv").string();
  write_scores_csv({make_record("A1", LimbKind::HandLeft), make_record("A2", LimbKind::FootRight)},
                   csv);
  const auto res = ingest_dataset(img_dir, csv);
  CHECK(res.records.size() == 1);
  CHECK(res.warnings.size() == 1);
  CHECK(res.records[0].image_path == img_dir + "/A1-LH.png");

  // Duplicate (patient, limb) is an error.
  write_scores_csv({make_record("A1", LimbKind::HandLeft), make_record("A1", LimbKind::HandLeft)},
                   csv);
  CHECK_THROWS_AS(ingest_dataset(img_dir, csv), InvalidInput);

  // Out-of-range score is an error.
  auto bad = make_record("A1", LimbKind::HandLeft);
  bad.joints["MCP1"].erosion = 6;  // hand erosion classes are 0..5
  write_scores_csv({bad}, csv);
  CHECK_THROWS_AS(ingest_dataset(img_dir, csv), InvalidInput);

  // A score in a non-applicable column is an error.
  auto wrong = make_record("A1", LimbKind::FootRight);
  wrong.joints["MCP1"] = {1, 1};
  write_scores_csv({wrong}, csv);
  CHECK_THROWS_AS(read_scores_csv(csv), InvalidInput);
}

TEST_CASE("seed-42 split of 100 patients gives 81/9/10 by patient") {
  std::vector<DatasetRecord> recs;
  for (int i = 0; i < 100; ++i) {
    char pid[8];
    std::snprintf(pid, sizeof pid, "P%03d", i);
    recs.push_back(make_record(pid, LimbKind::HandLeft));
  }
  SplitConfig cfg;  // defaults: 10% test, 10% val, seed 42, ByPatient
  const auto s = split_dataset(recs, cfg);
  CHECK(s.train.size() == 81);
  CHECK(s.val.size() == 9);
  CHECK(s.test.size() == 10);

  const auto again = split_dataset(recs, cfg);
  for (std::size_t i = 0; i < s.test.size(); ++i)
    CHECK(s.test[i].patient_id == again.test[i].patient_id);
}

TEST_CASE("ByPatient keeps all limbs of a patient together") {
  std::vector<DatasetRecord> recs;
  for (int i = 0; i < 40; ++i) {
    char pid[8];
    std::snprintf(pid, sizeof pid, "Q%03d", i);
    recs.push_back(make_record(pid, LimbKind::HandLeft));
    recs.push_back(make_record(pid, LimbKind::FootRight));
  }
  const auto s = split_dataset(recs, SplitConfig{});
  std::set<std::string> train_p, val_p, test_p;
  for (const auto& r : s.train) train_p.insert(r.patient_id);
  for (const auto& r : s.val) val_p.insert(r.patient_id);
  for (const auto& r : s.test) test_p.insert(r.patient_id);
  for (const auto& p : test_p) {
    CHECK(!train_p.count(p));
    CHECK(!val_p.count(p));
  }
  for (const auto& p : val_p) CHECK(!train_p.count(p));
  CHECK(s.train.size() + s.val.size() + s.test.size() == recs.size());
}

TEST_CASE("ByImage splits limbs of one patient independently") {
  std::vector<DatasetRecord> recs;
  for (int i = 0; i < 25; ++i) {
    char pid[8];
    std::snprintf(pid, sizeof pid, "R%03d", i);
    recs.push_back(make_record(pid, LimbKind::HandLeft));
    recs.push_back(make_record(pid, LimbKind::HandRight));
  }
  SplitConfig cfg;
  cfg.unit = SplitUnit::ByImage;
  const auto s = split_dataset(recs, cfg);
  CHECK(s.test.size() == 5);  // 10% of 50 images
  CHECK(s.val.size() == 4);   // 10% of the remaining 45, floored
  CHECK(s.train.size() == 41);
}

TEST_CASE("split rejects degenerate fractions") {
  SplitConfig cfg;
  cfg.test_fraction = 0.6;
  cfg.val_fraction = 0.5;
  CHECK_THROWS_AS(split_dataset({make_record("X", LimbKind::HandLeft)}, cfg), InvalidInput);
}
