#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "rascore/metrics.hpp"

using namespace rascore;

namespace {

// Independent balanced-accuracy tally straight from the definition.
double brute_ba(const std::vector<int>& truths, const std::vector<int>& preds, int classes,
                int tol) {
  double sum = 0.0;
  int used = 0;
  for (int c = 0; c < classes; ++c) {
    int n = 0, hit = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      if (truths[i] != c) continue;
      ++n;
      if (std::abs(preds[i] - truths[i]) <= tol) ++hit;
    }
    if (n == 0) continue;
    sum += static_cast<double>(hit) / n;
    ++used;
  }
  return sum / used;
}

}  // namespace

TEST_CASE("balanced accuracy matches a brute-force per-class tally") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const int classes = 2 + static_cast<int>(rng() % 10);
    const int n = 5 + static_cast<int>(rng() % 60);
    std::vector<int> t(n), p(n);
    for (int j = 0; j < n; ++j) {
      t[j] = static_cast<int>(rng() % classes);
      p[j] = static_cast<int>(rng() % classes);
    }
    const double exact = balanced_accuracy(confusion_matrix(t, p, classes));
    const double tol1 = tolerant_balanced_accuracy(t, p, classes, 1);
    CHECK(exact == doctest::Approx(brute_ba(t, p, classes, 0)).epsilon(1e-12));
    CHECK(tol1 == doctest::Approx(brute_ba(t, p, classes, 1)).epsilon(1e-12));
    CHECK(tol1 >= exact - 1e-12);
  }
}

TEST_CASE("confusion matrix counts land in (truth, pred) cells") {
  const auto cm = confusion_matrix({0, 0, 1, 2}, {0, 1, 1, 0}, 3);
  CHECK(cm.at(0, 0) == 1);
  CHECK(cm.at(0, 1) == 1);
  CHECK(cm.at(1, 1) == 1);
  CHECK(cm.at(2, 0) == 1);
  CHECK(cm.at(2, 2) == 0);
}

TEST_CASE("classes with no true samples are excluded from the mean") {
  // Truths only in classes 0 and 1; class 2 never appears.
  const auto cm = confusion_matrix({0, 0, 1, 1}, {0, 2, 1, 1}, 3);
  CHECK(balanced_accuracy(cm) == doctest::Approx((0.5 + 1.0) / 2).epsilon(1e-12));
}

TEST_CASE("balanced accuracy of an empty tally throws") {
  ConfusionMatrix cm(3);
  CHECK_THROWS_AS(balanced_accuracy(cm), InvalidInput);
  CHECK_THROWS_AS(confusion_matrix({0, 3}, {0, 0}, 3), InvalidInput);  // out of range
}

TEST_CASE("perfect and maximally wrong predictions bound the metric") {
  std::vector<int> t = {0, 1, 2, 0, 1, 2};
  CHECK(balanced_accuracy(confusion_matrix(t, t, 3)) == 1.0);
  std::vector<int> wrong = {1, 2, 0, 1, 2, 0};
  CHECK(balanced_accuracy(confusion_matrix(t, wrong, 3)) == 0.0);
}

TEST_CASE("aggregate_totals sums joints and checks ranges") {
  std::vector<JointScoreRow> rows = {
      {"MCP1", 2, 3}, {"PIP2", 1, 0}, {"Unidentified", 4, 5}};
  const auto sheet = aggregate_totals(rows, 5, 6);
  CHECK(sheet.total_narrowing == 7);
  CHECK(sheet.total_erosion == 8);
  CHECK(sheet.overall_total == 15);
  CHECK(sheet.joints.size() == 3);

  rows[0].narrowing = 5;  // out of range for 5 classes
  CHECK_THROWS_AS(aggregate_totals(rows, 5, 6), InvalidInput);
}

TEST_CASE("confusion CSV writer emits a classes x classes table") {
  const auto cm = confusion_matrix({0, 1, 1}, {0, 1, 0}, 2);
  const std::string path = "/tmp/rascore_cm_test.csv";
  write_confusion_csv(cm, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
  std::remove(path.c_str());
}
