#pragma once

#include <string>
#include <vector>

#include "rascore/image.hpp"

namespace rascore {

/// Rows = true class, columns = predicted class.
struct ConfusionMatrix {
  int classes = 0;
  std::vector<std::int64_t> counts;  // classes x classes

  explicit ConfusionMatrix(int c) : classes(c), counts(static_cast<std::size_t>(c) * c, 0) {
    if (c < 1) throw InvalidInput("ConfusionMatrix: class count < 1");
  }
  std::int64_t& at(int truth, int pred) { return counts[static_cast<std::size_t>(truth) * classes + pred]; }
  std::int64_t at(int truth, int pred) const { return counts[static_cast<std::size_t>(truth) * classes + pred]; }
};

ConfusionMatrix confusion_matrix(const std::vector<int>& truths, const std::vector<int>& preds,
                                 int classes);

/// Mean per-class recall; classes with no true samples are excluded
/// from the mean.
double balanced_accuracy(const ConfusionMatrix& cm);

/// Per-class recall counting |pred - truth| <= tol as correct.
double tolerant_balanced_accuracy(const std::vector<int>& truths, const std::vector<int>& preds,
                                  int classes, int tol = 1);

struct JointScoreRow {
  std::string joint_label;  // e.g. "MCP2", "Unidentified"
  int narrowing = 0;
  int erosion = 0;
};

struct ScoreSheet {
  std::vector<JointScoreRow> joints;
  int total_narrowing = 0;
  int total_erosion = 0;
  int overall_total = 0;
};

/// Sum per-joint scores into limb totals; overall = narrowing + erosion.
/// Scores must lie in [0, narrowing_classes) / [0, erosion_classes).
ScoreSheet aggregate_totals(const std::vector<JointScoreRow>& joints, int narrowing_classes,
                            int erosion_classes);

void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path);

}  // namespace rascore
