#include "rascore/metrics.hpp"

#include <cmath>
#include <fstream>

namespace rascore {

ConfusionMatrix confusion_matrix(const std::vector<int>& truths, const std::vector<int>& preds,
                                 int classes) {
  if (truths.size() != preds.size()) throw InvalidInput("confusion_matrix: length mismatch");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (truths[i] < 0 || truths[i] >= classes || preds[i] < 0 || preds[i] >= classes)
      throw InvalidInput("confusion_matrix: class out of range");
    ++cm.at(truths[i], preds[i]);
  }
  return cm;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
  double sum = 0.0;
  int nonempty = 0;
  for (int i = 0; i < cm.classes; ++i) {
    std::int64_t row = 0;
    for (int j = 0; j < cm.classes; ++j) row += cm.at(i, j);
    if (row == 0) continue;
    sum += static_cast<double>(cm.at(i, i)) / static_cast<double>(row);
    ++nonempty;
  }
  if (nonempty == 0) throw InvalidInput("balanced_accuracy: all classes empty");
  return sum / nonempty;
}

double tolerant_balanced_accuracy(const std::vector<int>& truths, const std::vector<int>& preds,
                                  int classes, int tol) {
  if (truths.size() != preds.size()) throw InvalidInput("tolerant_balanced_accuracy: length mismatch");
  std::vector<std::int64_t> total(classes, 0), correct(classes, 0);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (truths[i] < 0 || truths[i] >= classes || preds[i] < 0 || preds[i] >= classes)
      throw InvalidInput("tolerant_balanced_accuracy: class out of range");
    ++total[truths[i]];
    if (std::abs(truths[i] - preds[i]) <= tol) ++correct[truths[i]];
  }
  double sum = 0.0;
  int nonempty = 0;
  for (int c = 0; c < classes; ++c) {
    if (total[c] == 0) continue;
    sum += static_cast<double>(correct[c]) / static_cast<double>(total[c]);
    ++nonempty;
  }
  if (nonempty == 0) throw InvalidInput("tolerant_balanced_accuracy: all classes empty");
  return sum / nonempty;
}

ScoreSheet aggregate_totals(const std::vector<JointScoreRow>& joints, int narrowing_classes,
                            int erosion_classes) {
  ScoreSheet sheet;
  sheet.joints = joints;
  for (const auto& j : joints) {
    if (j.narrowing < 0 || j.narrowing >= narrowing_classes)
      throw InvalidInput("aggregate_totals: narrowing score out of range for " + j.joint_label);
    if (j.erosion < 0 || j.erosion >= erosion_classes)
      throw InvalidInput("aggregate_totals: erosion score out of range for " + j.joint_label);
    sheet.total_narrowing += j.narrowing;
    sheet.total_erosion += j.erosion;
  }
  sheet.overall_total = sheet.total_narrowing + sheet.total_erosion;
  return sheet;
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput(path + ": unwritable");
  out << "true\\pred";
  for (int j = 0; j < cm.classes; ++j) out << "," << j;
  out << "\n";
  for (int i = 0; i < cm.classes; ++i) {
    out << i;
    for (int j = 0; j < cm.classes; ++j) out << "," << cm.at(i, j);
    out << "\n";
  }
}

}  // namespace rascore
