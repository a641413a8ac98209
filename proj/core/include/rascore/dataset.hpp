#pragma once

#include <map>
#include <string>
#include <vector>

#include "rascore/image.hpp"
#include "rascore/ordinal.hpp"

namespace rascore {

/// Joint labels used in score CSVs, in column order. Hands use
/// PIP1-5 + MCP1-5, feet use PIP1 + MTP1-5.
const std::vector<std::string>& all_joint_labels();
std::vector<std::string> joint_labels_for(LimbKind limb);
bool joint_applicable(const std::string& label, LimbKind limb);

/// Scale governing one (limb, task, joint) cell.
ScoreScale scale_for(LimbKind limb, ScoreTask task);

struct JointScores {
  int narrowing = 0;
  int erosion = 0;

  bool operator==(const JointScores&) const = default;
};

struct DatasetRecord {
  std::string patient_id;
  LimbKind limb = LimbKind::HandLeft;
  std::string image_path;
  std::map<std::string, JointScores> joints;  // keyed by joint label
};

struct IngestResult {
  std::vector<DatasetRecord> records;
  std::vector<std::string> warnings;  // skipped rows etc.
};

/// Join images named {patient_id}-{LH|RH|LF|RF}.png with the score CSV
/// (header: patient_id,limb,<joint>_narrowing,<joint>_erosion...).
/// Rows without a matching image are skipped with a warning;
/// out-of-range scores and duplicate (patient, limb) pairs are errors.
IngestResult ingest_dataset(const std::string& image_dir, const std::string& scores_csv);

/// Parse a score CSV without the image join (image_path left empty).
std::vector<DatasetRecord> read_scores_csv(const std::string& scores_csv);

void write_scores_csv(const std::vector<DatasetRecord>& records, const std::string& path);

enum class SplitUnit { ByPatient, ByImage };

struct SplitConfig {
  double test_fraction = 0.10;
  double val_fraction = 0.10;  // of the remaining training portion
  std::uint64_t seed = 42;
  SplitUnit unit = SplitUnit::ByPatient;
};

struct DatasetSplit {
  std::vector<DatasetRecord> train, val, test;
};

/// Seeded shuffle of split units; the last test_fraction goes to test,
/// then val_fraction of the remainder to validation. ByPatient keeps
/// all limbs of a patient in one partition.
DatasetSplit split_dataset(const std::vector<DatasetRecord>& records, const SplitConfig& cfg);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace rascore
