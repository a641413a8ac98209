#include "rascore/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace rascore {

const std::vector<std::string>& all_joint_labels() {
  static const std::vector<std::string> labels = {
      "PIP1", "PIP2", "PIP3", "PIP4", "PIP5", "MCP1", "MCP2", "MCP3",
      "MCP4", "MCP5", "MTP1", "MTP2", "MTP3", "MTP4", "MTP5"};
  return labels;
}

std::vector<std::string> joint_labels_for(LimbKind limb) {
  std::vector<std::string> out;
  for (const auto& l : all_joint_labels())
    if (joint_applicable(l, limb)) out.push_back(l);
  return out;
}

bool joint_applicable(const std::string& label, LimbKind limb) {
  if (label.size() != 4) return false;
  const std::string cls = label.substr(0, 3);
  if (is_hand(limb)) return cls == "PIP" || cls == "MCP";
  // Feet: MTP1-5 plus the great-toe interphalangeal joint, tagged PIP1.
  return cls == "MTP" || label == "PIP1";
}

ScoreScale scale_for(LimbKind limb, ScoreTask task) {
  if (task == ScoreTask::Narrowing)
    return is_hand(limb) ? ScoreScale::narrowing_hand() : ScoreScale::narrowing_foot();
  return is_hand(limb) ? ScoreScale::erosion_hand() : ScoreScale::erosion_foot();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> schema_header() {
  std::vector<std::string> h = {"patient_id", "limb"};
  for (const auto& j : all_joint_labels()) {
    h.push_back(j + "_narrowing");
    h.push_back(j + "_erosion");
  }
  return h;
}

}  // namespace

namespace {

// Shared CSV parse; image_dir empty = no join (read_scores_csv).
IngestResult parse_scores(const std::string& image_dir, const std::string& scores_csv) {
  namespace fs = std::filesystem;
  std::ifstream in(scores_csv);
  if (!in) throw InvalidInput("ingest_dataset: cannot open " + scores_csv);

  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("ingest_dataset: empty CSV");
  const auto expect = schema_header();
  auto header = split_csv_line(trim(line));
  if (header != expect) throw InvalidInput("ingest_dataset: CSV header does not match schema");

  IngestResult res;
  std::set<std::pair<std::string, std::string>> seen;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    line = trim(line);
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != expect.size())
      throw InvalidInput("ingest_dataset: row " + std::to_string(row_no) + ": wrong field count");

    DatasetRecord rec;
    rec.patient_id = trim(fields[0]);
    const std::string code = trim(fields[1]);
    rec.limb = limb_from_code(code);
    if (!seen.insert({rec.patient_id, code}).second)
      throw InvalidInput("ingest_dataset: duplicate entry for " + rec.patient_id + "-" + code);

    for (std::size_t j = 0; j < all_joint_labels().size(); ++j) {
      const std::string& label = all_joint_labels()[j];
      const std::string narrow = trim(fields[2 + 2 * j]);
      const std::string erode = trim(fields[3 + 2 * j]);
      if (!joint_applicable(label, rec.limb)) {
        if (!narrow.empty() || !erode.empty())
          throw InvalidInput("ingest_dataset: row " + std::to_string(row_no) + ": " + label +
                             " is not applicable to limb " + code);
        continue;
      }
      if (narrow.empty() || erode.empty())
        throw InvalidInput("ingest_dataset: row " + std::to_string(row_no) + ": missing score for " +
                           label);
      JointScores s;
      s.narrowing = std::stoi(narrow);
      s.erosion = std::stoi(erode);
      const int max_n = scale_for(rec.limb, ScoreTask::Narrowing).classes;
      const int max_e = scale_for(rec.limb, ScoreTask::Erosion).classes;
      if (s.narrowing < 0 || s.narrowing >= max_n)
        throw InvalidInput("ingest_dataset: row " + std::to_string(row_no) + ": " + label +
                           "_narrowing out of range");
      if (s.erosion < 0 || s.erosion >= max_e)
        throw InvalidInput("ingest_dataset: row " + std::to_string(row_no) + ": " + label +
                           "_erosion out of range");
      rec.joints[label] = s;
    }

    if (!image_dir.empty()) {
      const fs::path img = fs::path(image_dir) / (rec.patient_id + "-" + code + ".png");
      if (!fs::exists(img)) {
        res.warnings.push_back("no image for " + rec.patient_id + "-" + code + ", row skipped");
        continue;
      }
      rec.image_path = img.string();
    }
    res.records.push_back(std::move(rec));
  }
  return res;
}

}  // namespace

IngestResult ingest_dataset(const std::string& image_dir, const std::string& scores_csv) {
  if (image_dir.empty()) throw InvalidInput("ingest_dataset: empty image directory");
  return parse_scores(image_dir, scores_csv);
}

std::vector<DatasetRecord> read_scores_csv(const std::string& scores_csv) {
  return parse_scores("", scores_csv).records;
}

void write_scores_csv(const std::vector<DatasetRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("write_scores_csv: cannot open " + path);
  const auto header = schema_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& rec : records) {
    out << rec.patient_id << "," << limb_code(rec.limb);
    for (const auto& label : all_joint_labels()) {
      auto it = rec.joints.find(label);
      if (it == rec.joints.end()) {
        out << ",,";
      } else {
        out << "," << it->second.narrowing << "," << it->second.erosion;
      }
    }
    out << "\n";
  }
  if (!out) throw InvalidInput("write_scores_csv: write failed for " + path);
}

DatasetSplit split_dataset(const std::vector<DatasetRecord>& records, const SplitConfig& cfg) {
  if (cfg.test_fraction < 0 || cfg.val_fraction < 0 || cfg.test_fraction + cfg.val_fraction >= 1.0)
    throw InvalidInput("split_dataset: bad fractions");

  // Collect split units in first-appearance order, then shuffle.
  std::vector<std::string> units;
  std::set<std::string> unit_set;
  auto unit_of = [&](const DatasetRecord& r) {
    return cfg.unit == SplitUnit::ByPatient ? r.patient_id : r.patient_id + "-" + limb_code(r.limb);
  };
  for (const auto& r : records) {
    const std::string u = unit_of(r);
    if (unit_set.insert(u).second) units.push_back(u);
  }
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(units.begin(), units.end(), rng);

  const std::size_t n = units.size();
  const std::size_t n_test = static_cast<std::size_t>(n * cfg.test_fraction);
  const std::size_t n_val = static_cast<std::size_t>((n - n_test) * cfg.val_fraction);

  std::set<std::string> test_units(units.end() - n_test, units.end());
  std::set<std::string> val_units(units.end() - n_test - n_val, units.end() - n_test);

  DatasetSplit split;
  for (const auto& r : records) {
    const std::string u = unit_of(r);
    if (test_units.count(u))
      split.test.push_back(r);
    else if (val_units.count(u))
      split.val.push_back(r);
    else
      split.train.push_back(r);
  }
  return split;
}

}  // namespace rascore
