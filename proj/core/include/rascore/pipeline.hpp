#pragma once

#include <map>
#include <string>
#include <vector>

#include "rascore/clahe.hpp"
#include "rascore/dataset.hpp"
#include "rascore/detect.hpp"
#include "rascore/image.hpp"
#include "rascore/mask.hpp"
#include "rascore/metrics.hpp"
#include "rascore/scorer.hpp"
#include "rascore/synth.hpp"
#include "rascore/unet.hpp"

namespace rascore {

struct PreprocessConfig {
  int target_h = 1500;
  int target_w = 1200;
  ClaheConfig clahe;
};

/// Output of the fixed preprocessing chain (resize_pad, crop_limb,
/// clahe, normalize) plus the geometry needed to carry raw-frame truth
/// into the preprocessed frame.
struct PreprocessResult {
  GrayRaster gray;   // enhanced, cropped
  UnitRaster unit;   // normalize(gray)
  int src_w = 0, src_h = 0;
  int scaled_w = 0, scaled_h = 0;  // content size inside the padded frame
  int off_x = 0, off_y = 0;        // content offset inside the padded frame
  int padded_w = 0, padded_h = 0;
  int cropped_h = 0;               // rows kept after crop_limb
};

PreprocessResult preprocess_image(const GrayRaster& raw, LimbKind limb,
                                  const PreprocessConfig& cfg = {});

/// Map a box normalized to the raw image into the preprocessed frame.
BBoxNorm map_box_raw_to_pre(const PreprocessResult& pre, const BBoxNorm& box);

/// Carry a raw-frame truth mask into the preprocessed frame (nearest
/// neighbor into the padded frame, then the same crop).
BinaryMask transform_mask_raw_to_pre(const PreprocessResult& pre, const BinaryMask& mask);

/// Square cut around a detection box expanded by `margin`, resampled to
/// kCropSize x kCropSize with border clamping.
JointCrop extract_crop(const UnitRaster& img, const BBoxNorm& box, double margin = 0.2);

/// All models required for one limb type.
struct ModelBundle {
  bool hand = true;
  TrainedUnet unet;
  TrainedDetector detector;
  TrainedScorer narrowing;
  TrainedScorer erosion;
};

struct JointReport {
  Detection detection;
  JointIdentity identity;
  ScoreResult narrowing;
  ScoreResult erosion;
};

struct PipelineReport {
  std::string image_id;
  LimbKind limb = LimbKind::HandLeft;
  std::string mask_provenance;  // "unet" or "fallback-entropy"
  double mask_coverage = 0.0;   // foreground fraction of the final mask
  std::vector<JointReport> joints;
  ScoreSheet sheet;
  std::vector<std::pair<std::string, double>> timings_ms;  // stage order
};

struct PipelineOptions {
  PreprocessConfig preprocess;
  double mask_min_coverage = 0.02;  // below: fall back to extract_mask
  double mask_max_coverage = 0.90;  // above: fall back
  double crop_margin = 0.2;
  bool collect_timings = true;      // off in deterministic report mode
};

/// Full chain: preprocess -> mask (U-Net, classical fallback) ->
/// apply_mask -> detect -> identify -> crop -> score both tasks ->
/// aggregate. Unidentified joints are scored but labelled
/// "Unidentified".
PipelineReport run_pipeline(const GrayRaster& raw, LimbKind limb, const std::string& image_id,
                            const ModelBundle& models, const PipelineOptions& opts = {});
PipelineReport run_pipeline(const std::string& image_path, LimbKind limb,
                            const ModelBundle& models, const PipelineOptions& opts = {});

/// Writes <id>_scores.csv (ingest_dataset schema, identified joints),
/// <id>_detections.csv, <id>_totals.csv, <id>_annotated.png and a
/// manifest listing all outputs. Returns the written paths.
std::vector<std::string> write_report(const PipelineReport& report, const GrayRaster& raw,
                                      const std::string& out_dir);

// --- training-sample builders over the synthetic corpus -------------

/// Preprocessed image + transformed truth mask, both at size x size,
/// for samples matching the limb type (negatives always included).
std::vector<MaskSample> make_mask_samples(const std::vector<SynthSample>& samples, bool hand,
                                          int size, const PreprocessConfig& cfg = {});

/// Masked preprocessed image at the detector input size with truth
/// boxes mapped into the preprocessed frame.
std::vector<DetectorSample> make_detector_samples(const std::vector<SynthSample>& samples,
                                                  bool hand, int input_size,
                                                  const PreprocessConfig& cfg = {});

/// Joint crops from truth boxes with the row-discrimination pretext
/// label (1 = MCP/MTP row).
std::vector<PretextSample> make_pretext_samples(const std::vector<SynthSample>& samples, bool hand,
                                                const PreprocessConfig& cfg = {},
                                                double margin = 0.2);

/// Joint crops labelled with the truth score for one (task, limb type).
std::vector<ScoreSample> make_score_samples(const std::vector<SynthSample>& samples,
                                            const ScoreScale& scale,
                                            const PreprocessConfig& cfg = {}, double margin = 0.2);

}  // namespace rascore
