#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rascore/dataset.hpp"
#include "rascore/detect.hpp"
#include "rascore/image.hpp"
#include "rascore/mask.hpp"

namespace rascore {

/// Rendering and sampling knobs for the synthetic radiograph generator.
struct SynthConfig {
  std::uint64_t seed = 42;
  int hands = 8;        // hand images (sides alternate)
  int feet = 8;         // foot images
  int negatives = 0;    // background-only images (empty silhouette)
  int width = 240;      // raw canvas, 5:4 aspect like the padded frame
  int height = 300;
  double noise_density = 0.0;   // speckle dots per background pixel
  double gap_base_px = 11.0;    // joint-space width at narrowing 0
  double gap_step_px = 2.0;     // width lost per narrowing class
  double notch_radius_px = 2.6; // erosion notch radius

  void validate() const;
};

struct TruthJoint {
  std::string label;  // e.g. "MCP2"
  JointClass joint_class = JointClass::PIP;
  int digit = 1;            // 1..5, thumb / great toe = 1
  BBoxNorm box;             // normalized to the raw canvas
  int narrowing = 0;
  int erosion = 0;
  double gap_px = 0.0;      // rendered joint-space width
};

struct SynthSample {
  std::string patient_id;
  LimbKind limb = LimbKind::HandRight;
  GrayRaster image;
  BinaryMask silhouette;     // truth limb mask (empty for negatives)
  std::vector<TruthJoint> joints;
};

/// Deterministic rendering: limb silhouettes with internal texture on a
/// dark (optionally speckled) background; each joint is a pair of
/// bright bone ends whose gap narrows with the narrowing score and
/// whose margins carry dark notches growing in number with the erosion
/// score. Truth for every stage is emitted alongside.
std::vector<SynthSample> generate_synthetic(const SynthConfig& cfg);

/// images/{pid}-{code}.png, masks/{pid}-{code}.png, scores.csv
/// (ingest_dataset schema) and boxes.csv.
void write_synthetic(const std::vector<SynthSample>& samples, const std::string& out_dir);

/// Score-CSV view of one sample (image_path left empty).
DatasetRecord record_of(const SynthSample& sample);

/// Inverse of write_synthetic (gap_px is not persisted and reads 0).
std::vector<SynthSample> read_synthetic(const std::string& dir);

}  // namespace rascore
