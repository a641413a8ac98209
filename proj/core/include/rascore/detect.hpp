#pragma once

#include "rascore/checkpoint.hpp"
#include "rascore/graph.hpp"
#include "rascore/image.hpp"
#include "rascore/train.hpp"

namespace rascore {

/// Box normalized to [0,1] relative to image dimensions.
struct BBoxNorm {
  double cx = 0, cy = 0, w = 0, h = 0;

  void validate() const {
    if (cx < 0 || cx > 1 || cy < 0 || cy > 1 || w <= 0 || w > 1 || h <= 0 || h > 1)
      throw InvalidInput("BBoxNorm: out of range");
  }
};

double box_iou(const BBoxNorm& a, const BBoxNorm& b);

enum class JointClass { PIP, MCP, MTP };

std::string joint_class_name(JointClass c);
JointClass joint_class_from_name(const std::string& name);

/// Class channel index within the detector head (0 = PIP, 1 = MCP for
/// hands / MTP for feet).
int class_channel(JointClass c);
JointClass channel_class(int channel, bool hand);

struct Detection {
  BBoxNorm bbox;
  JointClass joint_class = JointClass::PIP;
  double confidence = 0.0;
};

struct DetectorSpec {
  int grid = 8;      // S cells per side
  int anchors = 3;   // B
  int classes = 2;   // per limb type
  int input_size = 64;
  std::vector<BBoxNorm> anchor_priors;  // size = anchors, only w/h used

  int channels_per_anchor() const { return 5 + classes; }
  int head_channels() const { return anchors * channels_per_anchor(); }
  void validate() const;
  static DetectorSpec with_default_anchors();
};

struct TruthBox {
  BBoxNorm bbox;
  JointClass joint_class = JointClass::PIP;
};

struct DetectorSample {
  UnitRaster image;  // input_size x input_size
  std::vector<TruthBox> boxes;
};

struct TrainedDetector {
  DetectorSpec spec;
  Graph graph;
  ParamSet params;
  std::uint64_t seed = 0;
  bool hand = true;
};

/// Small conv backbone ending in an S x S x (B*(5+classes)) head.
Graph build_detector(const DetectorSpec& spec);

/// Raw-to-box decode for one anchor slot: cx,cy = (cell+sigmoid)/S,
/// w,h = anchor * exp(t), clamped into [0,1].
BBoxNorm decode_box(const DetectorSpec& spec, const double* raw, int cell_x, int cell_y, int anchor);
/// Inverse of decode_box for in-range boxes; writes tx,ty,tw,th.
void encode_box(const DetectorSpec& spec, const BBoxNorm& box, int cell_x, int cell_y, int anchor,
                double* raw);

struct DetectorTrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 16;
  int max_batches = 1200;  // lr decays x0.1 at 80% and 90%
  std::uint64_t seed = 42;
  bool verbose = false;
};

struct DetectorTrainResult {
  TrainedDetector model;
  std::vector<double> batch_loss;
};

DetectorTrainResult train_detector(const DetectorSpec& spec, const std::vector<DetectorSample>& samples,
                                   const DetectorTrainConfig& cfg, bool hand);

/// Decode, drop confidence <= 0.5, per-class NMS at IoU 0.45, cap at
/// the limb's joint count (10 hands, 6 feet) keeping the highest
/// confidences.
std::vector<Detection> detect_joints(const TrainedDetector& net, const UnitRaster& img,
                                     LimbKind limb, double conf_thresh = 0.5,
                                     double nms_iou = 0.45);

int expected_joint_count(LimbKind limb);

/// Anatomical assignment. digit 0 = unidentified, else 1..5 with the
/// thumb / great toe as 1.
struct JointIdentity {
  int digit = 0;
  JointClass joint_class = JointClass::PIP;

  bool identified() const { return digit > 0; }
  std::string label() const;
};

std::vector<std::pair<Detection, JointIdentity>> identify_joints(const std::vector<Detection>& dets,
                                                                 LimbKind limb);

Checkpoint detector_to_checkpoint(const TrainedDetector& net, const std::string& tag);
TrainedDetector detector_from_checkpoint(const Checkpoint& ckpt);

}  // namespace rascore
