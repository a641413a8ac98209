#pragma once

#include "rascore/checkpoint.hpp"
#include "rascore/graph.hpp"
#include "rascore/ordinal.hpp"
#include "rascore/train.hpp"

namespace rascore {

/// Square joint image cut around a detection, resampled to crop_size.
struct JointCrop {
  UnitRaster image;
};

inline constexpr int kCropSize = 64;

/// Conv feature trunk shared by the four scoring heads; frozen after
/// pretext pretraining. Output is 16 x 8 x 8 = 1024 features.
Graph build_scorer_trunk();
int scorer_trunk_features();

struct TrainedTrunk {
  Graph graph;
  ParamSet params;  // all frozen
  std::uint64_t seed = 0;
  bool hand = true;
};

struct PretextSample {
  JointCrop crop;
  int is_lower_row = 0;  // 1 = MCP/MTP, 0 = PIP
};

/// Pretext pretraining: binary joint-class discrimination. The trunk
/// weights are frozen afterwards.
TrainedTrunk pretrain_trunk(const std::vector<PretextSample>& samples, bool hand,
                            const TrainConfig& cfg);

/// Frozen trunk + trainable two-layer dense head with C sigmoid
/// outputs (cumulative ordinal encoding).
struct TrainedScorer {
  ScoreScale scale;
  Graph graph;       // trunk nodes followed by the head
  ParamSet params;   // trunk entries frozen, head entries trainable
  std::uint64_t seed = 0;
  int head_hidden = 64;
};

TrainedScorer build_scorer(const TrainedTrunk& trunk, const ScoreScale& scale, std::uint64_t seed);

struct ScoreSample {
  JointCrop crop;
  int score = 0;
};

struct ScorerTrainResult {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = 0;
};

/// BCE training over ordinal targets with a 10% validation split.
/// Samples are expected to be under-sampled already. The frozen trunk
/// is bit-identical afterwards; trunk features are computed once per
/// sample and reused across epochs.
ScorerTrainResult train_scorer(TrainedScorer& scorer, const std::vector<ScoreSample>& samples,
                               const TrainConfig& cfg);

struct ScoreResult {
  int score = 0;
  std::vector<double> ordinal;
};

ScoreResult score_joint(const TrainedScorer& scorer, const JointCrop& crop);

Checkpoint trunk_to_checkpoint(const TrainedTrunk& trunk, const std::string& tag);
TrainedTrunk trunk_from_checkpoint(const Checkpoint& ckpt);
Checkpoint scorer_to_checkpoint(const TrainedScorer& scorer, const std::string& tag);
TrainedScorer scorer_from_checkpoint(const Checkpoint& ckpt);

}  // namespace rascore
