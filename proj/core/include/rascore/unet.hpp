#pragma once

#include "rascore/checkpoint.hpp"
#include "rascore/graph.hpp"
#include "rascore/mask.hpp"
#include "rascore/train.hpp"

namespace rascore {

struct UNetSpec {
  int input_size = 128;  // square
  int stages = 3;
  int base_channels = 8;
  std::vector<int> msb_kernels = {1, 3, 5};

  void validate() const;
};

struct MaskSample {
  UnitRaster image;  // input_size x input_size
  BinaryMask mask;   // same size
};

struct TrainedUnet {
  UNetSpec spec;
  Graph graph;
  ParamSet params;
  std::uint64_t seed = 0;
};

/// Encoder-decoder with skip connections; every block is a multi-scale
/// block (parallel convolutions of each kernel size, concatenated and
/// fused by a 1x1 convolution). Sigmoid output, one channel.
Graph build_unet(const UNetSpec& spec);

struct UnetTrainResult {
  TrainedUnet model;
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;
  int best_epoch = 0;
};

/// BCE training with a 10% validation split held out of the sample
/// list; returns the parameters of the best validation epoch.
UnetTrainResult train_unet(const UNetSpec& spec, const std::vector<MaskSample>& samples,
                           const TrainConfig& cfg);

/// Sigmoid response of the net on an arbitrary-size image (bilinearly
/// resized to the net input), at net resolution.
UnitRaster unet_response(const TrainedUnet& net, const UnitRaster& img);

/// Threshold the response and rescale to the source dimensions by
/// nearest neighbor.
BinaryMask predict_mask(const TrainedUnet& net, const UnitRaster& img, double thresh = 0.5);

Checkpoint unet_to_checkpoint(const TrainedUnet& net, const std::string& tag);
TrainedUnet unet_from_checkpoint(const Checkpoint& ckpt);

Tensor raster_to_tensor(const UnitRaster& img);
Tensor mask_to_tensor(const BinaryMask& mask);

}  // namespace rascore
