#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rascore/tensor.hpp"

namespace rascore {

enum class LayerKind { Input, Conv2d, MaxPool2, Upsample2, Concat, Dense, Relu, Sigmoid };
enum class PadMode { Same, Valid };

std::string layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerDef {
  LayerKind kind = LayerKind::Input;
  std::vector<int> inputs;  // node indices, earlier in the list
  // Conv2d
  int in_ch = 0;
  int out_ch = 0;
  int ksize = 0;
  PadMode pad = PadMode::Same;
  // Dense
  int in_features = 0;
  int out_features = 0;
};

/// Static layer DAG. Node 0 is the input placeholder; nodes are stored
/// in topological order.
struct Graph {
  std::vector<LayerDef> nodes;
  int output = -1;

  int add_input();
  int add_conv(int input, int in_ch, int out_ch, int ksize, PadMode pad = PadMode::Same);
  int add_maxpool(int input);
  int add_upsample(int input);
  int add_concat(std::vector<int> inputs);
  int add_dense(int input, int in_features, int out_features);
  int add_relu(int input);
  int add_sigmoid(int input);

  void validate() const;
};

struct ParamEntry {
  std::string name;
  Tensor value;
  bool frozen = false;
};

/// Named parameter tensors, ordered, with a frozen flag per tensor.
struct ParamSet {
  std::vector<ParamEntry> entries;

  ParamEntry& find(const std::string& name);
  const ParamEntry& find(const std::string& name) const;
  bool contains(const std::string& name) const;
  void add(std::string name, Tensor value, bool frozen = false);
  std::size_t total_count() const;
  std::size_t trainable_count() const;
};

/// He-style fan-in uniform initialization from the given seed; biases
/// start at zero. Parameter names are n<idx>.w / n<idx>.b.
ParamSet init_params(const Graph& g, std::uint64_t seed);

/// Activations and pooling argmaxes retained for the backward pass.
struct ForwardCache {
  std::vector<Tensor> acts;
  std::vector<std::vector<std::int32_t>> pool_argmax;
};

Tensor forward(const Graph& g, const ParamSet& params, const Tensor& input, ForwardCache* cache);

struct BackwardResult {
  ParamSet grads;       // same names/shapes as params, frozen flags copied
  Tensor input_grad;
};

/// Gradients of a scalar loss with upstream = dLoss/dOutput.
BackwardResult backward(const Graph& g, const ParamSet& params, const ForwardCache& cache,
                        const Tensor& upstream);

/// Forward pass plus gradients in one call.
std::pair<Tensor, BackwardResult> forward_backward(const Graph& g, const ParamSet& params,
                                                   const Tensor& input, const Tensor& upstream);

/// Accumulate src gradients into dst (same structure).
void accumulate_grads(ParamSet& dst, const ParamSet& src);
void scale_grads(ParamSet& g, double factor);

}  // namespace rascore
