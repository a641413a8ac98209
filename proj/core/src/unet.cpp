#include "rascore/unet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "rascore/loss.hpp"
#include "rascore/optim.hpp"

namespace rascore {

void UNetSpec::validate() const {
  if (input_size < 8) throw InvalidInput("UNetSpec: input_size too small");
  if (stages < 1) throw InvalidInput("UNetSpec: stages must be >= 1");
  if (base_channels < 1) throw InvalidInput("UNetSpec: base_channels must be >= 1");
  if (input_size % (1 << stages) != 0)
    throw InvalidInput("UNetSpec: input_size must be divisible by 2^stages");
  if (msb_kernels.empty()) throw InvalidInput("UNetSpec: empty kernel set");
  for (int k : msb_kernels)
    if (k < 1 || k % 2 == 0) throw InvalidInput("UNetSpec: kernels must be odd");
}

namespace {

// Multi-scale block: one conv per kernel size in parallel, channel
// concatenation, 1x1 fuse, relu.
int add_msb(Graph& g, int input, int in_ch, int out_ch, const std::vector<int>& kernels) {
  if (kernels.size() == 1) {
    int c = g.add_conv(input, in_ch, out_ch, kernels[0]);
    return g.add_relu(c);
  }
  std::vector<int> branches;
  for (int k : kernels) branches.push_back(g.add_conv(input, in_ch, out_ch, k));
  int cat = g.add_concat(branches);
  int fuse = g.add_conv(cat, out_ch * static_cast<int>(kernels.size()), out_ch, 1);
  return g.add_relu(fuse);
}

}  // namespace

Graph build_unet(const UNetSpec& spec) {
  spec.validate();
  Graph g;
  int cur = g.add_input();
  int ch = 1;

  std::vector<int> skips;
  std::vector<int> skip_ch;
  for (int s = 0; s < spec.stages; ++s) {
    const int out_ch = spec.base_channels << s;
    cur = add_msb(g, cur, ch, out_ch, spec.msb_kernels);
    ch = out_ch;
    skips.push_back(cur);
    skip_ch.push_back(ch);
    cur = g.add_maxpool(cur);
  }

  const int bottleneck_ch = spec.base_channels << spec.stages;
  cur = add_msb(g, cur, ch, bottleneck_ch, spec.msb_kernels);
  ch = bottleneck_ch;

  for (int s = spec.stages - 1; s >= 0; --s) {
    cur = g.add_upsample(cur);
    cur = g.add_concat({cur, skips[s]});
    ch += skip_ch[s];
    const int out_ch = spec.base_channels << s;
    cur = add_msb(g, cur, ch, out_ch, spec.msb_kernels);
    ch = out_ch;
  }

  cur = g.add_conv(cur, ch, 1, 1);
  g.output = g.add_sigmoid(cur);
  g.validate();
  return g;
}

Tensor raster_to_tensor(const UnitRaster& img) {
  Tensor t({1, img.height, img.width});
  t.data = img.data;
  return t;
}

Tensor mask_to_tensor(const BinaryMask& mask) {
  Tensor t({1, mask.height, mask.width});
  for (std::size_t i = 0; i < mask.data.size(); ++i) t.data[i] = mask.data[i] ? 1.0 : 0.0;
  return t;
}

UnetTrainResult train_unet(const UNetSpec& spec, const std::vector<MaskSample>& samples,
                           const TrainConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (samples.size() < 2) throw InvalidInput("train_unet: need at least 2 samples");
  for (const auto& s : samples)
    if (s.image.width != spec.input_size || s.image.height != spec.input_size ||
        s.mask.width != spec.input_size || s.mask.height != spec.input_size)
      throw InvalidInput("train_unet: sample dimensions must equal spec input_size");

  std::vector<Tensor> inputs, targets;
  inputs.reserve(samples.size());
  targets.reserve(samples.size());
  for (const auto& s : samples) {
    inputs.push_back(raster_to_tensor(s.image));
    targets.push_back(mask_to_tensor(s.mask));
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t val_n = std::max<std::size_t>(1, samples.size() / 10);
  std::vector<std::size_t> val_idx(order.end() - val_n, order.end());
  std::vector<std::size_t> train_idx(order.begin(), order.end() - val_n);

  Graph g = build_unet(spec);
  ParamSet params = init_params(g, cfg.seed);
  AdamState adam = AdamState::for_params(params);

  ParamSet grads = params;
  auto zero_grads = [&] { scale_grads(grads, 0.0); };

  UnetTrainResult res;
  res.model.spec = spec;
  res.model.graph = g;
  res.model.seed = cfg.seed;
  ParamSet best_params = params;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < train_idx.size(); b += cfg.batch_size) {
      const std::size_t end = std::min(train_idx.size(), b + cfg.batch_size);
      zero_grads();
      double batch_loss = 0.0;
      for (std::size_t i = b; i < end; ++i) {
        ForwardCache cache;
        Tensor out = forward(g, params, inputs[train_idx[i]], &cache);
        LossResult l = bce_loss(out, targets[train_idx[i]]);
        batch_loss += l.loss;
        BackwardResult back = backward(g, params, cache, l.grad);
        accumulate_grads(grads, back.grads);
      }
      const double inv = 1.0 / static_cast<double>(end - b);
      scale_grads(grads, inv);
      adam_step(params, grads, adam, cfg.learning_rate);
      epoch_loss += batch_loss;
      seen += end - b;
    }
    res.train_loss.push_back(epoch_loss / static_cast<double>(seen));

    double val_loss = 0.0;
    for (auto i : val_idx) val_loss += bce_loss(forward(g, params, inputs[i], nullptr), targets[i]).loss;
    val_loss /= static_cast<double>(val_idx.size());
    res.val_loss.push_back(val_loss);
    if (cfg.verbose)
      std::fprintf(stderr, "unet epoch %d train %.6f val %.6f\n", epoch, res.train_loss.back(), val_loss);

    if (val_loss < best_val) {
      best_val = val_loss;
      best_params = params;
      best_epoch = epoch;
    } else if (cfg.early_stop_patience && epoch - best_epoch >= *cfg.early_stop_patience) {
      break;
    }
  }

  res.model.params = std::move(best_params);
  res.best_epoch = best_epoch;
  return res;
}

UnitRaster unet_response(const TrainedUnet& net, const UnitRaster& img) {
  const int n = net.spec.input_size;
  UnitRaster scaled = (img.width == n && img.height == n) ? img : resize_bilinear(img, n, n);
  Tensor out = forward(net.graph, net.params, raster_to_tensor(scaled), nullptr);
  UnitRaster resp(n, n);
  resp.data = out.data;
  return resp;
}

BinaryMask predict_mask(const TrainedUnet& net, const UnitRaster& img, double thresh) {
  UnitRaster resp = unet_response(net, img);
  BinaryMask small(resp.width, resp.height);
  for (std::size_t i = 0; i < resp.data.size(); ++i) small.data[i] = resp.data[i] > thresh;
  if (img.width == small.width && img.height == small.height) return small;
  return resize_nearest(small, img.height, img.width);
}

Checkpoint unet_to_checkpoint(const TrainedUnet& net, const std::string& tag) {
  Checkpoint c;
  c.tag = tag;
  c.seed = net.seed;
  c.graph = net.graph;
  c.params = net.params;
  c.meta["kind"] = "unet";
  c.meta["input_size"] = std::to_string(net.spec.input_size);
  c.meta["stages"] = std::to_string(net.spec.stages);
  c.meta["base_channels"] = std::to_string(net.spec.base_channels);
  std::ostringstream ks;
  for (std::size_t i = 0; i < net.spec.msb_kernels.size(); ++i)
    ks << (i ? "," : "") << net.spec.msb_kernels[i];
  c.meta["msb_kernels"] = ks.str();
  return c;
}

TrainedUnet unet_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta.count("kind") == 0 || ckpt.meta.at("kind") != "unet")
    throw InvalidInput("checkpoint is not a unet model");
  TrainedUnet net;
  net.spec.input_size = std::stoi(ckpt.meta.at("input_size"));
  net.spec.stages = std::stoi(ckpt.meta.at("stages"));
  net.spec.base_channels = std::stoi(ckpt.meta.at("base_channels"));
  net.spec.msb_kernels.clear();
  std::istringstream ks(ckpt.meta.at("msb_kernels"));
  std::string tok;
  while (std::getline(ks, tok, ',')) net.spec.msb_kernels.push_back(std::stoi(tok));
  net.graph = ckpt.graph;
  net.params = ckpt.params;
  net.seed = ckpt.seed;
  return net;
}

}  // namespace rascore
