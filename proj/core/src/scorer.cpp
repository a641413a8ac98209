#include "rascore/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "rascore/loss.hpp"
#include "rascore/optim.hpp"
#include "rascore/unet.hpp"

namespace rascore {

Graph build_scorer_trunk() {
  Graph g;
  int cur = g.add_input();  // 1 x 64 x 64
  cur = g.add_relu(g.add_conv(cur, 1, 8, 3));
  cur = g.add_maxpool(cur);
  cur = g.add_relu(g.add_conv(cur, 8, 16, 3));
  cur = g.add_maxpool(cur);
  cur = g.add_relu(g.add_conv(cur, 16, 16, 3));
  cur = g.add_maxpool(cur);
  g.output = cur;  // 16 x 8 x 8
  g.validate();
  return g;
}

int scorer_trunk_features() { return 16 * 8 * 8; }

namespace {

void check_crop(const JointCrop& c) {
  if (c.image.width != kCropSize || c.image.height != kCropSize)
    throw InvalidInput("JointCrop: expected " + std::to_string(kCropSize) + "x" +
                       std::to_string(kCropSize));
}

// Head graph on flattened trunk features; params map positionally onto
// the combined graph's trainable entries.
Graph build_head_graph(int features, int hidden, int classes) {
  Graph g;
  int cur = g.add_input();
  cur = g.add_relu(g.add_dense(cur, features, hidden));
  cur = g.add_dense(cur, hidden, classes);
  g.output = g.add_sigmoid(cur);
  g.validate();
  return g;
}

}  // namespace

TrainedTrunk pretrain_trunk(const std::vector<PretextSample>& samples, bool hand,
                            const TrainConfig& cfg) {
  cfg.validate();
  if (samples.size() < 2) throw InvalidInput("pretrain_trunk: need at least 2 samples");
  for (const auto& s : samples) check_crop(s.crop);

  // Trunk + discrimination head, trained end to end.
  Graph g = build_scorer_trunk();
  const int trunk_out = g.output;
  int cur = g.add_relu(g.add_dense(trunk_out, scorer_trunk_features(), 16));
  cur = g.add_dense(cur, 16, 1);
  g.output = g.add_sigmoid(cur);

  ParamSet params = init_params(g, cfg.seed);
  AdamState adam = AdamState::for_params(params);
  ParamSet grads = params;

  std::vector<Tensor> inputs;
  std::vector<Tensor> targets;
  for (const auto& s : samples) {
    inputs.push_back(raster_to_tensor(s.crop.image));
    Tensor t({1});
    t.data[0] = s.is_lower_row ? 1.0 : 0.0;
    targets.push_back(t);
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), b + cfg.batch_size);
      scale_grads(grads, 0.0);
      for (std::size_t i = b; i < end; ++i) {
        ForwardCache cache;
        Tensor out = forward(g, params, inputs[order[i]], &cache);
        LossResult l = bce_loss(out, targets[order[i]]);
        accumulate_grads(grads, backward(g, params, cache, l.grad).grads);
      }
      scale_grads(grads, 1.0 / static_cast<double>(end - b));
      adam_step(params, grads, adam, cfg.learning_rate);
    }
  }

  // Keep only the trunk parameters, frozen.
  TrainedTrunk trunk;
  trunk.graph = build_scorer_trunk();
  trunk.seed = cfg.seed;
  trunk.hand = hand;
  for (std::size_t i = 0; i < trunk.graph.nodes.size(); ++i) {
    const std::string base = "n" + std::to_string(i);
    if (params.contains(base + ".w")) {
      trunk.params.add(base + ".w", params.find(base + ".w").value, true);
      trunk.params.add(base + ".b", params.find(base + ".b").value, true);
    }
  }
  return trunk;
}

TrainedScorer build_scorer(const TrainedTrunk& trunk, const ScoreScale& scale, std::uint64_t seed) {
  if (scale.classes < 2) throw InvalidInput("build_scorer: class count < 2");
  TrainedScorer s;
  s.scale = scale;
  s.seed = seed;
  s.graph = trunk.graph;
  const int trunk_out = s.graph.output;
  int cur = s.graph.add_relu(s.graph.add_dense(trunk_out, scorer_trunk_features(), s.head_hidden));
  cur = s.graph.add_dense(cur, s.head_hidden, scale.classes);
  s.graph.output = s.graph.add_sigmoid(cur);

  ParamSet fresh = init_params(s.graph, seed);
  for (auto& e : fresh.entries) {
    if (trunk.params.contains(e.name)) {
      e.value = trunk.params.find(e.name).value;
      e.frozen = true;
    }
  }
  s.params = std::move(fresh);
  return s;
}

ScorerTrainResult train_scorer(TrainedScorer& scorer, const std::vector<ScoreSample>& samples,
                               const TrainConfig& cfg) {
  cfg.validate();
  if (samples.size() < 2) throw InvalidInput("train_scorer: need at least 2 samples");
  for (const auto& s : samples) {
    check_crop(s.crop);
    if (s.score < 0 || s.score >= scorer.scale.classes)
      throw InvalidInput("train_scorer: score out of range");
  }

  // The trunk is frozen, so its features per sample are constants.
  Graph trunk = build_scorer_trunk();
  ParamSet trunk_params;
  for (const auto& e : scorer.params.entries)
    if (e.frozen) trunk_params.add(e.name, e.value, true);

  const int feat_n = scorer_trunk_features();
  std::vector<Tensor> features, targets;
  features.reserve(samples.size());
  for (const auto& s : samples) {
    Tensor f = forward(trunk, trunk_params, raster_to_tensor(s.crop.image), nullptr);
    Tensor flat({feat_n});
    flat.data = std::move(f.data);
    features.push_back(std::move(flat));
    Tensor t({scorer.scale.classes});
    t.data = ordinal_encode(s.score, scorer.scale.classes);
    targets.push_back(std::move(t));
  }

  Graph head = build_head_graph(feat_n, scorer.head_hidden, scorer.scale.classes);
  ParamSet head_params = init_params(head, scorer.seed);
  {
    // Positional sync from the combined graph's trainable entries.
    std::size_t j = 0;
    for (const auto& e : scorer.params.entries) {
      if (e.frozen) continue;
      head_params.entries[j].value = e.value;
      ++j;
    }
    if (j != head_params.entries.size()) throw InvalidInput("train_scorer: head structure mismatch");
  }

  AdamState adam = AdamState::for_params(head_params);
  ParamSet grads = head_params;

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t val_n = std::max<std::size_t>(1, samples.size() / 10);
  std::vector<std::size_t> val_idx(order.end() - val_n, order.end());
  std::vector<std::size_t> train_idx(order.begin(), order.end() - val_n);

  ScorerTrainResult res;
  ParamSet best = head_params;
  double best_val = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < train_idx.size(); b += cfg.batch_size) {
      const std::size_t end = std::min(train_idx.size(), b + cfg.batch_size);
      scale_grads(grads, 0.0);
      for (std::size_t i = b; i < end; ++i) {
        ForwardCache cache;
        Tensor out = forward(head, head_params, features[train_idx[i]], &cache);
        LossResult l = bce_loss(out, targets[train_idx[i]]);
        epoch_loss += l.loss;
        accumulate_grads(grads, backward(head, head_params, cache, l.grad).grads);
      }
      scale_grads(grads, 1.0 / static_cast<double>(end - b));
      adam_step(head_params, grads, adam, cfg.learning_rate);
      seen += end - b;
    }
    res.train_loss.push_back(epoch_loss / static_cast<double>(seen));

    double val = 0.0;
    for (auto i : val_idx)
      val += bce_loss(forward(head, head_params, features[i], nullptr), targets[i]).loss;
    val /= static_cast<double>(val_idx.size());
    res.val_loss.push_back(val);
    if (cfg.verbose)
      std::fprintf(stderr, "scorer epoch %d train %.6f val %.6f\n", epoch, res.train_loss.back(), val);
    if (val < best_val) {
      best_val = val;
      best = head_params;
      res.best_epoch = epoch;
    } else if (cfg.early_stop_patience && epoch - res.best_epoch >= *cfg.early_stop_patience) {
      break;
    }
  }

  // Copy the best head back into the combined parameter set.
  std::size_t j = 0;
  for (auto& e : scorer.params.entries) {
    if (e.frozen) continue;
    e.value = best.entries[j].value;
    ++j;
  }
  return res;
}

ScoreResult score_joint(const TrainedScorer& scorer, const JointCrop& crop) {
  check_crop(crop);
  Tensor out = forward(scorer.graph, scorer.params, raster_to_tensor(crop.image), nullptr);
  ScoreResult r;
  r.ordinal = out.data;
  r.score = ordinal_decode(r.ordinal);
  return r;
}

Checkpoint trunk_to_checkpoint(const TrainedTrunk& trunk, const std::string& tag) {
  Checkpoint c;
  c.tag = tag;
  c.seed = trunk.seed;
  c.graph = trunk.graph;
  c.params = trunk.params;
  c.meta["kind"] = "scorer-trunk";
  c.meta["hand"] = trunk.hand ? "1" : "0";
  return c;
}

TrainedTrunk trunk_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta.count("kind") == 0 || ckpt.meta.at("kind") != "scorer-trunk")
    throw InvalidInput("checkpoint is not a scorer trunk");
  TrainedTrunk t;
  t.graph = ckpt.graph;
  t.params = ckpt.params;
  t.seed = ckpt.seed;
  t.hand = ckpt.meta.at("hand") == "1";
  return t;
}

Checkpoint scorer_to_checkpoint(const TrainedScorer& scorer, const std::string& tag) {
  Checkpoint c;
  c.tag = tag;
  c.seed = scorer.seed;
  c.graph = scorer.graph;
  c.params = scorer.params;
  c.meta["kind"] = "scorer";
  c.meta["task"] = scorer.scale.task == ScoreTask::Erosion ? "erosion" : "narrowing";
  c.meta["hand"] = scorer.scale.hand ? "1" : "0";
  c.meta["classes"] = std::to_string(scorer.scale.classes);
  c.meta["head_hidden"] = std::to_string(scorer.head_hidden);
  return c;
}

TrainedScorer scorer_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta.count("kind") == 0 || ckpt.meta.at("kind") != "scorer")
    throw InvalidInput("checkpoint is not a scorer model");
  TrainedScorer s;
  s.scale.task = ckpt.meta.at("task") == "erosion" ? ScoreTask::Erosion : ScoreTask::Narrowing;
  s.scale.hand = ckpt.meta.at("hand") == "1";
  s.scale.classes = std::stoi(ckpt.meta.at("classes"));
  s.head_hidden = std::stoi(ckpt.meta.at("head_hidden"));
  s.graph = ckpt.graph;
  s.params = ckpt.params;
  s.seed = ckpt.seed;
  return s;
}

}  // namespace rascore
