#include "rascore/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "rascore/optim.hpp"
#include "rascore/unet.hpp"

namespace rascore {

double box_iou(const BBoxNorm& a, const BBoxNorm& b) {
  const double ax0 = a.cx - a.w / 2, ax1 = a.cx + a.w / 2;
  const double ay0 = a.cy - a.h / 2, ay1 = a.cy + a.h / 2;
  const double bx0 = b.cx - b.w / 2, bx1 = b.cx + b.w / 2;
  const double by0 = b.cy - b.h / 2, by1 = b.cy + b.h / 2;
  const double iw = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
  const double ih = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
  const double inter = iw * ih;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni <= 0.0 ? 0.0 : inter / uni;
}

std::string joint_class_name(JointClass c) {
  switch (c) {
    case JointClass::PIP: return "PIP";
    case JointClass::MCP: return "MCP";
    case JointClass::MTP: return "MTP";
  }
  throw InvalidInput("joint_class_name: bad enum");
}

JointClass joint_class_from_name(const std::string& name) {
  if (name == "PIP") return JointClass::PIP;
  if (name == "MCP") return JointClass::MCP;
  if (name == "MTP") return JointClass::MTP;
  throw InvalidInput("unknown joint class: " + name);
}

int class_channel(JointClass c) { return c == JointClass::PIP ? 0 : 1; }

JointClass channel_class(int channel, bool hand) {
  if (channel == 0) return JointClass::PIP;
  return hand ? JointClass::MCP : JointClass::MTP;
}

void DetectorSpec::validate() const {
  if (grid < 1 || anchors < 1 || classes < 1) throw InvalidInput("DetectorSpec: bad counts");
  if (input_size % grid != 0 || (input_size / grid & (input_size / grid - 1)))
    throw InvalidInput("DetectorSpec: input_size must be grid * power-of-two");
  if (static_cast<int>(anchor_priors.size()) != anchors)
    throw InvalidInput("DetectorSpec: anchor prior count mismatch");
}

DetectorSpec DetectorSpec::with_default_anchors() {
  DetectorSpec s;
  // Aspect priors fit to the synthetic joint size distribution.
  s.anchor_priors = {{0, 0, 0.10, 0.10}, {0, 0, 0.16, 0.12}, {0, 0, 0.12, 0.18}};
  return s;
}

Graph build_detector(const DetectorSpec& spec) {
  spec.validate();
  Graph g;
  int cur = g.add_input();
  int ch = 1;
  int size = spec.input_size;
  int out_ch = 8;
  while (size > spec.grid) {
    cur = g.add_relu(g.add_conv(cur, ch, out_ch, 3));
    cur = g.add_maxpool(cur);
    ch = out_ch;
    out_ch = std::min(32, out_ch * 2);
    size /= 2;
  }
  cur = g.add_relu(g.add_conv(cur, ch, 32, 3));
  g.output = g.add_conv(cur, 32, spec.head_channels(), 1);
  g.validate();
  return g;
}

namespace {

inline std::size_t raw_index(const DetectorSpec& spec, int anchor, int channel, int cell_x,
                             int cell_y) {
  return (static_cast<std::size_t>(anchor * spec.channels_per_anchor() + channel) * spec.grid +
          cell_y) *
             spec.grid +
         cell_x;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

BBoxNorm decode_box(const DetectorSpec& spec, const double* raw, int cell_x, int cell_y,
                    int anchor) {
  const double tx = raw[raw_index(spec, anchor, 0, cell_x, cell_y)];
  const double ty = raw[raw_index(spec, anchor, 1, cell_x, cell_y)];
  const double tw = raw[raw_index(spec, anchor, 2, cell_x, cell_y)];
  const double th = raw[raw_index(spec, anchor, 3, cell_x, cell_y)];
  BBoxNorm b;
  b.cx = (cell_x + sigmoid(tx)) / spec.grid;
  b.cy = (cell_y + sigmoid(ty)) / spec.grid;
  b.w = std::clamp(spec.anchor_priors[anchor].w * std::exp(tw), 1e-4, 1.0);
  b.h = std::clamp(spec.anchor_priors[anchor].h * std::exp(th), 1e-4, 1.0);
  return b;
}

void encode_box(const DetectorSpec& spec, const BBoxNorm& box, int cell_x, int cell_y, int anchor,
                double* raw) {
  const double fx = box.cx * spec.grid - cell_x;
  const double fy = box.cy * spec.grid - cell_y;
  if (fx <= 0.0 || fx >= 1.0 || fy <= 0.0 || fy >= 1.0)
    throw InvalidInput("encode_box: center not inside the given cell");
  raw[raw_index(spec, anchor, 0, cell_x, cell_y)] = logit(fx);
  raw[raw_index(spec, anchor, 1, cell_x, cell_y)] = logit(fy);
  raw[raw_index(spec, anchor, 2, cell_x, cell_y)] = std::log(box.w / spec.anchor_priors[anchor].w);
  raw[raw_index(spec, anchor, 3, cell_x, cell_y)] = std::log(box.h / spec.anchor_priors[anchor].h);
}

int expected_joint_count(LimbKind limb) { return is_hand(limb) ? 10 : 6; }

namespace {

struct Match {
  int cell_x, cell_y, anchor;
  double tx, ty, tw, th;
  int class_channel;
};

// Anchor assignment: cell containing the truth center, best-IoU prior
// among the anchors still free in that cell.
std::vector<Match> match_truths(const DetectorSpec& spec, const std::vector<TruthBox>& truths) {
  std::vector<Match> matches;
  std::vector<std::uint8_t> taken(static_cast<std::size_t>(spec.grid) * spec.grid * spec.anchors, 0);
  for (const auto& t : truths) {
    t.bbox.validate();
    const int cx = std::min(spec.grid - 1, static_cast<int>(t.bbox.cx * spec.grid));
    const int cy = std::min(spec.grid - 1, static_cast<int>(t.bbox.cy * spec.grid));
    int best = -1;
    double best_iou = -1.0;
    for (int a = 0; a < spec.anchors; ++a) {
      if (taken[(static_cast<std::size_t>(cy) * spec.grid + cx) * spec.anchors + a]) continue;
      BBoxNorm prior{t.bbox.cx, t.bbox.cy, spec.anchor_priors[a].w, spec.anchor_priors[a].h};
      const double iou = box_iou(prior, t.bbox);
      if (iou > best_iou) {
        best_iou = iou;
        best = a;
      }
    }
    if (best < 0) continue;  // cell saturated
    taken[(static_cast<std::size_t>(cy) * spec.grid + cx) * spec.anchors + best] = 1;
    Match m;
    m.cell_x = cx;
    m.cell_y = cy;
    m.anchor = best;
    const double fx = std::clamp(t.bbox.cx * spec.grid - cx, 1e-4, 1.0 - 1e-4);
    const double fy = std::clamp(t.bbox.cy * spec.grid - cy, 1e-4, 1.0 - 1e-4);
    m.tx = logit(fx);
    m.ty = logit(fy);
    m.tw = std::log(t.bbox.w / spec.anchor_priors[best].w);
    m.th = std::log(t.bbox.h / spec.anchor_priors[best].h);
    m.class_channel = class_channel(t.joint_class);
    matches.push_back(m);
  }
  return matches;
}

// Composite loss on the raw head output; fills the upstream gradient.
double detector_loss(const DetectorSpec& spec, const Tensor& raw,
                     const std::vector<Match>& matches, Tensor& draw) {
  const int S = spec.grid, B = spec.anchors, C = spec.classes;
  std::vector<std::uint8_t> is_match(static_cast<std::size_t>(S) * S * B, 0);
  for (const auto& m : matches)
    is_match[(static_cast<std::size_t>(m.cell_y) * S + m.cell_x) * B + m.anchor] = 1;

  double loss = 0.0;
  // Positive objectness cells are rare (e.g. 10 of 192), so they carry
  // extra weight; negatives are down-weighted as in standard one-stage
  // detector losses.
  const double obj_norm = 1.0 / (S * S * B);
  const double lambda_obj = 8.0, lambda_noobj = 0.5;
  for (int a = 0; a < B; ++a) {
    for (int y = 0; y < S; ++y) {
      for (int x = 0; x < S; ++x) {
        const std::size_t oi = raw_index(spec, a, 4, x, y);
        const double p = sigmoid(raw.data[oi]);
        const double t = is_match[(static_cast<std::size_t>(y) * S + x) * B + a] ? 1.0 : 0.0;
        const double w = (t > 0.5 ? lambda_obj : lambda_noobj) * obj_norm;
        const double pc = std::clamp(p, 1e-9, 1.0 - 1e-9);
        loss += -(t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc)) * w;
        draw.data[oi] += (p - t) * w;
      }
    }
  }

  if (!matches.empty()) {
    const double box_norm = 1.0 / matches.size();
    const double cls_norm = 1.0 / (matches.size() * C);
    for (const auto& m : matches) {
      const double target[4] = {m.tx, m.ty, m.tw, m.th};
      for (int c = 0; c < 4; ++c) {
        const std::size_t i = raw_index(spec, m.anchor, c, m.cell_x, m.cell_y);
        const double diff = raw.data[i] - target[c];
        loss += 0.5 * diff * diff * box_norm;
        draw.data[i] += diff * box_norm;
      }
      for (int c = 0; c < C; ++c) {
        const std::size_t i = raw_index(spec, m.anchor, 5 + c, m.cell_x, m.cell_y);
        const double p = sigmoid(raw.data[i]);
        const double t = c == m.class_channel ? 1.0 : 0.0;
        const double pc = std::clamp(p, 1e-9, 1.0 - 1e-9);
        loss += -(t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc)) * cls_norm;
        draw.data[i] += (p - t) * cls_norm;
      }
    }
  }
  return loss;
}

}  // namespace

DetectorTrainResult train_detector(const DetectorSpec& spec, const std::vector<DetectorSample>& samples,
                                   const DetectorTrainConfig& cfg, bool hand) {
  spec.validate();
  if (samples.empty()) throw InvalidInput("train_detector: empty training set");
  for (const auto& s : samples) {
    if (s.image.width != spec.input_size || s.image.height != spec.input_size)
      throw InvalidInput("train_detector: sample dimensions must equal spec input_size");
    for (const auto& b : s.boxes) b.bbox.validate();
  }

  Graph g = build_detector(spec);
  ParamSet params = init_params(g, cfg.seed);
  AdamState adam = AdamState::for_params(params);
  ParamSet grads = params;
  scale_grads(grads, 0.0);

  std::vector<Tensor> inputs;
  std::vector<std::vector<Match>> matches;
  inputs.reserve(samples.size());
  for (const auto& s : samples) {
    inputs.push_back(raster_to_tensor(s.image));
    matches.push_back(match_truths(spec, s.boxes));
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  DetectorTrainResult res;
  std::size_t cursor = order.size();  // trigger shuffle on first use
  for (int batch = 0; batch < cfg.max_batches; ++batch) {
    double lr = cfg.learning_rate;
    if (batch >= cfg.max_batches * 9 / 10)
      lr *= 0.01;
    else if (batch >= cfg.max_batches * 8 / 10)
      lr *= 0.1;

    scale_grads(grads, 0.0);
    double batch_loss = 0.0;
    for (int i = 0; i < cfg.batch_size; ++i) {
      if (cursor >= order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const std::size_t s = order[cursor++];
      ForwardCache cache;
      Tensor raw = forward(g, params, inputs[s], &cache);
      Tensor draw(raw.shape);
      batch_loss += detector_loss(spec, raw, matches[s], draw);
      BackwardResult back = backward(g, params, cache, draw);
      accumulate_grads(grads, back.grads);
    }
    scale_grads(grads, 1.0 / cfg.batch_size);
    adam_step(params, grads, adam, lr);
    res.batch_loss.push_back(batch_loss / cfg.batch_size);
    if (cfg.verbose && batch % 50 == 0)
      std::fprintf(stderr, "detector batch %d loss %.6f\n", batch, res.batch_loss.back());
  }

  res.model.spec = spec;
  res.model.graph = std::move(g);
  res.model.params = std::move(params);
  res.model.seed = cfg.seed;
  res.model.hand = hand;
  return res;
}

std::vector<Detection> detect_joints(const TrainedDetector& net, const UnitRaster& img,
                                     LimbKind limb, double conf_thresh, double nms_iou) {
  const DetectorSpec& spec = net.spec;
  UnitRaster scaled = (img.width == spec.input_size && img.height == spec.input_size)
                          ? img
                          : resize_bilinear(img, spec.input_size, spec.input_size);
  Tensor raw = forward(net.graph, net.params, raster_to_tensor(scaled), nullptr);

  std::vector<Detection> cands;
  for (int a = 0; a < spec.anchors; ++a) {
    for (int y = 0; y < spec.grid; ++y) {
      for (int x = 0; x < spec.grid; ++x) {
        const double obj = sigmoid(raw.data[raw_index(spec, a, 4, x, y)]);
        int best_c = 0;
        double best_p = -1.0;
        for (int c = 0; c < spec.classes; ++c) {
          const double p = sigmoid(raw.data[raw_index(spec, a, 5 + c, x, y)]);
          if (p > best_p) {
            best_p = p;
            best_c = c;
          }
        }
        const double conf = obj * best_p;
        if (conf <= conf_thresh) continue;
        Detection d;
        d.bbox = decode_box(spec, raw.data.data(), x, y, a);
        d.joint_class = channel_class(best_c, net.hand);
        d.confidence = conf;
        cands.push_back(d);
      }
    }
  }

  // Per-class greedy NMS, highest confidence first.
  std::sort(cands.begin(), cands.end(),
            [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
  std::vector<Detection> kept;
  for (const auto& c : cands) {
    bool suppressed = false;
    for (const auto& k : kept) {
      if (k.joint_class == c.joint_class && box_iou(k.bbox, c.bbox) > nms_iou) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(c);
  }

  const std::size_t cap = static_cast<std::size_t>(expected_joint_count(limb));
  if (kept.size() > cap) kept.resize(cap);
  return kept;
}

std::string JointIdentity::label() const {
  if (!identified()) return "Unidentified";
  return joint_class_name(joint_class) + std::to_string(digit);
}

namespace {

// 1-D 2-means on cy; returns cluster flags (1 = larger-cy row).
std::vector<int> two_means_rows(const std::vector<Detection>& dets) {
  double lo = dets[0].bbox.cy, hi = dets[0].bbox.cy;
  for (const auto& d : dets) {
    lo = std::min(lo, d.bbox.cy);
    hi = std::max(hi, d.bbox.cy);
  }
  double c0 = lo, c1 = hi;
  std::vector<int> assign(dets.size(), 0);
  for (int it = 0; it < 20; ++it) {
    double s0 = 0, s1 = 0;
    int n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      const double y = dets[i].bbox.cy;
      assign[i] = std::abs(y - c1) < std::abs(y - c0) ? 1 : 0;
      if (assign[i]) {
        s1 += y;
        ++n1;
      } else {
        s0 += y;
        ++n0;
      }
    }
    if (n0) c0 = s0 / n0;
    if (n1) c1 = s1 / n1;
  }
  if (c0 > c1)
    for (auto& a : assign) a = 1 - a;
  return assign;
}

// Digits 1..5 thumb-to-little: ascending cx for right limbs,
// descending for left.
void assign_digits(std::vector<std::pair<Detection, JointIdentity>>& out,
                   std::vector<std::pair<double, std::size_t>>& row, JointClass cls, bool left) {
  std::sort(row.begin(), row.end());
  if (left) std::reverse(row.begin(), row.end());
  int digit = 1;
  for (auto& [cx, idx] : row) {
    out[idx].second.digit = digit++;
    out[idx].second.joint_class = cls;
  }
}

}  // namespace

std::vector<std::pair<Detection, JointIdentity>> identify_joints(const std::vector<Detection>& dets,
                                                                 LimbKind limb) {
  const bool hand = is_hand(limb);
  const bool left = is_left(limb);
  const int k = expected_joint_count(limb);

  std::vector<std::pair<Detection, JointIdentity>> out;
  out.reserve(dets.size());
  for (const auto& d : dets) out.emplace_back(d, JointIdentity{0, d.joint_class});

  // Shortfall: locations cannot be determined reliably.
  if (static_cast<int>(dets.size()) < k) return out;

  const JointClass lower_cls = hand ? JointClass::MCP : JointClass::MTP;
  int n_pip = 0, n_lower = 0;
  for (const auto& d : dets) {
    if (d.joint_class == JointClass::PIP) ++n_pip;
    if (d.joint_class == lower_cls) ++n_lower;
  }
  const int want_pip = hand ? 5 : 1;
  const int want_lower = 5;

  std::vector<std::size_t> pip_idx, lower_idx;
  if (n_pip == want_pip && n_lower == want_lower) {
    // Primary path: trust predicted classes.
    for (std::size_t i = 0; i < dets.size(); ++i)
      (dets[i].joint_class == JointClass::PIP ? pip_idx : lower_idx).push_back(i);
  } else {
    // Backup path: reconstruct rows from geometry alone.
    if (hand) {
      auto rows = two_means_rows(dets);
      for (std::size_t i = 0; i < dets.size(); ++i)
        (rows[i] == 0 ? pip_idx : lower_idx).push_back(i);
      if (pip_idx.size() != 5) {
        // Degenerate clustering; split by sorted cy instead.
        std::vector<std::pair<double, std::size_t>> by_cy;
        for (std::size_t i = 0; i < dets.size(); ++i) by_cy.emplace_back(dets[i].bbox.cy, i);
        std::sort(by_cy.begin(), by_cy.end());
        pip_idx.clear();
        lower_idx.clear();
        for (std::size_t i = 0; i < by_cy.size(); ++i)
          (i < 5 ? pip_idx : lower_idx).push_back(by_cy[i].second);
      }
    } else {
      // Foot: the single smallest-cy box is the great-toe PIP.
      std::size_t pip = 0;
      for (std::size_t i = 1; i < dets.size(); ++i)
        if (dets[i].bbox.cy < dets[pip].bbox.cy) pip = i;
      for (std::size_t i = 0; i < dets.size(); ++i)
        (i == pip ? pip_idx : lower_idx).push_back(i);
    }
  }

  std::vector<std::pair<double, std::size_t>> row;
  for (auto i : lower_idx) row.emplace_back(dets[i].bbox.cx, i);
  assign_digits(out, row, lower_cls, left);

  if (hand) {
    row.clear();
    for (auto i : pip_idx) row.emplace_back(dets[i].bbox.cx, i);
    assign_digits(out, row, JointClass::PIP, left);
  } else {
    out[pip_idx[0]].second.digit = 1;
    out[pip_idx[0]].second.joint_class = JointClass::PIP;
  }
  return out;
}

Checkpoint detector_to_checkpoint(const TrainedDetector& net, const std::string& tag) {
  Checkpoint c;
  c.tag = tag;
  c.seed = net.seed;
  c.graph = net.graph;
  c.params = net.params;
  c.meta["kind"] = "detector";
  c.meta["grid"] = std::to_string(net.spec.grid);
  c.meta["anchors"] = std::to_string(net.spec.anchors);
  c.meta["classes"] = std::to_string(net.spec.classes);
  c.meta["input_size"] = std::to_string(net.spec.input_size);
  c.meta["hand"] = net.hand ? "1" : "0";
  std::ostringstream pr;
  for (std::size_t i = 0; i < net.spec.anchor_priors.size(); ++i)
    pr << (i ? "," : "") << net.spec.anchor_priors[i].w << "x" << net.spec.anchor_priors[i].h;
  c.meta["anchor_priors"] = pr.str();
  return c;
}

TrainedDetector detector_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta.count("kind") == 0 || ckpt.meta.at("kind") != "detector")
    throw InvalidInput("checkpoint is not a detector model");
  TrainedDetector net;
  net.spec.grid = std::stoi(ckpt.meta.at("grid"));
  net.spec.anchors = std::stoi(ckpt.meta.at("anchors"));
  net.spec.classes = std::stoi(ckpt.meta.at("classes"));
  net.spec.input_size = std::stoi(ckpt.meta.at("input_size"));
  net.hand = ckpt.meta.at("hand") == "1";
  std::istringstream pr(ckpt.meta.at("anchor_priors"));
  std::string tok;
  while (std::getline(pr, tok, ',')) {
    auto x = tok.find('x');
    BBoxNorm b;
    b.w = std::stod(tok.substr(0, x));
    b.h = std::stod(tok.substr(x + 1));
    net.spec.anchor_priors.push_back(b);
  }
  net.graph = ckpt.graph;
  net.params = ckpt.params;
  net.seed = ckpt.seed;
  return net;
}

}  // namespace rascore
