#include "rascore/graph.hpp"

#include "rascore/image.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rascore {

std::string layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Input: return "input";
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::MaxPool2: return "maxpool2";
    case LayerKind::Upsample2: return "upsample2";
    case LayerKind::Concat: return "concat";
    case LayerKind::Dense: return "dense";
    case LayerKind::Relu: return "relu";
    case LayerKind::Sigmoid: return "sigmoid";
  }
  throw InvalidInput("layer_kind_name: bad enum");
}

LayerKind layer_kind_from_name(const std::string& name) {
  if (name == "input") return LayerKind::Input;
  if (name == "conv2d") return LayerKind::Conv2d;
  if (name == "maxpool2") return LayerKind::MaxPool2;
  if (name == "upsample2") return LayerKind::Upsample2;
  if (name == "concat") return LayerKind::Concat;
  if (name == "dense") return LayerKind::Dense;
  if (name == "relu") return LayerKind::Relu;
  if (name == "sigmoid") return LayerKind::Sigmoid;
  throw InvalidInput("unknown layer kind: " + name);
}

int Graph::add_input() {
  nodes.push_back({LayerKind::Input, {}});
  return static_cast<int>(nodes.size()) - 1;
}

int Graph::add_conv(int input, int in_ch, int out_ch, int ksize, PadMode pad) {
  if (ksize < 1 || ksize % 2 == 0) throw InvalidInput("conv: kernel size must be odd");
  LayerDef d;
  d.kind = LayerKind::Conv2d;
  d.inputs = {input};
  d.in_ch = in_ch;
  d.out_ch = out_ch;
  d.ksize = ksize;
  d.pad = pad;
  nodes.push_back(d);
  return static_cast<int>(nodes.size()) - 1;
}

int Graph::add_maxpool(int input) {
  nodes.push_back({LayerKind::MaxPool2, {input}});
  return static_cast<int>(nodes.size()) - 1;
}

int Graph::add_upsample(int input) {
  nodes.push_back({LayerKind::Upsample2, {input}});
  return static_cast<int>(nodes.size()) - 1;
}

int Graph::add_concat(std::vector<int> inputs) {
  if (inputs.size() < 2) throw InvalidInput("concat: needs at least two inputs");
  LayerDef d;
  d.kind = LayerKind::Concat;
  d.inputs = std::move(inputs);
  nodes.push_back(d);
  return static_cast<int>(nodes.size()) - 1;
}

int Graph::add_dense(int input, int in_features, int out_features) {
  LayerDef d;
  d.kind = LayerKind::Dense;
  d.inputs = {input};
  d.in_features = in_features;
  d.out_features = out_features;
  nodes.push_back(d);
  return static_cast<int>(nodes.size()) - 1;
}

int Graph::add_relu(int input) {
  nodes.push_back({LayerKind::Relu, {input}});
  return static_cast<int>(nodes.size()) - 1;
}

int Graph::add_sigmoid(int input) {
  nodes.push_back({LayerKind::Sigmoid, {input}});
  return static_cast<int>(nodes.size()) - 1;
}

void Graph::validate() const {
  if (nodes.empty() || nodes[0].kind != LayerKind::Input)
    throw InvalidInput("graph: node 0 must be the input");
  if (output < 0 || output >= static_cast<int>(nodes.size()))
    throw InvalidInput("graph: output node not set");
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (int in : nodes[i].inputs)
      if (in < 0 || in >= static_cast<int>(i))
        throw InvalidInput("graph: nodes must be topologically ordered");
}

ParamEntry& ParamSet::find(const std::string& name) {
  for (auto& e : entries)
    if (e.name == name) return e;
  throw InvalidInput("ParamSet: no parameter named " + name);
}

const ParamEntry& ParamSet::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw InvalidInput("ParamSet: no parameter named " + name);
}

bool ParamSet::contains(const std::string& name) const {
  return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.name == name; });
}

void ParamSet::add(std::string name, Tensor value, bool frozen) {
  if (contains(name)) throw InvalidInput("ParamSet: duplicate name " + name);
  entries.push_back({std::move(name), std::move(value), frozen});
}

std::size_t ParamSet::total_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.value.size();
  return n;
}

std::size_t ParamSet::trainable_count() const {
  std::size_t n = 0;
  for (const auto& e : entries)
    if (!e.frozen) n += e.value.size();
  return n;
}

ParamSet init_params(const Graph& g, std::uint64_t seed) {
  g.validate();
  std::mt19937_64 rng(seed);
  ParamSet ps;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& d = g.nodes[i];
    int fan_in = 0;
    std::vector<int> wshape, bshape;
    if (d.kind == LayerKind::Conv2d) {
      fan_in = d.in_ch * d.ksize * d.ksize;
      wshape = {d.out_ch, d.in_ch, d.ksize, d.ksize};
      bshape = {d.out_ch};
    } else if (d.kind == LayerKind::Dense) {
      fan_in = d.in_features;
      wshape = {d.out_features, d.in_features};
      bshape = {d.out_features};
    } else {
      continue;
    }
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    Tensor w(wshape);
    for (auto& v : w.data) v = dist(rng);
    ps.add("n" + std::to_string(i) + ".w", std::move(w));
    ps.add("n" + std::to_string(i) + ".b", Tensor(bshape));
  }
  return ps;
}

namespace {

struct Plane {
  int ch, h, w;
};

Plane as_plane(const Tensor& t) {
  if (t.shape.size() != 3) throw InvalidInput("expected a CxHxW tensor");
  return {t.shape[0], t.shape[1], t.shape[2]};
}

void im2col(const Tensor& in, int k, int pad, int oh, int ow, std::vector<double>& cols) {
  const Plane p = as_plane(in);
  const int ck2 = p.ch * k * k;
  cols.assign(static_cast<std::size_t>(ck2) * oh * ow, 0.0);
  for (int ic = 0; ic < p.ch; ++ic) {
    const double* plane = in.data.data() + static_cast<std::size_t>(ic) * p.h * p.w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = cols.data() + (static_cast<std::size_t>(ic) * k * k + ky * k + kx) *
                                        static_cast<std::size_t>(oh) * ow;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy + ky - pad;
          if (iy < 0 || iy >= p.h) continue;
          const int x_lo = std::max(0, pad - kx);
          const int x_hi = std::min(ow, p.w + pad - kx);
          const double* src = plane + static_cast<std::size_t>(iy) * p.w + (x_lo + kx - pad);
          std::copy_n(src, std::max(0, x_hi - x_lo), row + static_cast<std::size_t>(oy) * ow + x_lo);
        }
      }
    }
  }
}

void col2im(const std::vector<double>& cols, int ch, int h, int w, int k, int pad, int oh, int ow,
            Tensor& din) {
  for (int ic = 0; ic < ch; ++ic) {
    double* plane = din.data.data() + static_cast<std::size_t>(ic) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = cols.data() + (static_cast<std::size_t>(ic) * k * k + ky * k + kx) *
                                              static_cast<std::size_t>(oh) * ow;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy + ky - pad;
          if (iy < 0 || iy >= h) continue;
          const int x_lo = std::max(0, pad - kx);
          const int x_hi = std::min(ow, w + pad - kx);
          double* dst = plane + static_cast<std::size_t>(iy) * w + (x_lo + kx - pad);
          const double* src = row + static_cast<std::size_t>(oy) * ow + x_lo;
          for (int x = 0; x < x_hi - x_lo; ++x) dst[x] += src[x];
        }
      }
    }
  }
}

}  // namespace

Tensor forward(const Graph& g, const ParamSet& params, const Tensor& input, ForwardCache* cache) {
  g.validate();
  std::vector<Tensor> acts(g.nodes.size());
  std::vector<std::vector<std::int32_t>> argmax(g.nodes.size());
  std::vector<double> cols;

  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& d = g.nodes[i];
    switch (d.kind) {
      case LayerKind::Input:
        acts[i] = input;
        break;
      case LayerKind::Conv2d: {
        const Tensor& in = acts[d.inputs[0]];
        const Plane p = as_plane(in);
        if (p.ch != d.in_ch) throw InvalidInput("conv: channel mismatch");
        const int pad = d.pad == PadMode::Same ? (d.ksize - 1) / 2 : 0;
        const int oh = d.pad == PadMode::Same ? p.h : p.h - d.ksize + 1;
        const int ow = d.pad == PadMode::Same ? p.w : p.w - d.ksize + 1;
        if (oh <= 0 || ow <= 0) throw InvalidInput("conv: input smaller than kernel");
        im2col(in, d.ksize, pad, oh, ow, cols);
        Tensor out({d.out_ch, oh, ow});
        const Tensor& w = params.find("n" + std::to_string(i) + ".w").value;
        const Tensor& b = params.find("n" + std::to_string(i) + ".b").value;
        const int ck2 = d.in_ch * d.ksize * d.ksize;
        gemm_nn(d.out_ch, ck2, oh * ow, w.data.data(), cols.data(), out.data.data());
        for (int oc = 0; oc < d.out_ch; ++oc) {
          double* plane = out.data.data() + static_cast<std::size_t>(oc) * oh * ow;
          for (int j = 0; j < oh * ow; ++j) plane[j] += b.data[oc];
        }
        acts[i] = std::move(out);
        break;
      }
      case LayerKind::MaxPool2: {
        const Tensor& in = acts[d.inputs[0]];
        const Plane p = as_plane(in);
        if (p.h % 2 || p.w % 2) throw InvalidInput("maxpool2: odd input dimensions");
        const int oh = p.h / 2, ow = p.w / 2;
        Tensor out({p.ch, oh, ow});
        argmax[i].resize(out.size());
        for (int c = 0; c < p.ch; ++c) {
          const double* plane = in.data.data() + static_cast<std::size_t>(c) * p.h * p.w;
          for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
              int best = (2 * y) * p.w + 2 * x;
              for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                  int idx = (2 * y + dy) * p.w + (2 * x + dx);
                  if (plane[idx] > plane[best]) best = idx;
                }
              std::size_t o = (static_cast<std::size_t>(c) * oh + y) * ow + x;
              out.data[o] = plane[best];
              argmax[i][o] = static_cast<std::int32_t>(static_cast<std::size_t>(c) * p.h * p.w + best);
            }
          }
        }
        acts[i] = std::move(out);
        break;
      }
      case LayerKind::Upsample2: {
        const Tensor& in = acts[d.inputs[0]];
        const Plane p = as_plane(in);
        Tensor out({p.ch, p.h * 2, p.w * 2});
        for (int c = 0; c < p.ch; ++c)
          for (int y = 0; y < p.h * 2; ++y)
            for (int x = 0; x < p.w * 2; ++x)
              out.data[(static_cast<std::size_t>(c) * p.h * 2 + y) * p.w * 2 + x] =
                  in.data[(static_cast<std::size_t>(c) * p.h + y / 2) * p.w + x / 2];
        acts[i] = std::move(out);
        break;
      }
      case LayerKind::Concat: {
        int ch = 0;
        const Plane p0 = as_plane(acts[d.inputs[0]]);
        for (int in : d.inputs) {
          const Plane p = as_plane(acts[in]);
          if (p.h != p0.h || p.w != p0.w) throw InvalidInput("concat: spatial mismatch");
          ch += p.ch;
        }
        Tensor out({ch, p0.h, p0.w});
        std::size_t off = 0;
        for (int in : d.inputs) {
          std::copy(acts[in].data.begin(), acts[in].data.end(), out.data.begin() + off);
          off += acts[in].size();
        }
        acts[i] = std::move(out);
        break;
      }
      case LayerKind::Dense: {
        const Tensor& in = acts[d.inputs[0]];
        if (static_cast<int>(in.size()) != d.in_features)
          throw InvalidInput("dense: feature count mismatch");
        const Tensor& w = params.find("n" + std::to_string(i) + ".w").value;
        const Tensor& b = params.find("n" + std::to_string(i) + ".b").value;
        Tensor out({d.out_features});
        out.data = b.data;
        gemm_nn(d.out_features, d.in_features, 1, w.data.data(), in.data.data(), out.data.data());
        acts[i] = std::move(out);
        break;
      }
      case LayerKind::Relu: {
        Tensor out = acts[d.inputs[0]];
        for (auto& v : out.data) v = v > 0.0 ? v : 0.0;
        acts[i] = std::move(out);
        break;
      }
      case LayerKind::Sigmoid: {
        Tensor out = acts[d.inputs[0]];
        for (auto& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
        acts[i] = std::move(out);
        break;
      }
    }
  }

  Tensor result = acts[g.output];
  if (cache) {
    cache->acts = std::move(acts);
    cache->pool_argmax = std::move(argmax);
  }
  return result;
}

BackwardResult backward(const Graph& g, const ParamSet& params, const ForwardCache& cache,
                        const Tensor& upstream) {
  BackwardResult res;
  for (const auto& e : params.entries)
    res.grads.add(e.name, Tensor(e.value.shape), e.frozen);

  std::vector<Tensor> grads(g.nodes.size());
  if (!upstream.same_shape(cache.acts[g.output]))
    throw InvalidInput("backward: upstream shape mismatch");
  grads[g.output] = upstream;

  std::vector<double> cols, dcols;

  auto grad_of = [&](int node) -> Tensor& {
    if (grads[node].data.empty()) grads[node] = Tensor(cache.acts[node].shape);
    return grads[node];
  };

  for (int i = static_cast<int>(g.nodes.size()) - 1; i >= 0; --i) {
    if (grads[i].data.empty()) continue;
    const auto& d = g.nodes[i];
    const Tensor& dout = grads[i];
    switch (d.kind) {
      case LayerKind::Input:
        res.input_grad = dout;
        break;
      case LayerKind::Conv2d: {
        const Tensor& in = cache.acts[d.inputs[0]];
        const Plane p = as_plane(in);
        const int pad = d.pad == PadMode::Same ? (d.ksize - 1) / 2 : 0;
        const int oh = dout.shape[1], ow = dout.shape[2];
        const int ck2 = d.in_ch * d.ksize * d.ksize;
        im2col(in, d.ksize, pad, oh, ow, cols);

        const std::string base = "n" + std::to_string(i);
        Tensor& dw = res.grads.find(base + ".w").value;
        Tensor& db = res.grads.find(base + ".b").value;
        gemm_nt(d.out_ch, oh * ow, ck2, dout.data.data(), cols.data(), dw.data.data());
        for (int oc = 0; oc < d.out_ch; ++oc) {
          const double* plane = dout.data.data() + static_cast<std::size_t>(oc) * oh * ow;
          for (int j = 0; j < oh * ow; ++j) db.data[oc] += plane[j];
        }

        const Tensor& w = params.find(base + ".w").value;
        dcols.assign(static_cast<std::size_t>(ck2) * oh * ow, 0.0);
        gemm_tn(ck2, d.out_ch, oh * ow, w.data.data(), dout.data.data(), dcols.data());
        col2im(dcols, p.ch, p.h, p.w, d.ksize, pad, oh, ow, grad_of(d.inputs[0]));
        break;
      }
      case LayerKind::MaxPool2: {
        Tensor& din = grad_of(d.inputs[0]);
        const auto& amax = cache.pool_argmax[i];
        for (std::size_t o = 0; o < dout.size(); ++o) din.data[amax[o]] += dout.data[o];
        break;
      }
      case LayerKind::Upsample2: {
        Tensor& din = grad_of(d.inputs[0]);
        const Plane p = as_plane(cache.acts[d.inputs[0]]);
        for (int c = 0; c < p.ch; ++c)
          for (int y = 0; y < p.h * 2; ++y)
            for (int x = 0; x < p.w * 2; ++x)
              din.data[(static_cast<std::size_t>(c) * p.h + y / 2) * p.w + x / 2] +=
                  dout.data[(static_cast<std::size_t>(c) * p.h * 2 + y) * p.w * 2 + x];
        break;
      }
      case LayerKind::Concat: {
        std::size_t off = 0;
        for (int in : d.inputs) {
          Tensor& din = grad_of(in);
          for (std::size_t j = 0; j < din.size(); ++j) din.data[j] += dout.data[off + j];
          off += din.size();
        }
        break;
      }
      case LayerKind::Dense: {
        const Tensor& in = cache.acts[d.inputs[0]];
        const std::string base = "n" + std::to_string(i);
        Tensor& dw = res.grads.find(base + ".w").value;
        Tensor& db = res.grads.find(base + ".b").value;
        for (int o = 0; o < d.out_features; ++o) {
          db.data[o] += dout.data[o];
          double* dwrow = dw.data.data() + static_cast<std::size_t>(o) * d.in_features;
          for (int j = 0; j < d.in_features; ++j) dwrow[j] += dout.data[o] * in.data[j];
        }
        const Tensor& w = params.find(base + ".w").value;
        Tensor& din = grad_of(d.inputs[0]);
        gemm_tn(d.in_features, d.out_features, 1, w.data.data(), dout.data.data(), din.data.data());
        break;
      }
      case LayerKind::Relu: {
        const Tensor& in = cache.acts[d.inputs[0]];
        Tensor& din = grad_of(d.inputs[0]);
        for (std::size_t j = 0; j < in.size(); ++j)
          if (in.data[j] > 0.0) din.data[j] += dout.data[j];
        break;
      }
      case LayerKind::Sigmoid: {
        const Tensor& out = cache.acts[i];
        Tensor& din = grad_of(d.inputs[0]);
        for (std::size_t j = 0; j < out.size(); ++j)
          din.data[j] += dout.data[j] * out.data[j] * (1.0 - out.data[j]);
        break;
      }
    }
  }
  if (res.input_grad.data.empty()) res.input_grad = Tensor(cache.acts[0].shape);
  return res;
}

std::pair<Tensor, BackwardResult> forward_backward(const Graph& g, const ParamSet& params,
                                                   const Tensor& input, const Tensor& upstream) {
  ForwardCache cache;
  Tensor out = forward(g, params, input, &cache);
  return {std::move(out), backward(g, params, cache, upstream)};
}

void accumulate_grads(ParamSet& dst, const ParamSet& src) {
  if (dst.entries.size() != src.entries.size())
    throw InvalidInput("accumulate_grads: structure mismatch");
  for (std::size_t i = 0; i < dst.entries.size(); ++i) {
    auto& d = dst.entries[i].value;
    const auto& s = src.entries[i].value;
    for (std::size_t j = 0; j < d.size(); ++j) d.data[j] += s.data[j];
  }
}

void scale_grads(ParamSet& g, double factor) {
  for (auto& e : g.entries)
    for (auto& v : e.value.data) v *= factor;
}

}  // namespace rascore
