#include "rascore/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace rascore {

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), 1));
}

std::int64_t Histogram256::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

int Histogram256::nonzero_bins() const {
  return static_cast<int>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
}

Histogram256 histogram_of(const GrayRaster& img) {
  Histogram256 h;
  for (auto v : img.data) ++h.counts[v];
  return h;
}

namespace {

// Symmetric reflection: -1 -> 0, -2 -> 1, n -> n-1, n+1 -> n-2.
int reflect(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

}  // namespace

EntropyMap entropy_map(const GrayRaster& img, int window) {
  if (window < 3 || window % 2 == 0) throw InvalidInput("entropy_map: window must be odd and >= 3");

  const int w = img.width, h = img.height, r = window / 2;
  const int n = window * window;

  // H = log2(n) - (1/n) * sum_i c_i*log2(c_i); tabulate c*log2(c).
  std::vector<double> clog(n + 1, 0.0);
  for (int c = 2; c <= n; ++c) clog[c] = c * std::log2(static_cast<double>(c));
  const double log2n = std::log2(static_cast<double>(n));

  EntropyMap out;
  out.width = w;
  out.height = h;
  out.data.resize(img.data.size());

  std::array<std::int32_t, 256> hist{};
  auto level = [&](int x, int y) { return img.at(reflect(x, w), reflect(y, h)); };

  for (int y = 0; y < h; ++y) {
    hist.fill(0);
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) ++hist[level(dx, y + dy)];
    double sum = 0.0;
    for (int v = 0; v < 256; ++v) sum += clog[hist[v]];

    for (int x = 0; x < w; ++x) {
      if (x > 0) {
        for (int dy = -r; dy <= r; ++dy) {
          int out_v = level(x - r - 1, y + dy);
          int in_v = level(x + r, y + dy);
          if (out_v != in_v) {
            sum -= clog[hist[out_v]] + clog[hist[in_v]];
            --hist[out_v];
            ++hist[in_v];
            sum += clog[hist[out_v]] + clog[hist[in_v]];
          }
        }
      }
      out.data[static_cast<std::size_t>(y) * w + x] = log2n - sum / n;
    }
  }
  return out;
}

// Within-class-variance comparisons run in exact integer arithmetic:
// minimizing w0*v0 + w1*v1 is equivalent to maximizing
// S0^2/N0 + S1^2/N1 = (S0^2*N1 + S1^2*N0) / (N0*N1).
int otsu_threshold(const Histogram256& hist) {
  if (hist.nonzero_bins() < 2) throw InvalidInput("otsu_threshold: degenerate histogram");

  int best_t = -1;
  __int128 best_num = 0, best_den = 1;
  std::int64_t n0 = 0, s0 = 0;
  const std::int64_t n = hist.total();
  std::int64_t s = 0;
  for (int v = 0; v < 256; ++v) s += hist.counts[v] * v;

  for (int t = 0; t < 255; ++t) {
    n0 += hist.counts[t];
    s0 += hist.counts[t] * t;
    const std::int64_t n1 = n - n0, s1 = s - s0;
    if (n0 == 0 || n1 == 0) continue;
    const __int128 num = static_cast<__int128>(s0) * s0 * n1 + static_cast<__int128>(s1) * s1 * n0;
    const __int128 den = static_cast<__int128>(n0) * n1;
    // num/den > best_num/best_den, exactly
    if (best_t < 0 || num * best_den > best_num * den) {
      best_t = t;
      best_num = num;
      best_den = den;
    }
  }
  return best_t;
}

double otsu_within_class_variance(const Histogram256& hist, int t) {
  double n0 = 0, s0 = 0, ss0 = 0, n1 = 0, s1 = 0, ss1 = 0;
  for (int v = 0; v < 256; ++v) {
    double c = static_cast<double>(hist.counts[v]);
    if (v <= t) {
      n0 += c;
      s0 += c * v;
      ss0 += c * v * v;
    } else {
      n1 += c;
      s1 += c * v;
      ss1 += c * v * v;
    }
  }
  const double n = n0 + n1;
  double var0 = n0 > 0 ? ss0 / n0 - (s0 / n0) * (s0 / n0) : 0.0;
  double var1 = n1 > 0 ? ss1 / n1 - (s1 / n1) * (s1 / n1) : 0.0;
  return (n0 / n) * var0 + (n1 / n) * var1;
}

double otsu_between_class_variance(const Histogram256& hist, int t) {
  double n0 = 0, s0 = 0, n1 = 0, s1 = 0;
  for (int v = 0; v < 256; ++v) {
    double c = static_cast<double>(hist.counts[v]);
    if (v <= t) {
      n0 += c;
      s0 += c * v;
    } else {
      n1 += c;
      s1 += c * v;
    }
  }
  const double n = n0 + n1;
  if (n0 == 0 || n1 == 0) return 0.0;
  const double m0 = s0 / n0, m1 = s1 / n1;
  return (n0 / n) * (n1 / n) * (m0 - m1) * (m0 - m1);
}

ComponentLabels label_components(const BinaryMask& mask) {
  ComponentLabels out;
  out.labels.assign(mask.data.size(), 0);
  const int w = mask.width, h = mask.height;
  std::vector<std::int32_t> stack;
  std::int32_t next = 0;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      std::size_t i0 = static_cast<std::size_t>(y0) * w + x0;
      if (!mask.data[i0] || out.labels[i0]) continue;
      ++next;
      std::int64_t area = 0;
      stack.push_back(static_cast<std::int32_t>(i0));
      out.labels[i0] = next;
      while (!stack.empty()) {
        std::int32_t i = stack.back();
        stack.pop_back();
        ++area;
        int x = i % w, y = i / w;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            std::size_t j = static_cast<std::size_t>(ny) * w + nx;
            if (mask.data[j] && !out.labels[j]) {
              out.labels[j] = next;
              stack.push_back(static_cast<std::int32_t>(j));
            }
          }
        }
      }
      out.areas.push_back(area);
    }
  }
  return out;
}

namespace {

// Flood the background (4-connected) from the given seed pixels;
// returns reachability per pixel.
std::vector<std::uint8_t> flood_background(const BinaryMask& mask,
                                           const std::vector<std::pair<int, int>>& seeds) {
  const int w = mask.width, h = mask.height;
  std::vector<std::uint8_t> reached(mask.data.size(), 0);
  std::vector<std::int32_t> stack;
  for (auto [x, y] : seeds) {
    std::size_t i = static_cast<std::size_t>(y) * w + x;
    if (mask.data[i] || reached[i]) continue;
    reached[i] = 1;
    stack.push_back(static_cast<std::int32_t>(i));
  }
  static const int dx[4] = {1, -1, 0, 0};
  static const int dy[4] = {0, 0, 1, -1};
  while (!stack.empty()) {
    std::int32_t i = stack.back();
    stack.pop_back();
    int x = i % w, y = i / w;
    for (int d = 0; d < 4; ++d) {
      int nx = x + dx[d], ny = y + dy[d];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      std::size_t j = static_cast<std::size_t>(ny) * w + nx;
      if (!mask.data[j] && !reached[j]) {
        reached[j] = 1;
        stack.push_back(static_cast<std::int32_t>(j));
      }
    }
  }
  return reached;
}

}  // namespace

BinaryMask fill_holes(const BinaryMask& mask) {
  std::vector<std::pair<int, int>> border;
  for (int x = 0; x < mask.width; ++x) {
    border.emplace_back(x, 0);
    border.emplace_back(x, mask.height - 1);
  }
  for (int y = 0; y < mask.height; ++y) {
    border.emplace_back(0, y);
    border.emplace_back(mask.width - 1, y);
  }
  auto reached = flood_background(mask, border);
  BinaryMask out = mask;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    if (!out.data[i] && !reached[i]) out.data[i] = 1;
  return out;
}

BinaryMask fill_from_corners(const BinaryMask& mask) {
  const std::vector<std::pair<int, int>> corners = {
      {0, 0}, {mask.width - 1, 0}, {0, mask.height - 1}, {mask.width - 1, mask.height - 1}};
  auto reached = flood_background(mask, corners);
  BinaryMask out = mask;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    if (!out.data[i] && !reached[i]) out.data[i] = 1;
  return out;
}

BinaryMask remove_small_components(const BinaryMask& mask, double min_fraction) {
  auto comp = label_components(mask);
  const std::int64_t total = std::accumulate(comp.areas.begin(), comp.areas.end(), std::int64_t{0});
  if (total == 0) return mask;
  BinaryMask out = mask;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    if (out.data[i] && comp.areas[comp.labels[i] - 1] < min_fraction * total) out.data[i] = 0;
  }
  return out;
}

BinaryMask extract_mask(const GrayRaster& img, int entropy_window) {
  EntropyMap ent = entropy_map(img, entropy_window);

  const auto [mn_it, mx_it] = std::minmax_element(ent.data.begin(), ent.data.end());
  const double mn = *mn_it, mx = *mx_it;
  if (mx - mn < 1e-12) throw InvalidInput("extract_mask: no limb found");

  // Quantize the entropy map to 256 uniform bins over [min, max] and
  // threshold with Otsu; foreground is the above-threshold class.
  GrayRaster quant(ent.width, ent.height);
  const double scale = 256.0 / (mx - mn);
  for (std::size_t i = 0; i < ent.data.size(); ++i) {
    int q = static_cast<int>((ent.data[i] - mn) * scale);
    quant.data[i] = static_cast<std::uint8_t>(std::clamp(q, 0, 255));
  }
  int t;
  try {
    t = otsu_threshold(histogram_of(quant));
  } catch (const InvalidInput&) {
    throw InvalidInput("extract_mask: no limb found");
  }

  BinaryMask fg(quant.width, quant.height);
  for (std::size_t i = 0; i < fg.data.size(); ++i) fg.data[i] = quant.data[i] > t;

  fg = fill_holes(fg);
  fg = remove_small_components(fg, 0.01);
  fg = fill_from_corners(fg);
  return fg;
}

GrayRaster apply_mask(const GrayRaster& img, const BinaryMask& mask) {
  if (img.width != mask.width || img.height != mask.height)
    throw InvalidInput("apply_mask: dimension mismatch");
  GrayRaster out = img;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    if (!mask.data[i]) out.data[i] = 0;
  return out;
}

UnitRaster apply_mask(const UnitRaster& img, const BinaryMask& mask) {
  if (img.width != mask.width || img.height != mask.height)
    throw InvalidInput("apply_mask: dimension mismatch");
  UnitRaster out = img;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    if (!mask.data[i]) out.data[i] = 0.0;
  return out;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.width != b.width || a.height != b.height) throw InvalidInput("mask_iou: dimension mismatch");
  std::int64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    inter += a.data[i] & b.data[i];
    uni += a.data[i] | b.data[i];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

BinaryMask resize_nearest(const BinaryMask& mask, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw InvalidInput("resize_nearest: non-positive dimensions");
  BinaryMask out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    int sy = std::min(mask.height - 1, y * mask.height / out_h);
    for (int x = 0; x < out_w; ++x) {
      int sx = std::min(mask.width - 1, x * mask.width / out_w);
      out.set(x, y, mask.at(sx, sy));
    }
  }
  return out;
}

}  // namespace rascore
