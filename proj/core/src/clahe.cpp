#include "rascore/clahe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace rascore {

namespace {

// Per-tile intensity mapping: clipped histogram, excess redistributed
// uniformly, then m(v) = round(255 * cdf(v)). A single-level tile maps
// identically.
void tile_mapping(const GrayRaster& img, int x0, int x1, int y0, int y1, double clip_limit,
                  std::uint8_t out[256]) {
  std::int64_t hist[256] = {};
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) ++hist[img.at(x, y)];
  const std::int64_t npx = static_cast<std::int64_t>(x1 - x0) * (y1 - y0);

  int nonzero = 0;
  for (int v = 0; v < 256; ++v) nonzero += hist[v] > 0;
  if (nonzero <= 1) {
    for (int v = 0; v < 256; ++v) out[v] = static_cast<std::uint8_t>(v);
    return;
  }

  double h[256];
  const double ceiling = clip_limit * npx / 256.0;
  double excess = 0.0;
  for (int v = 0; v < 256; ++v) {
    h[v] = static_cast<double>(hist[v]);
    if (h[v] > ceiling) {
      excess += h[v] - ceiling;
      h[v] = ceiling;
    }
  }
  const double redistribute = excess / 256.0;
  double cum = 0.0, total = 0.0;
  for (int v = 0; v < 256; ++v) {
    h[v] += redistribute;
    total += h[v];
  }
  for (int v = 0; v < 256; ++v) {
    cum += h[v];
    out[v] = static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * cum / total), 0l, 255l));
  }
}

}  // namespace

GrayRaster clahe(const GrayRaster& img, const ClaheConfig& cfg) {
  if (cfg.grid_x < 1 || cfg.grid_y < 1 || cfg.clip_limit <= 0.0)
    throw InvalidInput("clahe: invalid config");
  if (img.width < cfg.grid_x || img.height < cfg.grid_y)
    throw InvalidInput("clahe: image smaller than tile grid");

  const int gx = cfg.grid_x, gy = cfg.grid_y;
  std::vector<std::array<std::uint8_t, 256>> maps(static_cast<std::size_t>(gx) * gy);
  std::vector<double> centers_x(gx), centers_y(gy);

  for (int ty = 0; ty < gy; ++ty) {
    const int y0 = ty * img.height / gy, y1 = (ty + 1) * img.height / gy;
    centers_y[ty] = (y0 + y1 - 1) / 2.0;
    for (int tx = 0; tx < gx; ++tx) {
      const int x0 = tx * img.width / gx, x1 = (tx + 1) * img.width / gx;
      centers_x[tx] = (x0 + x1 - 1) / 2.0;
      tile_mapping(img, x0, x1, y0, y1, cfg.clip_limit, maps[static_cast<std::size_t>(ty) * gx + tx].data());
    }
  }

  // Bilinear blend between the four nearest tile mappings; pixels
  // outside the center lattice clamp to the edge tiles.
  auto locate = [](double pos, const std::vector<double>& centers, int& i0, int& i1, double& w1) {
    const int n = static_cast<int>(centers.size());
    if (pos <= centers.front()) {
      i0 = i1 = 0;
      w1 = 0.0;
      return;
    }
    if (pos >= centers.back()) {
      i0 = i1 = n - 1;
      w1 = 0.0;
      return;
    }
    int i = 0;
    while (i + 1 < n && centers[i + 1] < pos) ++i;
    i0 = i;
    i1 = i + 1;
    w1 = (pos - centers[i0]) / (centers[i1] - centers[i0]);
  };

  GrayRaster out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    int ty0, ty1;
    double wy;
    locate(y, centers_y, ty0, ty1, wy);
    for (int x = 0; x < img.width; ++x) {
      int tx0, tx1;
      double wx;
      locate(x, centers_x, tx0, tx1, wx);
      const std::uint8_t v = img.at(x, y);
      const double m00 = maps[static_cast<std::size_t>(ty0) * gx + tx0][v];
      const double m01 = maps[static_cast<std::size_t>(ty0) * gx + tx1][v];
      const double m10 = maps[static_cast<std::size_t>(ty1) * gx + tx0][v];
      const double m11 = maps[static_cast<std::size_t>(ty1) * gx + tx1][v];
      const double blended = (1 - wy) * ((1 - wx) * m00 + wx * m01) + wy * ((1 - wx) * m10 + wx * m11);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(blended), 0l, 255l));
    }
  }
  return out;
}

}  // namespace rascore
