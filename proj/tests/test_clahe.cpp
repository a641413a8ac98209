#include <doctest.h>

#include <cmath>
#include <random>

#include "rascore/clahe.hpp"

using namespace rascore;

namespace {

GrayRaster random_raster(int w, int h, std::uint64_t seed, int levels = 256) {
  GrayRaster img(w, h);
  std::mt19937_64 rng(seed);
  for (auto& p : img.data) p = static_cast<std::uint8_t>(rng() % levels);
  return img;
}

// Independent tile mapping for the no-clip case: plain AHE,
// m(v) = round(255 * cdf(v)) over the tile histogram.
std::uint8_t ahe_map(const GrayRaster& img, int x0, int x1, int y0, int y1, std::uint8_t v) {
  std::int64_t hist[256] = {};
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) ++hist[img.at(x, y)];
  std::int64_t cum = 0, total = 0;
  for (int u = 0; u < 256; ++u) total += hist[u];
  for (int u = 0; u <= v; ++u) cum += hist[u];
  return static_cast<std::uint8_t>(std::lround(255.0 * cum / total));
}

}  // namespace

TEST_CASE("clahe equals plain AHE of the local tile at tile centers") {
  // 68x68 with a 4x4 grid: tiles are 17 px, centers at 8, 25, 42, 59
  // (integer pixels), where the bilinear blend collapses to one tile.
  const auto img = random_raster(68, 68, 21);
  ClaheConfig cfg;
  cfg.grid_x = 4;
  cfg.grid_y = 4;
  cfg.clip_limit = 256.0;  // ceiling >= tile pixel count: no clipping
  const auto out = clahe(img, cfg);
  for (int ty = 0; ty < 4; ++ty)
    for (int tx = 0; tx < 4; ++tx) {
      const int cx = tx * 17 + 8, cy = ty * 17 + 8;
      CHECK(out.at(cx, cy) ==
            ahe_map(img, tx * 17, (tx + 1) * 17, ty * 17, (ty + 1) * 17, img.at(cx, cy)));
    }
}

TEST_CASE("clahe maps a constant image identically") {
  const GrayRaster img(40, 40, 123);
  CHECK(clahe(img) == img);
}

TEST_CASE("clahe output of a two-level image keeps the level order") {
  GrayRaster img(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) img.at(x, y) = x < 32 ? 60 : 200;
  const auto out = clahe(img);
  for (int y = 0; y < 64; ++y) CHECK(out.at(0, y) <= out.at(63, y));
}

TEST_CASE("clipping bounds the contrast amplification") {
  // A near-constant tile with a tiny perturbation: without clipping the
  // perturbed pixel jumps to an extreme; with a tight clip limit the
  // mapping stays near the identity ramp.
  GrayRaster img(32, 32, 100);
  img.at(5, 5) = 110;
  ClaheConfig tight;
  tight.grid_x = 1;
  tight.grid_y = 1;
  tight.clip_limit = 1.0;  // ceiling = npx/256 = 4: heavy clipping
  const auto out = clahe(img, tight);
  // With clip 1.0 nearly all mass is redistributed uniformly, so the
  // mapping approaches v -> round(255*(v+1)/256).
  CHECK(std::abs(static_cast<int>(out.at(0, 0)) - 100) < 15);

  ClaheConfig loose = tight;
  loose.clip_limit = 4000.0;  // no clipping: full equalization
  const auto out2 = clahe(img, loose);
  CHECK(out2.at(0, 0) > 240);  // cdf jumps to ~1023/1024 at level 100
}

TEST_CASE("clahe is deterministic and rejects bad configs") {
  const auto img = random_raster(50, 40, 22);
  CHECK(clahe(img) == clahe(img));
  ClaheConfig bad;
  bad.grid_x = 0;
  CHECK_THROWS_AS(clahe(img, bad), InvalidInput);
  ClaheConfig big;
  big.grid_x = 128;
  big.grid_y = 128;
  CHECK_THROWS_AS(clahe(img, big), InvalidInput);
}
