#include <doctest.h>

#include <cmath>
#include <random>

#include "rascore/mask.hpp"

using namespace rascore;

namespace {

GrayRaster random_raster(int w, int h, std::uint64_t seed, int levels = 256) {
  GrayRaster img(w, h);
  std::mt19937_64 rng(seed);
  for (auto& p : img.data) p = static_cast<std::uint8_t>(rng() % levels);
  return img;
}

// Direct definition: H = -sum p log2 p over the window's empirical
// level distribution, reflection padding at the borders.
double entropy_at(const GrayRaster& img, int cx, int cy, int window) {
  const int r = window / 2;
  int counts[256] = {};
  for (int dy = -r; dy <= r; ++dy) {
    int y = cy + dy;
    if (y < 0) y = -y - 1;
    if (y >= img.height) y = 2 * img.height - 1 - y;
    for (int dx = -r; dx <= r; ++dx) {
      int x = cx + dx;
      if (x < 0) x = -x - 1;
      if (x >= img.width) x = 2 * img.width - 1 - x;
      ++counts[img.at(x, y)];
    }
  }
  const double n = static_cast<double>(window) * window;
  double h = 0.0;
  for (int v = 0; v < 256; ++v)
    if (counts[v]) {
      const double p = counts[v] / n;
      h -= p * std::log2(p);
    }
  return h;
}

// Independent exact Otsu: minimize the within-class variance numerator
// S_total - (S0^2/N0 + S1^2/N1), i.e. maximize S0^2*N1 + S1^2*N0 over
// the common denominator N0*N1. Ties resolve to the smallest t.
int brute_otsu(const Histogram256& hist) {
  std::int64_t total_n = 0, total_s = 0;
  for (int v = 0; v < 256; ++v) {
    total_n += hist.counts[v];
    total_s += static_cast<std::int64_t>(v) * hist.counts[v];
  }
  int best_t = -1;
  __int128 best_a = -1, best_b = 1;
  std::int64_t n0 = 0, s0 = 0;
  for (int t = 0; t <= 254; ++t) {
    n0 += hist.counts[t];
    s0 += static_cast<std::int64_t>(t) * hist.counts[t];
    const std::int64_t n1 = total_n - n0, s1 = total_s - s0;
    if (n0 == 0 || n1 == 0) continue;
    const __int128 a = static_cast<__int128>(s0) * s0 * n1 + static_cast<__int128>(s1) * s1 * n0;
    const __int128 b = static_cast<__int128>(n0) * n1;
    if (best_t < 0 || a * best_b > best_a * b) {
      best_t = t;
      best_a = a;
      best_b = b;
    }
  }
  return best_t;
}

Histogram256 random_hist(std::mt19937_64& rng) {
  Histogram256 h;
  const int bins = 2 + static_cast<int>(rng() % 30);
  for (int i = 0; i < bins; ++i) h.counts[rng() % 256] += 1 + rng() % 200;
  return h;
}

}  // namespace

TEST_CASE("entropy_map matches the direct windowed definition") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto img = random_raster(32, 24, 100 + seed, 16);
    const auto em = entropy_map(img, 9);
    double max_err = 0.0;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        max_err = std::max(max_err, std::abs(em.at(x, y) - entropy_at(img, x, y, 9)));
    CHECK(max_err < 1e-9);
  }
}

TEST_CASE("entropy of a constant raster is identically zero") {
  const auto em = entropy_map(GrayRaster(20, 20, 77), 9);
  for (double v : em.data) CHECK(v == 0.0);
}

TEST_CASE("entropy of a balanced two-level window is one bit") {
  // Columns alternate 0/1, so every 9x9 window holds levels in
  // proportions 45/36 or 36/45; a 2x2 checkerboard window is exactly
  // half and half. Use an even window... window must be odd, so check
  // the known distribution instead.
  GrayRaster img(18, 18);
  for (int y = 0; y < 18; ++y)
    for (int x = 0; x < 18; ++x) img.at(x, y) = static_cast<std::uint8_t>((x + y) % 2);
  const auto em = entropy_map(img, 3);
  // Every 3x3 window holds 5 of one level and 4 of the other.
  const double expect = -(5.0 / 9) * std::log2(5.0 / 9) - (4.0 / 9) * std::log2(4.0 / 9);
  for (double v : em.data) CHECK(v == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("otsu_threshold equals exhaustive exact minimization") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 200; ++i) {
    const auto h = random_hist(rng);
    CHECK(otsu_threshold(h) == brute_otsu(h));
  }
}

TEST_CASE("otsu two-spike histogram splits between the spikes") {
  Histogram256 h;
  h.counts[10] = 500;
  h.counts[200] = 500;
  const int t = otsu_threshold(h);
  CHECK(t >= 10);
  CHECK(t < 200);
}

TEST_CASE("within-class minimization equals between-class maximization") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const auto h = random_hist(rng);
    const int t = otsu_threshold(h);
    // The chosen split is optimal under both formulations (up to
    // floating-point slack in the diagnostic variants).
    for (int u = 0; u <= 254; ++u) {
      CHECK(otsu_within_class_variance(h, t) <= otsu_within_class_variance(h, u) + 1e-6);
      CHECK(otsu_between_class_variance(h, t) >= otsu_between_class_variance(h, u) - 1e-6);
    }
  }
}

TEST_CASE("fill_holes turns a donut into a solid disk exactly") {
  BinaryMask donut(41, 41), disk(41, 41);
  for (int y = 0; y < 41; ++y)
    for (int x = 0; x < 41; ++x) {
      const double r = std::hypot(x - 20.0, y - 20.0);
      donut.set(x, y, r <= 15 && r >= 8);
      disk.set(x, y, r <= 15);
    }
  CHECK(fill_holes(donut) == disk);
}

TEST_CASE("remove_small_components drops sub-1% specks exactly") {
  BinaryMask m(200, 200);
  for (int y = 10; y < 150; ++y)
    for (int x = 10; x < 160; ++x) m.set(x, y, true);  // 21000 px blob
  BinaryMask expect = m;
  for (int y = 180; y < 189; ++y)
    for (int x = 180; x < 190; ++x) m.set(x, y, true);  // 90 px speck < 1%
  CHECK(remove_small_components(m) == expect);
}

TEST_CASE("remove_small_components keeps components at the threshold") {
  BinaryMask m(100, 100);
  for (int y = 0; y < 50; ++y)
    for (int x = 0; x < 39; ++x) m.set(x, y, true);  // 1950
  for (int y = 60; y < 65; ++y)
    for (int x = 60; x < 70; ++x) m.set(x, y, true);  // 50 = 2.5% of 2000
  CHECK(remove_small_components(m) == m);
}

TEST_CASE("label_components uses 8-connectivity for the foreground") {
  BinaryMask m(4, 4);
  m.set(0, 0, true);
  m.set(1, 1, true);  // diagonal touch: one component
  m.set(3, 3, true);  // separate
  const auto cl = label_components(m);
  CHECK(cl.areas.size() == 2);
  CHECK(cl.labels[0] == cl.labels[5]);
  CHECK(cl.labels[15] != cl.labels[0]);
}

TEST_CASE("extract_mask rejects a constant image as 'no limb found'") {
  CHECK_THROWS_WITH_AS(extract_mask(GrayRaster(64, 64, 128)), doctest::Contains("no limb found"),
                       InvalidInput);
}

TEST_CASE("apply_mask zeroes the background only") {
  GrayRaster img(3, 1);
  img.data = {50, 100, 150};
  BinaryMask m(3, 1);
  m.set(1, 0, true);
  const auto out = apply_mask(img, m);
  CHECK(out.data[0] == 0);
  CHECK(out.data[1] == 100);
  CHECK(out.data[2] == 0);
}

TEST_CASE("mask_iou endpoints") {
  BinaryMask a(10, 10), b(10, 10);
  for (int i = 0; i < 50; ++i) a.data[i] = 1;
  CHECK(mask_iou(a, a) == 1.0);
  for (int i = 50; i < 100; ++i) b.data[i] = 1;
  CHECK(mask_iou(a, b) == 0.0);
}

TEST_CASE("resize_nearest identity and upscale block structure") {
  BinaryMask m(2, 2);
  m.set(0, 0, true);
  m.set(1, 1, true);
  CHECK(resize_nearest(m, 2, 2) == m);
  const auto big = resize_nearest(m, 4, 4);
  CHECK(big.at(0, 0));
  CHECK(big.at(1, 1));
  CHECK(!big.at(2, 0));
  CHECK(big.at(3, 3));
}
