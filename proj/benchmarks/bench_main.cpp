// Micro-benchmarks for the pixel-level hot paths.

#include <benchmark/benchmark.h>

#include <random>

#include "rascore/clahe.hpp"
#include "rascore/graph.hpp"
#include "rascore/mask.hpp"

namespace {

rascore::GrayRaster random_raster(int w, int h, std::uint64_t seed) {
  rascore::GrayRaster img(w, h);
  std::mt19937_64 rng(seed);
  for (auto& p : img.data) p = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

void BM_EntropyMap(benchmark::State& state) {
  const auto img = random_raster(256, 256, 1);
  for (auto _ : state) benchmark::DoNotOptimize(rascore::entropy_map(img, 37));
}
BENCHMARK(BM_EntropyMap);

void BM_Clahe(benchmark::State& state) {
  const auto img = random_raster(1200, 1500, 2);
  for (auto _ : state) benchmark::DoNotOptimize(rascore::clahe(img));
}
BENCHMARK(BM_Clahe);

void BM_Otsu(benchmark::State& state) {
  const auto hist = rascore::histogram_of(random_raster(512, 512, 3));
  for (auto _ : state) benchmark::DoNotOptimize(rascore::otsu_threshold(hist));
}
BENCHMARK(BM_Otsu);

void BM_ConvForward(benchmark::State& state) {
  rascore::Graph g;
  g.output = g.add_relu(g.add_conv(g.add_input(), 8, 16, 3));
  auto params = rascore::init_params(g, 7);
  rascore::Tensor in({8, 64, 64});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0, 1);
  for (auto& v : in.data) v = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(rascore::forward(g, params, in, nullptr));
}
BENCHMARK(BM_ConvForward);

}  // namespace

BENCHMARK_MAIN();
