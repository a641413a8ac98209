#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rascore/image.hpp"

namespace rascore {

/// Boolean image plane; true = foreground (limb).
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // 0 or 1

  BinaryMask() = default;
  BinaryMask(int w, int h, bool fill = false)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {
    if (w <= 0 || h <= 0) throw InvalidInput("BinaryMask: non-positive dimensions");
  }

  bool at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { data[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }

  std::size_t count() const;
  bool operator==(const BinaryMask&) const = default;
};

/// Per-pixel Shannon entropy in bits, values in [0, 8].
struct EntropyMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

struct Histogram256 {
  std::array<std::int64_t, 256> counts{};

  std::int64_t total() const;
  int nonzero_bins() const;
};

Histogram256 histogram_of(const GrayRaster& img);

/// Local entropy over an odd square window centered at each pixel,
/// reflection padding at borders. Window holds the empirical
/// distribution of the 8-bit levels present.
EntropyMap entropy_map(const GrayRaster& img, int window = 37);

/// Threshold minimizing within-class intensity variance
/// w0*var0 + w1*var1 over splits t in 0..254 (class 0: bins <= t).
/// Comparison is exact (integer arithmetic); ties go to the smallest t.
int otsu_threshold(const Histogram256& hist);

/// Within-class variance at a given split, for diagnostics and the
/// argmin/argmax equivalence checks.
double otsu_within_class_variance(const Histogram256& hist, int t);
double otsu_between_class_variance(const Histogram256& hist, int t);

/// Classical three-step mask extraction: local entropy, Otsu threshold
/// on the quantized entropy map, then cleanup (contour filling, sub-1%
/// component removal, corner flood fill).
BinaryMask extract_mask(const GrayRaster& img, int entropy_window = 37);

/// Keep foreground pixels, zero the background.
GrayRaster apply_mask(const GrayRaster& img, const BinaryMask& mask);
UnitRaster apply_mask(const UnitRaster& img, const BinaryMask& mask);

/// Label 8-connected foreground components; returns labels (0 =
/// background, 1..n = components) and per-component pixel counts.
struct ComponentLabels {
  std::vector<std::int32_t> labels;
  std::vector<std::int64_t> areas;  // areas[i] = area of component i+1
};
ComponentLabels label_components(const BinaryMask& mask);

/// Fill background regions not 4-connected to the image border.
BinaryMask fill_holes(const BinaryMask& mask);

/// Fill background regions not 4-connected to any of the four corners.
BinaryMask fill_from_corners(const BinaryMask& mask);

/// Remove foreground components with area < min_fraction of total
/// foreground area.
BinaryMask remove_small_components(const BinaryMask& mask, double min_fraction = 0.01);

double mask_iou(const BinaryMask& a, const BinaryMask& b);

BinaryMask resize_nearest(const BinaryMask& mask, int out_h, int out_w);

}  // namespace rascore
