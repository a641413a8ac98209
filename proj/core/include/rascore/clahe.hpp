#pragma once

#include "rascore/image.hpp"

namespace rascore {

struct ClaheConfig {
  double clip_limit = 2.0;
  int grid_x = 8;
  int grid_y = 8;
  // 256 histogram bins, one per 8-bit level
};

/// Contrast-limited adaptive histogram equalization.
///
/// The image is divided into grid_x x grid_y tiles of near-equal size.
/// Each tile's 256-bin histogram is clipped at
/// clip_limit * tile_pixels / 256 with the excess redistributed
/// uniformly across all bins in one pass; a tile whose histogram has a
/// single nonzero bin maps identically. Per-pixel output interpolates
/// bilinearly between the mappings of the four nearest tile centers.
GrayRaster clahe(const GrayRaster& img, const ClaheConfig& cfg = {});

}  // namespace rascore
