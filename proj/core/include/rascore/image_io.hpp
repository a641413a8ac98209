#pragma once

#include <string>

#include "rascore/image.hpp"
#include "rascore/mask.hpp"

namespace rascore {

/// Load a grayscale raster from PNG (8-bit gray or RGB, reduced by
/// ITU-601 luma weights) or binary PGM (P5). Format sniffed from the
/// file's magic bytes.
GrayRaster load_gray(const std::string& path);

void save_png(const GrayRaster& img, const std::string& path);
void save_pgm(const GrayRaster& img, const std::string& path);

/// Masks are written as 1-bit gray PNG or P4 PBM (PBM convention:
/// 1 = black; foreground is stored as black).
BinaryMask load_mask(const std::string& path);
void save_mask_png(const BinaryMask& mask, const std::string& path);
void save_mask_pbm(const BinaryMask& mask, const std::string& path);

}  // namespace rascore
