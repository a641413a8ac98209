#pragma once

#include <string>
#include <vector>

#include "rascore/detect.hpp"
#include "rascore/image.hpp"

namespace rascore {

struct AnnotationBox {
  BBoxNorm box;
  std::string text;  // rendered above the box; A-Z, 0-9, '.', ':', '-', ' '
};

/// One-pixel rectangle outline in normalized coordinates.
void draw_rect(GrayRaster& img, const BBoxNorm& box, std::uint8_t value);

/// 3x5 bitmap glyphs at integer scale; unknown characters are blank.
void draw_text(GrayRaster& img, int x, int y, const std::string& text, std::uint8_t value,
               int scale = 1);

/// Copy of the image with all boxes and labels burned in.
GrayRaster annotate_image(const GrayRaster& img, const std::vector<AnnotationBox>& boxes,
                          std::uint8_t value = 255);

}  // namespace rascore
