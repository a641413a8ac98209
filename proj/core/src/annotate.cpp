#include "rascore/annotate.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace rascore {

namespace {

// 3x5 glyphs, one byte per row, bits 2..0 = left..right pixel.
using Glyph = std::array<std::uint8_t, 5>;

Glyph glyph_for(char c) {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case '0': return {7, 5, 5, 5, 7};
    case '1': return {2, 6, 2, 2, 7};
    case '2': return {7, 1, 7, 4, 7};
    case '3': return {7, 1, 7, 1, 7};
    case '4': return {5, 5, 7, 1, 1};
    case '5': return {7, 4, 7, 1, 7};
    case '6': return {7, 4, 7, 5, 7};
    case '7': return {7, 1, 1, 1, 1};
    case '8': return {7, 5, 7, 5, 7};
    case '9': return {7, 5, 7, 1, 7};
    case 'A': return {7, 5, 7, 5, 5};
    case 'B': return {6, 5, 6, 5, 6};
    case 'C': return {7, 4, 4, 4, 7};
    case 'D': return {6, 5, 5, 5, 6};
    case 'E': return {7, 4, 7, 4, 7};
    case 'F': return {7, 4, 7, 4, 4};
    case 'G': return {7, 4, 5, 5, 7};
    case 'H': return {5, 5, 7, 5, 5};
    case 'I': return {7, 2, 2, 2, 7};
    case 'J': return {1, 1, 1, 5, 7};
    case 'K': return {5, 6, 4, 6, 5};
    case 'L': return {4, 4, 4, 4, 7};
    case 'M': return {5, 7, 7, 5, 5};
    case 'N': return {6, 5, 5, 5, 5};
    case 'O': return {7, 5, 5, 5, 7};
    case 'P': return {7, 5, 7, 4, 4};
    case 'Q': return {7, 5, 5, 7, 1};
    case 'R': return {7, 5, 6, 5, 5};
    case 'S': return {7, 4, 7, 1, 7};
    case 'T': return {7, 2, 2, 2, 2};
    case 'U': return {5, 5, 5, 5, 7};
    case 'V': return {5, 5, 5, 5, 2};
    case 'W': return {5, 5, 7, 7, 5};
    case 'X': return {5, 5, 2, 5, 5};
    case 'Y': return {5, 5, 2, 2, 2};
    case 'Z': return {7, 1, 2, 4, 7};
    case '.': return {0, 0, 0, 0, 2};
    case ':': return {0, 2, 0, 2, 0};
    case '-': return {0, 0, 7, 0, 0};
    default: return {0, 0, 0, 0, 0};
  }
}

void put(GrayRaster& img, int x, int y, std::uint8_t v) {
  if (x >= 0 && x < img.width && y >= 0 && y < img.height) img.at(x, y) = v;
}

}  // namespace

void draw_rect(GrayRaster& img, const BBoxNorm& box, std::uint8_t value) {
  const int x0 = std::clamp(static_cast<int>((box.cx - box.w / 2) * img.width), 0, img.width - 1);
  const int x1 = std::clamp(static_cast<int>((box.cx + box.w / 2) * img.width), 0, img.width - 1);
  const int y0 = std::clamp(static_cast<int>((box.cy - box.h / 2) * img.height), 0, img.height - 1);
  const int y1 = std::clamp(static_cast<int>((box.cy + box.h / 2) * img.height), 0, img.height - 1);
  for (int x = x0; x <= x1; ++x) {
    put(img, x, y0, value);
    put(img, x, y1, value);
  }
  for (int y = y0; y <= y1; ++y) {
    put(img, x0, y, value);
    put(img, x1, y, value);
  }
}

void draw_text(GrayRaster& img, int x, int y, const std::string& text, std::uint8_t value,
               int scale) {
  int cx = x;
  for (char c : text) {
    const Glyph g = glyph_for(c);
    for (int row = 0; row < 5; ++row)
      for (int col = 0; col < 3; ++col)
        if (g[row] & (4 >> col))
          for (int sy = 0; sy < scale; ++sy)
            for (int sx = 0; sx < scale; ++sx)
              put(img, cx + col * scale + sx, y + row * scale + sy, value);
    cx += 4 * scale;
  }
}

GrayRaster annotate_image(const GrayRaster& img, const std::vector<AnnotationBox>& boxes,
                          std::uint8_t value) {
  GrayRaster out = img;
  const int scale = std::max(1, img.width / 320);
  for (const auto& b : boxes) {
    draw_rect(out, b.box, value);
    const int x = static_cast<int>((b.box.cx - b.box.w / 2) * img.width);
    const int y = static_cast<int>((b.box.cy - b.box.h / 2) * img.height) - 6 * scale;
    draw_text(out, std::max(0, x), std::max(0, y), b.text, value, scale);
  }
  return out;
}

}  // namespace rascore
