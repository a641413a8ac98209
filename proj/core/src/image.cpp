#include "rascore/image.hpp"

#include <algorithm>
#include <cmath>

namespace rascore {

std::string limb_code(LimbKind k) {
  switch (k) {
    case LimbKind::HandLeft: return "LH";
    case LimbKind::HandRight: return "RH";
    case LimbKind::FootLeft: return "LF";
    case LimbKind::FootRight: return "RF";
  }
  throw InvalidInput("limb_code: bad enum value");
}

LimbKind limb_from_code(const std::string& code) {
  if (code == "LH") return LimbKind::HandLeft;
  if (code == "RH") return LimbKind::HandRight;
  if (code == "LF") return LimbKind::FootLeft;
  if (code == "RF") return LimbKind::FootRight;
  throw InvalidInput("unknown limb code: " + code);
}

UnitRaster normalize(const GrayRaster& img) {
  UnitRaster out(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = img.data[i] / 255.0;
  return out;
}

GrayRaster denormalize(const UnitRaster& img) {
  GrayRaster out(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    double v = std::clamp(img.data[i], 0.0, 1.0);
    out.data[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

GrayRaster resize_bilinear(const GrayRaster& img, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw InvalidInput("resize: non-positive target dimensions");
  GrayRaster out(out_w, out_h);
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y1 = std::min(y0 + 1, img.height - 1);
    y0 = std::clamp(y0, 0, img.height - 1);
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x1 = std::min(x0 + 1, img.width - 1);
      x0 = std::clamp(x0, 0, img.width - 1);
      double v = (1 - wy) * ((1 - wx) * img.at(x0, y0) + wx * img.at(x1, y0)) +
                 wy * ((1 - wx) * img.at(x0, y1) + wx * img.at(x1, y1));
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
    }
  }
  return out;
}

UnitRaster resize_bilinear(const UnitRaster& img, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw InvalidInput("resize: non-positive target dimensions");
  UnitRaster out(out_w, out_h);
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y1 = std::min(y0 + 1, img.height - 1);
    y0 = std::clamp(y0, 0, img.height - 1);
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x1 = std::min(x0 + 1, img.width - 1);
      x0 = std::clamp(x0, 0, img.width - 1);
      out.at(x, y) = (1 - wy) * ((1 - wx) * img.at(x0, y0) + wx * img.at(x1, y0)) +
                     wy * ((1 - wx) * img.at(x0, y1) + wx * img.at(x1, y1));
    }
  }
  return out;
}

GrayRaster resize_pad(const GrayRaster& img, int target_h, int target_w) {
  if (target_h <= 0 || target_w <= 0) throw InvalidInput("resize_pad: non-positive target dimensions");
  if (img.width == target_w && img.height == target_h) return img;

  const double s = std::min(static_cast<double>(target_h) / img.height,
                            static_cast<double>(target_w) / img.width);
  int scaled_h = std::min(target_h, static_cast<int>(std::lround(img.height * s)));
  int scaled_w = std::min(target_w, static_cast<int>(std::lround(img.width * s)));
  scaled_h = std::max(scaled_h, 1);
  scaled_w = std::max(scaled_w, 1);

  GrayRaster scaled = (scaled_h == img.height && scaled_w == img.width)
                          ? img
                          : resize_bilinear(img, scaled_h, scaled_w);

  GrayRaster out(target_w, target_h, 0);
  const int top = (target_h - scaled_h) / 2;
  const int left = (target_w - scaled_w) / 2;
  for (int y = 0; y < scaled_h; ++y)
    std::copy_n(&scaled.data[static_cast<std::size_t>(y) * scaled_w], scaled_w,
                &out.data[static_cast<std::size_t>(y + top) * target_w + left]);
  return out;
}

int crop_removed_rows(int height, LimbKind limb) {
  return is_hand(limb) ? height / 7 : height / 4;
}

GrayRaster crop_limb(const GrayRaster& img, LimbKind limb) {
  if (img.height < 8) throw InvalidInput("crop_limb: image too small (height < 8)");
  const int kept = img.height - crop_removed_rows(img.height, limb);
  GrayRaster out(img.width, kept);
  std::copy_n(img.data.begin(), out.data.size(), out.data.begin());
  return out;
}

}  // namespace rascore
