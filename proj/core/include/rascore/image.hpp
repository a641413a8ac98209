#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rascore {

/// Raised when an operation's input violates its contract.
class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

/// Single-channel 8-bit image, row-major.
struct GrayRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayRaster() = default;
  GrayRaster(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw InvalidInput("GrayRaster: non-positive dimensions");
  }

  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return data.size(); }

  bool operator==(const GrayRaster&) const = default;
};

/// Single-channel image with real intensities in [0,1].
struct UnitRaster {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  UnitRaster() = default;
  UnitRaster(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw InvalidInput("UnitRaster: non-positive dimensions");
  }

  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

enum class LimbKind { HandLeft, HandRight, FootLeft, FootRight };

inline bool is_hand(LimbKind k) { return k == LimbKind::HandLeft || k == LimbKind::HandRight; }
inline bool is_left(LimbKind k) { return k == LimbKind::HandLeft || k == LimbKind::FootLeft; }

/// Two-letter code used in filenames and CSVs: LH, RH, LF, RF.
std::string limb_code(LimbKind k);
LimbKind limb_from_code(const std::string& code);

/// Scale levels 0..255 to [0,1] by dividing by 255.
UnitRaster normalize(const GrayRaster& img);

/// Inverse of normalize: round(v * 255).
GrayRaster denormalize(const UnitRaster& img);

/// Scale to fit inside target_h x target_w preserving aspect ratio
/// (bilinear), then center with black padding. Odd margins put the
/// extra pixel on the bottom/right.
GrayRaster resize_pad(const GrayRaster& img, int target_h = 1500, int target_w = 1200);

/// Plain bilinear resize to exactly out_h x out_w.
GrayRaster resize_bilinear(const GrayRaster& img, int out_h, int out_w);
UnitRaster resize_bilinear(const UnitRaster& img, int out_h, int out_w);

/// Remove the wrist/ankle region: hands lose the bottom 1/7 of rows,
/// feet the bottom 1/4 (floor of the removed amount).
GrayRaster crop_limb(const GrayRaster& img, LimbKind limb);

/// Number of rows crop_limb would remove.
int crop_removed_rows(int height, LimbKind limb);

}  // namespace rascore
