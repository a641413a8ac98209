#include "rascore/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace rascore {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InvalidInput(path + ": " + what);
}

GrayRaster load_png_gray(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) fail(path, "unreadable");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "png init failed");
  }
  std::vector<png_bytep> rows;
  GrayRaster out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "unreadable (corrupt PNG)");
  }
  png_init_io(png, f.get());
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  if (w == 0 || h == 0) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "zero-dimension image");
  }
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16) png_set_strip_16(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "unsupported channel count");
  }

  std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h * channels);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + static_cast<std::size_t>(y) * w * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  out = GrayRaster(static_cast<int>(w), static_cast<int>(h));
  if (channels == 1) {
    std::memcpy(out.data.data(), raw.data(), out.data.size());
  } else {
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      const std::uint8_t* p = &raw[i * 3];
      // ITU-601 luma
      double y601 = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
      out.data[i] = static_cast<std::uint8_t>(y601 + 0.5);
    }
  }
  return out;
}

void skip_pnm_space(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

GrayRaster load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "unreadable");
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P5") fail(path, "unsupported format");
  int w = 0, h = 0, maxval = 0;
  skip_pnm_space(in);
  in >> w;
  skip_pnm_space(in);
  in >> h;
  skip_pnm_space(in);
  in >> maxval;
  in.get();  // single whitespace before raster
  if (!in || w <= 0 || h <= 0) fail(path, "zero-dimension image");
  if (maxval != 255) fail(path, "unsupported format (maxval != 255)");
  GrayRaster out(w, h);
  in.read(reinterpret_cast<char*>(out.data.data()), static_cast<std::streamsize>(out.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(out.data.size())) fail(path, "unreadable (truncated)");
  return out;
}

}  // namespace

GrayRaster load_gray(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) fail(path, "unreadable");
  unsigned char magic[8] = {};
  probe.read(reinterpret_cast<char*>(magic), 8);
  if (probe.gcount() < 2) fail(path, "unreadable");
  probe.close();

  static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (std::memcmp(magic, png_sig, 8) == 0) return load_png_gray(path);
  if (magic[0] == 'P' && magic[1] == '5') return load_pgm(path);
  fail(path, "unsupported format");
}

void save_png(const GrayRaster& img, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) fail(path, "unwritable");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(path, "png init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "png write failed");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(&img.data[static_cast<std::size_t>(y) * img.width]));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_pgm(const GrayRaster& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "unwritable");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) fail(path, "write failed");
}

void save_mask_png(const BinaryMask& mask, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) fail(path, "unwritable");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(path, "png init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "png write failed");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, mask.width, mask.height, 1, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int stride = (mask.width + 7) / 8;
  std::vector<std::uint8_t> row(stride);
  for (int y = 0; y < mask.height; ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) row[x / 8] |= static_cast<std::uint8_t>(0x80 >> (x % 8));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_mask_pbm(const BinaryMask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "unwritable");
  out << "P4\n" << mask.width << " " << mask.height << "\n";
  const int stride = (mask.width + 7) / 8;
  std::vector<std::uint8_t> row(stride);
  for (int y = 0; y < mask.height; ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) row[x / 8] |= static_cast<std::uint8_t>(0x80 >> (x % 8));
    out.write(reinterpret_cast<const char*>(row.data()), stride);
  }
  if (!out) fail(path, "write failed");
}

BinaryMask load_mask(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) fail(path, "unreadable");
  unsigned char magic[2] = {};
  probe.read(reinterpret_cast<char*>(magic), 2);
  probe.close();

  if (magic[0] == 'P' && magic[1] == '4') {
    std::ifstream in(path, std::ios::binary);
    std::string m(2, '\0');
    in.read(m.data(), 2);
    int w = 0, h = 0;
    skip_pnm_space(in);
    in >> w;
    skip_pnm_space(in);
    in >> h;
    in.get();
    if (!in || w <= 0 || h <= 0) fail(path, "zero-dimension image");
    BinaryMask mask(w, h);
    const int stride = (w + 7) / 8;
    std::vector<std::uint8_t> row(stride);
    for (int y = 0; y < h; ++y) {
      in.read(reinterpret_cast<char*>(row.data()), stride);
      if (!in) fail(path, "unreadable (truncated)");
      for (int x = 0; x < w; ++x) mask.set(x, y, (row[x / 8] >> (7 - x % 8)) & 1);
    }
    return mask;
  }

  // PNG path: any nonzero pixel is foreground.
  GrayRaster g = load_png_gray(path);
  BinaryMask mask(g.width, g.height);
  for (std::size_t i = 0; i < g.data.size(); ++i) mask.data[i] = g.data[i] != 0;
  return mask;
}

}  // namespace rascore
