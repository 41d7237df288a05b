// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace nerfkit::data {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

[[noreturn]] void fail_decode(const std::string& path, const char* what) {
  throw FormatError("png decode failed for " + path + ": " + what);
}

}  // namespace

Image8 read_png(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open " + path);

  uint8_t sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8))
    fail_decode(path, "not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail_decode(path, "png_create_read_struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail_decode(path, "png_create_info_struct");
  }
  Image8 img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail_decode(path, "corrupt stream");
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  // Normalize everything to 8-bit RGB.
  png_byte color = png_get_color_type(png, info);
  png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_scale_16(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  img.width = int(png_get_image_width(png, info));
  img.height = int(png_get_image_height(png, info));
  img.data.resize(size_t(img.width) * img.height * 3);
  rows.resize(size_t(img.height));
  for (int j = 0; j < img.height; ++j)
    rows[size_t(j)] = img.data.data() + size_t(j) * img.width * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png(const std::string& path, const Image8& img) {
  if (img.width <= 0 || img.height <= 0) throw UsageError("write_png: empty image");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open " + path + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png write failed for " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(size_t(img.height));
  for (int j = 0; j < img.height; ++j)
    rows[size_t(j)] = const_cast<png_bytep>(img.data.data() + size_t(j) * img.width * 3);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

namespace {
constexpr char kDepthMagic[8] = {'N', 'K', 'D', 'E', 'P', 'T', 'H', '1'};
}

void write_depth_raw(const std::string& path, const DepthMap& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kDepthMagic, 8);
  uint32_t wh[2] = {uint32_t(d.width), uint32_t(d.height)};
  out.write(reinterpret_cast<const char*>(wh), 8);
  out.write(reinterpret_cast<const char*>(d.depth.data()),
            std::streamsize(d.depth.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(d.valid.data()),
            std::streamsize(d.valid.size()));
  if (!out) throw IoError("short write to " + path);
}

DepthMap read_depth_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kDepthMagic, 8) != 0)
    throw FormatError("bad depth-map magic in " + path);
  uint32_t wh[2];
  in.read(reinterpret_cast<char*>(wh), 8);
  DepthMap d{int(wh[0]), int(wh[1])};
  in.read(reinterpret_cast<char*>(d.depth.data()),
          std::streamsize(d.depth.size() * sizeof(float)));
  in.read(reinterpret_cast<char*>(d.valid.data()), std::streamsize(d.valid.size()));
  if (!in) throw FormatError("truncated depth map " + path);
  return d;
}

}  // namespace nerfkit::data
