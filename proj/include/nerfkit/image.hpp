// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nerfkit/common.hpp"

namespace nerfkit {

// 8-bit RGB image, row-major, tightly packed.
struct Image8 {
  int width = 0, height = 0;
  std::vector<uint8_t> data;

  Image8() = default;
  Image8(int w, int h, uint8_t fill = 0)
      : width(w), height(h), data(size_t(w) * h * 3, fill) {}

  uint8_t* pixel(int i, int j) { return data.data() + (size_t(j) * width + i) * 3; }
  const uint8_t* pixel(int i, int j) const {
    return data.data() + (size_t(j) * width + i) * 3;
  }
  size_t pixel_count() const { return size_t(width) * height; }
};

// Float RGB image in [0, 1] nominal range.
struct ImageF {
  int width = 0, height = 0;
  std::vector<float> data;

  ImageF() = default;
  ImageF(int w, int h, float fill = 0.f)
      : width(w), height(h), data(size_t(w) * h * 3, fill) {}

  float* pixel(int i, int j) { return data.data() + (size_t(j) * width + i) * 3; }
  const float* pixel(int i, int j) const {
    return data.data() + (size_t(j) * width + i) * 3;
  }
  Vec3f rgb(int i, int j) const {
    const float* p = pixel(i, j);
    return {p[0], p[1], p[2]};
  }
  void set_rgb(int i, int j, Vec3f c) {
    float* p = pixel(i, j);
    p[0] = c.x;
    p[1] = c.y;
    p[2] = c.z;
  }
  size_t pixel_count() const { return size_t(width) * height; }
};

inline ImageF to_float(const Image8& img) {
  ImageF out(img.width, img.height);
  for (size_t i = 0; i < img.data.size(); ++i)
    out.data[i] = float(img.data[i]) / 255.0f;
  return out;
}

inline Image8 to_u8(const ImageF& img) {
  Image8 out(img.width, img.height);
  for (size_t i = 0; i < img.data.size(); ++i) {
    float v = std::clamp(img.data[i], 0.0f, 1.0f);
    out.data[i] = uint8_t(std::lround(v * 255.0f));
  }
  return out;
}

// Depth map with a validity mask; misses are 0 with valid = false.
struct DepthMap {
  int width = 0, height = 0;
  std::vector<float> depth;
  std::vector<uint8_t> valid;

  DepthMap() = default;
  DepthMap(int w, int h)
      : width(w), height(h), depth(size_t(w) * h, 0.f), valid(size_t(w) * h, 0) {}

  size_t idx(int i, int j) const { return size_t(j) * width + i; }
};

}  // namespace nerfkit
