// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "nerfkit/image.hpp"

namespace nerfkit::data {

// Decodes any PNG to 8-bit RGB: palette/gray expanded, 16-bit channels
// scaled down by the PNG chunky scaling (65535 -> 255), alpha dropped.
Image8 read_png(const std::string& path);

void write_png(const std::string& path, const Image8& img);

// Raw float32 depth map with a small self-describing header.
void write_depth_raw(const std::string& path, const DepthMap& d);
DepthMap read_depth_raw(const std::string& path);

}  // namespace nerfkit::data
