// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "nerfkit/geometry.hpp"

namespace nerfkit::geom {

// Binary little-endian PLY: per vertex x/y/z float32 + red/green/blue uchar.
void write_ply(const std::string& path, const PointCloud& cloud);
PointCloud read_ply(const std::string& path);

// OBJ with vertex colors as extension columns; when the mesh carries a
// texture, also writes <stem>.mtl and <stem>.png next to it.
void write_obj(const std::string& path, const TriangleMesh& mesh);

}  // namespace nerfkit::geom
