// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nerfkit/geometry.hpp"

namespace nerfkit::geom {

extern const int kMcEdgeTable[256];
extern const int kMcTriTable[256][16];

// Vertex counts per axis of a sampled scalar grid; cells = count - 1.
struct GridDims {
  int nx = 0, ny = 0, nz = 0;
  size_t vertex_count() const { return size_t(nx) * ny * nz; }
  size_t index(int ix, int iy, int iz) const {
    return (size_t(iz) * ny + iy) * nx + ix;
  }
};

// Sample fn(world point) over the lattice, parallel over z-slices with
// deterministic layout.
template <typename Fn>
std::vector<float> sample_scalar_grid(Fn&& fn, GridDims dims, const BBoxf& box,
                                      int threads = 1) {
  if (dims.nx < 2 || dims.ny < 2 || dims.nz < 2)
    throw UsageError("sample_scalar_grid: need at least 2 samples per axis");
  std::vector<float> values(dims.vertex_count());
  Vec3f ext = box.extent();
  parallel_for(size_t(dims.nz), threads, [&](size_t zb, size_t ze, int) {
    for (size_t iz = zb; iz < ze; ++iz) {
      float z = box.min.z + ext.z * float(iz) / float(dims.nz - 1);
      for (int iy = 0; iy < dims.ny; ++iy) {
        float y = box.min.y + ext.y * float(iy) / float(dims.ny - 1);
        for (int ix = 0; ix < dims.nx; ++ix) {
          float x = box.min.x + ext.x * float(ix) / float(dims.nx - 1);
          values[dims.index(ix, iy, int(iz))] = fn(Vec3f{x, y, z});
        }
      }
    }
  });
  return values;
}

// Standard 256-case marching cubes with linear edge interpolation and
// shared vertices (watertight away from grid-boundary crossings). Cells are
// processed in a fixed z-y-x order, so output is a deterministic function
// of the input grid.
TriangleMesh marching_cubes(std::span<const float> values, GridDims dims,
                            const BBoxf& box, float iso);

}  // namespace nerfkit::geom
