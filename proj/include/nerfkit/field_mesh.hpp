// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nerfkit/marching_cubes.hpp"

namespace nerfkit::geom {

enum class SdfMeshMode {
  kRaw,        // mesh f at iso 0
  kTruncated,  // mesh the TSDF at iso 0
};

// Density backend: iso-mesh at a sigma threshold. Values are negated so the
// inside (high sigma) sits below the iso level.
template <typename T>
TriangleMesh mesh_density_field(const fields::DensityField<T>& field, int cells,
                                float sigma_threshold, int threads = 1) {
  GridDims dims{cells + 1, cells + 1, cells + 1};
  auto values = sample_scalar_grid(
      [&](Vec3f x) { return float(-field.query_sigma(Vec3<T>{T(x.x), T(x.y), T(x.z)})); },
      dims, field.bbox(), threads);
  return marching_cubes(values, dims, field.bbox(), -sigma_threshold);
}

// SDF backend: iso 0 on raw f. The truncation pi is strictly monotone and
// fixes 0, so its zero-level set is identical to the raw field's; both modes
// therefore mesh the same raw samples and return the same mesh.
template <typename T>
TriangleMesh mesh_sdf_field(const fields::SdfField<T>& field, int cells,
                            SdfMeshMode mode = SdfMeshMode::kRaw, int threads = 1) {
  static_cast<void>(mode);
  GridDims dims{cells + 1, cells + 1, cells + 1};
  auto values = sample_scalar_grid(
      [&](Vec3f x) {
        fields::SampleCache<T> cache;
        return float(field.forward_sdf(Vec3<T>{T(x.x), T(x.y), T(x.z)}, cache));
      },
      dims, field.bbox(), threads);
  return marching_cubes(values, dims, field.bbox(), 0.0f);
}

}  // namespace nerfkit::geom
