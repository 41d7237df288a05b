// SPDX-License-Identifier: Apache-2.0
//
// Least-squares conformal maps: disk-patch unwrap via a sparse linear
// least-squares solve, plus normal-clustering segmentation and atlas
// packing for closed meshes.
#pragma once

#include "nerfkit/geometry.hpp"

namespace nerfkit::geom {

// Indices into mesh.triangles forming one chart.
struct Patch {
  std::vector<uint32_t> triangles;
};

// Greedy region growth bounded by deviation from the seed normal; patches
// failing the disk check are re-grown with a tighter bound.
std::vector<Patch> segment_into_disk_patches(const TriangleMesh& mesh,
                                             double max_angle_deg = 60.0);

// Copy a patch into a standalone mesh; vertex_map[i] = original index of
// the submesh vertex i.
TriangleMesh extract_submesh(const TriangleMesh& mesh, const Patch& patch,
                             std::vector<uint32_t>* vertex_map = nullptr);

// Unwraps one connected edge-manifold patch with boundary. The two boundary
// vertices farthest apart are pinned at (0,0) and (d,0) where d is their 3D
// distance. Throws TopologyError for closed or non-manifold input.
std::vector<Vec2f> lscm_unwrap(const TriangleMesh& patch);

// Discrete conformal energy sum_T A_T |grad u - rot90(grad v)|^2 of a uv
// assignment over the patch.
double lscm_energy(const TriangleMesh& patch, std::span<const Vec2f> uv);

// uv from orthographic projection onto the best-fit plane (the trivial
// parameterization LSCM must beat).
std::vector<Vec2f> project_to_best_fit_plane(const TriangleMesh& patch);

// Segment + unwrap + pack into a unit-square atlas. Returns a mesh with
// seam vertices duplicated and per-vertex uv; `chart_of_triangle`, when
// given, receives the chart id per output triangle.
TriangleMesh unwrap_mesh(const TriangleMesh& mesh, double max_angle_deg = 60.0,
                         std::vector<int>* chart_of_triangle = nullptr);

}  // namespace nerfkit::geom
