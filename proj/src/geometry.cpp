// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/geometry.hpp"

namespace nerfkit::geom {

std::vector<Vec3f> vertex_normals(const TriangleMesh& m) {
  std::vector<Vec3f> normals(m.vertices.size(), Vec3f{0.f, 0.f, 0.f});
  for (size_t t = 0; t < m.triangles.size(); ++t) {
    Vec3f n = triangle_normal(m, t);  // area-weighted by construction
    for (uint32_t v : m.triangles[t]) normals[v] += n;
  }
  return normals;
}

void drop_degenerate_triangles(TriangleMesh& m, double min_area) {
  std::vector<std::array<uint32_t, 3>> kept;
  kept.reserve(m.triangles.size());
  for (size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) continue;
    Vec3f n = triangle_normal(m, t);
    double area = 0.5 * double(norm(n));
    if (area <= min_area) continue;
    kept.push_back(tri);
  }
  m.triangles = std::move(kept);
}

}  // namespace nerfkit::geom
