// SPDX-License-Identifier: Apache-2.0
//
// Texture baking: rasterize every uv chart, query the field color at the
// corresponding surface point, and dilate chart borders outward.
#pragma once

#include "nerfkit/geometry.hpp"
#include "nerfkit/image.hpp"

namespace nerfkit::geom {

// Per-texel inverse mapping produced by the rasterizer.
struct TexelRef {
  int triangle = -1;      // -1 = not covered
  float b0 = 0, b1 = 0;   // barycentric weights of vertices 0 and 1
};

// Rasterizes mesh.uv (atlas in [0,1]^2) at size x size; refs[t] describes
// the surface point each covered texel maps to.
std::vector<TexelRef> rasterize_uv(const TriangleMesh& mesh, int size);

void dilate_texture(Image8& tex, std::vector<uint8_t>& covered, int passes = 4);

template <typename Adapter>
Image8 bake_texture(const TriangleMesh& mesh, const Adapter& adapter, int size,
                    int threads = 1) {
  if (!mesh.has_uv()) throw UsageError("bake_texture: mesh has no uv coordinates");
  if (size < 4) throw UsageError("bake_texture: texture size too small");
  std::vector<TexelRef> refs = rasterize_uv(mesh, size);
  auto normals = vertex_normals(mesh);
  Image8 tex(size, size, 0);
  std::vector<uint8_t> covered(size_t(size) * size, 0);

  parallel_for(size_t(size), threads, [&](size_t yb, size_t ye, int) {
    for (size_t y = yb; y < ye; ++y) {
      for (int x = 0; x < size; ++x) {
        const TexelRef& r = refs[y * size_t(size) + size_t(x)];
        if (r.triangle < 0) continue;
        const auto& tri = mesh.triangles[size_t(r.triangle)];
        float b2 = 1.f - r.b0 - r.b1;
        Vec3f p = mesh.vertices[tri[0]] * r.b0 + mesh.vertices[tri[1]] * r.b1 +
                  mesh.vertices[tri[2]] * b2;
        Vec3f n = normals[tri[0]] * r.b0 + normals[tri[1]] * r.b1 +
                  normals[tri[2]] * b2;
        float len = norm(n);
        Vec3f dir = len > 1e-12f ? Vec3f{-n.x / len, -n.y / len, -n.z / len}
                                 : Vec3f{0.f, 0.f, -1.f};
        Vec3f c = adapter.color(p, dir);
        uint8_t* px = tex.pixel(x, int(y));
        for (int k = 0; k < 3; ++k)
          px[k] = uint8_t(std::lround(std::clamp(c[k], 0.f, 1.f) * 255.f));
        covered[y * size_t(size) + size_t(x)] = 1;
      }
    }
  });
  dilate_texture(tex, covered);
  return tex;
}

}  // namespace nerfkit::geom
