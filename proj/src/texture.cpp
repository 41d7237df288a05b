// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/texture.hpp"

namespace nerfkit::geom {

std::vector<TexelRef> rasterize_uv(const TriangleMesh& mesh, int size) {
  std::vector<TexelRef> refs(size_t(size) * size);
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    Vec2f a = mesh.uv[tri[0]], b = mesh.uv[tri[1]], c = mesh.uv[tri[2]];
    // uv in [0,1] -> texel coordinates (pixel centers at x + 0.5)
    Vec2f pa{a.x * size, a.y * size}, pb{b.x * size, b.y * size},
        pc{c.x * size, c.y * size};
    float minx = std::min({pa.x, pb.x, pc.x}), maxx = std::max({pa.x, pb.x, pc.x});
    float miny = std::min({pa.y, pb.y, pc.y}), maxy = std::max({pa.y, pb.y, pc.y});
    int x0 = std::max(0, int(std::floor(minx)));
    int x1 = std::min(size - 1, int(std::ceil(maxx)));
    int y0 = std::max(0, int(std::floor(miny)));
    int y1 = std::min(size - 1, int(std::ceil(maxy)));
    Vec2f e0 = pb - pa, e1 = pc - pa;
    float det = e0.x * e1.y - e0.y * e1.x;
    if (std::abs(det) < 1e-12f) continue;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        Vec2f q{float(x) + 0.5f - pa.x, float(y) + 0.5f - pa.y};
        float wb = (q.x * e1.y - q.y * e1.x) / det;   // weight of vertex 1
        float wc = (e0.x * q.y - e0.y * q.x) / det;   // weight of vertex 2
        float wa = 1.f - wb - wc;
        if (wa < -1e-6f || wb < -1e-6f || wc < -1e-6f) continue;
        TexelRef& r = refs[size_t(y) * size_t(size) + size_t(x)];
        r.triangle = int(t);
        r.b0 = wa;
        r.b1 = wb;
      }
    }
  }
  return refs;
}

void dilate_texture(Image8& tex, std::vector<uint8_t>& covered, int passes) {
  int size = tex.width;
  for (int pass = 0; pass < passes; ++pass) {
    std::vector<uint8_t> next = covered;
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        if (covered[size_t(y) * size + size_t(x)]) continue;
        int acc[3] = {0, 0, 0}, cnt = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= size || ny >= size) continue;
            if (!covered[size_t(ny) * size + size_t(nx)]) continue;
            const uint8_t* p = tex.pixel(nx, ny);
            for (int k = 0; k < 3; ++k) acc[k] += p[k];
            ++cnt;
          }
        }
        if (cnt > 0) {
          uint8_t* p = tex.pixel(x, y);
          for (int k = 0; k < 3; ++k) p[k] = uint8_t(acc[k] / cnt);
          next[size_t(y) * size + size_t(x)] = 1;
        }
      }
    }
    covered.swap(next);
  }
}

}  // namespace nerfkit::geom
