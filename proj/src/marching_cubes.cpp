// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/marching_cubes.hpp"

#include <unordered_map>

namespace nerfkit::geom {

namespace {

// Corner offsets in the Lorensen & Cline layout.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
// The two corners joined by each of the 12 cube edges.
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

}  // namespace

TriangleMesh marching_cubes(std::span<const float> values, GridDims dims,
                            const BBoxf& box, float iso) {
  if (dims.nx < 2 || dims.ny < 2 || dims.nz < 2)
    throw UsageError("marching_cubes: need at least 2 samples per axis");
  if (values.size() != dims.vertex_count())
    throw ShapeError("marching_cubes: value count does not match dims");

  TriangleMesh mesh;
  std::unordered_map<uint64_t, uint32_t> edge_vertex;
  Vec3f ext = box.extent();
  auto lattice_pos = [&](int ix, int iy, int iz) -> Vec3f {
    return {box.min.x + ext.x * float(ix) / float(dims.nx - 1),
            box.min.y + ext.y * float(iy) / float(dims.ny - 1),
            box.min.z + ext.z * float(iz) / float(dims.nz - 1)};
  };

  for (int iz = 0; iz + 1 < dims.nz; ++iz) {
    for (int iy = 0; iy + 1 < dims.ny; ++iy) {
      for (int ix = 0; ix + 1 < dims.nx; ++ix) {
        float v[8];
        size_t vid[8];
        for (int c = 0; c < 8; ++c) {
          vid[c] = dims.index(ix + kCorner[c][0], iy + kCorner[c][1],
                              iz + kCorner[c][2]);
          v[c] = values[vid[c]];
        }
        int cube = 0;
        for (int c = 0; c < 8; ++c)
          if (v[c] < iso) cube |= (1 << c);
        int edges = kMcEdgeTable[cube];
        if (edges == 0) continue;

        uint32_t ev[12];
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          int a = kEdge[e][0], b = kEdge[e][1];
          uint64_t ka = vid[a], kb = vid[b];
          uint64_t key = ka < kb ? (ka * dims.vertex_count() + kb)
                                 : (kb * dims.vertex_count() + ka);
          auto it = edge_vertex.find(key);
          if (it != edge_vertex.end()) {
            ev[e] = it->second;
            continue;
          }
          Vec3f pa = lattice_pos(ix + kCorner[a][0], iy + kCorner[a][1],
                                 iz + kCorner[a][2]);
          Vec3f pb = lattice_pos(ix + kCorner[b][0], iy + kCorner[b][1],
                                 iz + kCorner[b][2]);
          float va = v[a], vb = v[b];
          float denom = vb - va;
          float t = std::abs(denom) < 1e-20f ? 0.5f : (iso - va) / denom;
          t = std::clamp(t, 0.0f, 1.0f);
          Vec3f p = pa + (pb - pa) * t;
          uint32_t idx = uint32_t(mesh.vertices.size());
          mesh.vertices.push_back(p);
          edge_vertex.emplace(key, idx);
          ev[e] = idx;
        }

        const int* tri = kMcTriTable[cube];
        for (int k = 0; tri[k] != -1; k += 3) {
          std::array<uint32_t, 3> t{ev[tri[k]], ev[tri[k + 1]], ev[tri[k + 2]]};
          mesh.triangles.push_back(t);
        }
      }
    }
  }
  drop_degenerate_triangles(mesh);
  return mesh;
}

}  // namespace nerfkit::geom
