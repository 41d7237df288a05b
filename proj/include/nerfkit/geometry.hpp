// SPDX-License-Identifier: Apache-2.0
//
// Geometry extraction: depth from transmittance, point clouds, vertex
// coloring. Meshing lives in marching_cubes.hpp, parameterization in
// lscm.hpp, texture baking in texture.hpp.
#pragma once

#include <array>
#include <optional>

#include "nerfkit/camera.hpp"
#include "nerfkit/common.hpp"
#include "nerfkit/fields.hpp"
#include "nerfkit/image.hpp"
#include "nerfkit/render.hpp"

namespace nerfkit::geom {

struct PointSource {
  int camera_id = -1;
  int px = 0, py = 0;
};

struct PointCloud {
  std::vector<Vec3d> points;  // double: extracted points sit on their ray
  std::vector<Vec3f> colors;
  std::vector<PointSource> sources;  // empty or same length as points

  void validate() const {
    if (points.size() != colors.size())
      throw ValidationError("pointcloud: points/colors length mismatch");
    if (!sources.empty() && sources.size() != points.size())
      throw ValidationError("pointcloud: sources length mismatch");
    for (const auto& p : points)
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
        throw ValidationError("pointcloud: non-finite coordinate");
  }
};

struct TriangleMesh {
  std::vector<Vec3f> vertices;
  std::vector<std::array<uint32_t, 3>> triangles;
  std::vector<Vec3f> colors;  // optional per-vertex
  std::vector<Vec2f> uv;      // optional per-vertex
  Image8 texture;             // optional, valid when width > 0

  bool has_uv() const { return !uv.empty(); }
  bool has_texture() const { return texture.width > 0; }

  void validate() const {
    for (const auto& t : triangles)
      for (uint32_t v : t)
        if (v >= vertices.size())
          throw ValidationError("mesh: triangle index out of range");
    if (!colors.empty() && colors.size() != vertices.size())
      throw ValidationError("mesh: colors length mismatch");
    if (!uv.empty() && uv.size() != vertices.size())
      throw ValidationError("mesh: uv length mismatch");
  }
};

inline Vec3f triangle_normal(const TriangleMesh& m, size_t t) {
  const auto& tri = m.triangles[t];
  Vec3f a = m.vertices[tri[0]], b = m.vertices[tri[1]], c = m.vertices[tri[2]];
  return cross(b - a, c - a);  // length = 2 * area
}

// Area-weighted vertex normals.
std::vector<Vec3f> vertex_normals(const TriangleMesh& m);

// Drop triangles with area below the threshold or repeated indices.
void drop_degenerate_triangles(TriangleMesh& m, double min_area = 1e-12);

// ---------------------------------------------------------------------------
// Depth from the transmittance profile: the sample minimizing the discrete
// forward difference (T_{i+1} - T_i)/delta_i (steepest drop), returned only
// when the total opacity clears the threshold.
// ---------------------------------------------------------------------------
template <typename T>
std::optional<T> estimate_depth(const render::RaySamples<T>& samples,
                                const render::Transmittance<T>& vis,
                                T opacity_threshold = T(0.5)) {
  size_t n = vis.alpha.size();
  if (n == 0) return std::nullopt;
  T opacity = T(1) - vis.final_trans;
  if (!(opacity > opacity_threshold)) return std::nullopt;
  T best = T(0);
  size_t best_i = 0;
  bool found = false;
  for (size_t i = 0; i < n; ++i) {
    T t_next = (i + 1 < n) ? vis.trans[i + 1] : vis.final_trans;
    T slope = (t_next - vis.trans[i]) / samples.delta[i];
    if (!found || slope < best) {
      best = slope;
      best_i = i;
      found = true;
    }
  }
  return samples.t[best_i];
}

// ---------------------------------------------------------------------------
// Backend adapters used by extraction: visibility along a ray and a color
// query at a point.
// ---------------------------------------------------------------------------
template <typename T>
struct DensityAdapter {
  const fields::DensityField<T>* field;

  render::Transmittance<T> visibility(const render::Ray<T>& ray,
                                      const render::RaySamples<T>& s) const {
    size_t n = s.t.size();
    std::vector<T> sigma(n);
    fields::SampleCache<T> cache;
    for (size_t i = 0; i < n; ++i) {
      Vec3<T> x = ray.origin + ray.dir * s.t[i];
      sigma[i] = field->query_sigma(x);
      static_cast<void>(cache);
    }
    return render::transmittance<T>(sigma, s.delta);
  }
  Vec3<T> color(Vec3<T> x, Vec3<T> d) const { return field->query(x, d).second; }
  const BBoxf& bbox() const { return field->bbox(); }
};

template <typename T>
struct SdfAdapter {
  const fields::SdfField<T>* field;

  render::Transmittance<T> visibility(const render::Ray<T>& ray,
                                      const render::RaySamples<T>& s) const {
    size_t n = s.t.size();
    std::vector<T> trunc(n);
    fields::SampleCache<T> cache;
    T b = field->sharpness();
    for (size_t i = 0; i < n; ++i) {
      Vec3<T> x = ray.origin + ray.dir * s.t[i];
      trunc[i] = fields::truncate_sdf(field->forward_sdf(x, cache), b);
    }
    return render::sdf_weights<T>(std::span<const T>(trunc), b).vis;
  }
  Vec3<T> color(Vec3<T> x, Vec3<T> d) const { return field->query_color(x, d).second; }
  const BBoxf& bbox() const { return field->bbox(); }
};

struct ExtractOptions {
  int stride = 1;
  int samples_per_ray = 128;
  float opacity_threshold = 0.5f;
  int threads = 1;
};

// Dense point cloud: one surface point per pixel with a confident depth,
// colored by querying the field at p along the viewing ray.
template <typename Adapter>
PointCloud extract_pointcloud(const Adapter& adapter,
                              const std::vector<render::Camera>& cameras,
                              const ExtractOptions& opt) {
  if (cameras.empty()) throw UsageError("extract_pointcloud: need at least one camera");
  using T = float;
  PointCloud cloud;
  BBox<T> box = adapter.bbox();
  for (size_t ci = 0; ci < cameras.size(); ++ci) {
    const auto& cam = cameras[ci];
    std::vector<int> cols, rows;
    for (int i = 0; i < cam.width; i += opt.stride) cols.push_back(i);
    for (int j = 0; j < cam.height; j += opt.stride) rows.push_back(j);
    size_t total = cols.size() * rows.size();
    std::vector<PointCloud> parts(size_t(std::max(1, opt.threads)));
    parallel_for(total, opt.threads, [&](size_t begin, size_t end, int w) {
      PointCloud& part = parts[size_t(w)];
      for (size_t k = begin; k < end; ++k) {
        int i = cols[k % cols.size()];
        int j = rows[k / cols.size()];
        auto ray = render::generate_ray<T>(cam, i, j);
        auto clip = render::clip_ray_to_box(ray, box);
        if (!clip) continue;
        ray.t_near = clip->first;
        ray.t_far = clip->second;
        auto samples =
            render::sample_along_ray<T>(ray, opt.samples_per_ray, false, nullptr);
        auto vis = adapter.visibility(ray, samples);
        auto t = estimate_depth<T>(samples, vis, T(opt.opacity_threshold));
        if (!t) continue;
        Vec3d o = ray.origin.template cast<double>();
        Vec3d d = ray.dir.template cast<double>();
        Vec3d p = o + d * double(*t);
        part.points.push_back(p);
        part.colors.push_back(adapter.color(p.cast<T>(), ray.dir));
        part.sources.push_back({int(ci), i, j});
      }
    });
    for (auto& part : parts) {
      cloud.points.insert(cloud.points.end(), part.points.begin(), part.points.end());
      cloud.colors.insert(cloud.colors.end(), part.colors.begin(), part.colors.end());
      cloud.sources.insert(cloud.sources.end(), part.sources.begin(),
                           part.sources.end());
    }
  }
  return cloud;
}

// Vertex colors: query along a viewing ray pointing against the outward
// area-weighted vertex normal.
template <typename Adapter>
void color_vertices(TriangleMesh& mesh, const Adapter& adapter) {
  if (mesh.vertices.empty()) throw UsageError("color_vertices: empty mesh");
  auto normals = vertex_normals(mesh);
  mesh.colors.resize(mesh.vertices.size());
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    Vec3f n = normals[v];
    float len = norm(n);
    Vec3f dir = len > 1e-12f ? Vec3f{-n.x / len, -n.y / len, -n.z / len}
                             : Vec3f{0.f, 0.f, -1.f};
    Vec3f c = adapter.color(mesh.vertices[v], dir);
    mesh.colors[v] = {std::clamp(c.x, 0.f, 1.f), std::clamp(c.y, 0.f, 1.f),
                      std::clamp(c.z, 0.f, 1.f)};
  }
}

}  // namespace nerfkit::geom
