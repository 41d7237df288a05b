// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "nerfkit/common.hpp"
#include "nerfkit/pose.hpp"

namespace nerfkit::render {

// Pinhole camera with a camera-to-world pose in the right-up-backward
// convention: the camera looks along its local -z axis.
struct Camera {
  int width = 0, height = 0;
  double fx = 0, fy = 0, cx = 0, cy = 0;
  Pose c2w;
  double near = 0.1, far = 10.0;

  void validate() const {
    if (width <= 0 || height <= 0) throw ValidationError("camera: empty image plane");
    if (fx <= 0 || fy <= 0) throw ValidationError("camera: focal length must be > 0");
    if (!(near > 0 && near < far))
      throw ValidationError("camera: need 0 < near < far");
    if (!is_rotation(c2w.rot))
      throw ValidationError("camera: rotation block must be orthonormal with det +1");
  }

  Vec3d position() const { return c2w.trans; }
};

template <typename T>
struct Ray {
  Vec3<T> origin;
  Vec3<T> dir;  // unit length
  T t_near = T(0);
  T t_far = T(1);
};

namespace detail {
template <typename T>
inline Ray<T> make_ray(const Camera& cam, double px, double py) {
  Vec3d d_cam{(px - cam.cx) / cam.fx, (py - cam.cy) / cam.fy, -1.0};
  Vec3d d_world = normalized(cam.c2w.rot * d_cam);
  Ray<T> r;
  r.origin = cam.c2w.trans.cast<T>();
  r.dir = d_world.cast<T>();
  r.t_near = T(cam.near);
  r.t_far = T(cam.far);
  return r;
}
}  // namespace detail

// Ray through the center of pixel (i, j).
template <typename T>
inline Ray<T> generate_ray(const Camera& cam, int i, int j) {
  if (i < 0 || i >= cam.width || j < 0 || j >= cam.height)
    throw BoundsError("generate_ray: pixel (" + std::to_string(i) + ", " +
                      std::to_string(j) + ") outside " + std::to_string(cam.width) +
                      "x" + std::to_string(cam.height));
  return detail::make_ray<T>(cam, i + 0.5, j + 0.5);
}

// Jittered variant: uniform position within the pixel footprint.
template <typename T>
inline Ray<T> generate_ray(const Camera& cam, int i, int j, Rng& rng) {
  if (i < 0 || i >= cam.width || j < 0 || j >= cam.height)
    throw BoundsError("generate_ray: pixel out of range");
  return detail::make_ray<T>(cam, i + double(rng.uniform()), j + double(rng.uniform()));
}

// Continuous pixel coordinates (i, j may be fractional); the half-pixel
// center offset is applied as in the integer form.
template <typename T>
inline Ray<T> generate_ray_at(const Camera& cam, double i, double j) {
  if (i < -0.5 || i >= cam.width || j < -0.5 || j >= cam.height)
    throw BoundsError("generate_ray_at: pixel out of range");
  return detail::make_ray<T>(cam, i + 0.5, j + 0.5);
}

// Intersect [t_near, t_far] with the box; empty when the ray misses.
template <typename T>
inline std::optional<std::pair<T, T>> clip_ray_to_box(const Ray<T>& ray,
                                                      const BBox<T>& box) {
  T t0 = ray.t_near, t1 = ray.t_far;
  for (int a = 0; a < 3; ++a) {
    T o = ray.origin[a], d = ray.dir[a];
    if (std::abs(d) < T(1e-12)) {
      if (o < box.min[a] || o > box.max[a]) return std::nullopt;
      continue;
    }
    T inv = T(1) / d;
    T ta = (box.min[a] - o) * inv;
    T tb = (box.max[a] - o) * inv;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 >= t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

// Look-at pose builder (world z-up hint); right-up-backward camera axes.
inline Pose look_at(Vec3d eye, Vec3d target, Vec3d up_hint = {0, 0, 1}) {
  Vec3d back = normalized(eye - target);
  Vec3d right = cross(up_hint, back);
  if (norm(right) < 1e-9) right = cross(Vec3d{0, 1, 0}, back);
  right = normalized(right);
  Vec3d up = cross(back, right);
  Pose p;
  p.rot.set_col(0, right);
  p.rot.set_col(1, up);
  p.rot.set_col(2, back);
  p.trans = eye;
  return p;
}

}  // namespace nerfkit::render
