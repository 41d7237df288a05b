// SPDX-License-Identifier: Apache-2.0
//
// Analytic synthetic scenes: sphere/plane/box primitives with Lambertian
// shading, rendered by exact ray intersection. These datasets double as the
// ground-truth oracle for rendering and geometry tests.
#pragma once

#include <optional>

#include "nerfkit/camera.hpp"
#include "nerfkit/config.hpp"
#include "nerfkit/image.hpp"

namespace nerfkit::data {

struct SpherePrim {
  Vec3d center{};
  double radius = 1;
  Vec3f albedo{0.8f, 0.8f, 0.8f};
};

struct PlanePrim {
  Vec3d normal{0, 0, 1};  // unit; plane is dot(normal, x) == offset
  double offset = 0;
  Vec3f albedo{0.8f, 0.8f, 0.8f};
};

struct BoxPrim {
  Vec3d min{}, max{};
  Vec3f albedo{0.8f, 0.8f, 0.8f};
};

struct RingSpec {
  int count = 0;
  double radius = 3.5;
  double elevation_deg = 20;
  Vec3d look_at{0, 0, 0};
};

struct SceneSpec {
  std::vector<SpherePrim> spheres;
  std::vector<PlanePrim> planes;
  std::vector<BoxPrim> boxes;
  Vec3d light_dir{-0.4, 0.3, 0.8};  // direction towards the light
  Vec3f background{1.f, 1.f, 1.f};
  BBoxf box{{-1.25f, -1.25f, -1.25f}, {1.25f, 1.25f, 1.25f}};
  RingSpec train_ring{64, 3.5, 20, {0, 0, 0}};
  RingSpec val_ring{8, 3.5, 35, {0, 0, 0}};
  double fov_deg = 45;
  int image_size = 128;

  void validate() const;
};

SceneSpec parse_scene_spec(const KeyValues& kv);
SceneSpec load_scene_spec(const std::string& path);

struct Hit {
  double t = 0;
  Vec3d normal{};
  Vec3f albedo{};
};

// Nearest positive ray-primitive intersection.
std::optional<Hit> intersect_scene(const SceneSpec& spec, Vec3d origin, Vec3d dir);

// max(0, n . l) * albedo + 0.1 ambient, clamped to [0, 1].
Vec3f shade(const SceneSpec& spec, const Hit& hit);

// Signed distance to the union of primitives.
double scene_sdf(const SceneSpec& spec, Vec3d x);

// Cameras on a ring around look_at (world z-up), azimuth-uniform.
std::vector<render::Camera> ring_cameras(const SceneSpec& spec, const RingSpec& ring);

// Exact per-pixel render + depth from one camera. This is the single code
// path shared by dataset generation and the test oracles.
void render_analytic_view(const SceneSpec& spec, const render::Camera& cam,
                          Image8& image, DepthMap& depth, int threads = 1);

struct SynthView {
  render::Camera camera;
  Image8 image;
  DepthMap depth;
  std::string split;  // "train" or "val"
};

struct SynthDataset {
  SceneSpec spec;
  std::vector<SynthView> views;
};

SynthDataset synth_scene(const SceneSpec& spec, int threads = 1);

}  // namespace nerfkit::data
