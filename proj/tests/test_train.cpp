// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "nerfkit/trainer.hpp"
#include "oracles.hpp"

using namespace nerfkit;
using namespace nerfkit::train;

namespace {

grid::HashGridConfig micro_grid() {
  grid::HashGridConfig c;
  c.levels = 2;  // micro-configuration
  c.features_per_level = 2;
  c.table_size = 1u << 10;
  c.base_resolution = 4;
  c.max_resolution = 8;
  c.bbox = {{-1.f, -1.f, -1.f}, {1.f, 1.f, 1.f}};
  return c;
}

render::Camera micro_camera(int size = 4) {
  render::Camera cam;
  cam.width = cam.height = size;
  cam.fx = cam.fy = double(size);
  cam.cx = cam.cy = size / 2.0;
  cam.c2w = render::look_at({0.3, -2.4, 0.9}, {0, 0, 0});
  cam.near = 0.5;
  cam.far = 5.0;
  return cam;
}

// 4x4 image worth of rays with arbitrary (but fixed) target colors.
template <typename T>
BatchPlan<T> micro_plan(bool with_eikonal) {
  BatchPlan<T> plan;
  plan.stratified = false;
  render::Camera cam = micro_camera();
  Rng rng(424242);
  for (int j = 0; j < cam.height; ++j) {
    for (int i = 0; i < cam.width; ++i) {
      plan.rays.push_back(render::generate_ray<T>(cam, i, j));
      plan.gt.push_back(
          {T(rng.uniform()), T(rng.uniform()), T(rng.uniform())});
    }
  }
  if (with_eikonal) {
    for (int m = 0; m < 4; ++m)
      plan.eikonal_points.push_back({T(rng.uniform(-0.9f, 0.9f)),
                                     T(rng.uniform(-0.9f, 0.9f)),
                                     T(rng.uniform(-0.9f, 0.9f))});
  }
  return plan;
}

TrainConfig micro_config(Backend backend) {
  TrainConfig cfg;
  cfg.backend = backend;
  cfg.rays_per_batch = 16;
  cfg.samples_per_ray = 8;
  cfg.threads = 1;
  cfg.alpha = 1.0f;
  cfg.beta = 0.1f;
  cfg.eikonal_points = 4;
  cfg.stratified = false;
  return cfg;
}

}  // namespace

TEST_CASE("color_loss: zero at equality, channel-mean convention, symmetric") {
  std::vector<Vec3d> a{{0.1, 0.2, 0.3}}, b{{0.1, 0.2, 0.3}};
  CHECK(color_loss<double>(a, b) == 0.0);
  std::vector<Vec3d> c{{0.6, 0.2, 0.3}};  // one channel off by 0.5
  CHECK(color_loss<double>(c, b) == doctest::Approx(0.25 / 3.0).epsilon(1e-12));
  Rng rng(1);
  std::vector<Vec3d> p, q;
  for (int i = 0; i < 10; ++i) {
    p.push_back({double(rng.uniform()), double(rng.uniform()), double(rng.uniform())});
    q.push_back({double(rng.uniform()), double(rng.uniform()), double(rng.uniform())});
  }
  CHECK(color_loss<double>(p, q) == doctest::Approx(color_loss<double>(q, p)));
  std::vector<Vec3d> empty;
  CHECK_THROWS_AS(color_loss<double>(empty, empty), UsageError);
}

TEST_CASE("eikonal_loss: unit gradients, direct substitution, analytic sphere") {
  std::vector<Vec3d> unit{{1, 0, 0}, {0, -1, 0}};
  CHECK(eikonal_loss<double>(unit) == 0.0);
  std::vector<Vec3d> two{{2, 0, 0}};
  CHECK(eikonal_loss<double>(two) == doctest::Approx(1.0));
  Rng rng(2);
  std::vector<Vec3d> sphere_grads;
  for (int i = 0; i < 100; ++i) {
    Vec3d x{double(rng.uniform(-1.f, 1.f)), double(rng.uniform(-1.f, 1.f)),
            double(rng.uniform(-1.f, 1.f))};
    if (norm(x) < 1e-3) continue;
    sphere_grads.push_back(x / norm(x));  // gradient of |x| - r
  }
  CHECK(eikonal_loss<double>(sphere_grads) <= 1e-12);
  std::vector<Vec3d> empty;
  CHECK_THROWS_AS(eikonal_loss<double>(empty), UsageError);
}

TEST_CASE("total_loss arithmetic") {
  CHECK(total_loss(0.5, 123.0, 1.0, 0.0) == doctest::Approx(0.5));
  CHECK(total_loss(2.0, 4.0, 0.5, 0.5) == doctest::Approx(3.0));
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    double lc = double(rng.uniform()), le = double(rng.uniform());
    double a = double(rng.uniform()), b = double(rng.uniform());
    CHECK(total_loss(lc, le, a, b) >= 0.0);
  }
}

TEST_CASE("train config invariants") {
  TrainConfig cfg = micro_config(Backend::kDensity);
  cfg.alpha = 0;
  cfg.beta = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = micro_config(Backend::kDensity);
  cfg.rays_per_batch = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = micro_config(Backend::kDensity);
  cfg.beta = 0.7f;  // ignored by the density backend
  CHECK(cfg.effective_beta() == 0.0f);
}

TEST_CASE("lr = 0 leaves parameters bitwise unchanged but reports metrics") {
  fields::DensityField<float> field(micro_grid());
  Rng rng(4);
  field.init(rng);
  auto before = field.params();
  TrainConfig cfg = micro_config(Backend::kDensity);
  cfg.lr = 0.0f;
  StepContext ctx;
  ctx.adam = nn::AdamState<float>(field.params().size());
  ctx.lr_scale.assign(field.params().size(), 1.0f);
  auto plan = micro_plan<float>(false);
  auto stats = train_step(field, ctx, plan, cfg);
  CHECK(std::memcmp(field.params().data(), before.data(),
                    before.size() * sizeof(float)) == 0);
  CHECK(std::isfinite(stats.l_color));
  CHECK(stats.samples > 0);
}

TEST_CASE("single-ray overfit drives the color loss below 1e-4") {
  fields::DensityField<float> field(micro_grid());
  Rng rng(5);
  field.init(rng);
  TrainConfig cfg = micro_config(Backend::kDensity);
  cfg.lr = 1e-2f;
  cfg.lr_grid_scale = 10.0f;
  StepContext ctx;
  ctx.adam = nn::AdamState<float>(field.params().size());
  ctx.lr_scale.assign(field.params().size(), 1.0f);
  for (const auto& e : field.layout().entries())
    if (e.name.rfind("grid.", 0) == 0)
      for (size_t i = 0; i < e.count; ++i) ctx.lr_scale[e.offset + i] = 10.0f;

  BatchPlan<float> plan;
  plan.stratified = false;
  render::Camera cam = micro_camera();
  plan.rays.push_back(render::generate_ray<float>(cam, 2, 1));
  plan.gt.push_back({0.2f, 0.7f, 0.4f});

  float last = 1e9f;
  for (int i = 0; i < 500; ++i) last = train_step(field, ctx, plan, cfg).l_color;
  CHECK(last < 1e-4f);
}

TEST_CASE("fixed seed reproduces the loss trajectory exactly") {
  data::SceneSpec spec;
  spec.image_size = 16;
  spec.spheres = {{{0, 0, 0}, 0.8, {0.9f, 0.3f, 0.2f}}};
  spec.train_ring = {4, 3.0, 15, {0, 0, 0}};
  spec.val_ring = {0, 3.0, 35, {0, 0, 0}};
  auto synth = data::synth_scene(spec);
  data::Dataset ds;
  ds.box = spec.box;
  ds.background = spec.background;
  for (const auto& v : synth.views)
    ds.views.push_back({v.camera, v.split, "", "", to_float(v.image), v.depth, true});

  TrainConfig cfg = micro_config(Backend::kDensity);
  cfg.iterations = 25;
  cfg.rays_per_batch = 32;
  cfg.seed = 99;
  cfg.stratified = true;
  grid::HashGridConfig gc = micro_grid();
  auto r1 = train::train(ds, cfg, gc);
  auto r2 = train::train(ds, cfg, gc);
  REQUIRE(r1.density != nullptr);
  REQUIRE(r2.density != nullptr);
  CHECK(r1.density->params() == r2.density->params());
  REQUIRE(r1.log.size() == r2.log.size());
  for (size_t i = 0; i < r1.log.size(); ++i)
    CHECK(r1.log[i].l_color == r2.log[i].l_color);
}

TEST_CASE("density backend never evaluates the eikonal term") {
  fields::DensityField<float> field(micro_grid());
  Rng rng(6);
  field.init(rng);
  TrainConfig cfg = micro_config(Backend::kDensity);
  auto plan = micro_plan<float>(false);
  std::vector<float> grad(field.params().size(), 0.f);
  auto stats = density_batch_grad<float>(field, plan, cfg, std::span<float>(grad));
  CHECK(stats.l_eik == 0.0f);
  CHECK(stats.total == doctest::Approx(cfg.alpha * stats.l_color));
}

TEST_CASE("non-finite loss raises a train error and leaves state alone") {
  fields::DensityField<float> field(micro_grid());
  Rng rng(7);
  field.init(rng);
  field.params()[field.params().size() / 2] = std::numeric_limits<float>::quiet_NaN();
  TrainConfig cfg = micro_config(Backend::kDensity);
  StepContext ctx;
  ctx.adam = nn::AdamState<float>(field.params().size());
  ctx.lr_scale.assign(field.params().size(), 1.0f);
  auto plan = micro_plan<float>(false);
  CHECK_THROWS_AS(train_step(field, ctx, plan, cfg), TrainError);
  CHECK(ctx.adam.t == 0);
}

TEST_CASE("training on an invalid dataset fails before any optimization") {
  data::Dataset ds;  // empty
  TrainConfig cfg = micro_config(Backend::kDensity);
  cfg.iterations = 1;
  CHECK_THROWS_AS(train::train(ds, cfg, micro_grid()), ValidationError);
}

// ---------------------------------------------------------------------------
// End-to-end gradient checks on the micro-configuration (the 64-bit twin).
// ---------------------------------------------------------------------------

TEST_CASE("density backend: end-to-end gradients match finite differences") {
  fields::DensityField<double> field(micro_grid());
  Rng rng(8);
  field.init(rng);
  // non-degenerate tables help the check see the trilinear path
  for (auto& p : field.params()) p *= 3.0;

  TrainConfig cfg = micro_config(Backend::kDensity);
  auto plan = micro_plan<double>(false);
  std::vector<double> grad(field.params().size(), 0.0);
  auto stats = density_batch_grad<double>(field, plan, cfg, std::span<double>(grad));
  REQUIRE(std::isfinite(stats.total));

  auto loss = [&]() {
    std::vector<double> g(field.params().size(), 0.0);
    return double(
        density_batch_grad<double>(field, plan, cfg, std::span<double>(g)).total);
  };

  Rng pick(888);
  int checked = 0, nonzero = 0;
  while (checked < 60) {
    size_t idx = pick.uniform_int(uint32_t(field.params().size()));
    double h = std::max(1e-6, 1e-4 * std::abs(field.params()[idx]));
    double fd = oracles::central_diff(field.params()[idx], loss, h);
    CHECK(oracles::rel_err(fd, grad[idx], 1e-9) <= 1e-3);
    if (std::abs(grad[idx]) > 1e-12) ++nonzero;
    ++checked;
  }
  CHECK(nonzero >= 20);  // the draw must exercise real gradient flow
}

TEST_CASE("sdf backend: end-to-end gradients (color + eikonal + log b) match fd") {
  fields::SdfField<double> field(micro_grid());
  Rng rng(9);
  field.init(rng);

  TrainConfig cfg = micro_config(Backend::kSdf);
  auto plan = micro_plan<double>(true);
  std::vector<double> grad(field.params().size(), 0.0);
  auto stats = sdf_batch_grad<double>(field, plan, cfg, std::span<double>(grad));
  REQUIRE(std::isfinite(stats.total));
  REQUIRE(stats.l_eik > 0.0);

  auto loss = [&]() {
    std::vector<double> g(field.params().size(), 0.0);
    return double(sdf_batch_grad<double>(field, plan, cfg, std::span<double>(g)).total);
  };

  // log b first: it feeds truncation and the CDF ratio
  {
    size_t idx = field.logb_offset();
    double fd = oracles::central_diff(field.params()[idx], loss, 1e-6);
    CHECK(oracles::rel_err(fd, grad[idx], 1e-9) <= 1e-3);
  }
  Rng pick(999);
  int checked = 0, nonzero = 0;
  while (checked < 60) {
    size_t idx = pick.uniform_int(uint32_t(field.params().size()));
    double h = std::max(1e-6, 1e-4 * std::abs(field.params()[idx]));
    double fd = oracles::central_diff(field.params()[idx], loss, h);
    CHECK(oracles::rel_err(fd, grad[idx], 1e-9) <= 1e-3);
    if (std::abs(grad[idx]) > 1e-12) ++nonzero;
    ++checked;
  }
  CHECK(nonzero >= 20);
}

TEST_CASE("zero-iteration training echoes initialization metrics") {
  data::SceneSpec spec;
  spec.image_size = 8;
  spec.spheres = {{{0, 0, 0}, 0.8, {0.9f, 0.3f, 0.2f}}};
  spec.train_ring = {2, 3.0, 15, {0, 0, 0}};
  spec.val_ring = {1, 3.0, 35, {0, 0, 0}};
  auto synth = data::synth_scene(spec);
  data::Dataset ds;
  ds.box = spec.box;
  ds.background = spec.background;
  for (const auto& v : synth.views)
    ds.views.push_back({v.camera, v.split, "", "", to_float(v.image), v.depth, true});
  TrainConfig cfg = micro_config(Backend::kDensity);
  cfg.iterations = 0;
  cfg.rays_per_batch = 8;
  auto r = train::train(ds, cfg, micro_grid());
  REQUIRE(r.log.size() == 1);
  CHECK(r.log[0].iteration == 0);
  CHECK(std::isfinite(r.log[0].l_color));
  CHECK(r.has_val_psnr);
}
