// SPDX-License-Identifier: Apache-2.0
//
// Batched forward/backward through render + field + grid, and the training
// configuration. The batch core is templated so the 64-bit twin used by the
// finite-difference oracles runs the exact same code path.
#pragma once

#include "nerfkit/losses.hpp"
#include "nerfkit/render.hpp"

namespace nerfkit::train {

using fields::Backend;

struct TrainConfig {
  Backend backend = Backend::kDensity;
  int rays_per_batch = 256;
  int iterations = 20000;
  int samples_per_ray = 96;
  float lr = 1e-3f;             // MLP head learning rate
  float lr_grid_scale = 10.0f;  // hash tables train faster
  float lr_decay_per_1k = 1.0f; // multiplicative decay per 1000 iterations
  float alpha = 1.0f;           // color loss weight
  float beta = 0.1f;            // eikonal loss weight (SDF only)
  int eikonal_points = 256;     // M per batch
  float eikonal_fd_step = 0.0f; // 0 -> box max extent / 1024
  uint64_t seed = 0;
  bool deterministic = true;
  int threads = 1;
  Vec3f background{0.f, 0.f, 0.f};
  int val_interval = 2000;
  int checkpoint_interval = 0;  // 0 = only final
  bool stratified = true;

  void validate() const {
    if (rays_per_batch < 1) throw ValidationError("train: rays_per_batch must be >= 1");
    if (iterations < 0) throw ValidationError("train: iterations must be >= 0");
    if (samples_per_ray < 2) throw ValidationError("train: samples_per_ray must be >= 2");
    if (alpha < 0 || beta < 0 || alpha + beta <= 0)
      throw ValidationError("train: need alpha >= 0, beta >= 0, alpha + beta > 0");
    if (eikonal_points < 1 && backend == Backend::kSdf)
      throw ValidationError("train: eikonal_points must be >= 1 for the sdf backend");
  }
  // The density backend has no eikonal term by construction.
  float effective_beta() const { return backend == Backend::kDensity ? 0.0f : beta; }
};

// An explicit batch: rays with ground-truth colors, plus eikonal sample
// positions for the SDF backend. Gradient checks freeze one of these.
template <typename T>
struct BatchPlan {
  std::vector<render::Ray<T>> rays;
  std::vector<Vec3<T>> gt;
  std::vector<Vec3<T>> eikonal_points;
  bool stratified = false;
  uint64_t sample_salt = 0;  // per-ray RNG stream base for stratified draws
};

template <typename T>
struct BatchStats {
  T l_color = T(0);
  T l_eik = T(0);
  T total = T(0);
  size_t samples = 0;
};

namespace detail {

// Per-ray RNG stream: decorrelated by ray index, independent of threading.
inline uint64_t mix_seed(uint64_t salt, uint64_t idx) {
  uint64_t z = salt + 0x9e3779b97f4a7c15ull * (idx + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Density backend batch: photometric loss only.
// grad must be zero-initialized, full parameter length.
// ---------------------------------------------------------------------------
template <typename T>
BatchStats<T> density_batch_grad(const fields::DensityField<T>& field,
                                 const BatchPlan<T>& plan, const TrainConfig& cfg,
                                 std::span<T> grad) {
  size_t n_rays = plan.rays.size();
  if (n_rays == 0) throw UsageError("density_batch_grad: empty batch");
  BBox<T> box = field.bbox().template cast<T>();
  size_t n_params = field.params().size();

  int workers = std::max(1, cfg.threads);
  size_t n_workers = size_t(workers);
  std::vector<std::vector<T>> worker_grad(n_workers);
  std::vector<BatchStats<T>> worker_stats(n_workers);

  parallel_for(n_rays, workers, [&](size_t begin, size_t end, int w) {
    std::vector<T>& g = worker_grad[size_t(w)];
    g.assign(n_params, T(0));
    BatchStats<T>& st = worker_stats[size_t(w)];
    std::vector<fields::SampleCache<T>> caches(size_t(cfg.samples_per_ray));
    std::vector<T> sh(kShBasisDim);
    std::vector<T> sigma(size_t(cfg.samples_per_ray));
    std::vector<Vec3<T>> rgb(size_t(cfg.samples_per_ray));
    std::vector<T> d_sigma(size_t(cfg.samples_per_ray));
    std::vector<Vec3<T>> d_rgb(size_t(cfg.samples_per_ray));
    Vec3<T> bg{T(cfg.background.x), T(cfg.background.y), T(cfg.background.z)};

    for (size_t r = begin; r < end; ++r) {
      render::Ray<T> ray = plan.rays[r];
      Vec3<T> pred = bg;
      auto clip = render::clip_ray_to_box(ray, box);
      size_t n = 0;
      render::RaySamples<T> samples;
      render::Transmittance<T> vis;
      if (clip) {
        ray.t_near = clip->first;
        ray.t_far = clip->second;
        Rng rng(detail::mix_seed(plan.sample_salt, r));
        samples = render::sample_along_ray<T>(ray, cfg.samples_per_ray,
                                              plan.stratified, &rng);
        n = samples.t.size();
        sh_basis16(ray.dir, std::span<T>(sh));
        for (size_t i = 0; i < n; ++i) {
          Vec3<T> x = ray.origin + ray.dir * samples.t[i];
          field.forward_sample(x, std::span<const T>(sh), caches[i], sigma[i], rgb[i]);
        }
        vis = render::transmittance<T>(std::span<const T>(sigma).first(n),
                                       std::span<const T>(samples.delta).first(n));
        auto out = render::composite<T>(samples, vis,
                                        std::span<const Vec3<T>>(rgb).first(n), bg);
        pred = out.color;
        st.samples += n;
      }
      Vec3<T> diff = pred - plan.gt[r];
      st.l_color += dot(diff, diff) / T(3);
      if (n > 0) {
        Vec3<T> d_color =
            color_loss_grad<T>(pred, plan.gt[r], n_rays) * T(cfg.alpha);
        render::density_backward<T>(samples, vis, std::span<const Vec3<T>>(rgb).first(n),
                                    bg, d_color, std::span<T>(d_sigma).first(n),
                                    std::span<Vec3<T>>(d_rgb).first(n));
        for (size_t i = 0; i < n; ++i)
          field.backward_sample(caches[i], d_sigma[i], d_rgb[i],
                                std::span<T>(g));
      }
    }
  });

  BatchStats<T> stats;
  for (int w = 0; w < workers; ++w) {
    stats.l_color += worker_stats[size_t(w)].l_color;
    stats.samples += worker_stats[size_t(w)].samples;
    if (!worker_grad[size_t(w)].empty())
      for (size_t i = 0; i < n_params; ++i) grad[i] += worker_grad[size_t(w)][i];
  }
  stats.l_color /= T(n_rays);
  stats.l_eik = T(0);
  stats.total = total_loss(stats.l_color, stats.l_eik, T(cfg.alpha), T(0));
  return stats;
}

// ---------------------------------------------------------------------------
// SDF backend batch: photometric + eikonal terms. The eikonal gradient is a
// central difference of f, so its parameter gradient is exact first-order
// backprop through the six probe evaluations.
// ---------------------------------------------------------------------------
template <typename T>
BatchStats<T> sdf_batch_grad(const fields::SdfField<T>& field, const BatchPlan<T>& plan,
                             const TrainConfig& cfg, std::span<T> grad) {
  size_t n_rays = plan.rays.size();
  if (n_rays == 0) throw UsageError("sdf_batch_grad: empty batch");
  BBox<T> box = field.bbox().template cast<T>();
  size_t n_params = field.params().size();
  const T b = field.sharpness();
  Vec3f ext = field.bbox().extent();
  T fd_step = cfg.eikonal_fd_step > 0
                  ? T(cfg.eikonal_fd_step)
                  : T(std::max({ext.x, ext.y, ext.z})) / T(1024);

  int workers = std::max(1, cfg.threads);
  size_t n_workers = size_t(workers);
  std::vector<std::vector<T>> worker_grad(n_workers);
  std::vector<BatchStats<T>> worker_stats(n_workers);
  std::vector<T> worker_db(n_workers, T(0));

  parallel_for(n_rays, workers, [&](size_t begin, size_t end, int w) {
    std::vector<T>& g = worker_grad[size_t(w)];
    if (g.empty()) g.assign(n_params, T(0));
    BatchStats<T>& st = worker_stats[size_t(w)];
    std::vector<fields::SampleCache<T>> caches(size_t(cfg.samples_per_ray));
    std::vector<T> sh(kShBasisDim);
    std::vector<T> raw(size_t(cfg.samples_per_ray));
    std::vector<T> trunc(size_t(cfg.samples_per_ray));
    std::vector<Vec3<T>> rgb(size_t(cfg.samples_per_ray));
    std::vector<T> d_trunc(size_t(cfg.samples_per_ray));
    std::vector<Vec3<T>> d_rgb(size_t(cfg.samples_per_ray));
    Vec3<T> bg{T(cfg.background.x), T(cfg.background.y), T(cfg.background.z)};

    for (size_t r = begin; r < end; ++r) {
      render::Ray<T> ray = plan.rays[r];
      Vec3<T> pred = bg;
      auto clip = render::clip_ray_to_box(ray, box);
      size_t n = 0;
      render::RaySamples<T> samples;
      render::SdfWeights<T> sw;
      if (clip) {
        ray.t_near = clip->first;
        ray.t_far = clip->second;
        Rng rng(detail::mix_seed(plan.sample_salt, r));
        samples = render::sample_along_ray<T>(ray, cfg.samples_per_ray,
                                              plan.stratified, &rng);
        n = samples.t.size();
        sh_basis16(ray.dir, std::span<T>(sh));
        for (size_t i = 0; i < n; ++i) {
          Vec3<T> x = ray.origin + ray.dir * samples.t[i];
          raw[i] = field.forward_sdf(x, caches[i]);
          trunc[i] = fields::truncate_sdf(raw[i], b);
          rgb[i] = field.forward_color(std::span<const T>(sh), caches[i]);
        }
        sw = render::sdf_weights<T>(std::span<const T>(trunc).first(n), b);
        auto out = render::composite<T>(samples, sw.vis,
                                        std::span<const Vec3<T>>(rgb).first(n), bg);
        pred = out.color;
        st.samples += n;
      }
      Vec3<T> diff = pred - plan.gt[r];
      st.l_color += dot(diff, diff) / T(3);
      if (n > 0) {
        Vec3<T> d_color =
            color_loss_grad<T>(pred, plan.gt[r], n_rays) * T(cfg.alpha);
        T d_b = T(0);
        render::sdf_backward<T>(samples, sw, std::span<const T>(trunc).first(n), b,
                                std::span<const Vec3<T>>(rgb).first(n), bg, d_color,
                                std::span<T>(d_trunc).first(n),
                                std::span<Vec3<T>>(d_rgb).first(n), d_b);
        for (size_t i = 0; i < n; ++i) {
          // chain through u = tanh(b f / 2)
          T one_minus_u2 = T(1) - trunc[i] * trunc[i];
          T d_f = d_trunc[i] * T(0.5) * b * one_minus_u2;
          d_b += d_trunc[i] * T(0.5) * raw[i] * one_minus_u2;
          field.backward_sample(caches[i], d_f, d_rgb[i], std::span<T>(g));
        }
        worker_db[size_t(w)] += d_b;
      }
    }
  });

  // Eikonal term over the plan's box points, reduced after the ray pass.
  size_t n_eik = plan.eikonal_points.size();
  T l_eik = T(0);
  if (n_eik > 0) {
    parallel_for(n_eik, workers, [&](size_t begin, size_t end, int w) {
      std::vector<T>& g = worker_grad[size_t(w)];
      if (g.empty()) g.assign(n_params, T(0));
      std::array<fields::SampleCache<T>, 6> pc;
      for (size_t j = begin; j < end; ++j) {
        Vec3<T> x = plan.eikonal_points[j];
        Vec3<T> fd{};
        std::array<T, 6> fvals;
        for (int axis = 0; axis < 3; ++axis) {
          Vec3<T> xp = x, xm = x;
          xp[axis] += fd_step;
          xm[axis] -= fd_step;
          fvals[size_t(2 * axis)] = field.forward_sdf(xp, pc[size_t(2 * axis)]);
          fvals[size_t(2 * axis + 1)] = field.forward_sdf(xm, pc[size_t(2 * axis + 1)]);
          fd[axis] = (fvals[size_t(2 * axis)] - fvals[size_t(2 * axis + 1)]) /
                     (T(2) * fd_step);
        }
        T nrm = norm(fd);
        worker_stats[size_t(w)].l_eik += (nrm - T(1)) * (nrm - T(1));
        if (nrm > T(1e-12)) {
          T scale = T(cfg.effective_beta()) * T(2) * (nrm - T(1)) /
                    (nrm * T(n_eik));
          for (int axis = 0; axis < 3; ++axis) {
            T d_fd = scale * fd[axis];
            T d_f = d_fd / (T(2) * fd_step);
            field.backward_sdf(pc[size_t(2 * axis)], d_f, std::span<T>(g));
            field.backward_sdf(pc[size_t(2 * axis + 1)], -d_f, std::span<T>(g));
          }
        }
      }
    });
  }

  BatchStats<T> stats;
  T d_b_total = T(0);
  for (int w = 0; w < workers; ++w) {
    stats.l_color += worker_stats[size_t(w)].l_color;
    stats.l_eik += worker_stats[size_t(w)].l_eik;
    stats.samples += worker_stats[size_t(w)].samples;
    d_b_total += worker_db[size_t(w)];
    if (!worker_grad[size_t(w)].empty())
      for (size_t i = 0; i < n_params; ++i) grad[i] += worker_grad[size_t(w)][i];
  }
  stats.l_color /= T(n_rays);
  if (n_eik > 0) stats.l_eik /= T(n_eik);
  // d(loss)/d(log b) = b * d(loss)/db
  grad[field.logb_offset()] += b * d_b_total;
  stats.total = total_loss(stats.l_color, stats.l_eik, T(cfg.alpha),
                           T(cfg.effective_beta()));
  return stats;
}

}  // namespace nerfkit::train
