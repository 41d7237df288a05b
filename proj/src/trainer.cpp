// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/trainer.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>

#include "nerfkit/checkpoint.hpp"
#include "nerfkit/metrics.hpp"
#include "nerfkit/renderer.hpp"

namespace nerfkit::train {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<float> build_lr_scale(const nn::ParamLayout& layout, float grid_scale) {
  std::vector<float> scale(layout.total(), 1.0f);
  for (const auto& e : layout.entries()) {
    if (e.name.rfind("grid.", 0) == 0) {
      for (size_t i = 0; i < e.count; ++i) scale[e.offset + i] = grid_scale;
    }
  }
  return scale;
}

// Draw a batch of training rays (pixel centers of uniformly random pixels
// across all training views) and, for the SDF backend, eikonal box points.
BatchPlan<float> draw_batch(const data::Dataset& ds, const std::vector<size_t>& train_idx,
                            const TrainConfig& cfg, Rng& rng, int iteration) {
  BatchPlan<float> plan;
  plan.stratified = cfg.stratified;
  plan.sample_salt = detail::mix_seed(cfg.seed, uint64_t(iteration) + 0x5151);
  plan.rays.reserve(size_t(cfg.rays_per_batch));
  plan.gt.reserve(size_t(cfg.rays_per_batch));
  for (int r = 0; r < cfg.rays_per_batch; ++r) {
    size_t vi = train_idx[rng.uniform_int(uint32_t(train_idx.size()))];
    const auto& view = ds.views[vi];
    int i = int(rng.uniform_int(uint32_t(view.camera.width)));
    int j = int(rng.uniform_int(uint32_t(view.camera.height)));
    plan.rays.push_back(render::generate_ray<float>(view.camera, i, j));
    plan.gt.push_back(view.image.rgb(i, j));
  }
  if (cfg.backend == Backend::kSdf) {
    BBoxf box = ds.box;
    Vec3f ext = box.extent();
    for (int m = 0; m < cfg.eikonal_points; ++m) {
      plan.eikonal_points.push_back({box.min.x + ext.x * rng.uniform(),
                                     box.min.y + ext.y * rng.uniform(),
                                     box.min.z + ext.z * rng.uniform()});
    }
  }
  return plan;
}

template <typename Field>
double val_psnr(const Field& field, const data::Dataset& ds,
                const std::vector<size_t>& val_idx, const TrainConfig& cfg,
                size_t only_view = size_t(-1)) {
  double acc = 0;
  int count = 0;
  render::RenderImageOptions opt;
  opt.samples_per_ray = cfg.samples_per_ray;
  opt.background = cfg.background;
  opt.threads = cfg.threads;
  for (size_t k = 0; k < val_idx.size(); ++k) {
    if (only_view != size_t(-1) && k != only_view) continue;
    const auto& view = ds.views[val_idx[k]];
    auto img = render_image(field, view.camera, opt);
    acc += metrics::psnr(img.color, view.image, 1.0);
    ++count;
  }
  return count > 0 ? acc / count : 0.0;
}

void write_log_row(std::ostream* out, const TrainLogRow& row) {
  if (!out) return;
  *out << "iter " << row.iteration << " l_color " << std::setprecision(8) << row.l_color
       << " l_eik " << row.l_eik;
  if (row.has_psnr)
    *out << " psnr_val " << std::setprecision(6) << row.psnr_val;
  else
    *out << " psnr_val -";
  *out << " elapsed_s " << std::setprecision(6) << row.elapsed_s << " rays_per_sec "
       << size_t(row.rays_per_sec) << "\n";
  out->flush();
}

}  // namespace

template <typename Field>
BatchStats<float> train_step(Field& field, StepContext& ctx, const BatchPlan<float>& plan,
                             const TrainConfig& cfg) {
  ctx.grad.assign(field.params().size(), 0.0f);
  BatchStats<float> stats;
  if constexpr (std::is_same_v<Field, fields::DensityField<float>>) {
    stats = density_batch_grad<float>(field, plan, cfg, std::span<float>(ctx.grad));
  } else {
    stats = sdf_batch_grad<float>(field, plan, cfg, std::span<float>(ctx.grad));
  }
  if (!std::isfinite(stats.total))
    throw TrainError("non-finite loss at iteration " + std::to_string(ctx.iteration));
  float decay = std::pow(cfg.lr_decay_per_1k, float(ctx.iteration) / 1000.0f);
  ctx.adam.lr = cfg.lr * decay;
  nn::adam_step<float>(ctx.adam, std::span<float>(field.params()),
                       std::span<const float>(ctx.grad),
                       std::span<const float>(ctx.lr_scale));
  ctx.iteration += 1;
  return stats;
}

template BatchStats<float> train_step<fields::DensityField<float>>(
    fields::DensityField<float>&, StepContext&, const BatchPlan<float>&,
    const TrainConfig&);
template BatchStats<float> train_step<fields::SdfField<float>>(
    fields::SdfField<float>&, StepContext&, const BatchPlan<float>&, const TrainConfig&);

namespace {

template <typename Field>
void run_loop(Field& field, const data::Dataset& ds, const TrainConfig& cfg,
              TrainResult& result, std::ostream* log_stream,
              const std::string& checkpoint_path) {
  auto train_idx = ds.split_indices("train");
  auto val_idx = ds.split_indices("val");
  if (train_idx.empty()) throw ValidationError("train: dataset has no train split");

  StepContext ctx;
  ctx.adam = nn::AdamState<float>(field.params().size());
  ctx.lr_scale = build_lr_scale(field.layout(), cfg.lr_grid_scale);

  Rng rng(cfg.seed);
  auto t0 = Clock::now();
  size_t val_rotor = 0;

  if (cfg.iterations == 0) {
    // Echo initialization metrics without touching the parameters.
    BatchPlan<float> plan = draw_batch(ds, train_idx, cfg, rng, 0);
    std::vector<float> grad(field.params().size(), 0.0f);
    BatchStats<float> stats;
    if constexpr (std::is_same_v<Field, fields::DensityField<float>>)
      stats = density_batch_grad<float>(field, plan, cfg, std::span<float>(grad));
    else
      stats = sdf_batch_grad<float>(field, plan, cfg, std::span<float>(grad));
    TrainLogRow row;
    row.iteration = 0;
    row.l_color = stats.l_color;
    row.l_eik = stats.l_eik;
    row.total = stats.total;
    row.elapsed_s = seconds_since(t0);
    if (!val_idx.empty()) {
      row.psnr_val = val_psnr(field, ds, val_idx, cfg);
      row.has_psnr = true;
      result.final_val_psnr = row.psnr_val;
      result.has_val_psnr = true;
    }
    result.log.push_back(row);
    write_log_row(log_stream, row);
  }

  const int report_every = 100;
  double window_rays = 0;
  auto window_t0 = Clock::now();
  for (int it = 0; it < cfg.iterations; ++it) {
    BatchPlan<float> plan = draw_batch(ds, train_idx, cfg, rng, it);
    BatchStats<float> stats = train_step(field, ctx, plan, cfg);
    window_rays += double(plan.rays.size());

    bool do_report = ((it + 1) % report_every == 0) || (it + 1 == cfg.iterations);
    bool do_val = !val_idx.empty() && cfg.val_interval > 0 &&
                  (((it + 1) % cfg.val_interval == 0) || (it + 1 == cfg.iterations));
    if (do_report || do_val) {
      TrainLogRow row;
      row.iteration = it + 1;
      row.l_color = stats.l_color;
      row.l_eik = stats.l_eik;
      row.total = stats.total;
      row.elapsed_s = seconds_since(t0);
      double dt = seconds_since(window_t0);
      row.rays_per_sec = dt > 0 ? window_rays / dt : 0;
      window_rays = 0;
      window_t0 = Clock::now();
      if (do_val && it + 1 < cfg.iterations) {
        // One rotating val view keeps periodic evaluation cheap.
        row.psnr_val = val_psnr(field, ds, val_idx, cfg, val_rotor % val_idx.size());
        val_rotor += 1;
        row.has_psnr = true;
      } else if (do_val) {
        row.psnr_val = val_psnr(field, ds, val_idx, cfg);
        row.has_psnr = true;
        result.final_val_psnr = row.psnr_val;
        result.has_val_psnr = true;
      }
      result.log.push_back(row);
      write_log_row(log_stream, row);
    }
    if (!checkpoint_path.empty() && cfg.checkpoint_interval > 0 &&
        (it + 1) % cfg.checkpoint_interval == 0 && it + 1 < cfg.iterations) {
      fields::save_checkpoint(checkpoint_path + "." + std::to_string(it + 1), field);
    }
  }
  if (!checkpoint_path.empty()) fields::save_checkpoint(checkpoint_path, field);
  result.elapsed_s = seconds_since(t0);
}

}  // namespace

TrainResult train(const data::Dataset& dataset, TrainConfig cfg,
                  grid::HashGridConfig grid_cfg, std::ostream* log_stream,
                  const std::string& checkpoint_path) {
  dataset.validate();
  cfg.validate();
  grid_cfg.bbox = dataset.box;
  grid_cfg.validate();

  TrainResult result;
  Rng init_rng(cfg.seed);
  if (cfg.backend == Backend::kDensity) {
    result.density = std::make_unique<fields::DensityField<float>>(grid_cfg);
    result.density->init(init_rng);
    run_loop(*result.density, dataset, cfg, result, log_stream, checkpoint_path);
  } else {
    result.sdf = std::make_unique<fields::SdfField<float>>(grid_cfg);
    result.sdf->init(init_rng);
    run_loop(*result.sdf, dataset, cfg, result, log_stream, checkpoint_path);
  }
  return result;
}

}  // namespace nerfkit::train
