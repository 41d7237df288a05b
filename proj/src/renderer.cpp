// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/renderer.hpp"

namespace nerfkit::render {

namespace {

template <typename Field, typename RenderFn>
RenderedImage render_image_impl(const Field& field, const Camera& cam,
                                const RenderImageOptions& opt, RenderFn&& fn) {
  cam.validate();
  RenderedImage out;
  out.color = ImageF(cam.width, cam.height);
  out.depth = DepthMap(cam.width, cam.height);
  BBox<float> box = field.bbox();
  Vec3f bg = opt.background;
  parallel_for(size_t(cam.height), opt.threads, [&](size_t jb, size_t je, int) {
    for (size_t j = jb; j < je; ++j) {
      for (int i = 0; i < cam.width; ++i) {
        auto ray = generate_ray<float>(cam, i, int(j));
        auto clip = clip_ray_to_box(ray, box);
        if (!clip) {
          out.color.set_rgb(i, int(j), bg);
          continue;
        }
        ray.t_near = clip->first;
        ray.t_far = clip->second;
        auto samples = sample_along_ray<float>(ray, opt.samples_per_ray, false, nullptr);
        RenderOutput<float> r = fn(ray, samples);
        out.color.set_rgb(i, int(j), r.color);
        if (opt.with_depth && r.depth) {
          out.depth.depth[out.depth.idx(i, int(j))] = *r.depth;
          out.depth.valid[out.depth.idx(i, int(j))] = 1;
        }
      }
    }
  });
  return out;
}

}  // namespace

RenderedImage render_image(const fields::DensityField<float>& field, const Camera& cam,
                           const RenderImageOptions& opt) {
  return render_image_impl(field, cam, opt, [&](const Ray<float>& ray,
                                                const RaySamples<float>& s) {
    return render_density<float>(ray, field, s, opt.background);
  });
}

RenderedImage render_image(const fields::SdfField<float>& field, const Camera& cam,
                           const RenderImageOptions& opt) {
  return render_image_impl(field, cam, opt, [&](const Ray<float>& ray,
                                                const RaySamples<float>& s) {
    return render_sdf<float>(ray, field, s, opt.background);
  });
}

}  // namespace nerfkit::render
