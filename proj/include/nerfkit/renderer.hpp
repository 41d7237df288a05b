// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nerfkit/image.hpp"
#include "nerfkit/render.hpp"

namespace nerfkit::render {

struct RenderImageOptions {
  int samples_per_ray = 128;
  Vec3f background{0.f, 0.f, 0.f};
  int threads = 1;
  bool with_depth = false;
};

struct RenderedImage {
  ImageF color;
  DepthMap depth;  // expectation depth where opacity clears 1e-3
};

RenderedImage render_image(const fields::DensityField<float>& field, const Camera& cam,
                           const RenderImageOptions& opt);
RenderedImage render_image(const fields::SdfField<float>& field, const Camera& cam,
                           const RenderImageOptions& opt);

}  // namespace nerfkit::render
