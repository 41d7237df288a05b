// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nerfkit/geometry.hpp"
#include "nerfkit/image.hpp"

namespace nerfkit::metrics {

// Mean squared error over all pixels and channels, accumulated in 64-bit.
double mse(const Image8& a, const Image8& b);
double mse(const ImageF& a, const ImageF& b);

// 10 log10(max^2 / mse); +infinity when the images are identical.
double psnr(const Image8& a, const Image8& b, double max_intensity = 255.0);
double psnr(const ImageF& a, const ImageF& b, double max_intensity = 1.0);

// Symmetric mean nearest-neighbor distance, exact (grid-accelerated).
double chamfer(const geom::PointCloud& a, const geom::PointCloud& b);
double chamfer(std::span<const Vec3d> a, std::span<const Vec3d> b);

// One-directional exact nearest-neighbor mean distance a -> b.
double mean_nn_distance(std::span<const Vec3d> from, std::span<const Vec3d> to);

}  // namespace nerfkit::metrics
