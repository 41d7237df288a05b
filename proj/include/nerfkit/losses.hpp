// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nerfkit/common.hpp"

namespace nerfkit::train {

// Mean over the batch of the per-ray channel-mean squared RGB error.
template <typename T>
T color_loss(std::span<const Vec3<T>> pred, std::span<const Vec3<T>> gt) {
  if (pred.empty()) throw UsageError("color_loss: empty batch");
  if (pred.size() != gt.size()) throw UsageError("color_loss: batch size mismatch");
  T acc = T(0);
  for (size_t i = 0; i < pred.size(); ++i) {
    Vec3<T> d = pred[i] - gt[i];
    acc += dot(d, d);
  }
  return acc / (T(3) * T(pred.size()));
}

// d(color_loss)/d(pred_i) for the loss above.
template <typename T>
Vec3<T> color_loss_grad(Vec3<T> pred, Vec3<T> gt, size_t batch_size) {
  return (pred - gt) * (T(2) / (T(3) * T(batch_size)));
}

// Mean of (||grad|| - 1)^2 over the batch.
template <typename T>
T eikonal_loss(std::span<const Vec3<T>> gradients) {
  if (gradients.empty()) throw UsageError("eikonal_loss: empty batch");
  T acc = T(0);
  for (const auto& g : gradients) {
    T n = norm(g);
    acc += (n - T(1)) * (n - T(1));
  }
  return acc / T(gradients.size());
}

template <typename T>
T total_loss(T l_color, T l_eik, T alpha, T beta) {
  return alpha * l_color + beta * l_eik;
}

}  // namespace nerfkit::train
