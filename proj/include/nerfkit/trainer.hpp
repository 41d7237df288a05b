// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <ostream>

#include "nerfkit/dataset.hpp"
#include "nerfkit/train.hpp"

namespace nerfkit::train {

struct TrainLogRow {
  int iteration = 0;
  float l_color = 0, l_eik = 0, total = 0;
  double rays_per_sec = 0;
  double psnr_val = 0;
  bool has_psnr = false;
  double elapsed_s = 0;
};

struct TrainResult {
  std::unique_ptr<fields::DensityField<float>> density;
  std::unique_ptr<fields::SdfField<float>> sdf;
  std::vector<TrainLogRow> log;
  double final_val_psnr = 0;
  bool has_val_psnr = false;
  double elapsed_s = 0;
};

// Full optimization loop: uniform-random rays over all training pixels,
// Adam with per-group learning rates, periodic held-out PSNR when a val
// split exists. checkpoint_path, when set, receives periodic + final blobs.
TrainResult train(const data::Dataset& dataset, TrainConfig cfg,
                  grid::HashGridConfig grid_cfg, std::ostream* log_stream = nullptr,
                  const std::string& checkpoint_path = "");

// One optimization step over an explicit batch; exposed for tests and used
// by train(). Returns the batch stats. Throws TrainError (state untouched)
// when the loss or a gradient goes non-finite.
struct StepContext {
  nn::AdamState<float> adam;
  std::vector<float> grad;
  std::vector<float> lr_scale;
  int iteration = 0;
};

template <typename Field>
BatchStats<float> train_step(Field& field, StepContext& ctx, const BatchPlan<float>& plan,
                             const TrainConfig& cfg);

}  // namespace nerfkit::train
