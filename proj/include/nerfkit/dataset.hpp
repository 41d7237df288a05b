// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nerfkit/camera.hpp"
#include "nerfkit/image.hpp"
#include "nerfkit/synth.hpp"

namespace nerfkit::data {

struct DatasetView {
  render::Camera camera;
  std::string split;       // "train" or "val"
  std::string image_path;  // as stored in the manifest
  std::string depth_path;  // empty when absent
  ImageF image;
  DepthMap depth;
  bool has_depth = false;
};

struct Dataset {
  BBoxf box;
  Vec3f background{0.f, 0.f, 0.f};
  std::vector<DatasetView> views;

  std::vector<size_t> split_indices(const std::string& split) const {
    std::vector<size_t> idx;
    for (size_t i = 0; i < views.size(); ++i)
      if (views[i].split == split) idx.push_back(i);
    return idx;
  }
  void validate() const {
    if (views.size() < 2)
      throw ValidationError("dataset: need at least 2 views with valid poses");
    for (const auto& v : views) v.camera.validate();
  }
};

// Writes manifest.txt, poses_bounds.npy, images/ and depth/ under dir.
void save_dataset(const std::string& dir, const SynthDataset& synth);

// For COLMAP-prepared data: poses + references to existing image files.
struct PreparedView {
  render::Camera camera;
  std::string split;
  std::string image_path;  // absolute path to an existing image
};
void save_prepared_dataset(const std::string& dir,
                           const std::vector<PreparedView>& views, const BBoxf& box,
                           Vec3f background);

Dataset load_dataset(const std::string& dir, bool load_images = true);

}  // namespace nerfkit::data
