// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>

#include "nerfkit/fields.hpp"

namespace nerfkit::fields {

// Little-endian blob: 16-byte magic, version byte, backend tag, grid config,
// the parameter layout registry, then the flat float32 parameter vector
// (hash tables level-major, entry-major).
void save_checkpoint(const std::string& path, const DensityField<float>& field);
void save_checkpoint(const std::string& path, const SdfField<float>& field);

struct LoadedField {
  Backend backend = Backend::kDensity;
  std::unique_ptr<DensityField<float>> density;
  std::unique_ptr<SdfField<float>> sdf;

  const BBoxf& bbox() const {
    return backend == Backend::kDensity ? density->bbox() : sdf->bbox();
  }
};

LoadedField load_checkpoint(const std::string& path);

}  // namespace nerfkit::fields
