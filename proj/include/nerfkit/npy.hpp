// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace nerfkit::data {

// NPY v1.0 container holding a 2-D little-endian float64 array.
void write_npy_f64(const std::string& path, size_t rows, size_t cols,
                   const std::vector<double>& values);

struct NpyArray {
  size_t rows = 0, cols = 0;
  std::vector<double> values;
};

NpyArray read_npy_f64(const std::string& path);

}  // namespace nerfkit::data
