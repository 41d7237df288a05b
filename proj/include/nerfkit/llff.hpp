// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "nerfkit/pose.hpp"

namespace nerfkit::data {

// One view of an LLFF pose bundle. The pose is camera-to-world in this
// toolkit's right-up-backward convention; serialization permutes to the
// LLFF reference axis order (columns [down, right, backward]).
struct LlffView {
  Pose c2w;
  double height = 0, width = 0, focal = 0;
  double near = 0, far = 0;
};

// poses_bounds layout: N x 17 float64, each row a 3x5 block flattened
// row-major (rotation/translation columns in LLFF axis order, fifth column
// = (height, width, focal)), followed by near and far.
void write_llff(const std::string& path, const std::vector<LlffView>& views);

std::vector<LlffView> read_llff(const std::string& path);

}  // namespace nerfkit::data
