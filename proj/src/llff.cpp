// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/llff.hpp"

#include "nerfkit/common.hpp"
#include "nerfkit/npy.hpp"

namespace nerfkit::data {

namespace {

// right-up-backward -> LLFF [down, right, backward]
Mat3 rub_to_llff(const Mat3& r) {
  Mat3 out;
  out.set_col(0, -r.col(1));
  out.set_col(1, r.col(0));
  out.set_col(2, r.col(2));
  return out;
}

Mat3 llff_to_rub(const Mat3& r) {
  Mat3 out;
  out.set_col(0, r.col(1));
  out.set_col(1, -r.col(0));
  out.set_col(2, r.col(2));
  return out;
}

}  // namespace

void write_llff(const std::string& path, const std::vector<LlffView>& views) {
  if (views.empty()) throw UsageError("write_llff: no views");
  for (const auto& v : views) {
    if (v.width != views[0].width || v.height != views[0].height)
      throw UsageError("write_llff: all views must share image dimensions");
  }
  std::vector<double> rows;
  rows.reserve(views.size() * 17);
  for (const auto& v : views) {
    Mat3 r = rub_to_llff(v.c2w.rot);
    double hwf[3] = {v.height, v.width, v.focal};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) rows.push_back(r.m[i][j]);
      rows.push_back((&v.c2w.trans.x)[i]);
      rows.push_back(hwf[i]);
    }
    rows.push_back(v.near);
    rows.push_back(v.far);
  }
  write_npy_f64(path, views.size(), 17, rows);
}

std::vector<LlffView> read_llff(const std::string& path) {
  NpyArray arr = read_npy_f64(path);
  if (arr.cols != 17)
    throw FormatError("poses_bounds must have 17 columns, got " +
                      std::to_string(arr.cols));
  std::vector<LlffView> views(arr.rows);
  for (size_t n = 0; n < arr.rows; ++n) {
    const double* row = arr.values.data() + n * 17;
    Mat3 r;
    Vec3d t;
    double hwf[3];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) r.m[i][j] = row[i * 5 + j];
      (&t.x)[i] = row[i * 5 + 3];
      hwf[i] = row[i * 5 + 4];
    }
    LlffView& v = views[n];
    v.c2w.rot = llff_to_rub(r);
    v.c2w.trans = t;
    v.height = hwf[0];
    v.width = hwf[1];
    v.focal = hwf[2];
    v.near = row[15];
    v.far = row[16];
  }
  return views;
}

}  // namespace nerfkit::data
