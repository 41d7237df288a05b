// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "nerfkit/pose.hpp"

namespace nerfkit::data {

struct ColmapCamera {
  std::string model;  // SIMPLE_PINHOLE or PINHOLE
  int width = 0, height = 0;
  std::vector<double> params;

  double fx() const { return params[0]; }
  double fy() const { return model == "SIMPLE_PINHOLE" ? params[0] : params[1]; }
  double cx() const { return model == "SIMPLE_PINHOLE" ? params[1] : params[2]; }
  double cy() const { return model == "SIMPLE_PINHOLE" ? params[2] : params[3]; }
};

struct ColmapImage {
  int id = 0;
  double qw = 1, qx = 0, qy = 0, qz = 0;  // world-to-camera rotation
  Vec3d t{};                              // world-to-camera translation
  int camera_id = 0;
  std::string name;

  Mat3 rotation() const { return quat_to_mat(qw, qx, qy, qz); }
};

struct ColmapPoint3D {
  Vec3d xyz{};
  std::vector<int> image_ids;  // images observing this point
};

struct ColmapModel {
  std::map<int, ColmapCamera> cameras;
  std::map<int, ColmapImage> images;
  std::vector<ColmapPoint3D> points;
};

// Parses a COLMAP text model (cameras.txt + images.txt, points3D.txt when
// present). Only pinhole camera models are supported.
ColmapModel parse_colmap(const std::string& directory);

// COLMAP world-to-camera (R, t) to a 4x4 camera-to-world matrix
// [[R^T, -R^T t], [0, 1]].
Mat4 w2c_to_c2w(const Mat3& rotation, Vec3d translation);

// Inverse of the above; recovers (R, t) from M.
std::pair<Mat3, Vec3d> c2w_to_w2c(const Mat4& m);

}  // namespace nerfkit::data
