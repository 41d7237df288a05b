// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/colmap.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nerfkit/common.hpp"

namespace nerfkit::data {

namespace {

namespace fs = std::filesystem;

[[noreturn]] void parse_fail(const std::string& file, int line, const std::string& why) {
  throw ParseError(file + ":" + std::to_string(line) + ": " + why);
}

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

void parse_cameras(const fs::path& path, ColmapModel& model) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    std::istringstream ss(line);
    ColmapCamera cam;
    int id;
    if (!(ss >> id >> cam.model >> cam.width >> cam.height))
      parse_fail(path.string(), lineno, "malformed camera line");
    double p;
    while (ss >> p) cam.params.push_back(p);
    size_t want;
    if (cam.model == "SIMPLE_PINHOLE") {
      want = 3;
    } else if (cam.model == "PINHOLE") {
      want = 4;
    } else {
      throw FormatError("unsupported camera model '" + cam.model +
                        "' (only SIMPLE_PINHOLE and PINHOLE are handled)");
    }
    if (cam.params.size() != want)
      parse_fail(path.string(), lineno,
                 "camera model " + cam.model + " expects " + std::to_string(want) +
                     " params, got " + std::to_string(cam.params.size()));
    model.cameras[id] = std::move(cam);
  }
}

void parse_images(const fs::path& path, ColmapModel& model) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  int lineno = 0;
  bool expect_points = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    if (expect_points) {  // POINTS2D line; content unused here
      expect_points = false;
      continue;
    }
    std::istringstream ss(line);
    ColmapImage img;
    if (!(ss >> img.id >> img.qw >> img.qx >> img.qy >> img.qz >> img.t.x >>
          img.t.y >> img.t.z >> img.camera_id >> img.name))
      parse_fail(path.string(), lineno, "malformed image line");
    double qn = std::sqrt(img.qw * img.qw + img.qx * img.qx + img.qy * img.qy +
                          img.qz * img.qz);
    if (std::abs(qn - 1.0) > 1e-6)
      parse_fail(path.string(), lineno,
                 "quaternion norm " + std::to_string(qn) + " is not 1");
    if (model.cameras.find(img.camera_id) == model.cameras.end())
      parse_fail(path.string(), lineno,
                 "image references unknown camera " + std::to_string(img.camera_id));
    model.images[img.id] = std::move(img);
    expect_points = true;
  }
}

void parse_points(const fs::path& path, ColmapModel& model) {
  std::ifstream in(path);
  if (!in) return;  // optional file
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    std::istringstream ss(line);
    ColmapPoint3D pt;
    long long id;
    double r, g, b, err;
    if (!(ss >> id >> pt.xyz.x >> pt.xyz.y >> pt.xyz.z >> r >> g >> b >> err))
      parse_fail(path.string(), lineno, "malformed point line");
    int image_id, p2d;
    while (ss >> image_id >> p2d) pt.image_ids.push_back(image_id);
    model.points.push_back(std::move(pt));
  }
}

}  // namespace

ColmapModel parse_colmap(const std::string& directory) {
  fs::path dir(directory);
  if (!fs::exists(dir / "cameras.txt") || !fs::exists(dir / "images.txt"))
    throw IoError("COLMAP text model not found in " + directory +
                  " (need cameras.txt and images.txt)");
  ColmapModel model;
  parse_cameras(dir / "cameras.txt", model);
  parse_images(dir / "images.txt", model);
  parse_points(dir / "points3D.txt", model);
  return model;
}

Mat4 w2c_to_c2w(const Mat3& rotation, Vec3d translation) {
  if (!is_rotation(rotation))
    throw ContractError("w2c_to_c2w: rotation block is not orthonormal");
  Mat3 rt = rotation.transposed();
  Vec3d tp = -(rt * translation);
  Pose p;
  p.rot = rt;
  p.trans = tp;
  return Mat4::from_pose(p);
}

std::pair<Mat3, Vec3d> c2w_to_w2c(const Mat4& m) {
  Pose p = m.to_pose();
  Mat3 r = p.rot.transposed();
  Vec3d t = -(r * p.trans);
  return {r, t};
}

}  // namespace nerfkit::data
