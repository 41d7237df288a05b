// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nerfkit/llff.hpp"
#include "nerfkit/png_io.hpp"

namespace nerfkit::data {

namespace {

namespace fs = std::filesystem;

std::string index_name(const std::string& split, int idx, const char* ext) {
  std::ostringstream ss;
  ss << split << '_' << std::setw(3) << std::setfill('0') << idx << ext;
  return ss.str();
}

void write_manifest(const fs::path& dir, const BBoxf& box, Vec3f background,
                    const std::vector<DatasetView>& views) {
  std::ofstream out(dir / "manifest.txt");
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << "nerfkit-dataset 1\n";
  out << "background " << background.x << ' ' << background.y << ' ' << background.z
      << '\n';
  out << "box " << box.min.x << ' ' << box.min.y << ' ' << box.min.z << ' '
      << box.max.x << ' ' << box.max.y << ' ' << box.max.z << '\n';
  for (size_t i = 0; i < views.size(); ++i) {
    const auto& v = views[i];
    out << "view " << i << " split " << v.split << " image " << v.image_path
        << " depth " << (v.depth_path.empty() ? "-" : v.depth_path) << " fx "
        << std::setprecision(17) << v.camera.fx << " fy " << v.camera.fy << " cx "
        << v.camera.cx << " cy " << v.camera.cy << '\n';
  }
}

void write_poses(const fs::path& dir, const std::vector<DatasetView>& views) {
  std::vector<LlffView> lv(views.size());
  for (size_t i = 0; i < views.size(); ++i) {
    lv[i].c2w = views[i].camera.c2w;
    lv[i].height = views[i].camera.height;
    lv[i].width = views[i].camera.width;
    lv[i].focal = 0.5 * (views[i].camera.fx + views[i].camera.fy);
    lv[i].near = views[i].camera.near;
    lv[i].far = views[i].camera.far;
  }
  write_llff((dir / "poses_bounds.npy").string(), lv);
}

}  // namespace

void save_dataset(const std::string& dir_s, const SynthDataset& synth) {
  fs::path dir(dir_s);
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "depth");

  std::vector<DatasetView> views;
  int split_counter[2] = {0, 0};
  for (const auto& sv : synth.views) {
    DatasetView v;
    v.camera = sv.camera;
    v.split = sv.split;
    int& counter = split_counter[sv.split == "val" ? 1 : 0];
    v.image_path = "images/" + index_name(sv.split, counter, ".png");
    v.depth_path = "depth/" + index_name(sv.split, counter, ".nkd");
    ++counter;
    write_png((dir / v.image_path).string(), sv.image);
    write_depth_raw((dir / v.depth_path).string(), sv.depth);
    views.push_back(std::move(v));
  }
  write_manifest(dir, synth.spec.box, synth.spec.background, views);
  write_poses(dir, views);
}

void save_prepared_dataset(const std::string& dir_s,
                           const std::vector<PreparedView>& pviews, const BBoxf& box,
                           Vec3f background) {
  if (pviews.empty()) throw UsageError("save_prepared_dataset: no views");
  fs::path dir(dir_s);
  fs::create_directories(dir);
  std::vector<DatasetView> views;
  for (const auto& pv : pviews) {
    DatasetView v;
    v.camera = pv.camera;
    v.split = pv.split;
    v.image_path = pv.image_path;
    views.push_back(std::move(v));
  }
  write_manifest(dir, box, background, views);
  write_poses(dir, views);
}

Dataset load_dataset(const std::string& dir_s, bool load_images) {
  fs::path dir(dir_s);
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw IoError("no manifest.txt in " + dir_s);
  auto poses = read_llff((dir / "poses_bounds.npy").string());

  Dataset ds;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string word;
    if (!(ss >> word)) continue;
    if (word == "nerfkit-dataset") {
      continue;
    } else if (word == "background") {
      double r, g, b;
      if (!(ss >> r >> g >> b))
        throw ParseError("manifest.txt:" + std::to_string(lineno) + ": bad background");
      ds.background = {float(r), float(g), float(b)};
    } else if (word == "box") {
      double v[6];
      for (double& x : v)
        if (!(ss >> x))
          throw ParseError("manifest.txt:" + std::to_string(lineno) + ": bad box");
      ds.box = {{float(v[0]), float(v[1]), float(v[2])},
                {float(v[3]), float(v[4]), float(v[5])}};
    } else if (word == "view") {
      size_t idx;
      std::string kw_split, split, kw_image, image, kw_depth, depth;
      std::string kfx, kfy, kcx, kcy;
      double fx, fy, cx, cy;
      if (!(ss >> idx >> kw_split >> split >> kw_image >> image >> kw_depth >> depth >>
            kfx >> fx >> kfy >> fy >> kcx >> cx >> kcy >> cy))
        throw ParseError("manifest.txt:" + std::to_string(lineno) + ": bad view line");
      if (idx >= poses.size())
        throw ParseError("manifest.txt:" + std::to_string(lineno) +
                         ": view index exceeds pose bundle");
      DatasetView v;
      const auto& pose = poses[idx];
      v.camera.c2w = pose.c2w;
      v.camera.width = int(pose.width);
      v.camera.height = int(pose.height);
      v.camera.near = pose.near;
      v.camera.far = pose.far;
      v.camera.fx = fx;
      v.camera.fy = fy;
      v.camera.cx = cx;
      v.camera.cy = cy;
      v.split = split;
      v.image_path = image;
      v.depth_path = depth == "-" ? "" : depth;
      ds.views.push_back(std::move(v));
    } else {
      throw ParseError("manifest.txt:" + std::to_string(lineno) +
                       ": unknown directive " + word);
    }
  }
  if (load_images) {
    for (auto& v : ds.views) {
      fs::path img(v.image_path);
      if (img.is_relative()) img = dir / img;
      v.image = to_float(read_png(img.string()));
      if (v.image.width != v.camera.width || v.image.height != v.camera.height)
        throw ValidationError("dataset: image size of " + v.image_path +
                              " does not match the camera");
      if (!v.depth_path.empty()) {
        fs::path dep(v.depth_path);
        if (dep.is_relative()) dep = dir / dep;
        if (fs::exists(dep)) {
          v.depth = read_depth_raw(dep.string());
          v.has_depth = true;
        }
      }
    }
  }
  ds.validate();
  return ds;
}

}  // namespace nerfkit::data
