// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/mesh_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nerfkit/png_io.hpp"

namespace nerfkit::geom {

void write_ply(const std::string& path, const PointCloud& cloud) {
  cloud.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << cloud.points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    float xyz[3] = {float(cloud.points[i].x), float(cloud.points[i].y),
                    float(cloud.points[i].z)};
    out.write(reinterpret_cast<const char*>(xyz), 12);
    uint8_t rgb[3];
    for (int k = 0; k < 3; ++k)
      rgb[k] = uint8_t(std::lround(std::clamp(cloud.colors[i][k], 0.f, 1.f) * 255.f));
    out.write(reinterpret_cast<const char*>(rgb), 3);
  }
  if (!out) throw IoError("short write to " + path);
}

PointCloud read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "ply")
    throw FormatError(path + " is not a PLY file");
  size_t count = 0;
  bool binary_le = false;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (word == "element") {
      std::string what;
      ss >> what >> count;
      if (what != "vertex") throw FormatError("unsupported PLY element " + what);
    } else if (word == "property") {
      std::string type, name;
      ss >> type >> name;
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!binary_le) throw FormatError("PLY must be binary little-endian: " + path);
  std::vector<std::string> want = {"x", "y", "z", "red", "green", "blue"};
  if (props != want)
    throw FormatError("PLY must carry x/y/z float + red/green/blue uchar: " + path);
  PointCloud cloud;
  cloud.points.resize(count);
  cloud.colors.resize(count);
  for (size_t i = 0; i < count; ++i) {
    float xyz[3];
    uint8_t rgb[3];
    in.read(reinterpret_cast<char*>(xyz), 12);
    in.read(reinterpret_cast<char*>(rgb), 3);
    if (!in) throw FormatError("truncated PLY payload in " + path);
    cloud.points[i] = {xyz[0], xyz[1], xyz[2]};
    cloud.colors[i] = {rgb[0] / 255.f, rgb[1] / 255.f, rgb[2] / 255.f};
  }
  return cloud;
}

void write_obj(const std::string& path, const TriangleMesh& mesh) {
  mesh.validate();
  namespace fs = std::filesystem;
  fs::path p(path);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");

  bool textured = mesh.has_texture() && mesh.has_uv();
  std::string stem = p.stem().string();
  if (textured) {
    fs::path mtl = p.parent_path() / (stem + ".mtl");
    fs::path png = p.parent_path() / (stem + ".png");
    std::ofstream m(mtl);
    if (!m) throw IoError("cannot open " + mtl.string() + " for writing");
    m << "newmtl baked\nKa 1 1 1\nKd 1 1 1\nmap_Kd " << stem << ".png\n";
    data::write_png(png.string(), mesh.texture);
    out << "mtllib " << stem << ".mtl\n";
  }

  bool vertex_colors = !textured && !mesh.colors.empty();
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3f& v = mesh.vertices[i];
    out << "v " << v.x << ' ' << v.y << ' ' << v.z;
    if (vertex_colors) {
      const Vec3f& c = mesh.colors[i];
      out << ' ' << c.x << ' ' << c.y << ' ' << c.z;
    }
    out << '\n';
  }
  if (textured)
    for (const auto& q : mesh.uv) out << "vt " << q.x << ' ' << q.y << '\n';
  if (textured) out << "usemtl baked\n";
  for (const auto& t : mesh.triangles) {
    if (textured) {
      out << "f " << t[0] + 1 << '/' << t[0] + 1 << ' ' << t[1] + 1 << '/' << t[1] + 1
          << ' ' << t[2] + 1 << '/' << t[2] + 1 << '\n';
    } else {
      out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
  }
  if (!out) throw IoError("short write to " + path);
}

}  // namespace nerfkit::geom
