// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace nerfkit::fields {

namespace {

constexpr char kMagic[16] = {'N', 'E', 'R', 'F', 'K', 'I', 'T', 'C',
                             'H', 'E', 'C', 'K', 'P', 'T', 0, 0};
constexpr uint8_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void write_blob(const std::string& path, Backend backend,
                const grid::HashGridConfig& gc, const nn::ParamLayout& layout,
                const std::vector<float>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kMagic, 16);
  put(out, kVersion);
  put(out, uint8_t(backend));
  put(out, int32_t(gc.levels));
  put(out, int32_t(gc.features_per_level));
  put(out, uint32_t(gc.table_size));
  put(out, int32_t(gc.base_resolution));
  put(out, int32_t(gc.max_resolution));
  float box[6] = {gc.bbox.min.x, gc.bbox.min.y, gc.bbox.min.z,
                  gc.bbox.max.x, gc.bbox.max.y, gc.bbox.max.z};
  out.write(reinterpret_cast<const char*>(box), sizeof(box));
  put(out, uint32_t(layout.entries().size()));
  for (const auto& e : layout.entries()) {
    put(out, uint16_t(e.name.size()));
    out.write(e.name.data(), std::streamsize(e.name.size()));
    put(out, uint64_t(e.offset));
    put(out, uint64_t(e.count));
  }
  put(out, uint64_t(params.size()));
  out.write(reinterpret_cast<const char*>(params.data()),
            std::streamsize(params.size() * sizeof(float)));
  if (!out) throw IoError("short write to " + path);
}

struct Blob {
  Backend backend;
  grid::HashGridConfig gc;
  std::vector<nn::ParamEntry> layout;
  std::vector<float> params;
};

Blob read_blob(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[16];
  in.read(magic, 16);
  if (!in || std::memcmp(magic, kMagic, 16) != 0)
    throw FormatError("bad checkpoint magic in " + path);
  uint8_t version = get<uint8_t>(in);
  if (version != kVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  Blob b;
  b.backend = Backend(get<uint8_t>(in));
  b.gc.levels = get<int32_t>(in);
  b.gc.features_per_level = get<int32_t>(in);
  b.gc.table_size = get<uint32_t>(in);
  b.gc.base_resolution = get<int32_t>(in);
  b.gc.max_resolution = get<int32_t>(in);
  float box[6];
  in.read(reinterpret_cast<char*>(box), sizeof(box));
  b.gc.bbox = {{box[0], box[1], box[2]}, {box[3], box[4], box[5]}};
  uint32_t n_entries = get<uint32_t>(in);
  for (uint32_t i = 0; i < n_entries; ++i) {
    nn::ParamEntry e;
    uint16_t len = get<uint16_t>(in);
    e.name.resize(len);
    in.read(e.name.data(), len);
    e.offset = get<uint64_t>(in);
    e.count = get<uint64_t>(in);
    b.layout.push_back(std::move(e));
  }
  uint64_t n_params = get<uint64_t>(in);
  b.params.resize(n_params);
  in.read(reinterpret_cast<char*>(b.params.data()),
          std::streamsize(n_params * sizeof(float)));
  if (!in) throw FormatError("truncated checkpoint " + path);
  return b;
}

void check_layout(const nn::ParamLayout& built, const std::vector<nn::ParamEntry>& stored,
                  const std::string& path) {
  if (built.entries().size() != stored.size())
    throw FormatError("checkpoint layout mismatch in " + path);
  for (size_t i = 0; i < stored.size(); ++i) {
    const auto& a = built.entries()[i];
    const auto& b = stored[i];
    if (a.name != b.name || a.offset != b.offset || a.count != b.count)
      throw FormatError("checkpoint layout entry '" + b.name + "' mismatch in " + path);
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const DensityField<float>& field) {
  write_blob(path, Backend::kDensity, field.hashgrid().config(), field.layout(),
             field.params());
}

void save_checkpoint(const std::string& path, const SdfField<float>& field) {
  write_blob(path, Backend::kSdf, field.hashgrid().config(), field.layout(),
             field.params());
}

LoadedField load_checkpoint(const std::string& path) {
  Blob b = read_blob(path);
  LoadedField lf;
  lf.backend = b.backend;
  if (b.backend == Backend::kDensity) {
    lf.density = std::make_unique<DensityField<float>>(b.gc);
    check_layout(lf.density->layout(), b.layout, path);
    if (b.params.size() != lf.density->params().size())
      throw FormatError("checkpoint parameter count mismatch in " + path);
    lf.density->params() = std::move(b.params);
  } else if (b.backend == Backend::kSdf) {
    lf.sdf = std::make_unique<SdfField<float>>(b.gc);
    check_layout(lf.sdf->layout(), b.layout, path);
    if (b.params.size() != lf.sdf->params().size())
      throw FormatError("checkpoint parameter count mismatch in " + path);
    lf.sdf->params() = std::move(b.params);
  } else {
    throw FormatError("unknown backend tag in " + path);
  }
  return lf;
}

}  // namespace nerfkit::fields
