// SPDX-License-Identifier: Apache-2.0
//
// Multi-resolution hash encoding: L levels of trainable feature tables,
// trilinearly interpolated and concatenated. Dense (collision-free) indexing
// is used on levels whose full vertex grid fits in the table.
#pragma once

#include <array>
#include <cmath>

#include "nerfkit/common.hpp"
#include "nerfkit/nn.hpp"

namespace nerfkit::grid {

struct HashGridConfig {
  int levels = 14;
  int features_per_level = 2;
  uint32_t table_size = 1u << 19;  // power of two
  int base_resolution = 16;
  int max_resolution = 1024;
  BBoxf bbox{{-1.f, -1.f, -1.f}, {1.f, 1.f, 1.f}};

  void validate() const {
    if (levels < 1) throw ValidationError("hashgrid: levels must be >= 1");
    if (features_per_level < 1)
      throw ValidationError("hashgrid: features_per_level must be >= 1");
    if (table_size == 0 || (table_size & (table_size - 1)) != 0)
      throw ValidationError("hashgrid: table_size must be a power of two");
    if (base_resolution < 1 || max_resolution < base_resolution)
      throw ValidationError("hashgrid: need 1 <= base_resolution <= max_resolution");
    Vec3f e = bbox.extent();
    if (!(e.x > 0 && e.y > 0 && e.z > 0))
      throw ValidationError("hashgrid: bounding box must have positive extent");
  }

  double growth() const {
    if (levels <= 1) return 1.0;
    return std::exp(std::log(double(max_resolution) / base_resolution) / (levels - 1));
  }
  // Cells per axis at a level; vertices run 0..resolution(level).
  int resolution(int level) const {
    return int(std::floor(base_resolution * std::pow(growth(), level)));
  }
  int output_dim() const { return levels * features_per_level; }
  size_t params_per_level() const {
    return size_t(table_size) * features_per_level;
  }
  size_t param_count() const { return params_per_level() * levels; }
  bool level_is_dense(int level) const {
    uint64_t verts = uint64_t(resolution(level)) + 1;
    return verts * verts * verts <= table_size;
  }
};

// XOR of coordinate-times-prime products, Instant-NGP convention.
inline uint32_t spatial_hash(int ix, int iy, int iz) {
  return (uint32_t(ix) * 1u) ^ (uint32_t(iy) * 2654435761u) ^
         (uint32_t(iz) * 805459861u);
}

// Sparse gradient contribution for one table entry.
template <typename T>
struct TableGrad {
  int level;
  uint32_t index;
  std::vector<T> grad;  // length features_per_level
};

template <typename T>
struct LevelSample {
  std::array<uint32_t, 8> corner;  // table indices of the 8 cell corners
  std::array<T, 8> weight;         // trilinear weights, sum to 1
  Vec3<T> frac;                    // in-cell fractional position
  Vec3<T> dscale;                  // d(frac)/d(world), 0 on clamped axes
};

template <typename T>
using EncodeCache = std::vector<LevelSample<T>>;

template <typename T>
class HashGrid {
 public:
  HashGrid() = default;
  explicit HashGrid(HashGridConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    resolutions_.resize(size_t(cfg_.levels));
    dense_.resize(size_t(cfg_.levels));
    int prev = 0;
    for (int l = 0; l < cfg_.levels; ++l) {
      resolutions_[size_t(l)] = cfg_.resolution(l);
      if (resolutions_[size_t(l)] < prev)
        throw ValidationError("hashgrid: per-level resolution must be non-decreasing");
      prev = resolutions_[size_t(l)];
      dense_[size_t(l)] = cfg_.level_is_dense(l);
    }
  }

  const HashGridConfig& config() const { return cfg_; }

  void register_params(nn::ParamLayout& layout, const std::string& prefix) {
    table_off_ = layout.add(prefix + ".level0", cfg_.params_per_level());
    for (int l = 1; l < cfg_.levels; ++l)
      layout.add(prefix + ".level" + std::to_string(l), cfg_.params_per_level());
  }

  void init_params(std::span<T> params, Rng& rng, T scale = T(1e-4)) const {
    T* p = params.data() + table_off_;
    for (size_t i = 0; i < cfg_.param_count(); ++i)
      p[i] = T(rng.uniform(-1.0f, 1.0f)) * scale;
  }

  size_t table_offset() const { return table_off_; }

  // Table index of a cell vertex at a level. Dense levels use collision-free
  // row-major indexing; the rest use the spatial hash masked to the table.
  uint32_t hash_index(int level, int ix, int iy, int iz) const {
    if (dense_[size_t(level)]) {
      uint32_t verts = uint32_t(resolutions_[size_t(level)]) + 1;
      return (uint32_t(iz) * verts + uint32_t(iy)) * verts + uint32_t(ix);
    }
    return spatial_hash(ix, iy, iz) & (cfg_.table_size - 1);
  }

  // Trilinear feature lookup. Points outside the box are clamped to its
  // surface. Output must have length levels * features_per_level.
  void encode(std::span<const T> params, Vec3<T> x, std::span<T> out,
              EncodeCache<T>* cache = nullptr) const {
    const int d = cfg_.features_per_level;
    if (int(out.size()) != cfg_.output_dim())
      throw ShapeError("hashgrid encode: bad output length");
    if (cache) cache->resize(size_t(cfg_.levels));

    BBox<T> box = cfg_.bbox.template cast<T>();
    Vec3<T> ext = box.extent();
    Vec3<T> u{(x.x - box.min.x) / ext.x, (x.y - box.min.y) / ext.y,
              (x.z - box.min.z) / ext.z};
    Vec3<T> uc{std::clamp(u.x, T(0), T(1)), std::clamp(u.y, T(0), T(1)),
               std::clamp(u.z, T(0), T(1))};

    for (int l = 0; l < cfg_.levels; ++l) {
      const int n = resolutions_[size_t(l)];
      Vec3<T> pos = uc * T(n);
      int cx = std::min(int(pos.x), n - 1);
      int cy = std::min(int(pos.y), n - 1);
      int cz = std::min(int(pos.z), n - 1);
      Vec3<T> f{pos.x - T(cx), pos.y - T(cy), pos.z - T(cz)};

      std::array<uint32_t, 8> idx;
      std::array<T, 8> w;
      for (int c = 0; c < 8; ++c) {
        int bx = c & 1, by = (c >> 1) & 1, bz = (c >> 2) & 1;
        idx[size_t(c)] = hash_index(l, cx + bx, cy + by, cz + bz);
        w[size_t(c)] = (bx ? f.x : T(1) - f.x) * (by ? f.y : T(1) - f.y) *
                       (bz ? f.z : T(1) - f.z);
      }
      const T* table = params.data() + table_off_ + size_t(l) * cfg_.params_per_level();
      T* slice = out.data() + size_t(l) * d;
      for (int k = 0; k < d; ++k) slice[k] = T(0);
      for (int c = 0; c < 8; ++c) {
        const T* feat = table + size_t(idx[size_t(c)]) * d;
        for (int k = 0; k < d; ++k) slice[k] += w[size_t(c)] * feat[k];
      }
      if (cache) {
        auto& lc = (*cache)[size_t(l)];
        lc.corner = idx;
        lc.weight = w;
        lc.frac = f;
        lc.dscale = {u.x == uc.x ? T(n) / ext.x : T(0),
                     u.y == uc.y ? T(n) / ext.y : T(0),
                     u.z == uc.z ? T(n) / ext.z : T(0)};
      }
    }
  }

  // Scatter grad_feature back into the table slices of grad_params.
  void encode_backward(const EncodeCache<T>& cache, std::span<const T> grad_feature,
                       std::span<T> grad_params) const {
    const int d = cfg_.features_per_level;
    for (int l = 0; l < cfg_.levels; ++l) {
      const auto& lc = cache[size_t(l)];
      const T* gf = grad_feature.data() + size_t(l) * d;
      T* gtab = grad_params.data() + table_off_ + size_t(l) * cfg_.params_per_level();
      for (int c = 0; c < 8; ++c) {
        T* g = gtab + size_t(lc.corner[size_t(c)]) * d;
        T w = lc.weight[size_t(c)];
        for (int k = 0; k < d; ++k) g[k] += w * gf[k];
      }
    }
  }

  // Sparse form of the backward pass: per touched (level, table index) the
  // grad_feature slice scaled by its trilinear weight.
  std::vector<TableGrad<T>> encode_backward_sparse(std::span<const T> params, Vec3<T> x,
                                                   std::span<const T> grad_feature) const {
    EncodeCache<T> cache;
    std::vector<T> tmp(size_t(cfg_.output_dim()));
    encode(params, x, tmp, &cache);
    const int d = cfg_.features_per_level;
    std::vector<TableGrad<T>> result;
    for (int l = 0; l < cfg_.levels; ++l) {
      const auto& lc = cache[size_t(l)];
      const T* gf = grad_feature.data() + size_t(l) * d;
      for (int c = 0; c < 8; ++c) {
        TableGrad<T> tg;
        tg.level = l;
        tg.index = lc.corner[size_t(c)];
        tg.grad.resize(size_t(d));
        for (int k = 0; k < d; ++k) tg.grad[size_t(k)] = lc.weight[size_t(c)] * gf[k];
        result.push_back(std::move(tg));
      }
    }
    return result;
  }

  // d(grad_feature . features)/dx: world-space gradient of the encoded
  // features contracted with a feature cotangent. Zero on clamped axes.
  Vec3<T> input_gradient(std::span<const T> params, const EncodeCache<T>& cache,
                         std::span<const T> grad_feature) const {
    const int d = cfg_.features_per_level;
    Vec3<T> acc{T(0), T(0), T(0)};
    for (int l = 0; l < cfg_.levels; ++l) {
      const auto& lc = cache[size_t(l)];
      const T* gf = grad_feature.data() + size_t(l) * d;
      const T* table = params.data() + table_off_ + size_t(l) * cfg_.params_per_level();
      Vec3<T> f = lc.frac;
      Vec3<T> lvl{T(0), T(0), T(0)};
      for (int c = 0; c < 8; ++c) {
        const T* feat = table + size_t(lc.corner[size_t(c)]) * d;
        T fdotg = T(0);
        for (int k = 0; k < d; ++k) fdotg += feat[k] * gf[k];
        int bx = c & 1, by = (c >> 1) & 1, bz = (c >> 2) & 1;
        T wx = bx ? f.x : T(1) - f.x;
        T wy = by ? f.y : T(1) - f.y;
        T wz = bz ? f.z : T(1) - f.z;
        T sx = bx ? T(1) : T(-1);
        T sy = by ? T(1) : T(-1);
        T sz = bz ? T(1) : T(-1);
        lvl.x += fdotg * sx * wy * wz;
        lvl.y += fdotg * wx * sy * wz;
        lvl.z += fdotg * wx * wy * sz;
      }
      acc.x += lvl.x * lc.dscale.x;
      acc.y += lvl.y * lc.dscale.y;
      acc.z += lvl.z * lc.dscale.z;
    }
    return acc;
  }

 private:
  HashGridConfig cfg_;
  std::vector<int> resolutions_;
  std::vector<bool> dense_;
  size_t table_off_ = 0;
};

}  // namespace nerfkit::grid
