// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/metrics.hpp"

#include <unordered_map>

namespace nerfkit::metrics {

namespace {

template <typename Img>
double mse_impl(const Img& a, const Img& b) {
  if (a.width != b.width || a.height != b.height)
    throw UsageError("mse: image dimensions differ");
  if (a.width == 0 || a.height == 0) throw UsageError("mse: empty image");
  double acc = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    double d = double(a.data[i]) - double(b.data[i]);
    acc += d * d;
  }
  return acc / double(a.data.size());
}

double psnr_impl(double m, double max_intensity) {
  if (max_intensity <= 0) throw UsageError("psnr: max_intensity must be > 0");
  if (m == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_intensity * max_intensity / m);
}

// Uniform grid over the target cloud for exact nearest-neighbor queries.
class PointGrid {
 public:
  explicit PointGrid(std::span<const Vec3d> pts) : pts_(pts) {
    lo_ = hi_ = pts[0];
    for (const auto& p : pts) {
      lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y), std::min(lo_.z, p.z)};
      hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y), std::max(hi_.z, p.z)};
    }
    double extent = std::max({hi_.x - lo_.x, hi_.y - lo_.y, hi_.z - lo_.z, 1e-12});
    int target = std::max(1, int(std::cbrt(double(pts.size()) / 2.0)));
    res_ = std::min(256, target);
    cell_ = extent / res_;
    for (size_t i = 0; i < pts.size(); ++i) cells_[key_of(pts[i])].push_back(uint32_t(i));
  }

  double nearest_distance(Vec3d q) const {
    int qx = coord(q.x, lo_.x), qy = coord(q.y, lo_.y), qz = coord(q.z, lo_.z);
    double best = std::numeric_limits<double>::infinity();
    for (int ring = 0;; ++ring) {
      // Once the closest possible point in the unexplored shell exceeds the
      // best hit, the answer is exact.
      if (best < std::numeric_limits<double>::infinity()) {
        double min_possible = (double(ring) - 1.0) * cell_;
        if (min_possible > 0 && min_possible * min_possible > best) break;
      }
      bool any_cell = false;
      for (int dz = -ring; dz <= ring; ++dz) {
        for (int dy = -ring; dy <= ring; ++dy) {
          for (int dx = -ring; dx <= ring; ++dx) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
            int cx = qx + dx, cy = qy + dy, cz = qz + dz;
            if (cx < 0 || cy < 0 || cz < 0 || cx > res_ || cy > res_ || cz > res_)
              continue;
            any_cell = true;
            auto it = cells_.find(pack(cx, cy, cz));
            if (it == cells_.end()) continue;
            for (uint32_t i : it->second) {
              Vec3d d = pts_[i] - q;
              double d2 = d.x * d.x + d.y * d.y + d.z * d.z;
              best = std::min(best, d2);
            }
          }
        }
      }
      if (!any_cell && best < std::numeric_limits<double>::infinity()) break;
      if (ring > 2 * res_ + 2) break;  // query far outside the cloud
    }
    return std::sqrt(best);
  }

 private:
  int coord(double v, double lo) const {
    return std::clamp(int((v - lo) / cell_), 0, res_);
  }
  uint64_t pack(int x, int y, int z) const {
    return (uint64_t(z) * 512 + uint64_t(y)) * 512 + uint64_t(x);
  }
  uint64_t key_of(Vec3d p) const {
    return pack(coord(p.x, lo_.x), coord(p.y, lo_.y), coord(p.z, lo_.z));
  }

  std::span<const Vec3d> pts_;
  Vec3d lo_{}, hi_{};
  int res_ = 1;
  double cell_ = 1;
  std::unordered_map<uint64_t, std::vector<uint32_t>> cells_;
};

}  // namespace

double mse(const Image8& a, const Image8& b) { return mse_impl(a, b); }
double mse(const ImageF& a, const ImageF& b) { return mse_impl(a, b); }

double psnr(const Image8& a, const Image8& b, double max_intensity) {
  return psnr_impl(mse(a, b), max_intensity);
}
double psnr(const ImageF& a, const ImageF& b, double max_intensity) {
  return psnr_impl(mse(a, b), max_intensity);
}

double mean_nn_distance(std::span<const Vec3d> from, std::span<const Vec3d> to) {
  if (from.empty() || to.empty())
    throw UsageError("chamfer: point clouds must be non-empty");
  PointGrid grid(to);
  double acc = 0;
  for (const auto& p : from) acc += grid.nearest_distance(p);
  return acc / double(from.size());
}

double chamfer(std::span<const Vec3d> a, std::span<const Vec3d> b) {
  return 0.5 * (mean_nn_distance(a, b) + mean_nn_distance(b, a));
}

double chamfer(const geom::PointCloud& a, const geom::PointCloud& b) {
  return chamfer(std::span<const Vec3d>(a.points), std::span<const Vec3d>(b.points));
}

}  // namespace nerfkit::metrics
