// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations used as test oracles. Everything
// here is deliberately written from scratch (plain loops, no shared helpers
// with the library) so the checks stay meaningful.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "nerfkit/common.hpp"
#include "nerfkit/nn.hpp"

namespace oracles {

// Naive dense-MLP forward: independent of nerfkit::nn::Mlp internals.
inline std::vector<double> naive_mlp_forward(
    const std::vector<nerfkit::nn::LayerSpec>& layers,
    const std::vector<size_t>& weight_off, const std::vector<size_t>& bias_off,
    const std::vector<double>& params, std::vector<double> x) {
  using nerfkit::nn::Activation;
  for (size_t l = 0; l < layers.size(); ++l) {
    const auto& s = layers[l];
    std::vector<double> y(size_t(s.out));
    for (int o = 0; o < s.out; ++o) {
      double acc = params[bias_off[l] + size_t(o)];
      for (int i = 0; i < s.in; ++i)
        acc += params[weight_off[l] + size_t(o) * s.in + size_t(i)] * x[size_t(i)];
      switch (s.act) {
        case Activation::kLinear: break;
        case Activation::kReLU: acc = acc > 0 ? acc : 0; break;
        case Activation::kSigmoid: acc = 1.0 / (1.0 + std::exp(-acc)); break;
        case Activation::kTruncSigmoid:
          acc = (1.0 - std::exp(-acc)) / (1.0 + std::exp(-acc));
          break;
        case Activation::kExp: acc = std::exp(acc); break;
        case Activation::kSoftplus: acc = std::log1p(std::exp(acc)); break;
      }
      y[size_t(o)] = acc;
    }
    x = std::move(y);
  }
  return x;
}

// Central finite difference of a scalar functional with respect to one
// mutable slot.
inline double central_diff(double& slot, const std::function<double()>& f,
                           double h = 1e-4) {
  double saved = slot;
  slot = saved + h;
  double above = f();
  slot = saved - h;
  double below = f();
  slot = saved;
  return (above - below) / (2 * h);
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

// Brute-force trilinear interpolation oracle with its own copy of the
// spatial hash and dense-level indexing.
inline void brute_trilinear(
    int levels, int feat_dim, uint32_t table_size, int base_res, int max_res,
    nerfkit::Vec3d box_min, nerfkit::Vec3d box_max,
    const std::vector<double>& tables,  // level-major, entry-major
    nerfkit::Vec3d x, std::vector<double>& out) {
  out.assign(size_t(levels) * size_t(feat_dim), 0.0);
  double growth =
      levels <= 1 ? 1.0 : std::exp(std::log(double(max_res) / base_res) / (levels - 1));
  for (int l = 0; l < levels; ++l) {
    int n = int(std::floor(base_res * std::pow(growth, l)));
    double u[3];
    nerfkit::Vec3d ext = box_max - box_min;
    u[0] = std::clamp((x.x - box_min.x) / ext.x, 0.0, 1.0) * n;
    u[1] = std::clamp((x.y - box_min.y) / ext.y, 0.0, 1.0) * n;
    u[2] = std::clamp((x.z - box_min.z) / ext.z, 0.0, 1.0) * n;
    int c[3];
    double f[3];
    for (int a = 0; a < 3; ++a) {
      c[a] = std::min(int(u[a]), n - 1);
      f[a] = u[a] - c[a];
    }
    bool dense = (uint64_t(n) + 1) * (uint64_t(n) + 1) * (uint64_t(n) + 1) <= table_size;
    for (int corner = 0; corner < 8; ++corner) {
      int bx = corner & 1, by = (corner >> 1) & 1, bz = (corner >> 2) & 1;
      double w = (bx ? f[0] : 1 - f[0]) * (by ? f[1] : 1 - f[1]) * (bz ? f[2] : 1 - f[2]);
      uint32_t idx;
      uint32_t ix = uint32_t(c[0] + bx), iy = uint32_t(c[1] + by), iz = uint32_t(c[2] + bz);
      if (dense) {
        uint32_t verts = uint32_t(n) + 1;
        idx = (iz * verts + iy) * verts + ix;
      } else {
        idx = (ix * 1u ^ iy * 2654435761u ^ iz * 805459861u) & (table_size - 1);
      }
      for (int k = 0; k < feat_dim; ++k)
        out[size_t(l) * feat_dim + size_t(k)] +=
            w * tables[(size_t(l) * table_size + idx) * size_t(feat_dim) + size_t(k)];
    }
  }
}

// O(n^2) symmetric chamfer oracle.
inline double brute_chamfer(const std::vector<nerfkit::Vec3d>& a,
                            const std::vector<nerfkit::Vec3d>& b) {
  auto one_way = [](const std::vector<nerfkit::Vec3d>& from,
                    const std::vector<nerfkit::Vec3d>& to) {
    double acc = 0;
    for (const auto& p : from) {
      double best = 1e300;
      for (const auto& q : to) {
        double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
        best = std::min(best, dx * dx + dy * dy + dz * dz);
      }
      acc += std::sqrt(best);
    }
    return acc / double(from.size());
  };
  return 0.5 * (one_way(a, b) + one_way(b, a));
}

// Upper/lower chi-square quantiles via the Wilson-Hilferty approximation.
inline double chi2_quantile(double dof, double z) {
  double t = 2.0 / (9.0 * dof);
  double core = 1.0 - t + z * std::sqrt(t);
  return dof * core * core * core;
}

}  // namespace oracles
