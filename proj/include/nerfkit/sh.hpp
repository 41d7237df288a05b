// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nerfkit/common.hpp"

namespace nerfkit {

inline constexpr int kShBasisDim = 16;

// Real spherical-harmonics basis up to degree 4 (l = 0..3, 16 values),
// hard-coded polynomial form. dir must be unit length.
template <typename T>
inline void sh_basis16(Vec3<T> dir, std::span<T> out) {
  const T x = dir.x, y = dir.y, z = dir.z;
  const T xx = x * x, yy = y * y, zz = z * z;
  out[0] = T(0.28209479177387814);
  out[1] = T(-0.48860251190291987) * y;
  out[2] = T(0.48860251190291987) * z;
  out[3] = T(-0.48860251190291987) * x;
  out[4] = T(1.0925484305920792) * x * y;
  out[5] = T(-1.0925484305920792) * y * z;
  out[6] = T(0.94617469575755997) * zz - T(0.31539156525251999);
  out[7] = T(-1.0925484305920792) * x * z;
  out[8] = T(0.54627421529603959) * (xx - yy);
  out[9] = T(0.59004358992664352) * y * (-T(3) * xx + yy);
  out[10] = T(2.8906114426405538) * x * y * z;
  out[11] = T(0.45704579946446572) * y * (T(1) - T(5) * zz);
  out[12] = T(0.3731763325901154) * z * (T(5) * zz - T(3));
  out[13] = T(0.45704579946446572) * x * (T(1) - T(5) * zz);
  out[14] = T(1.4453057213202769) * z * (xx - yy);
  out[15] = T(0.59004358992664352) * x * (-xx + T(3) * yy);
}

}  // namespace nerfkit
