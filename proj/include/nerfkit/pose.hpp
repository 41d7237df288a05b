// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nerfkit/common.hpp"

namespace nerfkit {

struct Mat3 {
  double m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  static Mat3 identity() { return {}; }

  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
    return r;
  }
  Vec3d col(int j) const { return {m[0][j], m[1][j], m[2][j]}; }
  Vec3d row(int i) const { return {m[i][0], m[i][1], m[i][2]}; }
  void set_col(int j, Vec3d v) {
    m[0][j] = v.x;
    m[1][j] = v.y;
    m[2][j] = v.z;
  }
  double det() const {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }
  friend Vec3d operator*(const Mat3& a, Vec3d v) {
    return {a.m[0][0] * v.x + a.m[0][1] * v.y + a.m[0][2] * v.z,
            a.m[1][0] * v.x + a.m[1][1] * v.y + a.m[1][2] * v.z,
            a.m[2][0] * v.x + a.m[2][1] * v.y + a.m[2][2] * v.z};
  }
  friend Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        r.m[i][j] = 0;
        for (int k = 0; k < 3; ++k) r.m[i][j] += a.m[i][k] * b.m[k][j];
      }
    return r;
  }
};

inline bool is_rotation(const Mat3& r, double tol = 1e-6) {
  Mat3 rtr = r.transposed() * r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double want = i == j ? 1.0 : 0.0;
      if (std::abs(rtr.m[i][j] - want) > tol) return false;
    }
  return r.det() > 0;
}

// Rigid transform as rotation + translation (a 3x4 block).
struct Pose {
  Mat3 rot;
  Vec3d trans{0, 0, 0};

  Vec3d apply(Vec3d p) const { return rot * p + trans; }
};

struct Mat4 {
  double m[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};

  static Mat4 from_pose(const Pose& p) {
    Mat4 r;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) r.m[i][j] = p.rot.m[i][j];
      r.m[i][3] = (&p.trans.x)[i];
    }
    r.m[3][0] = r.m[3][1] = r.m[3][2] = 0;
    r.m[3][3] = 1;
    return r;
  }
  Pose to_pose() const {
    Pose p;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) p.rot.m[i][j] = m[i][j];
      (&p.trans.x)[i] = m[i][3];
    }
    return p;
  }
};

// Unit quaternion (w, x, y, z) to rotation matrix.
inline Mat3 quat_to_mat(double w, double x, double y, double z) {
  double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (n < 1e-12) throw ContractError("quaternion has zero norm");
  w /= n; x /= n; y /= n; z /= n;
  Mat3 r;
  r.m[0][0] = 1 - 2 * (y * y + z * z);
  r.m[0][1] = 2 * (x * y - z * w);
  r.m[0][2] = 2 * (x * z + y * w);
  r.m[1][0] = 2 * (x * y + z * w);
  r.m[1][1] = 1 - 2 * (x * x + z * z);
  r.m[1][2] = 2 * (y * z - x * w);
  r.m[2][0] = 2 * (x * z - y * w);
  r.m[2][1] = 2 * (y * z + x * w);
  r.m[2][2] = 1 - 2 * (x * x + y * y);
  return r;
}

}  // namespace nerfkit
