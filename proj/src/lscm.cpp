// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/lscm.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCore>
#include <Eigen/IterativeLinearSolvers>

#include <map>
#include <queue>
#include <set>

namespace nerfkit::geom {

namespace {

using EdgeKey = std::pair<uint32_t, uint32_t>;

EdgeKey edge_key(uint32_t a, uint32_t b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

// Per-edge incident triangle count; >2 means non-manifold.
std::map<EdgeKey, std::vector<uint32_t>> edge_triangles(const TriangleMesh& m) {
  std::map<EdgeKey, std::vector<uint32_t>> edges;
  for (uint32_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k)
      edges[edge_key(tri[k], tri[(k + 1) % 3])].push_back(t);
  }
  return edges;
}

// Local orthonormal 2D frame of a triangle; returns the three projected
// 2D vertices and the doubled area.
struct LocalFrame {
  Vec2d p[3];
  double area2;  // 2 * area
};

LocalFrame local_frame(Vec3f a, Vec3f b, Vec3f c) {
  Vec3d A{a.x, a.y, a.z}, B{b.x, b.y, b.z}, C{c.x, c.y, c.z};
  Vec3d e0 = B - A, e1 = C - A;
  Vec3d n = cross(e0, e1);
  double n2 = norm(n);
  Vec3d x = normalized(e0);
  Vec3d y = n2 > 1e-30 ? normalized(cross(n, e0)) : Vec3d{0, 0, 0};
  LocalFrame f;
  f.p[0] = {0, 0};
  f.p[1] = {dot(e0, x), 0};
  f.p[2] = {dot(e1, x), dot(e1, y)};
  f.area2 = n2;
  return f;
}

}  // namespace

std::vector<Patch> segment_into_disk_patches(const TriangleMesh& mesh,
                                             double max_angle_deg) {
  size_t nt = mesh.triangles.size();
  if (nt == 0) return {};
  auto edges = edge_triangles(mesh);

  // triangle adjacency across shared edges
  std::vector<std::vector<uint32_t>> adj(nt);
  for (const auto& [key, tris] : edges) {
    for (size_t i = 0; i < tris.size(); ++i)
      for (size_t j = i + 1; j < tris.size(); ++j) {
        adj[tris[i]].push_back(tris[j]);
        adj[tris[j]].push_back(tris[i]);
      }
  }
  std::vector<Vec3f> tnormal(nt);
  for (size_t t = 0; t < nt; ++t) tnormal[t] = normalized(triangle_normal(mesh, t));

  auto is_disk = [&](const std::vector<uint32_t>& tris) {
    std::set<uint32_t> verts;
    std::set<EdgeKey> es;
    for (uint32_t t : tris) {
      const auto& tri = mesh.triangles[t];
      for (int k = 0; k < 3; ++k) {
        verts.insert(tri[k]);
        es.insert(edge_key(tri[k], tri[(k + 1) % 3]));
      }
    }
    long chi = long(verts.size()) - long(es.size()) + long(tris.size());
    return chi == 1;
  };

  std::vector<int> assigned(nt, -1);
  std::vector<Patch> patches;
  for (size_t seed = 0; seed < nt; ++seed) {
    if (assigned[seed] >= 0) continue;
    double angle = max_angle_deg;
    std::vector<uint32_t> grown;
    for (int attempt = 0; attempt < 5; ++attempt) {
      double cos_limit = std::cos(angle * M_PI / 180.0);
      grown.clear();
      std::vector<char> in_patch(nt, 0);
      std::queue<uint32_t> q;
      q.push(uint32_t(seed));
      in_patch[seed] = 1;
      while (!q.empty()) {
        uint32_t t = q.front();
        q.pop();
        grown.push_back(t);
        for (uint32_t nb : adj[t]) {
          if (in_patch[nb] || assigned[nb] >= 0) continue;
          if (dot(tnormal[nb], tnormal[seed]) < float(cos_limit)) continue;
          in_patch[nb] = 1;
          q.push(nb);
        }
      }
      if (grown.size() == 1 || is_disk(grown)) break;
      angle *= 0.5;  // tighten and retry
    }
    Patch p;
    p.triangles = grown;
    int id = int(patches.size());
    for (uint32_t t : grown) assigned[t] = id;
    patches.push_back(std::move(p));
  }
  return patches;
}

TriangleMesh extract_submesh(const TriangleMesh& mesh, const Patch& patch,
                             std::vector<uint32_t>* vertex_map) {
  TriangleMesh out;
  std::map<uint32_t, uint32_t> remap;
  if (vertex_map) vertex_map->clear();
  for (uint32_t t : patch.triangles) {
    const auto& tri = mesh.triangles[t];
    std::array<uint32_t, 3> nt{};
    for (int k = 0; k < 3; ++k) {
      auto [it, fresh] = remap.emplace(tri[k], uint32_t(out.vertices.size()));
      if (fresh) {
        out.vertices.push_back(mesh.vertices[tri[k]]);
        if (!mesh.colors.empty()) out.colors.push_back(mesh.colors[tri[k]]);
        if (vertex_map) vertex_map->push_back(tri[k]);
      }
      nt[k] = it->second;
    }
    out.triangles.push_back(nt);
  }
  return out;
}

std::vector<Vec2f> lscm_unwrap(const TriangleMesh& patch) {
  size_t nv = patch.vertices.size();
  size_t nt = patch.triangles.size();
  if (nt == 0) throw UsageError("lscm_unwrap: empty patch");

  auto edges = edge_triangles(patch);
  std::vector<uint32_t> boundary;
  {
    std::set<uint32_t> bset;
    for (const auto& [key, tris] : edges) {
      if (tris.size() > 2)
        throw TopologyError(
            "lscm_unwrap: non-manifold edge; segment the mesh into disk patches first");
      if (tris.size() == 1) {
        bset.insert(key.first);
        bset.insert(key.second);
      }
    }
    boundary.assign(bset.begin(), bset.end());
  }
  if (boundary.empty())
    throw TopologyError(
        "lscm_unwrap: closed patch has no boundary; segment the mesh into disk "
        "patches first");

  // Pins: the two boundary vertices farthest apart.
  uint32_t pin0 = boundary[0], pin1 = boundary[0];
  double best = -1;
  for (size_t i = 0; i < boundary.size(); ++i)
    for (size_t j = i + 1; j < boundary.size(); ++j) {
      Vec3f d = patch.vertices[boundary[i]] - patch.vertices[boundary[j]];
      double d2 = double(dot(d, d));
      if (d2 > best) {
        best = d2;
        pin0 = boundary[i];
        pin1 = boundary[j];
      }
    }
  if (pin0 == pin1) throw TopologyError("lscm_unwrap: needs two distinct pins");
  double pin_dist = std::sqrt(best);

  // Unknown ordering: free vertices keep (u, v) at columns (2i, 2i+1).
  std::vector<int> col(nv, -1);
  int free_count = 0;
  for (size_t v = 0; v < nv; ++v)
    if (v != pin0 && v != pin1) col[v] = 2 * free_count++;

  Vec2d pin_uv[2] = {{0.0, 0.0}, {pin_dist, 0.0}};
  auto pinned_uv = [&](uint32_t v) -> Vec2d { return v == pin0 ? pin_uv[0] : pin_uv[1]; };

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(long(2 * nt));
  for (size_t t = 0; t < nt; ++t) {
    const auto& tri = patch.triangles[t];
    LocalFrame f = local_frame(patch.vertices[tri[0]], patch.vertices[tri[1]],
                               patch.vertices[tri[2]]);
    if (f.area2 < 1e-30) continue;
    // Row scale so that ||row||^2 contributes A_T |r_T|^2 with
    // r_T = (1/2A) sum_j (u_j g_j + v_j rot90(g_j)).
    double s = 1.0 / (2.0 * std::sqrt(0.5 * f.area2));
    // gradient weights: grad f = (1/2A) sum_j f_j * rot90(e_j), e_j opposite edge
    for (int j = 0; j < 3; ++j) {
      Vec2d e = f.p[(j + 2) % 3] - f.p[(j + 1) % 3];
      Vec2d g{-e.y, e.x};  // rot90(e_j)
      // rows: 2t (x-residual), 2t+1 (y-residual); scaled by s/(2A)*2A = s
      double gx = g.x * s, gy = g.y * s;
      uint32_t v = tri[j];
      if (col[v] >= 0) {
        trip.emplace_back(long(2 * t), col[v], gx);        // u_j in r_x
        trip.emplace_back(long(2 * t), col[v] + 1, -gy);   // v_j in r_x
        trip.emplace_back(long(2 * t + 1), col[v], gy);    // u_j in r_y
        trip.emplace_back(long(2 * t + 1), col[v] + 1, gx);  // v_j in r_y
      } else {
        Vec2d uv = pinned_uv(v);
        rhs[long(2 * t)] -= gx * uv.x - gy * uv.y;
        rhs[long(2 * t + 1)] -= gy * uv.x + gx * uv.y;
      }
    }
  }

  std::vector<Vec2f> uv(nv);
  if (free_count > 0) {
    Eigen::SparseMatrix<double> m(long(2 * nt), long(2 * free_count));
    m.setFromTriplets(trip.begin(), trip.end());
    Eigen::LeastSquaresConjugateGradient<Eigen::SparseMatrix<double>> solver;
    solver.setTolerance(1e-10);
    solver.setMaxIterations(20000);
    solver.compute(m);
    Eigen::VectorXd x = solver.solve(rhs);
    if (solver.info() != Eigen::Success && solver.info() != Eigen::NoConvergence)
      throw TopologyError("lscm_unwrap: least-squares solve failed");
    for (size_t v = 0; v < nv; ++v)
      if (col[v] >= 0) uv[v] = {float(x[col[v]]), float(x[col[v] + 1])};
  }
  uv[pin0] = {float(pin_uv[0].x), float(pin_uv[0].y)};
  uv[pin1] = {float(pin_uv[1].x), float(pin_uv[1].y)};
  return uv;
}

double lscm_energy(const TriangleMesh& patch, std::span<const Vec2f> uv) {
  if (uv.size() != patch.vertices.size())
    throw UsageError("lscm_energy: uv length mismatch");
  double energy = 0;
  for (size_t t = 0; t < patch.triangles.size(); ++t) {
    const auto& tri = patch.triangles[t];
    LocalFrame f = local_frame(patch.vertices[tri[0]], patch.vertices[tri[1]],
                               patch.vertices[tri[2]]);
    if (f.area2 < 1e-30) continue;
    double area = 0.5 * f.area2;
    Vec2d gu{0, 0}, gv{0, 0};
    for (int j = 0; j < 3; ++j) {
      Vec2d e = f.p[(j + 2) % 3] - f.p[(j + 1) % 3];
      Vec2d g{-e.y, e.x};
      double inv = 1.0 / f.area2;
      gu.x += uv[tri[j]].x * g.x * inv;
      gu.y += uv[tri[j]].x * g.y * inv;
      gv.x += uv[tri[j]].y * g.x * inv;
      gv.y += uv[tri[j]].y * g.y * inv;
    }
    // Cauchy-Riemann residual (u_x - v_y, u_y + v_x)
    double rx = gu.x - gv.y;
    double ry = gu.y + gv.x;
    energy += area * (rx * rx + ry * ry);
  }
  return energy;
}

std::vector<Vec2f> project_to_best_fit_plane(const TriangleMesh& patch) {
  Vec3d mean{0, 0, 0};
  for (const auto& v : patch.vertices) mean += Vec3d{v.x, v.y, v.z};
  mean = mean / double(patch.vertices.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& v : patch.vertices) {
    Eigen::Vector3d d(v.x - mean.x, v.y - mean.y, v.z - mean.z);
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  Eigen::Vector3d ax = eig.eigenvectors().col(2);  // largest spread
  Eigen::Vector3d ay = eig.eigenvectors().col(1);
  std::vector<Vec2f> uv(patch.vertices.size());
  for (size_t i = 0; i < patch.vertices.size(); ++i) {
    Eigen::Vector3d d(patch.vertices[i].x - mean.x, patch.vertices[i].y - mean.y,
                      patch.vertices[i].z - mean.z);
    uv[i] = {float(d.dot(ax)), float(d.dot(ay))};
  }
  return uv;
}

TriangleMesh unwrap_mesh(const TriangleMesh& mesh, double max_angle_deg,
                         std::vector<int>* chart_of_triangle) {
  auto patches = segment_into_disk_patches(mesh, max_angle_deg);
  TriangleMesh out;
  if (chart_of_triangle) chart_of_triangle->clear();

  struct Chart {
    TriangleMesh sub;
    std::vector<Vec2f> uv;
    Vec2f uv_min{}, uv_max{};
  };
  std::vector<Chart> charts;
  for (const auto& p : patches) {
    Chart c;
    c.sub = extract_submesh(mesh, p);
    c.uv = lscm_unwrap(c.sub);
    c.uv_min = c.uv_max = c.uv.empty() ? Vec2f{0.f, 0.f} : c.uv[0];
    for (const auto& q : c.uv) {
      c.uv_min.x = std::min(c.uv_min.x, q.x);
      c.uv_min.y = std::min(c.uv_min.y, q.y);
      c.uv_max.x = std::max(c.uv_max.x, q.x);
      c.uv_max.y = std::max(c.uv_max.y, q.y);
    }
    charts.push_back(std::move(c));
  }

  // Shelf packing into the unit square with a small margin per chart.
  double total_area = 0;
  for (const auto& c : charts) {
    double w = c.uv_max.x - c.uv_min.x, h = c.uv_max.y - c.uv_min.y;
    total_area += std::max(w, 1e-9) * std::max(h, 1e-9);
  }
  double scale = total_area > 0 ? 0.85 / std::sqrt(total_area) : 1.0;
  const double margin = 0.01;
  double cursor_x = margin, cursor_y = margin, shelf_h = 0;
  for (size_t ci = 0; ci < charts.size(); ++ci) {
    Chart& c = charts[ci];
    double w = (c.uv_max.x - c.uv_min.x) * scale;
    double h = (c.uv_max.y - c.uv_min.y) * scale;
    if (cursor_x + w + margin > 1.0) {
      cursor_x = margin;
      cursor_y += shelf_h + margin;
      shelf_h = 0;
    }
    shelf_h = std::max(shelf_h, h);
    uint32_t base = uint32_t(out.vertices.size());
    for (size_t v = 0; v < c.sub.vertices.size(); ++v) {
      out.vertices.push_back(c.sub.vertices[v]);
      if (!c.sub.colors.empty()) out.colors.push_back(c.sub.colors[v]);
      Vec2f q = c.uv[v];
      out.uv.push_back({float(cursor_x + (q.x - c.uv_min.x) * scale),
                        float(cursor_y + (q.y - c.uv_min.y) * scale)});
    }
    for (const auto& tri : c.sub.triangles) {
      out.triangles.push_back({tri[0] + base, tri[1] + base, tri[2] + base});
      if (chart_of_triangle) chart_of_triangle->push_back(int(ci));
    }
    cursor_x += w + margin;
  }
  return out;
}

}  // namespace nerfkit::geom
