// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/synth.hpp"

#include <cmath>

namespace nerfkit::data {

namespace {

std::optional<double> hit_sphere(const SpherePrim& s, Vec3d o, Vec3d d) {
  Vec3d oc = o - s.center;
  double b = dot(oc, d);
  double c = dot(oc, oc) - s.radius * s.radius;
  double disc = b * b - c;
  if (disc < 0) return std::nullopt;
  double sq = std::sqrt(disc);
  double t = -b - sq;
  if (t <= 1e-9) t = -b + sq;
  if (t <= 1e-9) return std::nullopt;
  return t;
}

std::optional<double> hit_plane(const PlanePrim& p, Vec3d o, Vec3d d) {
  double denom = dot(p.normal, d);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  double t = (p.offset - dot(p.normal, o)) / denom;
  if (t <= 1e-9) return std::nullopt;
  return t;
}

std::optional<std::pair<double, Vec3d>> hit_box(const BoxPrim& b, Vec3d o, Vec3d d) {
  double t0 = 1e-9, t1 = 1e30;
  int axis0 = -1;
  for (int a = 0; a < 3; ++a) {
    double da = (&d.x)[a], oa = (&o.x)[a];
    double mn = (&b.min.x)[a], mx = (&b.max.x)[a];
    if (std::abs(da) < 1e-12) {
      if (oa < mn || oa > mx) return std::nullopt;
      continue;
    }
    double inv = 1.0 / da;
    double ta = (mn - oa) * inv, tb = (mx - oa) * inv;
    if (ta > tb) std::swap(ta, tb);
    if (ta > t0) {
      t0 = ta;
      axis0 = a;
    }
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  if (axis0 < 0) return std::nullopt;  // origin inside the box
  Vec3d n{0, 0, 0};
  (&n.x)[axis0] = (&d.x)[axis0] > 0 ? -1.0 : 1.0;
  return std::make_pair(t0, n);
}

double box_sdf(const BoxPrim& b, Vec3d x) {
  Vec3d c = (b.min + b.max) * 0.5;
  Vec3d h = (b.max - b.min) * 0.5;
  Vec3d q{std::abs(x.x - c.x) - h.x, std::abs(x.y - c.y) - h.y,
          std::abs(x.z - c.z) - h.z};
  Vec3d qp{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
  double outside = norm(qp);
  double inside = std::min(std::max(q.x, std::max(q.y, q.z)), 0.0);
  return outside + inside;
}

RingSpec parse_ring(const KeyValues& kv, const std::string& prefix, RingSpec def) {
  RingSpec r = def;
  r.count = int(kv.get_int(prefix + ".count", def.count));
  r.radius = kv.get_double(prefix + ".radius", def.radius);
  r.elevation_deg = kv.get_double(prefix + ".elevation_deg", def.elevation_deg);
  r.look_at = kv.get_vec3(prefix + ".look_at", def.look_at);
  return r;
}

void check_albedo(const Vec3f& a, const std::string& keypath) {
  for (int k = 0; k < 3; ++k)
    if (a[k] < 0.f || a[k] > 1.f)
      throw ValidationError(keypath + ": albedo components must be in [0, 1]");
}

}  // namespace

void SceneSpec::validate() const {
  if (train_ring.count < 1)
    throw ValidationError("train.count: camera count must be >= 1");
  if (val_ring.count < 0) throw ValidationError("val.count: must be >= 0");
  if (image_size < 8) throw ValidationError("image_size: must be >= 8");
  if (!(fov_deg > 1 && fov_deg < 170))
    throw ValidationError("fov_deg: must be in (1, 170)");
  Vec3f e = box.extent();
  if (!(e.x > 0 && e.y > 0 && e.z > 0))
    throw ValidationError("box: must have positive extent");
  for (size_t i = 0; i < spheres.size(); ++i) {
    if (spheres[i].radius <= 0)
      throw ValidationError("sphere[" + std::to_string(i) + "].radius: must be > 0");
    check_albedo(spheres[i].albedo, "sphere[" + std::to_string(i) + "].albedo");
  }
  for (size_t i = 0; i < planes.size(); ++i) {
    if (norm(planes[i].normal) < 1e-9)
      throw ValidationError("plane[" + std::to_string(i) + "].normal: must be nonzero");
    check_albedo(planes[i].albedo, "plane[" + std::to_string(i) + "].albedo");
  }
  for (size_t i = 0; i < boxes.size(); ++i) {
    Vec3d d = boxes[i].max - boxes[i].min;
    if (!(d.x > 0 && d.y > 0 && d.z > 0))
      throw ValidationError("box_prim[" + std::to_string(i) + "]: max must exceed min");
    check_albedo(boxes[i].albedo, "box_prim[" + std::to_string(i) + "].albedo");
  }
  if (norm(light_dir) < 1e-9) throw ValidationError("light: must be nonzero");
}

SceneSpec parse_scene_spec(const KeyValues& kv) {
  SceneSpec spec;
  Vec3d bgd = kv.get_vec3("background", {1, 1, 1});
  spec.background = {float(bgd.x), float(bgd.y), float(bgd.z)};
  spec.light_dir = kv.get_vec3("light", spec.light_dir);
  if (kv.has("box")) {
    const auto& e = kv.first("box");
    if (e.tokens.size() != 6) throw ValidationError("box: expects 6 values");
    spec.box.min = {float(KeyValues::token_double(e, 0)),
                    float(KeyValues::token_double(e, 1)),
                    float(KeyValues::token_double(e, 2))};
    spec.box.max = {float(KeyValues::token_double(e, 3)),
                    float(KeyValues::token_double(e, 4)),
                    float(KeyValues::token_double(e, 5))};
  }
  spec.fov_deg = kv.get_double("fov_deg", spec.fov_deg);
  spec.image_size = int(kv.get_int("image_size", spec.image_size));
  spec.train_ring = parse_ring(kv, "train", spec.train_ring);
  spec.val_ring = parse_ring(kv, "val", spec.val_ring);
  for (const auto* e : kv.all("sphere")) {
    if (e->tokens.size() != 7)
      throw ValidationError("sphere: expects `cx cy cz radius r g b`");
    SpherePrim s;
    s.center = {KeyValues::token_double(*e, 0), KeyValues::token_double(*e, 1),
                KeyValues::token_double(*e, 2)};
    s.radius = KeyValues::token_double(*e, 3);
    s.albedo = {float(KeyValues::token_double(*e, 4)),
                float(KeyValues::token_double(*e, 5)),
                float(KeyValues::token_double(*e, 6))};
    spec.spheres.push_back(s);
  }
  for (const auto* e : kv.all("plane")) {
    if (e->tokens.size() != 7)
      throw ValidationError("plane: expects `nx ny nz offset r g b`");
    PlanePrim p;
    p.normal = normalized(Vec3d{KeyValues::token_double(*e, 0),
                                KeyValues::token_double(*e, 1),
                                KeyValues::token_double(*e, 2)});
    p.offset = KeyValues::token_double(*e, 3);
    p.albedo = {float(KeyValues::token_double(*e, 4)),
                float(KeyValues::token_double(*e, 5)),
                float(KeyValues::token_double(*e, 6))};
    spec.planes.push_back(p);
  }
  for (const auto* e : kv.all("box_prim")) {
    if (e->tokens.size() != 9)
      throw ValidationError("box_prim: expects `minx miny minz maxx maxy maxz r g b`");
    BoxPrim b;
    b.min = {KeyValues::token_double(*e, 0), KeyValues::token_double(*e, 1),
             KeyValues::token_double(*e, 2)};
    b.max = {KeyValues::token_double(*e, 3), KeyValues::token_double(*e, 4),
             KeyValues::token_double(*e, 5)};
    b.albedo = {float(KeyValues::token_double(*e, 6)),
                float(KeyValues::token_double(*e, 7)),
                float(KeyValues::token_double(*e, 8))};
    spec.boxes.push_back(b);
  }
  spec.validate();
  return spec;
}

SceneSpec load_scene_spec(const std::string& path) {
  return parse_scene_spec(KeyValues::parse_file(path));
}

std::optional<Hit> intersect_scene(const SceneSpec& spec, Vec3d o, Vec3d d) {
  std::optional<Hit> best;
  for (const auto& s : spec.spheres) {
    auto t = hit_sphere(s, o, d);
    if (t && (!best || *t < best->t)) {
      Vec3d p = o + d * *t;
      best = Hit{*t, (p - s.center) / s.radius, s.albedo};
    }
  }
  for (const auto& p : spec.planes) {
    auto t = hit_plane(p, o, d);
    if (t && (!best || *t < best->t)) {
      Vec3d n = dot(p.normal, d) < 0 ? p.normal : -p.normal;
      best = Hit{*t, n, p.albedo};
    }
  }
  for (const auto& b : spec.boxes) {
    auto h = hit_box(b, o, d);
    if (h && (!best || h->first < best->t)) best = Hit{h->first, h->second, b.albedo};
  }
  return best;
}

Vec3f shade(const SceneSpec& spec, const Hit& hit) {
  Vec3d l = normalized(spec.light_dir);
  double lambert = std::max(0.0, dot(hit.normal, l));
  float k = float(std::min(1.0, lambert + 0.1));
  return {std::min(1.0f, hit.albedo.x * k), std::min(1.0f, hit.albedo.y * k),
          std::min(1.0f, hit.albedo.z * k)};
}

double scene_sdf(const SceneSpec& spec, Vec3d x) {
  double d = 1e30;
  for (const auto& s : spec.spheres) d = std::min(d, norm(x - s.center) - s.radius);
  for (const auto& p : spec.planes) d = std::min(d, dot(p.normal, x) - p.offset);
  for (const auto& b : spec.boxes) d = std::min(d, box_sdf(b, x));
  return d;
}

std::vector<render::Camera> ring_cameras(const SceneSpec& spec, const RingSpec& ring) {
  std::vector<render::Camera> cams;
  double elev = ring.elevation_deg * M_PI / 180.0;
  double focal = (spec.image_size / 2.0) / std::tan(spec.fov_deg * M_PI / 360.0);
  for (int i = 0; i < ring.count; ++i) {
    double az = 2.0 * M_PI * i / ring.count;
    Vec3d eye = ring.look_at +
                Vec3d{std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az),
                      std::sin(elev)} *
                    ring.radius;
    render::Camera cam;
    cam.width = cam.height = spec.image_size;
    cam.fx = cam.fy = focal;
    cam.cx = spec.image_size / 2.0;
    cam.cy = spec.image_size / 2.0;
    cam.c2w = render::look_at(eye, ring.look_at);
    cam.near = 0.1;  // refined from depths by the caller
    cam.far = 2.0 * ring.radius;
    cams.push_back(cam);
  }
  return cams;
}

void render_analytic_view(const SceneSpec& spec, const render::Camera& cam,
                          Image8& image, DepthMap& depth, int threads) {
  image = Image8(cam.width, cam.height);
  depth = DepthMap(cam.width, cam.height);
  parallel_for(size_t(cam.height), threads, [&](size_t jb, size_t je, int) {
    for (size_t j = jb; j < je; ++j) {
      for (int i = 0; i < cam.width; ++i) {
        auto ray = render::generate_ray<double>(cam, i, int(j));
        auto hit = intersect_scene(spec, ray.origin, ray.dir);
        Vec3f c = spec.background;
        if (hit) {
          c = shade(spec, *hit);
          depth.depth[depth.idx(i, int(j))] = float(hit->t);
          depth.valid[depth.idx(i, int(j))] = 1;
        }
        uint8_t* px = image.pixel(i, int(j));
        for (int k = 0; k < 3; ++k)
          px[k] = uint8_t(std::lround(std::clamp(c[k], 0.f, 1.f) * 255.f));
      }
    }
  });
}

SynthDataset synth_scene(const SceneSpec& spec, int threads) {
  spec.validate();
  SynthDataset ds;
  ds.spec = spec;
  auto add_ring = [&](const RingSpec& ring, const std::string& split) {
    for (auto& cam : ring_cameras(spec, ring)) {
      SynthView v;
      v.split = split;
      render_analytic_view(spec, cam, v.image, v.depth, threads);
      // Per-view bounds from ground-truth depth (min/max with 10% margin).
      double dmin = 1e30, dmax = 0;
      for (size_t k = 0; k < v.depth.depth.size(); ++k) {
        if (!v.depth.valid[k]) continue;
        dmin = std::min(dmin, double(v.depth.depth[k]));
        dmax = std::max(dmax, double(v.depth.depth[k]));
      }
      if (dmax <= 0) {  // no hits: fall back to the ring geometry
        dmin = ring.radius * 0.25;
        dmax = ring.radius * 2.0;
      }
      cam.near = dmin * 0.9;
      cam.far = dmax * 1.1;
      v.camera = cam;
      ds.views.push_back(std::move(v));
    }
  };
  add_ring(spec.train_ring, "train");
  add_ring(spec.val_ring, "val");
  return ds;
}

}  // namespace nerfkit::data
