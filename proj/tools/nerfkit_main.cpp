// SPDX-License-Identifier: Apache-2.0
//
// nerfkit command line: synth, prepare, train, render, extract, eval.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>

#include "nerfkit/checkpoint.hpp"
#include "nerfkit/colmap.hpp"
#include "nerfkit/dataset.hpp"
#include "nerfkit/field_mesh.hpp"
#include "nerfkit/lscm.hpp"
#include "nerfkit/marching_cubes.hpp"
#include "nerfkit/mesh_io.hpp"
#include "nerfkit/metrics.hpp"
#include "nerfkit/png_io.hpp"
#include "nerfkit/renderer.hpp"
#include "nerfkit/texture.hpp"
#include "nerfkit/trainer.hpp"

namespace fs = std::filesystem;
using namespace nerfkit;

namespace {

struct GlobalOpts {
  uint64_t seed = 0;
  bool seed_given = false;
  int threads = default_threads();
  bool deterministic = false;
  bool verbose = false;
};

uint64_t resolve_seed(GlobalOpts& g) {
  if (!g.seed_given) {
    std::random_device rd;
    g.seed = (uint64_t(rd()) << 32) | rd();
    std::cout << "seed " << g.seed << "\n";
  }
  return g.seed;
}

void add_global_flags(CLI::App* cmd, GlobalOpts& g) {
  cmd->add_option("--seed", g.seed, "RNG seed (printed when omitted)")
      ->each([&g](const std::string&) { g.seed_given = true; });
  cmd->add_option("--threads", g.threads, "worker thread cap");
  cmd->add_flag("--deterministic", g.deterministic,
                "fixed-order reductions everywhere");
  cmd->add_flag("--verbose", g.verbose, "chatty progress output");
}

// ---------------------------------------------------------------------------
// train config file -> TrainConfig + HashGridConfig
// ---------------------------------------------------------------------------
struct LoadedTrainConfig {
  train::TrainConfig cfg;
  grid::HashGridConfig grid;
  bool background_auto = true;
};

LoadedTrainConfig load_train_config(const std::string& path) {
  data::KeyValues kv = data::KeyValues::parse_file(path);
  LoadedTrainConfig out;
  std::string backend = kv.get_string("backend", "density");
  if (backend == "density")
    out.cfg.backend = train::Backend::kDensity;
  else if (backend == "sdf")
    out.cfg.backend = train::Backend::kSdf;
  else
    throw ValidationError("backend: must be density or sdf");
  out.cfg.iterations = int(kv.get_int("iterations", out.cfg.iterations));
  out.cfg.rays_per_batch = int(kv.get_int("rays_per_batch", out.cfg.rays_per_batch));
  out.cfg.samples_per_ray = int(kv.get_int("samples_per_ray", out.cfg.samples_per_ray));
  out.cfg.lr = float(kv.get_double("lr", out.cfg.lr));
  out.cfg.lr_grid_scale = float(kv.get_double("lr_grid_scale", out.cfg.lr_grid_scale));
  out.cfg.lr_decay_per_1k =
      float(kv.get_double("lr_decay_per_1k", out.cfg.lr_decay_per_1k));
  out.cfg.alpha = float(kv.get_double("alpha", out.cfg.alpha));
  out.cfg.beta = float(kv.get_double("beta", out.cfg.beta));
  out.cfg.eikonal_points = int(kv.get_int("eikonal_points", out.cfg.eikonal_points));
  out.cfg.eikonal_fd_step =
      float(kv.get_double("eikonal_fd_step", out.cfg.eikonal_fd_step));
  out.cfg.stratified = kv.get_bool("stratified", out.cfg.stratified);
  out.cfg.val_interval = int(kv.get_int("val_interval", out.cfg.val_interval));
  out.cfg.checkpoint_interval =
      int(kv.get_int("checkpoint_interval", out.cfg.checkpoint_interval));
  std::string bg = kv.get_string("background", "auto");
  if (bg != "auto") {
    Vec3d b = kv.get_vec3("background", {0, 0, 0});
    out.cfg.background = {float(b.x), float(b.y), float(b.z)};
    out.background_auto = false;
  }
  out.grid.levels = int(kv.get_int("grid.levels", out.grid.levels));
  out.grid.features_per_level =
      int(kv.get_int("grid.features", out.grid.features_per_level));
  long log2_table = kv.get_int("grid.log2_table", 19);
  if (log2_table < 4 || log2_table > 24)
    throw ValidationError("grid.log2_table: must be in [4, 24]");
  out.grid.table_size = 1u << log2_table;
  out.grid.base_resolution = int(kv.get_int("grid.base_res", out.grid.base_resolution));
  out.grid.max_resolution = int(kv.get_int("grid.max_res", out.grid.max_resolution));
  return out;
}

void echo_effective_config(const std::string& out_dir, const LoadedTrainConfig& lc,
                           const GlobalOpts& g) {
  data::KeyValues kv;
  const auto& c = lc.cfg;
  kv.set("backend", c.backend == train::Backend::kDensity ? "density" : "sdf");
  kv.set("iterations", std::to_string(c.iterations));
  kv.set("rays_per_batch", std::to_string(c.rays_per_batch));
  kv.set("samples_per_ray", std::to_string(c.samples_per_ray));
  kv.set("lr", std::to_string(c.lr));
  kv.set("lr_grid_scale", std::to_string(c.lr_grid_scale));
  kv.set("lr_decay_per_1k", std::to_string(c.lr_decay_per_1k));
  kv.set("alpha", std::to_string(c.alpha));
  kv.set("beta", std::to_string(c.effective_beta()));
  kv.set("eikonal_points", std::to_string(c.eikonal_points));
  kv.set("eikonal_fd_step", std::to_string(c.eikonal_fd_step));
  kv.set("stratified", c.stratified ? "true" : "false");
  kv.set("val_interval", std::to_string(c.val_interval));
  kv.set("checkpoint_interval", std::to_string(c.checkpoint_interval));
  std::ostringstream bg;
  bg << c.background.x << ' ' << c.background.y << ' ' << c.background.z;
  kv.set("background", bg.str());
  kv.set("grid.levels", std::to_string(lc.grid.levels));
  kv.set("grid.features", std::to_string(lc.grid.features_per_level));
  kv.set("grid.log2_table",
         std::to_string(int(std::log2(double(lc.grid.table_size)))));
  kv.set("grid.base_res", std::to_string(lc.grid.base_resolution));
  kv.set("grid.max_res", std::to_string(lc.grid.max_resolution));
  kv.set("seed", std::to_string(g.seed));
  kv.set("threads", std::to_string(g.threads));
  kv.set("deterministic", g.deterministic ? "true" : "false");
  kv.save((fs::path(out_dir) / "effective_config.cfg").string());
}

// ---------------------------------------------------------------------------
int cmd_synth(const std::string& spec_path, const std::string& out_dir, GlobalOpts& g) {
  resolve_seed(g);
  data::SceneSpec spec = data::load_scene_spec(spec_path);
  fs::create_directories(out_dir);
  data::SynthDataset ds = data::synth_scene(spec, g.threads);
  data::save_dataset(out_dir, ds);
  fs::copy_file(spec_path, fs::path(out_dir) / "scene.spec",
                fs::copy_options::overwrite_existing);
  std::cout << "synth: wrote " << ds.views.size() << " views ("
            << spec.train_ring.count << " train, " << spec.val_ring.count
            << " val) at " << spec.image_size << "x" << spec.image_size << " to "
            << out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
int cmd_prepare(const std::string& colmap_dir, const std::string& images_dir,
                const std::string& out_dir, int val_every, bool allow_missing,
                double near_opt, double far_opt, std::vector<double> box_opt,
                GlobalOpts& g) {
  static_cast<void>(g);
  data::ColmapModel model = data::parse_colmap(colmap_dir);
  if (model.images.empty()) throw ValidationError("COLMAP model has no images");

  // Per-image depth samples from the sparse points (for near/far bounds).
  std::map<int, std::vector<double>> image_depths;
  for (const auto& pt : model.points) {
    for (int img_id : pt.image_ids) {
      auto it = model.images.find(img_id);
      if (it == model.images.end()) continue;
      Vec3d cam_pt = it->second.rotation() * pt.xyz + it->second.t;
      if (cam_pt.z > 0) image_depths[img_id].push_back(cam_pt.z);
    }
  }

  std::vector<std::string> missing;
  std::vector<data::PreparedView> views;
  int idx = 0;
  for (const auto& [id, img] : model.images) {
    fs::path img_path = fs::path(images_dir) / img.name;
    if (!fs::exists(img_path)) {
      missing.push_back(img.name);
      continue;
    }
    const auto& cam = model.cameras.at(img.camera_id);
    Mat4 c2w = data::w2c_to_c2w(img.rotation(), img.t);
    Pose pose = c2w.to_pose();
    // COLMAP camera axes are right-down-forward; flip to right-up-backward.
    pose.rot.set_col(1, -pose.rot.col(1));
    pose.rot.set_col(2, -pose.rot.col(2));

    data::PreparedView v;
    v.camera.width = cam.width;
    v.camera.height = cam.height;
    v.camera.fx = cam.fx();
    v.camera.fy = cam.fy();
    v.camera.cx = cam.cx();
    v.camera.cy = cam.cy();
    v.camera.c2w = pose;
    auto it = image_depths.find(id);
    if (it != image_depths.end() && it->second.size() >= 4) {
      auto& d = it->second;
      std::sort(d.begin(), d.end());
      double lo = d[size_t(0.01 * double(d.size() - 1))];
      double hi = d[size_t(0.99 * double(d.size() - 1))];
      v.camera.near = lo * 0.9;
      v.camera.far = hi * 1.1;
    } else if (near_opt > 0 && far_opt > near_opt) {
      v.camera.near = near_opt;
      v.camera.far = far_opt;
    } else {
      throw ValidationError("no sparse depth for image " + img.name +
                            "; pass --near/--far");
    }
    v.split = (val_every > 0 && idx % val_every == val_every - 1) ? "val" : "train";
    v.image_path = fs::absolute(img_path).string();
    views.push_back(std::move(v));
    ++idx;
  }
  if (!missing.empty()) {
    for (const auto& name : missing)
      std::cerr << "missing image file: " << name << "\n";
    if (!allow_missing)
      throw IoError(std::to_string(missing.size()) +
                    " registered images are missing on disk (use --allow-missing)");
  }
  if (views.empty()) throw ValidationError("no usable views after matching images");

  BBoxf box;
  if (box_opt.size() == 6) {
    box = {{float(box_opt[0]), float(box_opt[1]), float(box_opt[2])},
           {float(box_opt[3]), float(box_opt[4]), float(box_opt[5])}};
  } else if (!model.points.empty()) {
    // Percentile box over the sparse cloud, padded by 15%.
    std::vector<double> xs, ys, zs;
    for (const auto& p : model.points) {
      xs.push_back(p.xyz.x);
      ys.push_back(p.xyz.y);
      zs.push_back(p.xyz.z);
    }
    auto pct = [](std::vector<double>& v, double q) {
      std::sort(v.begin(), v.end());
      return v[size_t(q * double(v.size() - 1))];
    };
    Vec3d lo{pct(xs, 0.02), pct(ys, 0.02), pct(zs, 0.02)};
    Vec3d hi{pct(xs, 0.98), pct(ys, 0.98), pct(zs, 0.98)};
    Vec3d pad = (hi - lo) * 0.15;
    box = {BBoxd{lo - pad, hi + pad}.cast<float>().min,
           BBoxd{lo - pad, hi + pad}.cast<float>().max};
  } else {
    throw ValidationError("no points3D.txt; pass --box to define the scene bounds");
  }

  fs::create_directories(out_dir);
  data::save_prepared_dataset(out_dir, views, box, {0.f, 0.f, 0.f});
  std::cout << "prepare: " << views.size() << " views ("
            << (missing.empty() ? "all matched" : std::to_string(missing.size()) +
                                                      " missing")
            << ") -> " << out_dir << "\n";
  return missing.empty() || allow_missing ? 0 : 1;
}

// ---------------------------------------------------------------------------
int cmd_train(const std::string& dataset_dir, const std::string& config_path,
              const std::string& out_dir, GlobalOpts& g) {
  resolve_seed(g);
  LoadedTrainConfig lc = load_train_config(config_path);
  lc.cfg.seed = g.seed;
  lc.cfg.threads = g.threads;
  lc.cfg.deterministic = g.deterministic;

  data::Dataset ds = data::load_dataset(dataset_dir);
  if (lc.background_auto) lc.cfg.background = ds.background;
  fs::create_directories(out_dir);
  echo_effective_config(out_dir, lc, g);

  std::ofstream log((fs::path(out_dir) / "train_log.txt").string());
  std::string ckpt = (fs::path(out_dir) / "checkpoint.nkc").string();
  auto result = train::train(ds, lc.cfg, lc.grid, &log, ckpt);

  std::cout << "train: " << lc.cfg.iterations << " iterations in " << std::fixed
            << std::setprecision(1) << result.elapsed_s << "s";
  if (result.has_val_psnr)
    std::cout << ", final val PSNR " << std::setprecision(2) << result.final_val_psnr
              << " dB";
  std::cout << ", checkpoint " << ckpt << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
int cmd_render(const std::string& ckpt_path, const std::string& dataset_dir,
               const std::string& split, int orbit, double orbit_radius,
               double orbit_elev, int orbit_size, double orbit_fov,
               const std::string& out_dir, int samples, bool with_depth,
               GlobalOpts& g) {
  fields::LoadedField field = fields::load_checkpoint(ckpt_path);
  fs::create_directories(out_dir);

  std::vector<render::Camera> cameras;
  std::vector<const ImageF*> gt;
  Vec3f background{0.f, 0.f, 0.f};
  data::Dataset ds;
  if (!dataset_dir.empty()) {
    ds = data::load_dataset(dataset_dir);
    background = ds.background;
    for (size_t i : ds.split_indices(split)) {
      cameras.push_back(ds.views[i].camera);
      gt.push_back(&ds.views[i].image);
    }
    if (cameras.empty())
      throw UsageError("dataset has no views in split '" + split + "'");
  } else if (orbit > 0) {
    data::SceneSpec spec;
    spec.image_size = orbit_size;
    spec.fov_deg = orbit_fov;
    BBoxf box = field.bbox();
    Vec3f c = box.center();
    data::RingSpec ring{orbit, orbit_radius, orbit_elev,
                        {double(c.x), double(c.y), double(c.z)}};
    cameras = data::ring_cameras(spec, ring);
    Vec3f e = box.extent();
    for (auto& cam : cameras) {
      cam.near = std::max(0.05, orbit_radius - double(norm(e)));
      cam.far = orbit_radius + double(norm(e));
    }
  } else {
    throw UsageError("render: pass --dataset (with --split) or --orbit N");
  }

  render::RenderImageOptions opt;
  opt.samples_per_ray = samples;
  opt.background = background;
  opt.threads = g.threads;
  opt.with_depth = with_depth;

  double psnr_acc = 0;
  int psnr_count = 0;
  for (size_t i = 0; i < cameras.size(); ++i) {
    render::RenderedImage img;
    if (field.backend == fields::Backend::kDensity)
      img = render::render_image(*field.density, cameras[i], opt);
    else
      img = render::render_image(*field.sdf, cameras[i], opt);
    std::ostringstream name;
    name << std::setw(3) << std::setfill('0') << i;
    data::write_png((fs::path(out_dir) / ("render_" + name.str() + ".png")).string(),
                    to_u8(img.color));
    if (with_depth)
      data::write_depth_raw(
          (fs::path(out_dir) / ("depth_" + name.str() + ".nkd")).string(), img.depth);
    if (i < gt.size() && gt[i]) {
      double p = metrics::psnr(img.color, *gt[i], 1.0);
      std::cout << "psnr view " << i << " " << std::setprecision(6) << p << "\n";
      psnr_acc += p;
      ++psnr_count;
    }
  }
  if (psnr_count > 0)
    std::cout << "psnr mean " << std::setprecision(6) << psnr_acc / psnr_count << "\n";
  std::cout << "render: wrote " << cameras.size() << " views to " << out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
int cmd_extract(const std::string& ckpt_path, const std::string& mode,
                const std::string& dataset_dir, const std::string& out_dir, int stride,
                int grid_res, double iso, bool iso_given, int texture_size, int samples,
                bool use_tsdf, GlobalOpts& g) {
  if (mode != "points" && mode != "mesh")
    throw UsageError("extract: mode must be 'points' or 'mesh'");
  if (texture_size > 0 && mode != "mesh")
    throw UsageError("--texture is only valid in mesh mode");
  fields::LoadedField field = fields::load_checkpoint(ckpt_path);
  fs::create_directories(out_dir);

  if (mode == "points") {
    if (dataset_dir.empty())
      throw UsageError("extract points: needs --dataset for the camera set");
    data::Dataset ds = data::load_dataset(dataset_dir, /*load_images=*/false);
    std::vector<render::Camera> cams;
    for (size_t i : ds.split_indices("train")) cams.push_back(ds.views[i].camera);
    geom::ExtractOptions opt;
    opt.stride = stride;
    opt.samples_per_ray = samples;
    opt.threads = g.threads;
    geom::PointCloud cloud;
    if (field.backend == fields::Backend::kDensity) {
      geom::DensityAdapter<float> ad{field.density.get()};
      cloud = geom::extract_pointcloud(ad, cams, opt);
    } else {
      geom::SdfAdapter<float> ad{field.sdf.get()};
      cloud = geom::extract_pointcloud(ad, cams, opt);
    }
    std::string path = (fs::path(out_dir) / "points.ply").string();
    geom::write_ply(path, cloud);
    std::cout << "extract: " << cloud.points.size() << " points -> " << path << "\n";
    return 0;
  }

  // mesh mode
  geom::TriangleMesh mesh;
  if (field.backend == fields::Backend::kDensity) {
    mesh = geom::mesh_density_field(*field.density, grid_res,
                                    float(iso_given ? iso : 25.0), g.threads);
  } else {
    if (iso_given && iso != 0.0)
      throw UsageError("extract mesh: the sdf backend meshes the zero level set");
    mesh = geom::mesh_sdf_field(*field.sdf, grid_res,
                                use_tsdf ? geom::SdfMeshMode::kTruncated
                                         : geom::SdfMeshMode::kRaw,
                                g.threads);
  }
  if (mesh.vertices.empty()) {
    std::cout << "extract: empty mesh (no iso crossing)\n";
    geom::write_obj((fs::path(out_dir) / "mesh.obj").string(), mesh);
    return 0;
  }
  if (field.backend == fields::Backend::kDensity) {
    geom::DensityAdapter<float> ad{field.density.get()};
    geom::color_vertices(mesh, ad);
    if (texture_size > 0) {
      mesh = geom::unwrap_mesh(mesh);
      mesh.texture = geom::bake_texture(mesh, ad, texture_size, g.threads);
    }
  } else {
    geom::SdfAdapter<float> ad{field.sdf.get()};
    geom::color_vertices(mesh, ad);
    if (texture_size > 0) {
      mesh = geom::unwrap_mesh(mesh);
      mesh.texture = geom::bake_texture(mesh, ad, texture_size, g.threads);
    }
  }
  std::string path = (fs::path(out_dir) / "mesh.obj").string();
  geom::write_obj(path, mesh);
  std::cout << "extract: " << mesh.vertices.size() << " vertices, "
            << mesh.triangles.size() << " triangles -> " << path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
int cmd_eval(const std::string& mode, const std::string& a, const std::string& b,
             double max_intensity) {
  if (mode == "psnr") {
    auto collect = [](const std::string& p) {
      std::vector<fs::path> files;
      if (fs::is_directory(p)) {
        for (const auto& e : fs::directory_iterator(p))
          if (e.path().extension() == ".png") files.push_back(e.path());
        std::sort(files.begin(), files.end());
      } else {
        files.push_back(p);
      }
      return files;
    };
    auto fa = collect(a), fb = collect(b);
    if (fa.size() != fb.size() || fa.empty())
      throw UsageError("eval psnr: inputs must list the same number of images");
    double acc = 0;
    for (size_t i = 0; i < fa.size(); ++i) {
      Image8 ia = data::read_png(fa[i].string());
      Image8 ib = data::read_png(fb[i].string());
      double p = metrics::psnr(ia, ib, max_intensity);
      std::cout << "psnr " << fa[i].filename().string() << " " << std::setprecision(9)
                << p << "\n";
      acc += p;
    }
    std::cout << "psnr mean " << std::setprecision(9) << acc / double(fa.size()) << "\n";
    return 0;
  }
  if (mode == "chamfer") {
    geom::PointCloud pa = geom::read_ply(a);
    geom::PointCloud pb = geom::read_ply(b);
    std::cout << "chamfer " << std::setprecision(12) << metrics::chamfer(pa, pb) << "\n";
    return 0;
  }
  throw UsageError("eval: mode must be 'psnr' or 'chamfer'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neural radiance field toolkit: train fields from posed images, "
               "render novel views, extract colored geometry"};
  app.require_subcommand(1);
  GlobalOpts g;

  // synth
  std::string spec_path, out_dir;
  auto* synth = app.add_subcommand("synth", "generate an analytic synthetic dataset");
  synth->add_option("spec", spec_path, "scene spec file")->required();
  synth->add_option("out", out_dir, "output dataset directory")->required();
  add_global_flags(synth, g);

  // prepare
  std::string colmap_dir, images_dir;
  int val_every = 8;
  bool allow_missing = false;
  double near_opt = 0, far_opt = 0;
  std::vector<double> box_opt;
  auto* prepare =
      app.add_subcommand("prepare", "convert a COLMAP text model to a dataset");
  prepare->add_option("colmap", colmap_dir, "COLMAP text model directory")->required();
  prepare->add_option("images", images_dir, "directory with source images")->required();
  prepare->add_option("out", out_dir, "output dataset directory")->required();
  prepare->add_option("--val-every", val_every, "every Nth view goes to val (0 = none)");
  prepare->add_flag("--allow-missing", allow_missing, "tolerate missing image files");
  prepare->add_option("--near", near_opt, "fallback near bound");
  prepare->add_option("--far", far_opt, "fallback far bound");
  prepare->add_option("--box", box_opt, "scene bounds: minx miny minz maxx maxy maxz")
      ->expected(6);
  add_global_flags(prepare, g);

  // train
  std::string dataset_dir, config_path;
  auto* tr = app.add_subcommand("train", "optimize a field on a dataset");
  tr->add_option("dataset", dataset_dir, "dataset directory")->required();
  tr->add_option("config", config_path, "train config file")->required();
  tr->add_option("out", out_dir, "output directory (checkpoint + report)")->required();
  add_global_flags(tr, g);

  // render
  std::string ckpt_path, split = "val";
  int orbit = 0, orbit_size = 128;
  double orbit_radius = 3.5, orbit_elev = 20, orbit_fov = 45;
  int samples = 128;
  bool with_depth = false;
  auto* rn = app.add_subcommand("render", "render views from a checkpoint");
  rn->add_option("checkpoint", ckpt_path, "checkpoint file")->required();
  rn->add_option("out", out_dir, "output directory")->required();
  rn->add_option("--dataset", dataset_dir, "dataset whose poses to render");
  rn->add_option("--split", split, "dataset split (train|val)");
  rn->add_option("--orbit", orbit, "render N orbit poses instead of a dataset");
  rn->add_option("--orbit-radius", orbit_radius, "orbit radius");
  rn->add_option("--orbit-elevation", orbit_elev, "orbit elevation (degrees)");
  rn->add_option("--orbit-size", orbit_size, "orbit image size");
  rn->add_option("--orbit-fov", orbit_fov, "orbit field of view (degrees)");
  rn->add_option("--samples", samples, "samples per ray");
  rn->add_flag("--depth", with_depth, "also write raw depth maps");
  add_global_flags(rn, g);

  // extract
  std::string mode;
  int stride = 1, grid_res = 64, texture_size = 0;
  double iso = 0;
  bool use_tsdf = false;
  auto* ex = app.add_subcommand("extract", "extract a point cloud or mesh");
  ex->add_option("checkpoint", ckpt_path, "checkpoint file")->required();
  ex->add_option("mode", mode, "points | mesh")->required();
  ex->add_option("out", out_dir, "output directory")->required();
  ex->add_option("--dataset", dataset_dir, "dataset (cameras for point extraction)");
  ex->add_option("--stride", stride, "pixel stride for point extraction");
  ex->add_option("--grid-res", grid_res, "marching cubes cells per axis");
  auto* iso_opt = ex->add_option("--iso", iso, "iso threshold (density: sigma units)");
  ex->add_option("--texture", texture_size, "bake a texture atlas of this size");
  ex->add_option("--samples", samples, "samples per ray for depth estimation");
  ex->add_flag("--tsdf", use_tsdf, "mesh the truncated field (same zero set)");
  add_global_flags(ex, g);

  // eval
  std::string eval_mode, in_a, in_b;
  double max_intensity = 255.0;
  auto* ev = app.add_subcommand("eval", "quantitative evaluation");
  ev->add_option("mode", eval_mode, "psnr | chamfer")->required();
  ev->add_option("a", in_a, "first input (dir/file)")->required();
  ev->add_option("b", in_b, "second input (dir/file)")->required();
  ev->add_option("--max-intensity", max_intensity, "PSNR peak intensity");
  add_global_flags(ev, g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*synth) return cmd_synth(spec_path, out_dir, g);
    if (*prepare)
      return cmd_prepare(colmap_dir, images_dir, out_dir, val_every, allow_missing,
                         near_opt, far_opt, box_opt, g);
    if (*tr) return cmd_train(dataset_dir, config_path, out_dir, g);
    if (*rn)
      return cmd_render(ckpt_path, dataset_dir, split, orbit, orbit_radius, orbit_elev,
                        orbit_size, orbit_fov, out_dir, samples, with_depth, g);
    if (*ex)
      return cmd_extract(ckpt_path, mode, dataset_dir, out_dir, stride, grid_res, iso,
                         iso_opt->count() > 0, texture_size, samples, use_tsdf, g);
    if (*ev) return cmd_eval(eval_mode, in_a, in_b, max_intensity);
  } catch (const Error& e) {
    std::cerr << "error[" << e.kind() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
