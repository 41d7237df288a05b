// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nerfkit/hashgrid.hpp"
#include "oracles.hpp"

using namespace nerfkit;
using grid::HashGrid;
using grid::HashGridConfig;

namespace {

template <typename T>
struct GridFixture {
  HashGridConfig cfg;
  HashGrid<T> grid;
  nn::ParamLayout layout;
  std::vector<T> params;

  explicit GridFixture(HashGridConfig c, uint64_t seed = 1, T scale = T(1e-4))
      : cfg(c), grid(c) {
    grid.register_params(layout, "grid");
    params.assign(layout.total(), T(0));
    Rng rng(seed);
    grid.init_params(std::span<T>(params), rng, scale);
  }
};

HashGridConfig small_config() {
  HashGridConfig c;
  c.levels = 4;
  c.features_per_level = 2;
  c.table_size = 1u << 12;
  c.base_resolution = 4;
  c.max_resolution = 64;
  c.bbox = {{-1.f, -1.f, -1.f}, {1.f, 1.f, 1.f}};
  return c;
}

}  // namespace

TEST_CASE("hash_index examples: zero cell and unit cell") {
  HashGridConfig c = small_config();
  HashGrid<float> g(c);
  // level 3 (res 64) cannot be dense in a 4096-entry table.
  REQUIRE_FALSE(c.level_is_dense(3));
  CHECK(g.hash_index(3, 0, 0, 0) == 0);
  CHECK(g.hash_index(3, 1, 0, 0) == 1 % c.table_size);
  // dense level keeps the same two identities under direct indexing
  REQUIRE(c.level_is_dense(0));
  CHECK(g.hash_index(0, 0, 0, 0) == 0);
  CHECK(g.hash_index(0, 1, 0, 0) == 1);
}

TEST_CASE("hash distributes uniformly (chi-square at the 99.9% band)") {
  const uint32_t table = 1u << 14;
  std::vector<uint64_t> buckets(table, 0);
  Rng rng(12345);
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    int x = int(rng.uniform_int(1u << 20));
    int y = int(rng.uniform_int(1u << 20));
    int z = int(rng.uniform_int(1u << 20));
    buckets[grid::spatial_hash(x, y, z) & (table - 1)] += 1;
  }
  double expected = double(n) / table;
  double chi2 = 0;
  for (uint64_t b : buckets) {
    double d = double(b) - expected;
    chi2 += d * d / expected;
  }
  double dof = double(table - 1);
  CHECK(chi2 < oracles::chi2_quantile(dof, 3.2905));   // upper 0.05%
  CHECK(chi2 > oracles::chi2_quantile(dof, -3.2905));  // lower 0.05%
}

TEST_CASE("encode at a grid vertex returns that entry") {
  GridFixture<float> f(small_config(), 2, 0.0f);  // zero tables
  const int level = 1;
  int n = f.cfg.resolution(level);
  int ci = n / 2, cj = n / 3, ck = 1;
  uint32_t idx = f.grid.hash_index(level, ci, cj, ck);
  size_t base = f.grid.table_offset() + size_t(level) * f.cfg.params_per_level();
  f.params[base + size_t(idx) * 2 + 0] = 0.3f;
  f.params[base + size_t(idx) * 2 + 1] = 0.7f;

  Vec3f ext = f.cfg.bbox.extent();
  Vec3f x{f.cfg.bbox.min.x + ext.x * float(ci) / float(n),
          f.cfg.bbox.min.y + ext.y * float(cj) / float(n),
          f.cfg.bbox.min.z + ext.z * float(ck) / float(n)};
  std::vector<float> out(size_t(f.cfg.output_dim()));
  f.grid.encode(f.params, x, std::span<float>(out), nullptr);
  CHECK(out[size_t(level) * 2 + 0] == doctest::Approx(0.3f).epsilon(1e-6));
  CHECK(out[size_t(level) * 2 + 1] == doctest::Approx(0.7f).epsilon(1e-6));
}

TEST_CASE("encode at a cell center with equal corners returns that value") {
  GridFixture<float> f(small_config(), 3, 0.0f);
  const int level = 2;
  size_t base = f.grid.table_offset() + size_t(level) * f.cfg.params_per_level();
  for (size_t i = 0; i < f.cfg.params_per_level(); i += 2) {
    f.params[base + i] = 0.42f;
    f.params[base + i + 1] = -0.13f;
  }
  int n = f.cfg.resolution(level);
  Vec3f ext = f.cfg.bbox.extent();
  Vec3f x{f.cfg.bbox.min.x + ext.x * (2.5f / float(n)),
          f.cfg.bbox.min.y + ext.y * (1.5f / float(n)),
          f.cfg.bbox.min.z + ext.z * (0.5f / float(n))};
  std::vector<float> out(size_t(f.cfg.output_dim()));
  f.grid.encode(f.params, x, std::span<float>(out), nullptr);
  CHECK(out[size_t(level) * 2 + 0] == doctest::Approx(0.42f).epsilon(1e-6));
  CHECK(out[size_t(level) * 2 + 1] == doctest::Approx(-0.13f).epsilon(1e-6));
}

TEST_CASE("encode matches the brute-force trilinear oracle") {
  HashGridConfig c = small_config();
  GridFixture<double> f(c, 4, 0.5);
  std::vector<double> tables(f.params.begin() + long(f.grid.table_offset()),
                             f.params.end());
  Rng rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    Vec3d x{double(rng.uniform(-1.2f, 1.2f)), double(rng.uniform(-1.2f, 1.2f)),
            double(rng.uniform(-1.2f, 1.2f))};
    std::vector<double> out(size_t(c.output_dim()));
    f.grid.encode(f.params, {x.x, x.y, x.z}, std::span<double>(out), nullptr);
    std::vector<double> want;
    oracles::brute_trilinear(c.levels, c.features_per_level, c.table_size,
                             c.base_resolution, c.max_resolution,
                             {c.bbox.min.x, c.bbox.min.y, c.bbox.min.z},
                             {c.bbox.max.x, c.bbox.max.y, c.bbox.max.z}, tables, x,
                             want);
    for (size_t k = 0; k < out.size(); ++k)
      CHECK(out[k] == doctest::Approx(want[k]).epsilon(1e-6));
  }
}

TEST_CASE("backward at a vertex routes the full slice to one entry per level") {
  HashGridConfig c = small_config();
  GridFixture<double> f(c, 5, 0.1);
  // a vertex shared by all levels: the box min corner
  Vec3d x{c.bbox.min.x, c.bbox.min.y, c.bbox.min.z};
  std::vector<double> gf(size_t(c.output_dim()));
  for (size_t i = 0; i < gf.size(); ++i) gf[i] = 0.25 * double(i + 1);
  auto sparse = f.grid.encode_backward_sparse(f.params, {x.x, x.y, x.z}, gf);
  REQUIRE(sparse.size() == size_t(8 * c.levels));
  for (int l = 0; l < c.levels; ++l) {
    double total0 = 0;
    int full = 0;
    for (const auto& tg : sparse) {
      if (tg.level != l) continue;
      total0 += tg.grad[0];
      if (std::abs(tg.grad[0] - gf[size_t(l) * 2]) < 1e-12) ++full;
    }
    CHECK(full >= 1);  // corner with weight 1 receives the whole slice
    CHECK(total0 == doctest::Approx(gf[size_t(l) * 2]).epsilon(1e-12));
  }
}

TEST_CASE("zero feature cotangent yields zero contributions") {
  GridFixture<double> f(small_config(), 6, 0.1);
  std::vector<double> gf(size_t(f.cfg.output_dim()), 0.0);
  auto sparse = f.grid.encode_backward_sparse(f.params, {0.2, -0.3, 0.7}, gf);
  for (const auto& tg : sparse)
    for (double v : tg.grad) CHECK(v == 0.0);
}

TEST_CASE("trilinear weights are non-negative and sum to one per level") {
  GridFixture<double> f(small_config(), 7, 0.1);
  std::vector<double> ones(size_t(f.cfg.output_dim()), 1.0);
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    Vec3d x{double(rng.uniform(-1.f, 1.f)), double(rng.uniform(-1.f, 1.f)),
            double(rng.uniform(-1.f, 1.f))};
    auto sparse = f.grid.encode_backward_sparse(f.params, {x.x, x.y, x.z}, ones);
    std::vector<double> level_sum(size_t(f.cfg.levels), 0.0);
    for (const auto& tg : sparse) {
      CHECK(tg.grad[0] >= -1e-15);
      level_sum[size_t(tg.level)] += tg.grad[0];
    }
    for (double s : level_sum) CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("table-entry gradients match finite differences") {
  HashGridConfig c = small_config();
  GridFixture<double> f(c, 8, 0.3);
  Rng rng(88);
  std::vector<double> gf(size_t(c.output_dim()));
  for (auto& v : gf) v = double(rng.uniform(-1.f, 1.f));
  Vec3d x{0.31, -0.12,  0.55};
  auto sparse = f.grid.encode_backward_sparse(f.params, {x.x, x.y, x.z}, gf);

  auto loss = [&]() {
    std::vector<double> out(size_t(c.output_dim()));
    f.grid.encode(f.params, {x.x, x.y, x.z}, std::span<double>(out), nullptr);
    double acc = 0;
    for (size_t k = 0; k < out.size(); ++k) acc += out[k] * gf[k];
    return acc;
  };
  // Collisions merge entries, so compare against the per-index summed grads.
  std::map<std::pair<int, uint32_t>, double> merged;
  for (const auto& tg : sparse) merged[{tg.level, tg.index}] += tg.grad[0];
  int checked = 0;
  for (const auto& [key, grad0] : merged) {
    size_t off = f.grid.table_offset() +
                 size_t(key.first) * c.params_per_level() + size_t(key.second) * 2;
    double fd = oracles::central_diff(f.params[off], loss, 1e-5);
    CHECK(oracles::rel_err(fd, grad0, 1e-9) <= 1e-4);
    ++checked;
  }
  CHECK(checked >= size_t(c.levels));
}

TEST_CASE("encode is continuous across cell boundaries") {
  GridFixture<float> f(small_config(), 9, 0.8f);
  const int level = 3;
  int n = f.cfg.resolution(level);
  Vec3f ext = f.cfg.bbox.extent();
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    int cell = 1 + int(rng.uniform_int(uint32_t(n - 2)));
    float boundary = f.cfg.bbox.min.x + ext.x * float(cell) / float(n);
    float delta = 1e-6f * ext.x / float(n);
    std::vector<float> lo(size_t(f.cfg.output_dim())), hi(lo.size());
    Vec3f base{0.0f, 0.123f, -0.456f};
    base.x = boundary - delta;
    f.grid.encode(f.params, base, std::span<float>(lo), nullptr);
    base.x = boundary + delta;
    f.grid.encode(f.params, base, std::span<float>(hi), nullptr);
    for (size_t k = 0; k < lo.size(); ++k)
      CHECK(std::abs(lo[k] - hi[k]) <= 1e-4f);
  }
}

TEST_CASE("encode composed with clamping is total on R^3") {
  GridFixture<float> f(small_config(), 10, 0.5f);
  std::vector<float> out(size_t(f.cfg.output_dim()));
  std::vector<float> at_corner(out.size());
  f.grid.encode(f.params, {1.f, 1.f, 1.f}, std::span<float>(at_corner), nullptr);
  for (Vec3f x : {Vec3f{1e6f, -1e6f, 42.f}, Vec3f{5.f, 5.f, 5.f}}) {
    f.grid.encode(f.params, x, std::span<float>(out), nullptr);
    CHECK(all_finite(out));
  }
  f.grid.encode(f.params, {7.f, 9.f, 11.f}, std::span<float>(out), nullptr);
  CHECK(out == at_corner);  // clamps to the box corner
}

TEST_CASE("position gradient satisfies the vector-Jacobian identity") {
  HashGridConfig c = small_config();
  GridFixture<double> f(c, 11, 0.7);
  Rng rng(111);
  std::vector<double> gf(size_t(c.output_dim()));
  for (auto& v : gf) v = double(rng.uniform(-1.f, 1.f));

  for (int trial = 0; trial < 15; ++trial) {
    Vec3d x{double(rng.uniform(-0.9f, 0.9f)), double(rng.uniform(-0.9f, 0.9f)),
            double(rng.uniform(-0.9f, 0.9f))};
    grid::EncodeCache<double> cache;
    std::vector<double> out(size_t(c.output_dim()));
    f.grid.encode(f.params, {x.x, x.y, x.z}, std::span<double>(out), &cache);
    Vec3d analytic = f.grid.input_gradient(f.params, cache, gf);

    auto dot_at = [&](Vec3d p) {
      std::vector<double> o(size_t(c.output_dim()));
      f.grid.encode(f.params, {p.x, p.y, p.z}, std::span<double>(o), nullptr);
      double acc = 0;
      for (size_t k = 0; k < o.size(); ++k) acc += o[k] * gf[k];
      return acc;
    };
    const double h = 1e-7;  // stay inside the finest cell
    bool ok = true;
    for (int a = 0; a < 3; ++a) {
      Vec3d hi = x, lo = x;
      (&hi.x)[a] += h;
      (&lo.x)[a] -= h;
      double fd = (dot_at(hi) - dot_at(lo)) / (2 * h);
      if (oracles::rel_err(fd, (&analytic.x)[a], 1e-6) > 1e-4) ok = false;
    }
    CHECK(ok);
  }
}

TEST_CASE("config validation rejects bad shapes") {
  HashGridConfig c = small_config();
  c.table_size = 1000;  // not a power of two
  CHECK_THROWS_AS(HashGrid<float>(c), ValidationError);
  c = small_config();
  c.max_resolution = 2;  // below base
  CHECK_THROWS_AS(HashGrid<float>(c), ValidationError);
  c = small_config();
  CHECK(c.output_dim() == c.levels * c.features_per_level);
}
