// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>

#include "nerfkit/checkpoint.hpp"
#include "nerfkit/fields.hpp"
#include "oracles.hpp"

using namespace nerfkit;
using fields::DensityField;
using fields::SdfField;

namespace {

grid::HashGridConfig test_grid() {
  grid::HashGridConfig c;
  c.levels = 4;
  c.features_per_level = 2;
  c.table_size = 1u << 12;
  c.base_resolution = 4;
  c.max_resolution = 32;
  c.bbox = {{-1.f, -1.f, -1.f}, {1.f, 1.f, 1.f}};
  return c;
}

Vec3d random_unit(Rng& rng) {
  while (true) {
    Vec3d v{double(rng.uniform(-1.f, 1.f)), double(rng.uniform(-1.f, 1.f)),
            double(rng.uniform(-1.f, 1.f))};
    double n = norm(v);
    if (n > 1e-3 && n < 1.0) return v / n;
  }
}

}  // namespace

TEST_CASE("fresh density field: sigma finite, color in the unit cube") {
  DensityField<float> f(test_grid());
  Rng rng(1);
  f.init(rng);
  Rng qr(2);
  for (int i = 0; i < 1000; ++i) {
    Vec3f x{qr.uniform(-1.f, 1.f), qr.uniform(-1.f, 1.f), qr.uniform(-1.f, 1.f)};
    Vec3d d = random_unit(qr);
    auto [sigma, c] = f.query(x, d.cast<float>());
    CHECK(std::isfinite(sigma));
    CHECK(sigma >= 0.f);
    for (int k = 0; k < 3; ++k) {
      CHECK(c[k] >= 0.f);
      CHECK(c[k] <= 1.f);
    }
  }
}

TEST_CASE("sigma does not depend on the view direction") {
  DensityField<float> f(test_grid());
  Rng rng(3);
  f.init(rng);
  Vec3f x{0.2f, -0.4f, 0.1f};
  auto [s1, c1] = f.query(x, {0.f, 0.f, 1.f});
  auto [s2, c2] = f.query(x, {1.f, 0.f, 0.f});
  CHECK(s1 == s2);
}

TEST_CASE("non-unit direction violates the query contract") {
  DensityField<float> f(test_grid());
  Rng rng(4);
  f.init(rng);
  CHECK_THROWS_AS(f.query({0.f, 0.f, 0.f}, {0.f, 0.f, 2.f}), ContractError);
}

TEST_CASE("geometric initialization approximates a centered sphere") {
  SdfField<double> f(test_grid());
  Rng rng(5);
  f.init(rng);
  double r0 = f.init_radius();
  CHECK(r0 == doctest::Approx(0.5));  // half of the box half-extent
  Rng qr(6);
  for (int i = 0; i < 200; ++i) {
    Vec3d x{double(qr.uniform(-0.95f, 0.95f)), double(qr.uniform(-0.95f, 0.95f)),
            double(qr.uniform(-0.95f, 0.95f))};
    double want = norm(x) - r0;
    auto [fv, g] = f.query_sdf(x);
    CHECK(std::abs(fv - want) < 0.05);
    if (std::abs(want) > 0.05) CHECK((fv > 0) == (want > 0));
  }
}

TEST_CASE("analytic sdf gradient matches central finite differences") {
  SdfField<double> f(test_grid());
  Rng rng(7);
  f.init(rng);
  // give the network visible structure so the gradient is not just the bias
  for (auto& p : f.params()) p *= 1.0;
  Rng qr(8);
  const double h = 1e-6;
  int checked = 0;
  for (int i = 0; i < 200 && checked < 100; ++i) {
    Vec3d x{double(qr.uniform(-0.9f, 0.9f)), double(qr.uniform(-0.9f, 0.9f)),
            double(qr.uniform(-0.9f, 0.9f))};
    // skip points whose fd probe straddles a finest-level cell boundary
    int n = f.hashgrid().config().max_resolution;
    bool near_boundary = false;
    for (int a = 0; a < 3; ++a) {
      double u = ((&x.x)[a] + 1.0) / 2.0 * n;
      if (std::abs(u - std::round(u)) * 2.0 / n < 4 * h) near_boundary = true;
    }
    if (near_boundary) continue;
    auto [fv, g] = f.query_sdf(x);
    fields::SampleCache<double> cache;
    for (int a = 0; a < 3; ++a) {
      Vec3d hi = x, lo = x;
      (&hi.x)[a] += h;
      (&lo.x)[a] -= h;
      double fd = (f.forward_sdf(hi, cache) - f.forward_sdf(lo, cache)) / (2 * h);
      CHECK(std::abs(fd - (&g.x)[a]) <= 1e-3);
    }
    ++checked;
  }
  CHECK(checked >= 100);
}

TEST_CASE("sdf is continuous across hash-grid cell boundaries") {
  SdfField<float> f(test_grid());
  Rng rng(9);
  f.init(rng);
  int n = f.hashgrid().config().max_resolution;
  Rng qr(10);
  fields::SampleCache<float> cache;
  for (int i = 0; i < 50; ++i) {
    int cell = 1 + int(qr.uniform_int(uint32_t(n - 2)));
    float boundary = -1.f + 2.f * float(cell) / float(n);
    Vec3f a{boundary - 1e-6f, 0.3f, -0.2f}, b{boundary + 1e-6f, 0.3f, -0.2f};
    float fa = f.forward_sdf(a, cache);
    float fb = f.forward_sdf(b, cache);
    CHECK(std::abs(fa - fb) <= 1e-4f);
  }
}

TEST_CASE("truncate_sdf: zero fixed point, odd symmetry, tanh value") {
  CHECK(fields::truncate_sdf(0.0, 7.0) == 0.0);
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    double fv = double(rng.uniform(-5.f, 5.f));
    double b = double(rng.uniform(0.1f, 50.f));
    CHECK(fields::truncate_sdf(-fv, b) ==
          doctest::Approx(-fields::truncate_sdf(fv, b)).epsilon(1e-12));
    CHECK(fields::truncate_sdf(fv, b) > -1.0);
    CHECK(fields::truncate_sdf(fv, b) < 1.0);
  }
  // f = 1, b = 2 -> (1 - e^-2)/(1 + e^-2) = tanh(1)
  CHECK(fields::truncate_sdf(1.0, 2.0) == doctest::Approx(0.761594155956).epsilon(1e-9));
}

TEST_CASE("truncate_sdf survives |bf| up to 1e4 and stays monotone") {
  CHECK(fields::truncate_sdf(100.0, 100.0) == doctest::Approx(1.0));
  CHECK(fields::truncate_sdf(-100.0, 100.0) == doctest::Approx(-1.0));
  CHECK(std::isfinite(fields::truncate_sdf(1e4f, 1.0f)));
  Rng rng(12);
  double b = 3.0;
  for (int i = 0; i < 100; ++i) {
    double f1 = double(rng.uniform(-3.f, 3.f));
    double f2 = f1 + double(rng.uniform(0.001f, 1.f));
    CHECK(fields::truncate_sdf(f2, b) > fields::truncate_sdf(f1, b));
  }
}

TEST_CASE("s_density: peak b/4, even symmetry, reference value") {
  for (double b : {0.5, 3.0, 30.0}) {
    CHECK(fields::s_density(0.0, b) == doctest::Approx(b / 4).epsilon(1e-12));
  }
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    double fv = double(rng.uniform(-4.f, 4.f));
    double b = double(rng.uniform(0.1f, 40.f));
    CHECK(fields::s_density(fv, b) ==
          doctest::Approx(fields::s_density(-fv, b)).epsilon(1e-12));
    CHECK(fields::s_density(fv, b) >= 0.0);
    CHECK(fields::s_density(fv, b) <= b / 4);
  }
  // b = 10, f = 1 -> 10 e^-10 / (1 + e^-10)^2
  CHECK(fields::s_density(1.0, 10.0) == doctest::Approx(4.5395807e-4).epsilon(1e-5));
}

TEST_CASE("s_density integrates to one over the real line") {
  // Simpson quadrature on [-60/b, 60/b], 1e-4 accuracy for several b.
  for (double b : {0.5, 2.0, 10.0, 50.0}) {
    double lo = -60.0 / b, hi = 60.0 / b;
    int n = 20000;
    double h = (hi - lo) / n;
    double acc = fields::s_density(lo, b) + fields::s_density(hi, b);
    for (int i = 1; i < n; ++i)
      acc += fields::s_density(lo + i * h, b) * (i % 2 ? 4.0 : 2.0);
    acc *= h / 3.0;
    CHECK(acc == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("field queries are pure under fixed parameters") {
  SdfField<float> f(test_grid());
  Rng rng(14);
  f.init(rng);
  auto [f1, g1] = f.query_sdf({0.3f, 0.2f, -0.7f});
  auto [f2, g2] = f.query_sdf({0.3f, 0.2f, -0.7f});
  CHECK(f1 == f2);
  CHECK(g1.x == g2.x);
  CHECK(g1.y == g2.y);
  CHECK(g1.z == g2.z);
}

TEST_CASE("checkpoints round-trip both backends bitwise") {
  std::string path = "/tmp/nerfkit_test_ckpt.nkc";
  {
    DensityField<float> f(test_grid());
    Rng rng(15);
    f.init(rng);
    fields::save_checkpoint(path, f);
    auto loaded = fields::load_checkpoint(path);
    REQUIRE(loaded.backend == fields::Backend::kDensity);
    REQUIRE(loaded.density != nullptr);
    CHECK(loaded.density->params() == f.params());
    auto [s1, c1] = f.query({0.1f, 0.2f, 0.3f}, {0.f, 0.f, 1.f});
    auto [s2, c2] = loaded.density->query({0.1f, 0.2f, 0.3f}, {0.f, 0.f, 1.f});
    CHECK(s1 == s2);
    CHECK(c1.x == c2.x);
  }
  {
    SdfField<float> f(test_grid());
    Rng rng(16);
    f.init(rng);
    fields::save_checkpoint(path, f);
    auto loaded = fields::load_checkpoint(path);
    REQUIRE(loaded.backend == fields::Backend::kSdf);
    REQUIRE(loaded.sdf != nullptr);
    CHECK(loaded.sdf->params() == f.params());
    CHECK(loaded.sdf->sharpness() == doctest::Approx(f.sharpness()));
  }
  std::remove(path.c_str());
}

TEST_CASE("checkpoint loader rejects corrupt magic") {
  std::string path = "/tmp/nerfkit_bad_ckpt.nkc";
  {
    std::ofstream out(path, std::ios::binary);
    out << "definitely not a checkpoint";
  }
  CHECK_THROWS_AS(fields::load_checkpoint(path), FormatError);
  std::remove(path.c_str());
}
