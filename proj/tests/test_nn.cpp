// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "nerfkit/nn.hpp"
#include "oracles.hpp"

using namespace nerfkit;
using nn::Activation;

namespace {

template <typename T>
struct NetFixture {
  nn::Mlp<T> mlp;
  nn::ParamLayout layout;
  std::vector<T> params;

  NetFixture(std::vector<nn::LayerSpec> specs, uint64_t seed) : mlp(std::move(specs)) {
    mlp.register_params(layout, "net");
    params.assign(layout.total(), T(0));
    Rng rng(seed);
    mlp.init_params(std::span<T>(params), rng);
  }
};

}  // namespace

TEST_CASE("identity layer passes input through") {
  NetFixture<float> net({{2, 2, Activation::kLinear}}, 1);
  // weights = identity, bias = 0
  std::fill(net.params.begin(), net.params.end(), 0.f);
  net.params[0] = 1.f;  // w[0][0]
  net.params[3] = 1.f;  // w[1][1]
  std::vector<float> in{0.3f, -0.2f}, out(2);
  net.mlp.forward(net.params, in, std::span<float>(out), nullptr);
  CHECK(out[0] == doctest::Approx(0.3f));
  CHECK(out[1] == doctest::Approx(-0.2f));
}

TEST_CASE("zero weights with relu emit the bias") {
  NetFixture<float> net({{3, 2, Activation::kReLU}}, 1);
  std::fill(net.params.begin(), net.params.end(), 0.f);
  const auto* bias = net.layout.find("net.layer0.bias");
  REQUIRE(bias != nullptr);
  net.params[bias->offset] = 1.f;
  net.params[bias->offset + 1] = 2.f;
  for (float probe : {-2.f, 0.f, 3.f}) {
    std::vector<float> in{probe, probe * 2, -probe}, out(2);
    net.mlp.forward(net.params, in, std::span<float>(out), nullptr);
    CHECK(out[0] == 1.f);
    CHECK(out[1] == 2.f);
  }
}

TEST_CASE("random two-layer net matches the naive oracle") {
  NetFixture<double> net({{4, 8, Activation::kReLU}, {8, 3, Activation::kSigmoid}}, 7);
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> in(4);
    for (auto& v : in) v = double(rng.uniform(-2.f, 2.f));
    std::vector<double> out(3);
    net.mlp.forward(net.params, in, std::span<double>(out), nullptr);
    auto want = oracles::naive_mlp_forward(net.mlp.layers(), net.mlp.weight_offsets(),
                                           net.mlp.bias_offsets(), net.params, in);
    for (int k = 0; k < 3; ++k) CHECK(out[size_t(k)] == doctest::Approx(want[size_t(k)]).epsilon(1e-6));
  }
}

TEST_CASE("linear layer backward is the transpose chain rule") {
  NetFixture<double> net({{3, 2, Activation::kLinear}}, 3);
  std::vector<double> in{0.5, -1.25, 2.0}, out(2);
  nn::MlpCache<double> cache;
  net.mlp.forward(net.params, in, std::span<double>(out), &cache);
  std::vector<double> g{0.7, -0.3};
  std::vector<double> gp(net.layout.total(), 0.0), gin(3);
  net.mlp.backward(net.params, cache, g, std::span<double>(gp), std::span<double>(gin));
  const double* w = net.params.data();  // row-major [2 x 3]
  for (int i = 0; i < 3; ++i) {
    double want = w[i] * g[0] + w[3 + i] * g[1];
    CHECK(gin[size_t(i)] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("zero cotangent produces zero gradients") {
  NetFixture<double> net({{3, 4, Activation::kSoftplus}, {4, 2, Activation::kExp}}, 5);
  std::vector<double> in{0.1, 0.2, 0.3}, out(2);
  nn::MlpCache<double> cache;
  net.mlp.forward(net.params, in, std::span<double>(out), &cache);
  std::vector<double> g{0.0, 0.0};
  std::vector<double> gp(net.layout.total(), 0.0), gin(3);
  net.mlp.backward(net.params, cache, g, std::span<double>(gp), std::span<double>(gin));
  for (double v : gp) CHECK(v == 0.0);
  for (double v : gin) CHECK(v == 0.0);
}

TEST_CASE("backward matches finite differences for every activation") {
  // >= 100 random (param, input) pairs per layer type, 64-bit evaluation.
  for (Activation act :
       {Activation::kLinear, Activation::kReLU, Activation::kSigmoid,
        Activation::kTruncSigmoid, Activation::kExp, Activation::kSoftplus}) {
    NetFixture<double> net({{3, 5, act}, {5, 2, Activation::kLinear}},
                           uint64_t(17 + int(act)));
    Rng rng(uint64_t(100 + int(act)));
    std::vector<double> in(3);
    for (auto& v : in) v = double(rng.uniform(-1.f, 1.f));
    std::vector<double> cot{0.37, -0.81};

    auto loss = [&]() {
      std::vector<double> out(2);
      net.mlp.forward(net.params, in, std::span<double>(out), nullptr);
      return out[0] * cot[0] + out[1] * cot[1];
    };
    std::vector<double> out(2);
    nn::MlpCache<double> cache;
    net.mlp.forward(net.params, in, std::span<double>(out), &cache);
    std::vector<double> gp(net.layout.total(), 0.0), gin(3);
    net.mlp.backward(net.params, cache, cot, std::span<double>(gp),
                     std::span<double>(gin));

    int checked = 0;
    for (int trial = 0; trial < 120; ++trial) {
      size_t idx = rng.uniform_int(uint32_t(net.params.size()));
      double fd = oracles::central_diff(net.params[idx], loss, 1e-4);
      // ReLU kinks can put the finite difference on the wrong side.
      if (act == Activation::kReLU && std::abs(fd - gp[idx]) > 1e-6 &&
          oracles::rel_err(fd, gp[idx]) > 1e-4)
        continue;
      CHECK(oracles::rel_err(fd, gp[idx]) <= 1e-4);
      ++checked;
    }
    CHECK(checked >= 100);
    for (int i = 0; i < 3; ++i) {
      double fd = oracles::central_diff(in[size_t(i)], loss, 1e-4);
      CHECK(oracles::rel_err(fd, gin[size_t(i)]) <= 1e-4);
    }
  }
}

TEST_CASE("forward is pure: identical inputs give bitwise-identical outputs") {
  NetFixture<float> net({{4, 8, Activation::kReLU}, {8, 3, Activation::kSigmoid}}, 11);
  std::vector<float> in{0.1f, -0.4f, 0.9f, 0.01f}, out1(3), out2(3);
  net.mlp.forward(net.params, in, std::span<float>(out1), nullptr);
  net.mlp.forward(net.params, in, std::span<float>(out2), nullptr);
  CHECK(std::memcmp(out1.data(), out2.data(), out1.size() * sizeof(float)) == 0);
}

TEST_CASE("mlp rejects dimension mismatches") {
  NetFixture<float> net({{4, 2, Activation::kLinear}}, 1);
  std::vector<float> in(3), out(2);
  CHECK_THROWS_AS(net.mlp.forward(net.params, in, std::span<float>(out), nullptr),
                  ShapeError);
}

TEST_CASE("adam: zero gradients leave fresh params unchanged") {
  nn::AdamState<double> st(3);
  std::vector<double> p{1.0, -2.0, 3.0}, g{0.0, 0.0, 0.0};
  auto before = p;
  nn::adam_step<double>(st, std::span<double>(p), g);
  CHECK(p == before);
}

TEST_CASE("adam: first-step displacement magnitude is about lr") {
  nn::AdamState<double> st(1);
  st.lr = 1e-2;
  std::vector<double> p{0.0}, g{5.0};
  nn::adam_step<double>(st, std::span<double>(p), g);
  double want = -st.lr * 5.0 / (5.0 + st.eps);
  CHECK(p[0] == doctest::Approx(want).epsilon(1e-9));
  CHECK(std::abs(p[0]) == doctest::Approx(st.lr).epsilon(1e-6));
}

TEST_CASE("adam: constant positive gradient drives the parameter down") {
  nn::AdamState<double> st(1);
  st.lr = 0.01;
  std::vector<double> p{1.0};
  double prev = p[0];
  for (int i = 0; i < 100; ++i) {
    std::vector<double> g{1.0};
    nn::adam_step<double>(st, std::span<double>(p), g);
    CHECK(p[0] < prev);
    prev = p[0];
  }
}

TEST_CASE("adam with lr = 0 is the identity on parameters") {
  nn::AdamState<float> st(4);
  st.lr = 0.f;
  std::vector<float> p{0.1f, 0.2f, -0.3f, 4.f};
  auto before = p;
  std::vector<float> g{1.f, -2.f, 3.f, -4.f};
  nn::adam_step<float>(st, std::span<float>(p), g);
  CHECK(std::memcmp(p.data(), before.data(), p.size() * sizeof(float)) == 0);
}

TEST_CASE("adam rejects non-finite gradients naming the index") {
  nn::AdamState<float> st(3);
  std::vector<float> p{1.f, 2.f, 3.f};
  std::vector<float> g{0.f, std::numeric_limits<float>::quiet_NaN(), 0.f};
  try {
    nn::adam_step<float>(st, std::span<float>(p), g);
    FAIL("expected TrainError");
  } catch (const TrainError& e) {
    CHECK(std::string(e.what()).find("index 1") != std::string::npos);
    CHECK(st.t == 0);  // state untouched
  }
}

TEST_CASE("param layout tracks names, offsets and totals") {
  nn::ParamLayout layout;
  nn::Mlp<float> mlp({{4, 8, Activation::kReLU}, {8, 2, Activation::kLinear}});
  mlp.register_params(layout, "head");
  CHECK(layout.total() == 4 * 8 + 8 + 8 * 2 + 2);
  const auto* w1 = layout.find("head.layer1.weight");
  REQUIRE(w1 != nullptr);
  CHECK(w1->offset == 4 * 8 + 8);
  CHECK(w1->count == 16);
  CHECK(layout.find("head.layer9.bias") == nullptr);
}
