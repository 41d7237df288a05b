// SPDX-License-Identifier: Apache-2.0
//
// Scene representations: a density backend mapping (x, d) -> (sigma, rgb)
// and an SDF backend mapping x -> f(x) with sigmoid truncation, S-density
// and a shared color head. Both are a hash grid feeding tiny MLP heads whose
// parameters live in one flat vector.
#pragma once

#include "nerfkit/common.hpp"
#include "nerfkit/hashgrid.hpp"
#include "nerfkit/nn.hpp"
#include "nerfkit/sh.hpp"

namespace nerfkit::fields {

enum class Backend : uint8_t { kDensity = 0, kSdf = 1 };

inline constexpr int kLatentDim = 15;
inline constexpr int kHeadOut = 1 + kLatentDim;
inline constexpr int kColorIn = kLatentDim + kShBasisDim;

// pi(f) = (1 - e^{-bf}) / (1 + e^{-bf}) = tanh(bf/2): strictly increasing
// bijection onto (-1, 1), overflow-safe for |bf| up to 1e4 and beyond.
template <typename T>
inline T truncate_sdf(T f, T b) {
  return std::tanh(T(0.5) * b * f);
}

// S-density phi_b(f) = b e^{-bf} / (1 + e^{-bf})^2, evaluated via the
// logistic-symmetric form b s(bf)(1 - s(bf)); value in (0, b/4].
template <typename T>
inline T s_density(T f, T b) {
  T s = nn::stable_sigmoid(b * f);
  return b * s * (T(1) - s);
}

// Logistic CDF of sharpness b, used by the NeuS-style opacity ratio.
template <typename T>
inline T logistic_cdf(T f, T b) {
  return nn::stable_sigmoid(b * f);
}

namespace detail {

template <typename T>
inline void check_unit_direction(Vec3<T> d) {
  T n = norm(d);
  if (std::abs(n - T(1)) > T(1e-5))
    throw ContractError("field query: direction must be unit length, |d| = " +
                        std::to_string(double(n)));
}

}  // namespace detail

// Per-sample forward state kept for the analytic backward pass.
template <typename T>
struct SampleCache {
  grid::EncodeCache<T> enc;
  std::vector<T> features;      // grid output, L*d
  nn::MlpCache<T> head_cache;   // density or sdf head
  std::vector<T> head_out;      // kHeadOut
  std::vector<T> color_in;      // latent + SH
  nn::MlpCache<T> color_cache;
  Vec3<T> rgb{};
};

// ---------------------------------------------------------------------------
// Density backend: sigma = softplus(head[0]), color from latent + SH(dir).
// ---------------------------------------------------------------------------
template <typename T>
class DensityField {
 public:
  DensityField() = default;
  explicit DensityField(const grid::HashGridConfig& gc)
      : grid_(gc),
        head_({{gc.output_dim(), 64, nn::Activation::kReLU},
               {64, kHeadOut, nn::Activation::kLinear}}),
        color_({{kColorIn, 64, nn::Activation::kReLU},
                {64, 64, nn::Activation::kReLU},
                {64, 3, nn::Activation::kSigmoid}}) {
    grid_.register_params(layout_, "grid");
    head_.register_params(layout_, "density_head");
    color_.register_params(layout_, "color_head");
    params_.assign(layout_.total(), T(0));
  }

  void init(Rng& rng) {
    grid_.init_params(std::span<T>(params_), rng);
    head_.init_params(std::span<T>(params_), rng);
    color_.init_params(std::span<T>(params_), rng);
  }

  const grid::HashGrid<T>& hashgrid() const { return grid_; }
  const nn::Mlp<T>& head() const { return head_; }
  const nn::Mlp<T>& color_head() const { return color_; }
  const nn::ParamLayout& layout() const { return layout_; }
  std::vector<T>& params() { return params_; }
  const std::vector<T>& params() const { return params_; }
  const BBoxf& bbox() const { return grid_.config().bbox; }

  // Staged forward: SH basis of the ray direction is computed once per ray
  // by the caller and shared across its samples.
  void forward_sample(Vec3<T> x, std::span<const T> sh, SampleCache<T>& c,
                      T& sigma_out, Vec3<T>& rgb_out) const {
    c.features.resize(size_t(grid_.config().output_dim()));
    grid_.encode(std::span<const T>(params_), x, std::span<T>(c.features), &c.enc);
    c.head_out.resize(kHeadOut);
    head_.forward(std::span<const T>(params_), std::span<const T>(c.features),
                  std::span<T>(c.head_out), &c.head_cache);
    c.color_in.resize(kColorIn);
    for (int i = 0; i < kLatentDim; ++i) c.color_in[size_t(i)] = c.head_out[size_t(i + 1)];
    for (int i = 0; i < kShBasisDim; ++i) c.color_in[size_t(kLatentDim + i)] = sh[size_t(i)];
    std::array<T, 3> rgb;
    color_.forward(std::span<const T>(params_), std::span<const T>(c.color_in),
                   std::span<T>(rgb), &c.color_cache);
    c.rgb = {rgb[0], rgb[1], rgb[2]};
    rgb_out = c.rgb;
    sigma_out = nn::stable_softplus(c.head_out[0]);
  }

  void backward_sample(const SampleCache<T>& c, T d_sigma, Vec3<T> d_rgb,
                       std::span<T> grad) const {
    static thread_local std::vector<T> scratch_color_in_g_, scratch_head_g_,
        scratch_feat_g_;
    scratch_color_in_g_.resize(kColorIn);
    std::array<T, 3> gout{d_rgb.x, d_rgb.y, d_rgb.z};
    color_.backward(std::span<const T>(params_), c.color_cache,
                    std::span<const T>(gout), grad, std::span<T>(scratch_color_in_g_));
    scratch_head_g_.assign(kHeadOut, T(0));
    scratch_head_g_[0] = d_sigma * nn::stable_sigmoid(c.head_out[0]);
    for (int i = 0; i < kLatentDim; ++i)
      scratch_head_g_[size_t(i + 1)] = scratch_color_in_g_[size_t(i)];
    scratch_feat_g_.resize(c.features.size());
    head_.backward(std::span<const T>(params_), c.head_cache,
                   std::span<const T>(scratch_head_g_), grad,
                   std::span<T>(scratch_feat_g_));
    grid_.encode_backward(c.enc, std::span<const T>(scratch_feat_g_), grad);
  }

  // One-shot query; sigma does not depend on the direction.
  std::pair<T, Vec3<T>> query(Vec3<T> x, Vec3<T> d) const {
    detail::check_unit_direction(d);
    std::vector<T> sh(kShBasisDim);
    sh_basis16(d, std::span<T>(sh));
    SampleCache<T> c;
    T sigma;
    Vec3<T> rgb;
    forward_sample(x, std::span<const T>(sh), c, sigma, rgb);
    return {sigma, rgb};
  }

  T query_sigma(Vec3<T> x) const {
    SampleCache<T> c;
    c.features.resize(size_t(grid_.config().output_dim()));
    grid_.encode(std::span<const T>(params_), x, std::span<T>(c.features), &c.enc);
    c.head_out.resize(kHeadOut);
    head_.forward(std::span<const T>(params_), std::span<const T>(c.features),
                  std::span<T>(c.head_out), &c.head_cache);
    return nn::stable_softplus(c.head_out[0]);
  }

 private:
  grid::HashGrid<T> grid_;
  nn::Mlp<T> head_, color_;
  nn::ParamLayout layout_;
  std::vector<T> params_;
};

// ---------------------------------------------------------------------------
// SDF backend: f(x) = head(h(x))[0] + (|x - c| - r0), a geometric sphere
// bias that pins the initial zero-level set, with trainable sharpness b
// stored as log b.
// ---------------------------------------------------------------------------
template <typename T>
class SdfField {
 public:
  SdfField() = default;
  explicit SdfField(const grid::HashGridConfig& gc, T b_init = T(30))
      : grid_(gc),
        head_({{gc.output_dim(), 64, nn::Activation::kReLU},
               {64, 64, nn::Activation::kReLU},
               {64, kHeadOut, nn::Activation::kLinear}}),
        color_({{kColorIn, 64, nn::Activation::kReLU},
                {64, 64, nn::Activation::kReLU},
                {64, 3, nn::Activation::kSigmoid}}) {
    grid_.register_params(layout_, "grid");
    head_.register_params(layout_, "sdf_head");
    color_.register_params(layout_, "color_head");
    logb_off_ = layout_.add("log_b", 1);
    params_.assign(layout_.total(), T(0));
    params_[logb_off_] = std::log(b_init);
    Vec3f c = gc.bbox.center();
    Vec3f e = gc.bbox.extent();
    center_ = {T(c.x), T(c.y), T(c.z)};
    // "box unit" = half the largest box extent; initial radius 0.5 box units.
    T half = T(0.5) * T(std::max({e.x, e.y, e.z}));
    init_radius_ = T(0.5) * half;
  }

  void init(Rng& rng) {
    T logb = params_[logb_off_];
    grid_.init_params(std::span<T>(params_), rng);
    // Small last-layer weights keep the sphere bias in charge at start.
    head_.init_params(std::span<T>(params_), rng, T(0.01));
    color_.init_params(std::span<T>(params_), rng);
    params_[logb_off_] = logb;
  }

  const grid::HashGrid<T>& hashgrid() const { return grid_; }
  const nn::Mlp<T>& head() const { return head_; }
  const nn::Mlp<T>& color_head() const { return color_; }
  const nn::ParamLayout& layout() const { return layout_; }
  std::vector<T>& params() { return params_; }
  const std::vector<T>& params() const { return params_; }
  const BBoxf& bbox() const { return grid_.config().bbox; }
  size_t logb_offset() const { return logb_off_; }
  T sharpness() const { return std::exp(params_[logb_off_]); }
  Vec3<T> init_center() const { return center_; }
  T init_radius() const { return init_radius_; }

  T sphere_bias(Vec3<T> x) const { return norm(x - center_) - init_radius_; }

  // Raw (untruncated) SDF value; cache enables the parameter backward.
  T forward_sdf(Vec3<T> x, SampleCache<T>& c) const {
    c.features.resize(size_t(grid_.config().output_dim()));
    grid_.encode(std::span<const T>(params_), x, std::span<T>(c.features), &c.enc);
    c.head_out.resize(kHeadOut);
    head_.forward(std::span<const T>(params_), std::span<const T>(c.features),
                  std::span<T>(c.head_out), &c.head_cache);
    return c.head_out[0] + sphere_bias(x);
  }

  // Accumulate d(loss)/d(params) given d(loss)/df for a cached sample.
  void backward_sdf(const SampleCache<T>& c, T d_f, std::span<T> grad) const {
    static thread_local std::vector<T> scratch_head_g_, scratch_feat_g_;
    scratch_head_g_.assign(kHeadOut, T(0));
    scratch_head_g_[0] = d_f;
    scratch_feat_g_.resize(c.features.size());
    head_.backward(std::span<const T>(params_), c.head_cache,
                   std::span<const T>(scratch_head_g_), grad,
                   std::span<T>(scratch_feat_g_));
    grid_.encode_backward(c.enc, std::span<const T>(scratch_feat_g_), grad);
  }

  // Color of a cached sample (call after forward_sdf on the same cache).
  Vec3<T> forward_color(std::span<const T> sh, SampleCache<T>& c) const {
    c.color_in.resize(kColorIn);
    for (int i = 0; i < kLatentDim; ++i) c.color_in[size_t(i)] = c.head_out[size_t(i + 1)];
    for (int i = 0; i < kShBasisDim; ++i) c.color_in[size_t(kLatentDim + i)] = sh[size_t(i)];
    std::array<T, 3> rgb;
    color_.forward(std::span<const T>(params_), std::span<const T>(c.color_in),
                   std::span<T>(rgb), &c.color_cache);
    c.rgb = {rgb[0], rgb[1], rgb[2]};
    return c.rgb;
  }

  // Joint backward for a sample that went through forward_sdf+forward_color.
  void backward_sample(const SampleCache<T>& c, T d_f, Vec3<T> d_rgb,
                       std::span<T> grad) const {
    static thread_local std::vector<T> scratch_color_in_g_, scratch_head_g_,
        scratch_feat_g_;
    scratch_color_in_g_.resize(kColorIn);
    std::array<T, 3> gout{d_rgb.x, d_rgb.y, d_rgb.z};
    color_.backward(std::span<const T>(params_), c.color_cache,
                    std::span<const T>(gout), grad, std::span<T>(scratch_color_in_g_));
    scratch_head_g_.assign(kHeadOut, T(0));
    scratch_head_g_[0] = d_f;
    for (int i = 0; i < kLatentDim; ++i)
      scratch_head_g_[size_t(i + 1)] = scratch_color_in_g_[size_t(i)];
    scratch_feat_g_.resize(c.features.size());
    head_.backward(std::span<const T>(params_), c.head_cache,
                   std::span<const T>(scratch_head_g_), grad,
                   std::span<T>(scratch_feat_g_));
    grid_.encode_backward(c.enc, std::span<const T>(scratch_feat_g_), grad);
  }

  // f and its analytic spatial gradient (backward through head and grid,
  // plus the sphere-bias gradient).
  std::pair<T, Vec3<T>> query_sdf(Vec3<T> x) const {
    static thread_local std::vector<T> scratch_head_g_, scratch_feat_g_;
    SampleCache<T> c;
    T f = forward_sdf(x, c);
    scratch_head_g_.assign(kHeadOut, T(0));
    scratch_head_g_[0] = T(1);
    scratch_feat_g_.resize(c.features.size());
    head_.input_gradient(std::span<const T>(params_), c.head_cache,
                         std::span<const T>(scratch_head_g_),
                         std::span<T>(scratch_feat_g_));
    Vec3<T> g = grid_.input_gradient(std::span<const T>(params_), c.enc,
                                     std::span<const T>(scratch_feat_g_));
    Vec3<T> rel = x - center_;
    T n = norm(rel);
    if (n > T(1e-12)) g += rel / n;
    return {f, g};
  }

  std::pair<T, Vec3<T>> query_color(Vec3<T> x, Vec3<T> d) const {
    detail::check_unit_direction(d);
    std::vector<T> sh(kShBasisDim);
    sh_basis16(d, std::span<T>(sh));
    SampleCache<T> c;
    T f = forward_sdf(x, c);
    Vec3<T> rgb = forward_color(std::span<const T>(sh), c);
    return {f, rgb};
  }

 private:
  grid::HashGrid<T> grid_;
  nn::Mlp<T> head_, color_;
  nn::ParamLayout layout_;
  std::vector<T> params_;
  size_t logb_off_ = 0;
  Vec3<T> center_{};
  T init_radius_ = T(0.5);
};

}  // namespace nerfkit::fields
