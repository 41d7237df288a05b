// SPDX-License-Identifier: Apache-2.0
//
// Ray sampling and the two volume-rendering integrators: classic alpha
// compositing over densities, and NeuS-style CDF-ratio opacities over
// truncated SDF values. Backward kernels live next to their forwards so the
// suffix-accumulator trick is shared.
#pragma once

#include <optional>

#include "nerfkit/camera.hpp"
#include "nerfkit/common.hpp"
#include "nerfkit/fields.hpp"

namespace nerfkit::render {

template <typename T>
struct RaySamples {
  std::vector<T> t;      // strictly increasing, in [t_near, t_far]
  std::vector<T> delta;  // t_{i+1} - t_i; last entry = configured cap
};

// Stratified: one uniform draw per equal bin; deterministic: bin midpoints.
// delta_cap <= 0 selects the bin width.
template <typename T>
RaySamples<T> sample_along_ray(const Ray<T>& ray, int n, bool stratified, Rng* rng,
                               T delta_cap = T(0)) {
  if (n < 2) throw UsageError("sample_along_ray: need n >= 2");
  RaySamples<T> s;
  s.t.resize(size_t(n));
  s.delta.resize(size_t(n));
  T width = (ray.t_far - ray.t_near) / T(n);
  for (int i = 0; i < n; ++i) {
    T u = stratified ? T(rng->uniform()) : T(0.5);
    s.t[size_t(i)] = ray.t_near + (T(i) + u) * width;
  }
  for (int i = 0; i + 1 < n; ++i) s.delta[size_t(i)] = s.t[size_t(i + 1)] - s.t[size_t(i)];
  s.delta[size_t(n - 1)] = delta_cap > T(0) ? delta_cap : width;
  return s;
}

template <typename T>
struct Transmittance {
  std::vector<T> alpha;  // per sample
  std::vector<T> trans;  // T_i before sample i; trans[0] = 1
  T final_trans = T(1);  // after the last sample
};

template <typename T>
Transmittance<T> transmittance_from_alpha(std::span<const T> alpha) {
  Transmittance<T> r;
  r.alpha.assign(alpha.begin(), alpha.end());
  r.trans.resize(alpha.size());
  T t = T(1);
  for (size_t i = 0; i < alpha.size(); ++i) {
    r.trans[i] = t;
    t *= T(1) - alpha[i];
  }
  r.final_trans = t;
  return r;
}

// alpha_i = 1 - exp(-sigma_i delta_i); T_i = prod_{j<i} (1 - alpha_j).
template <typename T>
Transmittance<T> transmittance(std::span<const T> sigma, std::span<const T> delta) {
  if (sigma.size() != delta.size())
    throw ShapeError("transmittance: sigma/delta length mismatch");
  std::vector<T> alpha(sigma.size());
  for (size_t i = 0; i < sigma.size(); ++i) {
    if (sigma[i] < T(0)) throw ContractError("transmittance: sigma must be >= 0");
    alpha[i] = T(1) - std::exp(-sigma[i] * delta[i]);
  }
  return transmittance_from_alpha<T>(alpha);
}

template <typename T>
struct RenderOutput {
  Vec3<T> color{};
  T opacity = T(0);
  std::optional<T> depth;  // expectation; absent when opacity ~ 0
  Transmittance<T> vis;
};

template <typename T>
RenderOutput<T> composite(const RaySamples<T>& samples, const Transmittance<T>& vis,
                          std::span<const Vec3<T>> rgb, Vec3<T> background) {
  RenderOutput<T> out;
  out.vis = vis;
  Vec3<T> c{T(0), T(0), T(0)};
  T opacity = T(0), depth_acc = T(0);
  size_t n = vis.alpha.size();
  for (size_t i = 0; i < n; ++i) {
    T w = vis.trans[i] * vis.alpha[i];
    c += rgb[i] * w;
    opacity += w;
    depth_acc += w * samples.t[i];
  }
  c += background * vis.final_trans;
  out.color = c;
  out.opacity = opacity;
  if (opacity > T(1e-6)) out.depth = depth_acc / opacity;
  return out;
}

// Density integrator over an arbitrary field functor fn(x) -> (sigma, rgb).
template <typename T, typename FieldFn>
RenderOutput<T> render_density_fn(const Ray<T>& ray, const RaySamples<T>& samples,
                                  FieldFn&& fn, Vec3<T> background) {
  size_t n = samples.t.size();
  std::vector<T> sigma(n);
  std::vector<Vec3<T>> rgb(n);
  for (size_t i = 0; i < n; ++i) {
    Vec3<T> x = ray.origin + ray.dir * samples.t[i];
    auto [s, c] = fn(x);
    sigma[i] = s;
    rgb[i] = c;
  }
  auto vis = transmittance<T>(sigma, samples.delta);
  return composite(samples, vis, std::span<const Vec3<T>>(rgb), background);
}

template <typename T>
RenderOutput<T> render_density(const Ray<T>& ray, const fields::DensityField<T>& field,
                               const RaySamples<T>& samples, Vec3<T> background) {
  if (samples.t.empty()) throw UsageError("render_density: empty sample set");
  std::vector<T> sh(kShBasisDim);
  sh_basis16(ray.dir, std::span<T>(sh));
  fields::SampleCache<T> cache;
  return render_density_fn<T>(
      ray, samples,
      [&](Vec3<T> x) {
        T sigma;
        Vec3<T> rgb;
        field.forward_sample(x, std::span<const T>(sh), cache, sigma, rgb);
        return std::pair<T, Vec3<T>>(sigma, rgb);
      },
      background);
}

// NeuS-style discrete opacities from truncated SDF samples: alpha_i =
// max((Phi(u_i) - Phi(u_{i+1})) / Phi(u_i), 0) with Phi the logistic CDF of
// sharpness b, evaluated in log space for stability at large b. The last
// sample gets alpha = 0 (no successor).
template <typename T>
struct SdfWeights {
  Transmittance<T> vis;
  std::vector<T> weight;  // w_i = T_i alpha_i
};

template <typename T>
inline T log_logistic_cdf(T u, T b) {
  return -nn::stable_softplus(-b * u);
}

template <typename T>
SdfWeights<T> sdf_weights(std::span<const T> truncated, T b) {
  size_t n = truncated.size();
  std::vector<T> alpha(n, T(0));
  for (size_t i = 0; i + 1 < n; ++i) {
    T l0 = log_logistic_cdf(truncated[i], b);
    T l1 = log_logistic_cdf(truncated[i + 1], b);
    T ratio = std::exp(l1 - l0);
    alpha[i] = std::max(T(1) - ratio, T(0));
  }
  SdfWeights<T> r;
  r.vis = transmittance_from_alpha<T>(alpha);
  r.weight.resize(n);
  for (size_t i = 0; i < n; ++i) r.weight[i] = r.vis.trans[i] * r.vis.alpha[i];
  return r;
}

// SDF integrator over fn(x) -> (raw f, rgb). Truncation and weighting use
// the field's sharpness b.
template <typename T, typename FieldFn>
RenderOutput<T> render_sdf_fn(const Ray<T>& ray, const RaySamples<T>& samples,
                              FieldFn&& fn, T b, Vec3<T> background) {
  size_t n = samples.t.size();
  std::vector<T> trunc(n);
  std::vector<Vec3<T>> rgb(n);
  for (size_t i = 0; i < n; ++i) {
    Vec3<T> x = ray.origin + ray.dir * samples.t[i];
    auto [f, c] = fn(x);
    trunc[i] = fields::truncate_sdf(f, b);
    rgb[i] = c;
  }
  auto sw = sdf_weights<T>(trunc, b);
  return composite(samples, sw.vis, std::span<const Vec3<T>>(rgb), background);
}

template <typename T>
RenderOutput<T> render_sdf(const Ray<T>& ray, const fields::SdfField<T>& field,
                           const RaySamples<T>& samples, Vec3<T> background) {
  if (samples.t.empty()) throw UsageError("render_sdf: empty sample set");
  std::vector<T> sh(kShBasisDim);
  sh_basis16(ray.dir, std::span<T>(sh));
  fields::SampleCache<T> cache;
  T b = field.sharpness();
  return render_sdf_fn<T>(
      ray, samples,
      [&](Vec3<T> x) {
        T f = field.forward_sdf(x, cache);
        Vec3<T> c = field.forward_color(std::span<const T>(sh), cache);
        return std::pair<T, Vec3<T>>(f, c);
      },
      b, background);
}

// ---------------------------------------------------------------------------
// Backward kernels. Both express dC/dalpha_k = T_k (c_k - Q_k) with the
// suffix color Q_k = alpha_{k+1} c_{k+1} + (1 - alpha_{k+1}) Q_{k+1},
// Q_last = background, which avoids dividing by (1 - alpha).
// ---------------------------------------------------------------------------

// Returns per-sample dL/dsigma and dL/drgb given dL/dcolor.
template <typename T>
void density_backward(const RaySamples<T>& samples, const Transmittance<T>& vis,
                      std::span<const Vec3<T>> rgb, Vec3<T> background,
                      Vec3<T> d_color, std::span<T> d_sigma,
                      std::span<Vec3<T>> d_rgb) {
  size_t n = vis.alpha.size();
  Vec3<T> q = background;
  for (size_t k = n; k-- > 0;) {
    T w = vis.trans[k] * vis.alpha[k];
    d_rgb[k] = d_color * w;
    // d sigma = delta * T_{k+1} * <dC, c_k - Q_k>, with T_{k+1} = T_k(1-a_k).
    T t_next = (k + 1 < n) ? vis.trans[k + 1] : vis.final_trans;
    T da = dot(d_color, rgb[k] - q);
    d_sigma[k] = samples.delta[k] * t_next * da;
    q = rgb[k] * vis.alpha[k] + q * (T(1) - vis.alpha[k]);
  }
}

// Backward of sdf_weights + composite: produces dL/d(truncated value) and
// the partial dL/db through the CDF ratio (truncation chain handled by the
// caller, which knows the raw f values).
template <typename T>
void sdf_backward(const RaySamples<T>& samples, const SdfWeights<T>& sw,
                  std::span<const T> truncated, T b, std::span<const Vec3<T>> rgb,
                  Vec3<T> background, Vec3<T> d_color, std::span<T> d_trunc,
                  std::span<Vec3<T>> d_rgb, T& d_b) {
  static_cast<void>(samples);
  size_t n = sw.vis.alpha.size();
  std::fill(d_trunc.begin(), d_trunc.end(), T(0));
  d_b = T(0);
  Vec3<T> q = background;
  for (size_t k = n; k-- > 0;) {
    T w = sw.vis.trans[k] * sw.vis.alpha[k];
    d_rgb[k] = d_color * w;
    T d_alpha = dot(d_color, (rgb[k] - q) * sw.vis.trans[k]);
    q = rgb[k] * sw.vis.alpha[k] + q * (T(1) - sw.vis.alpha[k]);
    if (k + 1 >= n) continue;           // last sample has no alpha
    if (sw.vis.alpha[k] <= T(0)) continue;  // clamped at zero: frozen
    // alpha = 1 - exp(L), L = logPhi(u_{k+1}) - logPhi(u_k)
    T ratio = T(1) - sw.vis.alpha[k];  // exp(L)
    T dL = -ratio * d_alpha;
    T s0 = nn::stable_sigmoid(-b * truncated[k]);      // 1 - Phi(u_k)
    T s1 = nn::stable_sigmoid(-b * truncated[k + 1]);  // 1 - Phi(u_{k+1})
    d_trunc[k] += dL * (-b * s0);
    d_trunc[k + 1] += dL * (b * s1);
    d_b += dL * (truncated[k + 1] * s1 - truncated[k] * s0);
  }
}

}  // namespace nerfkit::render
