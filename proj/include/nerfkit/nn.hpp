// SPDX-License-Identifier: Apache-2.0
//
// Minimal differentiable building blocks: dense layers with analytic
// backprop over one contiguous flat parameter vector, plus Adam.
#pragma once

#include <cassert>
#include <cstring>
#include <numeric>
#include <string>

#include "nerfkit/common.hpp"

namespace nerfkit::nn {

enum class Activation : uint8_t {
  kLinear = 0,
  kReLU = 1,
  kSigmoid = 2,
  kTruncSigmoid = 3,  // (1 - e^-z) / (1 + e^-z) == tanh(z/2), range (-1, 1)
  kExp = 4,
  kSoftplus = 5,
};

template <typename T>
inline T stable_sigmoid(T z) {
  if (z >= T(0)) {
    return T(1) / (T(1) + std::exp(-z));
  }
  T e = std::exp(z);
  return e / (T(1) + e);
}

template <typename T>
inline T stable_softplus(T z) {
  if (z > T(20)) return z;
  if (z < T(-20)) return std::exp(z);
  return std::log1p(std::exp(z));
}

template <typename T>
inline T activate(Activation a, T z) {
  switch (a) {
    case Activation::kLinear: return z;
    case Activation::kReLU: return z > T(0) ? z : T(0);
    case Activation::kSigmoid: return stable_sigmoid(z);
    case Activation::kTruncSigmoid: return std::tanh(z * T(0.5));
    case Activation::kExp: return std::exp(z);
    case Activation::kSoftplus: return stable_softplus(z);
  }
  return z;
}

// Derivative d act / d z given both pre-activation z and value a = act(z).
template <typename T>
inline T activate_grad(Activation act, T z, T a) {
  switch (act) {
    case Activation::kLinear: return T(1);
    case Activation::kReLU: return z > T(0) ? T(1) : T(0);
    case Activation::kSigmoid: return a * (T(1) - a);
    case Activation::kTruncSigmoid: return T(0.5) * (T(1) - a * a);
    case Activation::kExp: return a;
    case Activation::kSoftplus: return stable_sigmoid(z);
  }
  return T(1);
}

// ---------------------------------------------------------------------------
// Flat parameter layout registry: maps named tensors to slices of the one
// contiguous parameter vector shared by a whole model.
// ---------------------------------------------------------------------------
struct ParamEntry {
  std::string name;
  size_t offset = 0;
  size_t count = 0;
};

class ParamLayout {
 public:
  size_t add(const std::string& name, size_t count) {
    size_t off = total_;
    entries_.push_back({name, off, count});
    total_ += count;
    return off;
  }
  const ParamEntry* find(const std::string& name) const {
    for (const auto& e : entries_)
      if (e.name == name) return &e;
    return nullptr;
  }
  size_t total() const { return total_; }
  const std::vector<ParamEntry>& entries() const { return entries_; }

 private:
  std::vector<ParamEntry> entries_;
  size_t total_ = 0;
};

struct LayerSpec {
  int in = 0;
  int out = 0;
  Activation act = Activation::kLinear;
};

// ---------------------------------------------------------------------------
// MLP over externally owned parameters. Weights are stored row-major
// [out x in] followed by the bias, per layer, at offsets registered in the
// shared ParamLayout. Forward/backward are pure given the parameter span.
// ---------------------------------------------------------------------------
template <typename T>
struct MlpCache {
  // post holds the input followed by every layer's activation output;
  // pre holds every layer's pre-activation. Offsets follow the layer specs.
  std::vector<T> pre;
  std::vector<T> post;
};

template <typename T>
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
    for (size_t l = 1; l < layers_.size(); ++l) {
      if (layers_[l].in != layers_[l - 1].out)
        throw ShapeError("mlp layer " + std::to_string(l) + " expects in=" +
                         std::to_string(layers_[l].in) + " but previous out=" +
                         std::to_string(layers_[l - 1].out));
    }
    pre_total_ = 0;
    for (const auto& l : layers_) pre_total_ += size_t(l.out);
  }

  const std::vector<LayerSpec>& layers() const { return layers_; }
  int in_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  int out_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  size_t param_count() const {
    size_t n = 0;
    for (const auto& l : layers_) n += size_t(l.in) * l.out + l.out;
    return n;
  }

  void register_params(ParamLayout& layout, const std::string& prefix) {
    weight_off_.clear();
    bias_off_.clear();
    for (size_t l = 0; l < layers_.size(); ++l) {
      const auto& s = layers_[l];
      weight_off_.push_back(layout.add(
          prefix + ".layer" + std::to_string(l) + ".weight", size_t(s.in) * s.out));
      bias_off_.push_back(
          layout.add(prefix + ".layer" + std::to_string(l) + ".bias", size_t(s.out)));
    }
  }

  // Glorot-uniform weights, zero biases. last_layer_scale shrinks the final
  // layer's weights (used by heads that must start near a known function).
  void init_params(std::span<T> params, Rng& rng, T last_layer_scale = T(1)) const {
    for (size_t l = 0; l < layers_.size(); ++l) {
      const auto& s = layers_[l];
      T bound = std::sqrt(T(6) / T(s.in + s.out));
      if (l + 1 == layers_.size()) bound *= last_layer_scale;
      T* w = params.data() + weight_off_[l];
      for (size_t i = 0; i < size_t(s.in) * s.out; ++i)
        w[i] = T(rng.uniform(-1.0f, 1.0f)) * bound;
      T* b = params.data() + bias_off_[l];
      std::fill(b, b + s.out, T(0));
    }
  }

  void forward(std::span<const T> params, std::span<const T> input,
               std::span<T> output, MlpCache<T>* cache = nullptr) const {
    if (int(input.size()) != in_dim())
      throw ShapeError("mlp_forward: input length " + std::to_string(input.size()) +
                       " != in dim " + std::to_string(in_dim()));
    // Scratch is thread-local so concurrent workers stay independent.
    static thread_local std::vector<T> scratch_a_, scratch_z_;
    scratch_a_.assign(input.begin(), input.end());
    if (cache) {
      cache->pre.resize(pre_total_);
      cache->post.resize(size_t(in_dim()) + pre_total_);
      std::copy(input.begin(), input.end(), cache->post.begin());
    }
    size_t pre_off = 0, post_off = size_t(in_dim());
    for (size_t l = 0; l < layers_.size(); ++l) {
      const auto& s = layers_[l];
      scratch_z_.resize(size_t(s.out));
      const T* w = params.data() + weight_off_[l];
      const T* b = params.data() + bias_off_[l];
      const T* x = scratch_a_.data();
      for (int o = 0; o < s.out; ++o) {
        const T* wr = w + size_t(o) * s.in;
        T acc = b[o];
        for (int i = 0; i < s.in; ++i) acc += wr[i] * x[i];
        scratch_z_[size_t(o)] = acc;
      }
      scratch_a_.resize(size_t(s.out));
      for (int o = 0; o < s.out; ++o)
        scratch_a_[size_t(o)] = activate(s.act, scratch_z_[size_t(o)]);
      if (cache) {
        std::copy(scratch_z_.begin(), scratch_z_.end(), cache->pre.begin() + pre_off);
        std::copy(scratch_a_.begin(), scratch_a_.end(), cache->post.begin() + post_off);
      }
      pre_off += size_t(s.out);
      post_off += size_t(s.out);
    }
    if (int(output.size()) != out_dim()) throw ShapeError("mlp_forward: bad output span");
    std::copy(scratch_a_.begin(), scratch_a_.end(), output.begin());
  }

  // Accumulates parameter gradients into grad_params (full-length span) and
  // writes the gradient w.r.t. the input into grad_input.
  void backward(std::span<const T> params, const MlpCache<T>& cache,
                std::span<const T> grad_output, std::span<T> grad_params,
                std::span<T> grad_input) const {
    if (cache.pre.size() != pre_total_ ||
        cache.post.size() != size_t(in_dim()) + pre_total_)
      throw UsageError("mlp_backward: cache does not match this network");
    if (int(grad_output.size()) != out_dim())
      throw ShapeError("mlp_backward: grad_output length mismatch");

    static thread_local std::vector<T> scratch_g_, scratch_gin_;
    scratch_g_.assign(grad_output.begin(), grad_output.end());
    size_t pre_end = pre_total_;
    size_t post_end = cache.post.size();
    for (size_t li = layers_.size(); li-- > 0;) {
      const auto& s = layers_[li];
      size_t pre_off = pre_end - size_t(s.out);
      size_t post_off = post_end - size_t(s.out);
      size_t in_off = post_off - size_t(s.in);  // previous layer output / input
      const T* z = cache.pre.data() + pre_off;
      const T* a = cache.post.data() + post_off;
      const T* x = cache.post.data() + in_off;

      // dL/dz = dL/da * act'(z)
      for (int o = 0; o < s.out; ++o)
        scratch_g_[size_t(o)] *= activate_grad(s.act, z[o], a[o]);

      T* gw = grad_params.data() + weight_off_[li];
      T* gb = grad_params.data() + bias_off_[li];
      scratch_gin_.assign(size_t(s.in), T(0));
      const T* w = params.data() + weight_off_[li];
      for (int o = 0; o < s.out; ++o) {
        T g = scratch_g_[size_t(o)];
        gb[o] += g;
        T* gwr = gw + size_t(o) * s.in;
        const T* wr = w + size_t(o) * s.in;
        T* gin = scratch_gin_.data();
        for (int i = 0; i < s.in; ++i) {
          gwr[i] += g * x[i];
          gin[i] += g * wr[i];
        }
      }
      scratch_g_ = scratch_gin_;
      pre_end = pre_off;
      post_end = post_off;
    }
    if (int(grad_input.size()) != in_dim())
      throw ShapeError("mlp_backward: grad_input length mismatch");
    std::copy(scratch_g_.begin(), scratch_g_.end(), grad_input.begin());
  }

  // Backward for the input only; parameter gradients are not formed.
  void input_gradient(std::span<const T> params, const MlpCache<T>& cache,
                      std::span<const T> grad_output, std::span<T> grad_input) const {
    static thread_local std::vector<T> scratch_g_, scratch_gin_;
    scratch_g_.assign(grad_output.begin(), grad_output.end());
    size_t pre_end = pre_total_;
    size_t post_end = cache.post.size();
    for (size_t li = layers_.size(); li-- > 0;) {
      const auto& s = layers_[li];
      size_t pre_off = pre_end - size_t(s.out);
      size_t post_off = post_end - size_t(s.out);
      const T* z = cache.pre.data() + pre_off;
      const T* a = cache.post.data() + post_off;
      for (int o = 0; o < s.out; ++o)
        scratch_g_[size_t(o)] *= activate_grad(s.act, z[o], a[o]);
      const T* w = params.data() + weight_off_[li];
      scratch_gin_.assign(size_t(s.in), T(0));
      for (int o = 0; o < s.out; ++o) {
        T g = scratch_g_[size_t(o)];
        const T* wr = w + size_t(o) * s.in;
        T* gin = scratch_gin_.data();
        for (int i = 0; i < s.in; ++i) gin[i] += g * wr[i];
      }
      scratch_g_ = scratch_gin_;
      pre_end = pre_off;
      post_end = post_off;
    }
    std::copy(scratch_g_.begin(), scratch_g_.end(), grad_input.begin());
  }

  const std::vector<size_t>& weight_offsets() const { return weight_off_; }
  const std::vector<size_t>& bias_offsets() const { return bias_off_; }

 private:
  std::vector<LayerSpec> layers_;
  std::vector<size_t> weight_off_, bias_off_;
  size_t pre_total_ = 0;
};

// ---------------------------------------------------------------------------
// Adam with bias correction over the flat parameter vector. lr_scale, when
// non-empty, multiplies the step per parameter (used for per-group rates).
// ---------------------------------------------------------------------------
template <typename T>
struct AdamState {
  std::vector<T> m, v;
  int64_t t = 0;
  T lr = T(1e-3);
  T beta1 = T(0.9);
  T beta2 = T(0.99);
  T eps = T(1e-8);

  explicit AdamState(size_t n = 0) : m(n, T(0)), v(n, T(0)) {}
};

template <typename T>
void adam_step(AdamState<T>& state, std::span<T> params, std::span<const T> grads,
               std::span<const T> lr_scale = {}) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw ShapeError("adam_step: size mismatch between params, grads and state");
  if (!lr_scale.empty() && lr_scale.size() != params.size())
    throw ShapeError("adam_step: lr_scale length mismatch");
  for (size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i]))
      throw TrainError("adam_step: non-finite gradient at index " + std::to_string(i));
  }
  state.t += 1;
  T c1 = T(1) - std::pow(state.beta1, T(state.t));
  T c2 = T(1) - std::pow(state.beta2, T(state.t));
  T* m = state.m.data();
  T* v = state.v.data();
  T* p = params.data();
  const T* g = grads.data();
  const T b1 = state.beta1, b2 = state.beta2;
  for (size_t i = 0; i < params.size(); ++i) {
    m[i] = b1 * m[i] + (T(1) - b1) * g[i];
    v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
    T mhat = m[i] / c1;
    T vhat = v[i] / c2;
    T step = state.lr * mhat / (std::sqrt(vhat) + state.eps);
    if (!lr_scale.empty()) step *= lr_scale[i];
    p[i] -= step;
  }
}

}  // namespace nerfkit::nn
