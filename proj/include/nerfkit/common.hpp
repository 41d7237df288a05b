// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace nerfkit {

// ---------------------------------------------------------------------------
// Error hierarchy. Every error carries a short machine-greppable class name
// that the CLI prints as `error[<kind>]: <message>`.
// ---------------------------------------------------------------------------
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error("shape", m) {}
};
struct UsageError : Error {
  explicit UsageError(const std::string& m) : Error("usage", m) {}
};
struct ContractError : Error {
  explicit ContractError(const std::string& m) : Error("contract", m) {}
};
struct BoundsError : Error {
  explicit BoundsError(const std::string& m) : Error("bounds", m) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error("parse", m) {}
};
struct FormatError : Error {
  explicit FormatError(const std::string& m) : Error("format", m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io", m) {}
};
struct TopologyError : Error {
  explicit TopologyError(const std::string& m) : Error("topology", m) {}
};
struct TrainError : Error {
  explicit TrainError(const std::string& m) : Error("train", m) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& m) : Error("validation", m) {}
};

// ---------------------------------------------------------------------------
// Small vector math.
// ---------------------------------------------------------------------------
template <typename T>
struct Vec3 {
  T x{}, y{}, z{};

  constexpr Vec3() = default;
  constexpr Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

  T& operator[](int i) { return (&x)[i]; }
  const T& operator[](int i) const { return (&x)[i]; }

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(Vec3 a, T s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Vec3 operator*(T s, Vec3 a) { return a * s; }
  friend constexpr Vec3 operator*(Vec3 a, Vec3 b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
  friend constexpr Vec3 operator/(Vec3 a, T s) { return {a.x / s, a.y / s, a.z / s}; }
  Vec3& operator+=(Vec3 b) { x += b.x; y += b.y; z += b.z; return *this; }
  Vec3& operator-=(Vec3 b) { x -= b.x; y -= b.y; z -= b.z; return *this; }
  Vec3& operator*=(T s) { x *= s; y *= s; z *= s; return *this; }
  friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }

  friend constexpr T dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
  friend constexpr Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
  }
  friend T norm(Vec3 a) { return std::sqrt(dot(a, a)); }
  friend Vec3 normalized(Vec3 a) {
    T n = norm(a);
    return n > T(0) ? a / n : Vec3{T(0), T(0), T(0)};
  }
  template <typename U>
  Vec3<U> cast() const { return {U(x), U(y), U(z)}; }
};

using Vec3f = Vec3<float>;
using Vec3d = Vec3<double>;

template <typename T>
struct Vec2 {
  T x{}, y{};
  T& operator[](int i) { return (&x)[i]; }
  const T& operator[](int i) const { return (&x)[i]; }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(Vec2 a, T s) { return {a.x * s, a.y * s}; }
  friend constexpr T dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
  friend T norm(Vec2 a) { return std::sqrt(dot(a, a)); }
};

using Vec2f = Vec2<float>;
using Vec2d = Vec2<double>;

// Axis-aligned box in world units.
template <typename T>
struct BBox {
  Vec3<T> min{T(-1), T(-1), T(-1)};
  Vec3<T> max{T(1), T(1), T(1)};

  Vec3<T> extent() const { return max - min; }
  Vec3<T> center() const { return (min + max) * T(0.5); }
  bool contains(Vec3<T> p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
           p.z >= min.z && p.z <= max.z;
  }
  Vec3<T> clamp(Vec3<T> p) const {
    return {std::clamp(p.x, min.x, max.x), std::clamp(p.y, min.y, max.y),
            std::clamp(p.z, min.z, max.z)};
  }
  template <typename U>
  BBox<U> cast() const {
    return {min.template cast<U>(), max.template cast<U>()};
  }
};

using BBoxf = BBox<float>;
using BBoxd = BBox<double>;

// ---------------------------------------------------------------------------
// Deterministic RNG. All randomness in the toolkit flows through this type so
// that a seed pins every run.
// ---------------------------------------------------------------------------
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : gen_(seed) {}

  uint32_t next_u32() { return gen_(); }
  // Uniform in [0, 1) with 24 bits of mantissa; stable across stdlibs.
  float uniform() { return float(gen_() >> 8) * 0x1.0p-24f; }
  double uniform_double() {
    uint64_t hi = gen_(), lo = gen_();
    return double(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }
  // Uniform integer in [0, n).
  uint32_t uniform_int(uint32_t n) {
    return uint32_t((uint64_t(gen_()) * n) >> 32);
  }
  float uniform(float lo, float hi) { return lo + (hi - lo) * uniform(); }
  float normal() {
    // Box-Muller; cached second value dropped for simplicity.
    float u1 = std::max(uniform(), 1e-12f), u2 = uniform();
    return std::sqrt(-2.0f * std::log(u1)) * std::cos(6.2831853f * u2);
  }
  std::mt19937& engine() { return gen_; }

 private:
  std::mt19937 gen_;
};

// ---------------------------------------------------------------------------
// Blocked parallel-for with a static partition. Chunks are assigned by index,
// so for a fixed (n, threads) the work split is always the same; callers that
// need reproducibility reduce per-worker results in worker order.
// ---------------------------------------------------------------------------
template <typename Fn>
void parallel_for(size_t n, int threads, Fn&& fn) {
  if (n == 0) return;
  int workers = std::max(1, threads);
  workers = int(std::min<size_t>(workers, n));
  if (workers == 1) {
    fn(size_t(0), n, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  size_t chunk = (n + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    size_t b = std::min(n, chunk * size_t(w));
    size_t e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back([&fn, b, e, w] { fn(b, e, w); });
  }
  fn(size_t(0), std::min(n, chunk), 0);
  for (auto& t : pool) t.join();
}

inline int default_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : int(hc);
}

inline bool all_finite(std::span<const float> v) {
  for (float x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace nerfkit
