// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "nerfkit/common.hpp"

namespace nerfkit::data {

// Flat typed key-value text format: one `key = tokens...` per line,
// '#' comments, repeated keys allowed (e.g. one line per primitive).
class KeyValues {
 public:
  struct Entry {
    std::string key;
    std::vector<std::string> tokens;
  };

  static KeyValues parse_file(const std::string& path);
  static KeyValues parse_string(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;
  size_t count(const std::string& key) const;
  // Accessors fail with the key path when the value is missing or mistyped.
  const Entry& first(const std::string& key) const;
  std::vector<const Entry*> all(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  Vec3d get_vec3(const std::string& key, Vec3d fallback) const;

  static double token_double(const Entry& e, size_t i);

  void set(const std::string& key, const std::string& value);
  void save(const std::string& path) const;
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

}  // namespace nerfkit::data
