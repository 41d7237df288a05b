// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/config.hpp"

#include <fstream>
#include <sstream>

namespace nerfkit::data {

KeyValues KeyValues::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

KeyValues KeyValues::parse_string(const std::string& text, const std::string& origin) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (!blank)
        throw ParseError(origin + ":" + std::to_string(lineno) +
                         ": expected `key = value`");
      continue;
    }
    Entry e;
    {
      std::istringstream ks(line.substr(0, eq));
      ks >> e.key;
      std::string extra;
      if (e.key.empty() || (ks >> extra))
        throw ParseError(origin + ":" + std::to_string(lineno) + ": malformed key");
    }
    std::istringstream vs(line.substr(eq + 1));
    std::string tok;
    while (vs >> tok) e.tokens.push_back(tok);
    kv.entries_.push_back(std::move(e));
  }
  return kv;
}

bool KeyValues::has(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.key == key) return true;
  return false;
}

size_t KeyValues::count(const std::string& key) const {
  size_t n = 0;
  for (const auto& e : entries_)
    if (e.key == key) ++n;
  return n;
}

const KeyValues::Entry& KeyValues::first(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.key == key) return e;
  throw ValidationError("missing required key '" + key + "'");
}

std::vector<const KeyValues::Entry*> KeyValues::all(const std::string& key) const {
  std::vector<const Entry*> out;
  for (const auto& e : entries_)
    if (e.key == key) out.push_back(&e);
  return out;
}

std::string KeyValues::get_string(const std::string& key,
                                  const std::string& fallback) const {
  if (!has(key)) return fallback;
  const Entry& e = first(key);
  if (e.tokens.size() != 1)
    throw ValidationError("key '" + key + "' expects a single value");
  return e.tokens[0];
}

std::string KeyValues::require_string(const std::string& key) const {
  if (!has(key)) throw ValidationError("missing required key '" + key + "'");
  return get_string(key, "");
}

double KeyValues::token_double(const Entry& e, size_t i) {
  if (i >= e.tokens.size())
    throw ValidationError("key '" + e.key + "' expects >= " + std::to_string(i + 1) +
                          " numeric values");
  try {
    size_t used = 0;
    double v = std::stod(e.tokens[i], &used);
    if (used != e.tokens[i].size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("key '" + e.key + "' value '" + e.tokens[i] +
                          "' is not a number");
  }
}

long KeyValues::get_int(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  double v = token_double(first(key), 0);
  long r = long(v);
  if (double(r) != v)
    throw ValidationError("key '" + key + "' expects an integer");
  return r;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return token_double(first(key), 0);
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string s = get_string(key, "");
  if (s == "true" || s == "1" || s == "on") return true;
  if (s == "false" || s == "0" || s == "off") return false;
  throw ValidationError("key '" + key + "' expects true/false");
}

Vec3d KeyValues::get_vec3(const std::string& key, Vec3d fallback) const {
  if (!has(key)) return fallback;
  const Entry& e = first(key);
  if (e.tokens.size() != 3)
    throw ValidationError("key '" + key + "' expects 3 values");
  return {token_double(e, 0), token_double(e, 1), token_double(e, 2)};
}

void KeyValues::set(const std::string& key, const std::string& value) {
  for (auto& e : entries_) {
    if (e.key == key) {
      e.tokens.clear();
      std::istringstream vs(value);
      std::string tok;
      while (vs >> tok) e.tokens.push_back(tok);
      return;
    }
  }
  Entry e;
  e.key = key;
  std::istringstream vs(value);
  std::string tok;
  while (vs >> tok) e.tokens.push_back(tok);
  entries_.push_back(std::move(e));
}

void KeyValues::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& e : entries_) {
    out << e.key << " =";
    for (const auto& t : e.tokens) out << ' ' << t;
    out << '\n';
  }
}

}  // namespace nerfkit::data
