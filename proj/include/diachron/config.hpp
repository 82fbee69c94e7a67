// Copyright 2026 The Diachron Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Flat key=value configuration with dotted section prefixes:
//
//   # comment
//   train.dimension=300
//   lexicon.groups=groups.tsv
//
// Later assignments override earlier ones, so command-line --key=value flags
// are applied after the file.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "diachron/error.hpp"
#include "diachron/hash.hpp"
#include "diachron/lexicon.hpp"

namespace diachron {

class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<config>",
                      std::filesystem::path base_dir = {}) {
    Config cfg;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw UserError(source + ":" + std::to_string(number) + ": expected key=value");
      }
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), base_dir);
    }
    return cfg;
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UserError("cannot open config file " + path.string());
    return parse(in, path.string(), path.parent_path());
  }

  // `base_dir` anchors relative paths given for path-valued keys.
  void set(const std::string& key, const std::string& value,
           const std::filesystem::path& base_dir = {}) {
    if (key.empty()) throw UserError("empty config key");
    values_[key] = {value, base_dir};
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<std::string> get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second.value;
  }

  std::string get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
  }

  // Resolves a relative path against the directory of the file that set it.
  std::optional<std::filesystem::path> get_path(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.value.empty()) return std::nullopt;
    std::filesystem::path p(it->second.value);
    if (p.is_relative() && !it->second.base_dir.empty()) p = it->second.base_dir / p;
    return p;
  }

  std::vector<std::filesystem::path> get_paths(const std::string& key) const {
    std::vector<std::filesystem::path> out;
    auto it = values_.find(key);
    if (it == values_.end()) return out;
    for (const auto& part : split_list(it->second.value)) {
      std::filesystem::path p(part);
      if (p.is_relative() && !it->second.base_dir.empty()) p = it->second.base_dir / p;
      out.push_back(p);
    }
    return out;
  }

  template <class T>
  T get_number(const std::string& key, T fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    T out{};
    const auto* end = v->data() + v->size();
    auto [ptr, ec] = std::from_chars(v->data(), end, out);
    if (v->empty() || ec != std::errc() || ptr != end) {
      throw UserError("config key " + key + ": '" + *v + "' is not a valid number");
    }
    return out;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "1" || *v == "true" || *v == "yes" || *v == "on") return true;
    if (*v == "0" || *v == "false" || *v == "no" || *v == "off") return false;
    throw UserError("config key " + key + ": '" + *v + "' is not a boolean");
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
  }

  // Throws on keys outside `known`.
  void check_known(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_) {
      if (!known.count(k)) throw UserError("unknown config key '" + k + "'");
    }
  }

  // Sorted key=value lines, excluding keys in `ignore`. Stable input to hashing.
  std::string canonical(const std::set<std::string>& ignore = {}) const {
    std::string out;
    for (const auto& [k, v] : values_) {
      if (ignore.count(k)) continue;
      out += k + "=" + v.value + "\n";
    }
    return out;
  }

  static std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
      auto comma = s.find(',', start);
      if (comma == std::string_view::npos) comma = s.size();
      auto part = trim(s.substr(start, comma - start));
      if (!part.empty()) out.push_back(part);
      start = comma + 1;
    }
    return out;
  }

 private:
  struct Value {
    std::string value;
    std::filesystem::path base_dir;
  };

  static std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return std::string(s.substr(a, b - a + 1));
  }

  std::map<std::string, Value> values_;
};

}  // namespace diachron
