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

// Group, trait and attribute lexicons.
//
//   groups:     GROUPID<TAB>CATEGORY<TAB>COMPARISONID<TAB>SLICESPEC<TAB>labels
//   traits:     WORD<TAB>VALENCE<TAB>STABLEFLAG
//   attributes: P|U<TAB>WORD
//
// SLICESPEC is "*" (default labels), a year "1966", a range "1966-1976" or a
// decade "1950s". Blank lines and lines starting with '#' are ignored.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "diachron/corpus.hpp"
#include "diachron/error.hpp"
#include "diachron/utf8.hpp"

namespace diachron {

enum class GroupCategory { kGender, kEthnicity, kAge, kEconomic, kBodyType };

inline std::string_view to_string(GroupCategory c) {
  switch (c) {
    case GroupCategory::kGender: return "gender";
    case GroupCategory::kEthnicity: return "ethnicity";
    case GroupCategory::kAge: return "age";
    case GroupCategory::kEconomic: return "economic";
    case GroupCategory::kBodyType: return "bodyType";
  }
  return "?";
}

inline std::optional<GroupCategory> parse_category(std::string_view s) {
  for (auto c : {GroupCategory::kGender, GroupCategory::kEthnicity, GroupCategory::kAge,
                 GroupCategory::kEconomic, GroupCategory::kBodyType}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

struct LabelRange {
  int first_year = 0;
  int last_year = 0;
  std::vector<std::string> labels;
  friend bool operator==(const LabelRange&, const LabelRange&) = default;
};

struct SocialGroup {
  std::string id;
  GroupCategory category = GroupCategory::kGender;
  std::string comparison_id;
  std::vector<std::string> default_labels;
  std::vector<LabelRange> ranged_labels;

  // L(G, t): the default labels plus every era-specific label whose year
  // range overlaps the slice. Never empty for a loaded group.
  std::vector<std::string> labels_for(const TimeSlice& slice) const {
    std::vector<std::string> out = default_labels;
    for (const auto& r : ranged_labels) {
      if (!slice.overlaps(r.first_year, r.last_year)) continue;
      for (const auto& l : r.labels) {
        if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
      }
    }
    return out;
  }

  friend bool operator==(const SocialGroup&, const SocialGroup&) = default;
};

struct TraitEntry {
  std::string word;
  double valence = 0;
  bool stable = true;
  friend bool operator==(const TraitEntry&, const TraitEntry&) = default;
};

struct AttributeSets {
  std::vector<std::string> pleasant;
  std::vector<std::string> unpleasant;
  friend bool operator==(const AttributeSets&, const AttributeSets&) = default;
};

struct GroupLexicon {
  std::vector<SocialGroup> groups;

  const SocialGroup* find(std::string_view id) const {
    for (const auto& g : groups) {
      if (g.id == id) return &g;
    }
    return nullptr;
  }
  const SocialGroup& at(std::string_view id) const {
    if (const auto* g = find(id)) return *g;
    throw UserError("unknown group '" + std::string(id) + "'");
  }
  const SocialGroup& comparison_of(const SocialGroup& g) const { return at(g.comparison_id); }
};

namespace detail {

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

// Calls f(line_number, fields) for every content line.
template <class F>
void for_each_tsv_line(std::istream& in, const std::string& source, F&& f) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto bad = utf8::find_invalid(line)) {
      throw EncodingError(source + ": invalid UTF-8 on line " + std::to_string(number), *bad);
    }
    if (line.empty() || line.front() == '#') continue;
    f(number, split_tabs(line));
  }
}

inline UserError line_error(const std::string& source, std::size_t line, const std::string& what) {
  return UserError(source + ":" + std::to_string(line) + ": " + what);
}

// Parses "*", "1966", "1966-1976" or "1950s". nullopt means "*".
inline std::optional<std::pair<int, int>> parse_slice_spec(std::string_view s, bool& ok) {
  ok = true;
  if (s == "*") return std::nullopt;
  if (s.size() == 5 && s.back() == 's') {
    if (auto y = parse_int<int>(s.substr(0, 4)); y && *y % 10 == 0) {
      return std::pair{*y, *y + 9};
    }
  }
  const auto dash = s.find('-');
  if (dash == std::string_view::npos) {
    if (auto y = parse_int<int>(s)) return std::pair{*y, *y};
  } else {
    auto a = parse_int<int>(s.substr(0, dash));
    auto b = parse_int<int>(s.substr(dash + 1));
    if (a && b && *a <= *b) return std::pair{*a, *b};
  }
  ok = false;
  return std::nullopt;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<bool> parse_flag(std::string_view s) {
  if (s == "1" || s == "true" || s == "yes" || s == "y") return true;
  if (s == "0" || s == "false" || s == "no" || s == "n") return false;
  return std::nullopt;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open " + path.string());
  return in;
}

}  // namespace detail

// Validates mutual comparisons; a group with two default ("*") rows or
// conflicting category/comparison between its rows is a duplicate.
inline GroupLexicon load_groups(std::istream& in, const std::string& source = "<groups>") {
  GroupLexicon lex;
  std::map<std::string, std::size_t> index;
  std::set<std::string> has_default;
  detail::for_each_tsv_line(in, source, [&](std::size_t n, const std::vector<std::string>& f) {
    if (f.size() != 5) throw detail::line_error(source, n, "expected 5 tab-separated fields");
    const auto& id = f[0];
    if (id.empty()) throw detail::line_error(source, n, "empty group id");
    auto category = parse_category(f[1]);
    if (!category) throw detail::line_error(source, n, "unknown category '" + f[1] + "'");
    if (f[2].empty()) throw detail::line_error(source, n, "empty comparison id");
    bool ok = true;
    auto range = detail::parse_slice_spec(f[3], ok);
    if (!ok) throw detail::line_error(source, n, "bad slice spec '" + f[3] + "'");
    auto labels = detail::split_tokens(f[4]);
    if (labels.empty()) throw detail::line_error(source, n, "empty label set");

    auto [it, inserted] = index.try_emplace(id, lex.groups.size());
    if (inserted) {
      lex.groups.push_back(SocialGroup{id, *category, f[2], {}, {}});
    }
    SocialGroup& g = lex.groups[it->second];
    if (g.category != *category || g.comparison_id != f[2]) {
      throw detail::line_error(source, n, "duplicate group id '" + id +
                                              "' with conflicting category or comparison");
    }
    if (!range) {
      if (!has_default.insert(id).second) {
        throw detail::line_error(source, n, "duplicate group id '" + id + "'");
      }
      g.default_labels = std::move(labels);
    } else {
      g.ranged_labels.push_back({range->first, range->second, std::move(labels)});
    }
  });
  for (const auto& g : lex.groups) {
    if (g.default_labels.empty()) {
      throw UserError(source + ": group '" + g.id + "' has no default (*) label set");
    }
    const auto* c = lex.find(g.comparison_id);
    if (!c) {
      throw UserError(source + ": group '" + g.id + "' names undefined comparison '" +
                      g.comparison_id + "'");
    }
    if (c->comparison_id != g.id) {
      throw UserError(source + ": comparison is not mutual: " + g.id + " -> " + c->id +
                      " but " + c->id + " -> " + c->comparison_id);
    }
  }
  return lex;
}

inline GroupLexicon load_groups(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return load_groups(in, path.string());
}

// Z-scores valences against the loaded set (population standard deviation)
// when `normalize` is set.
inline std::vector<TraitEntry> load_traits(std::istream& in, bool normalize,
                                           const std::string& source = "<traits>") {
  std::vector<TraitEntry> traits;
  std::set<std::string> seen;
  detail::for_each_tsv_line(in, source, [&](std::size_t n, const std::vector<std::string>& f) {
    if (f.size() != 3) throw detail::line_error(source, n, "expected 3 tab-separated fields");
    if (f[0].empty() || f[0].find(' ') != std::string::npos) {
      throw detail::line_error(source, n, "trait word must be a single non-empty token");
    }
    auto valence = detail::parse_double(f[1]);
    if (!valence) throw detail::line_error(source, n, "non-numeric valence '" + f[1] + "'");
    auto stable = detail::parse_flag(f[2]);
    if (!stable) throw detail::line_error(source, n, "bad stability flag '" + f[2] + "'");
    if (!seen.insert(f[0]).second) {
      throw detail::line_error(source, n, "duplicate trait '" + f[0] + "'");
    }
    traits.push_back({f[0], *valence, *stable});
  });
  if (normalize && !traits.empty()) {
    double mean = 0;
    for (const auto& t : traits) mean += t.valence;
    mean /= static_cast<double>(traits.size());
    double var = 0;
    for (const auto& t : traits) var += (t.valence - mean) * (t.valence - mean);
    var /= static_cast<double>(traits.size());
    const double sd = std::sqrt(var);
    if (!(sd > 0)) throw UserError(source + ": cannot z-score valences with zero variance");
    for (auto& t : traits) t.valence = (t.valence - mean) / sd;
  }
  return traits;
}

inline std::vector<TraitEntry> load_traits(const std::filesystem::path& path, bool normalize) {
  auto in = detail::open_input(path);
  return load_traits(in, normalize, path.string());
}

inline AttributeSets load_attributes(std::istream& in, const std::string& source = "<attributes>") {
  AttributeSets sets;
  std::set<std::string> p, u;
  detail::for_each_tsv_line(in, source, [&](std::size_t n, const std::vector<std::string>& f) {
    if (f.size() != 2) throw detail::line_error(source, n, "expected 2 tab-separated fields");
    if (f[1].empty() || f[1].find(' ') != std::string::npos) {
      throw detail::line_error(source, n, "attribute word must be a single non-empty token");
    }
    if (f[0] == "P") {
      if (!p.insert(f[1]).second) throw detail::line_error(source, n, "duplicate attribute");
      sets.pleasant.push_back(f[1]);
    } else if (f[0] == "U") {
      if (!u.insert(f[1]).second) throw detail::line_error(source, n, "duplicate attribute");
      sets.unpleasant.push_back(f[1]);
    } else {
      throw detail::line_error(source, n, "attribute set must be P or U, got '" + f[0] + "'");
    }
  });
  if (sets.pleasant.empty() || sets.unpleasant.empty()) {
    throw UserError(source + ": both pleasant (P) and unpleasant (U) sets must be non-empty");
  }
  for (const auto& w : p) {
    if (u.count(w)) throw UserError(source + ": '" + w + "' is both pleasant and unpleasant");
  }
  return sets;
}

inline AttributeSets load_attributes(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return load_attributes(in, path.string());
}

// Writers produce files the loaders read back into equal values.

inline void write_groups(std::ostream& out, const GroupLexicon& lex) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : " ") + x;
    return s;
  };
  for (const auto& g : lex.groups) {
    const std::string head = g.id + "\t" + std::string(to_string(g.category)) + "\t" +
                             g.comparison_id + "\t";
    out << head << "*\t" << join(g.default_labels) << "\n";
    for (const auto& r : g.ranged_labels) {
      out << head << r.first_year << "-" << r.last_year << "\t" << join(r.labels) << "\n";
    }
  }
}

inline void write_traits(std::ostream& out, const std::vector<TraitEntry>& traits) {
  for (const auto& t : traits) {
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), t.valence);
    out << t.word << "\t" << std::string_view(buf.data(), res.ptr) << "\t" << (t.stable ? 1 : 0)
        << "\n";
  }
}

inline void write_attributes(std::ostream& out, const AttributeSets& sets) {
  for (const auto& w : sets.pleasant) out << "P\t" << w << "\n";
  for (const auto& w : sets.unpleasant) out << "U\t" << w << "\n";
}

}  // namespace diachron
