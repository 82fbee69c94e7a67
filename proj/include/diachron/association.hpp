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

// Group-trait association scores:
//
//   MAC(G, w, t)        mean cosine between G's labels and trait w in slice t
//   DiffMAC(G, C, w, t) MAC(G, w, t) - MAC(C, w, t)
//   AggDiffMAC(G, C, w) mean DiffMAC over the qualifying slices T_w
//
// A slice qualifies for T_w when DiffMAC exists there and MAC(G, w, t) is at
// least the floor (0.2 by default). Entries need at least `min_periods`
// qualifying slices (3 by default).

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "diachron/error.hpp"
#include "diachron/format.hpp"
#include "diachron/lexicon.hpp"
#include "diachron/sgns.hpp"

namespace diachron {

using SpaceMap = std::map<TimeSlice, EmbeddingSpace>;

// Cosine similarity accumulated in double. A zero vector has cosine 0 with
// everything; results are clamped to [-1, 1].
inline double cosine(std::span<const float> a, std::span<const float> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    ab += x * y;
    aa += x * x;
    bb += y * y;
  }
  if (aa == 0 || bb == 0) return 0.0;
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

struct MacValue {
  double value = 0;
  int label_coverage = 0;  // labels found in the vocabulary
};

// Mean over in-vocabulary labels of cos(label, trait). Absent when the trait
// or every label is out of vocabulary.
inline std::optional<MacValue> mac(const EmbeddingSpace& space,
                                   std::span<const std::string> labels,
                                   std::string_view trait) {
  auto w = space.vector(trait);
  if (!w) return std::nullopt;
  double sum = 0;
  int covered = 0;
  for (const auto& label : labels) {
    if (auto l = space.vector(label)) {
      sum += cosine(*l, *w);
      ++covered;
    }
  }
  if (covered == 0) return std::nullopt;
  return MacValue{sum / covered, covered};
}

inline void require_comparison(const SocialGroup& g, const SocialGroup& c) {
  if (g.id == c.id) return;  // self-comparison
  if (g.comparison_id != c.id || c.comparison_id != g.id) {
    throw UserError("groups '" + g.id + "' and '" + c.id + "' are not mutual comparisons");
  }
}

inline std::optional<double> diff_mac(const EmbeddingSpace& space, const SocialGroup& g,
                                      const SocialGroup& c, std::string_view trait) {
  require_comparison(g, c);
  const auto lg = g.labels_for(space.slice);
  const auto lc = c.labels_for(space.slice);
  auto mg = mac(space, lg, trait);
  auto mc = mac(space, lc, trait);
  if (!mg || !mc) return std::nullopt;
  return mg->value - mc->value;
}

struct SliceAssociation {
  TimeSlice slice;
  std::optional<MacValue> group;
  std::optional<MacValue> comparison;

  std::optional<double> diff() const {
    if (!group || !comparison) return std::nullopt;
    return group->value - comparison->value;
  }
};

struct AggregationOptions {
  int min_periods = 3;
  double mac_floor = 0.2;
  // Also require MAC(C, w, t) >= floor.
  bool symmetric_floor = false;
};

inline bool passes_floor(const SliceAssociation& s, const AggregationOptions& opt) {
  if (!s.group || !s.comparison) return false;
  if (s.group->value < opt.mac_floor) return false;
  if (opt.symmetric_floor && s.comparison->value < opt.mac_floor) return false;
  return true;
}

struct AggDiffMac {
  double value = 0;
  int periods = 0;
};

inline std::optional<AggDiffMac> agg_diff_mac(std::span<const SliceAssociation> slices,
                                              const AggregationOptions& opt = {}) {
  if (opt.min_periods < 1) throw UserError("min_periods must be >= 1");
  double sum = 0;
  int periods = 0;
  for (const auto& s : slices) {
    if (!passes_floor(s, opt)) continue;
    sum += *s.diff();
    ++periods;
  }
  if (periods < opt.min_periods) return std::nullopt;
  return AggDiffMac{sum / periods, periods};
}

// ---------------------------------------------------------------------------
// Tables.

struct AssociationRow {
  std::string group;
  std::string comparison;
  std::string trait;
  SliceAssociation scores;
};

struct AssociationTable {
  std::string group;
  std::string comparison;
  std::vector<AssociationRow> rows;            // trait-major, slices ascending
  std::map<std::string, AggDiffMac> aggregate;  // retained traits only
};

inline std::vector<SliceAssociation> slice_associations(const SpaceMap& spaces,
                                                        const SocialGroup& g,
                                                        const SocialGroup& c,
                                                        std::string_view trait) {
  require_comparison(g, c);
  std::vector<SliceAssociation> out;
  out.reserve(spaces.size());
  for (const auto& [slice, space] : spaces) {
    const auto lg = g.labels_for(slice);
    const auto lc = c.labels_for(slice);
    out.push_back({slice, mac(space, lg, trait), mac(space, lc, trait)});
  }
  return out;
}

inline AssociationTable build_association_table(const SpaceMap& spaces, const SocialGroup& g,
                                                const SocialGroup& c,
                                                std::span<const TraitEntry> traits,
                                                const AggregationOptions& opt = {}) {
  AssociationTable table{g.id, c.id, {}, {}};
  for (const auto& t : traits) {
    const auto per_slice = slice_associations(spaces, g, c, t.word);
    for (const auto& s : per_slice) {
      if (s.group || s.comparison) table.rows.push_back({g.id, c.id, t.word, s});
    }
    if (auto agg = agg_diff_mac(per_slice, opt)) table.aggregate[t.word] = *agg;
  }
  return table;
}

// GROUP COMPARISON TRAIT SLICE MAC_G MAC_C DIFF, "NA" for absent values.
inline void write_association_tsv(std::ostream& out, std::span<const AssociationTable> tables,
                                  bool header = true) {
  if (header) out << "GROUP\tCOMPARISON\tTRAIT\tSLICE\tMAC_G\tMAC_C\tDIFF\n";
  auto num = [](const std::optional<MacValue>& m) {
    return m ? format_number(m->value) : std::string("NA");
  };
  for (const auto& table : tables) {
    for (const auto& r : table.rows) {
      const auto d = r.scores.diff();
      out << r.group << '\t' << r.comparison << '\t' << r.trait << '\t'
          << r.scores.slice.label() << '\t' << num(r.scores.group) << '\t'
          << num(r.scores.comparison) << '\t' << (d ? format_number(*d) : "NA") << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Profiles.

struct ProfileEntry {
  std::string word;
  double score = 0;
  double valence = 0;
};

struct TraitProfile {
  std::string group;
  std::vector<ProfileEntry> traits;  // score descending, ties by word
  std::optional<double> mean_valence;
  std::size_t requested = 0;

  bool shortfall() const noexcept { return traits.size() < requested; }
};

inline std::map<std::string, const TraitEntry*> index_traits(std::span<const TraitEntry> traits) {
  std::map<std::string, const TraitEntry*> idx;
  for (const auto& t : traits) idx[t.word] = &t;
  return idx;
}

// Picks the k highest-scoring traits that appear in the lexicon.
inline TraitProfile top_k_profile(const std::string& group,
                                  const std::map<std::string, double>& scores,
                                  std::span<const TraitEntry> traits, std::size_t k) {
  if (k < 1) throw UserError("k must be >= 1");
  const auto idx = index_traits(traits);
  std::vector<ProfileEntry> ranked;
  for (const auto& [word, score] : scores) {
    auto it = idx.find(word);
    if (it == idx.end()) continue;
    ranked.push_back({word, score, it->second->valence});
  }
  std::sort(ranked.begin(), ranked.end(), [](const ProfileEntry& a, const ProfileEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.word < b.word;
  });
  if (ranked.size() > k) ranked.resize(k);
  TraitProfile p{group, std::move(ranked), std::nullopt, k};
  if (!p.traits.empty()) {
    double sum = 0;
    for (const auto& e : p.traits) sum += e.valence;
    p.mean_valence = sum / static_cast<double>(p.traits.size());
  }
  return p;
}

inline TraitProfile top_traits(const std::string& group,
                               const std::map<std::string, AggDiffMac>& aggregate,
                               std::span<const TraitEntry> traits, std::size_t k = 10) {
  std::map<std::string, double> scores;
  for (const auto& [word, agg] : aggregate) scores[word] = agg.value;
  return top_k_profile(group, scores, traits, k);
}

struct ValenceSeries {
  std::string group;
  std::string comparison;
  std::map<TimeSlice, double> points;
  std::map<TimeSlice, TraitProfile> profiles;  // per-slice top-k behind each point
  std::vector<TimeSlice> missing;
};

// Per slice: rank traits by DiffMAC (floor-filtered), keep the top k and
// average their valence.
inline ValenceSeries slice_valence_series(const SpaceMap& spaces, const SocialGroup& g,
                                          const SocialGroup& c,
                                          std::span<const TraitEntry> traits, std::size_t k = 10,
                                          const AggregationOptions& opt = {}) {
  require_comparison(g, c);
  ValenceSeries series{g.id, c.id, {}, {}, {}};
  for (const auto& [slice, space] : spaces) {
    const auto lg = g.labels_for(slice);
    const auto lc = c.labels_for(slice);
    std::map<std::string, double> scores;
    for (const auto& t : traits) {
      SliceAssociation s{slice, mac(space, lg, t.word), mac(space, lc, t.word)};
      if (passes_floor(s, opt)) scores[t.word] = *s.diff();
    }
    auto profile = top_k_profile(g.id, scores, traits, k);
    if (!profile.mean_valence) {
      series.missing.push_back(slice);
      continue;
    }
    series.points[slice] = *profile.mean_valence;
    series.profiles.emplace(slice, std::move(profile));
  }
  return series;
}

// slice_valence_series over decade spaces only.
inline ValenceSeries decade_valence_series(const SpaceMap& decade_spaces, const SocialGroup& g,
                                           const SocialGroup& c,
                                           std::span<const TraitEntry> traits, std::size_t k = 10,
                                           const AggregationOptions& opt = {}) {
  if (decade_spaces.empty()) throw UserError("decade valence series requires decade spaces");
  for (const auto& [slice, space] : decade_spaces) {
    if (slice.resolution != Resolution::kDecade) {
      throw UserError("decade valence series got non-decade slice " + slice.label());
    }
  }
  return slice_valence_series(decade_spaces, g, c, traits, k, opt);
}

}  // namespace diachron
