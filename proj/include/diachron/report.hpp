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

// Report assembly: profile tables, valence time series, event summaries and
// the run manifest. Data files carry the config hash on their first line and
// never a timestamp; only the manifest records when a run happened.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "diachron/association.hpp"
#include "diachron/corpus.hpp"
#include "diachron/format.hpp"
#include "diachron/lexicon.hpp"
#include "diachron/svg.hpp"
#include "diachron/weat.hpp"

namespace diachron {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline std::string config_hash_line(std::string_view config_hash) {
  return "# config_hash=" + std::string(config_hash) + "\n";
}

struct RunManifest {
  std::string config_hash;
  std::string created;  // ISO-8601 UTC; the only timestamp in a run directory
  std::vector<std::pair<std::string, std::string>> corpus_digests;   // path, fnv hex
  std::vector<std::pair<std::string, std::string>> lexicon_digests;  // kind:path, fnv hex
  std::vector<std::pair<TimeSlice, std::pair<std::uint64_t, std::size_t>>> slices;
  std::vector<std::pair<TimeSlice, std::string>> skipped_slices;
  std::vector<std::string> notes;
  std::string tool_version = std::string(kToolVersion);

  std::string to_tsv() const {
    std::ostringstream out;
    out << "tool_version\t" << tool_version << '\n';
    out << "config_hash\t" << config_hash << '\n';
    if (!created.empty()) out << "created\t" << created << '\n';
    for (const auto& [path, digest] : corpus_digests) {
      out << "corpus\t" << path << '\t' << digest << '\n';
    }
    for (const auto& [name, digest] : lexicon_digests) {
      out << "lexicon\t" << name << '\t' << digest << '\n';
    }
    for (const auto& [slice, inv] : slices) {
      out << "slice\t" << slice_manifest_line(slice, inv.first, inv.second) << '\n';
    }
    for (const auto& [slice, reason] : skipped_slices) {
      out << "skipped\t" << to_string(slice.resolution) << '\t' << slice.start_year << '\t'
          << slice.end_year << '\t' << reason << '\n';
    }
    for (const auto& n : notes) out << "note\t" << n << '\n';
    return out.str();
  }
};

// ---------------------------------------------------------------------------
// Profiles.

struct GroupProfile {
  SocialGroup group;
  TraitProfile profile;
};

inline void sort_profiles(std::vector<GroupProfile>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const GroupProfile& a, const GroupProfile& b) {
    if (a.group.category != b.group.category) return a.group.category < b.group.category;
    return a.group.id < b.group.id;
  });
}

struct EmittedTable {
  std::string tsv;
  std::string text;
};

inline EmittedTable emit_profile_table(std::vector<GroupProfile> rows,
                                       std::string_view config_hash) {
  sort_profiles(rows);
  std::ostringstream tsv, text;
  tsv << config_hash_line(config_hash);
  tsv << "CATEGORY\tGROUP\tCOMPARISON\tMEAN_VALENCE\tK\tN\tSHORTFALL\tTRAITS\tSCORES\tVALENCES\n";
  text << "Category     Group            Valence  Top traits\n";
  for (const auto& row : rows) {
    const auto& g = row.group;
    const auto& p = row.profile;
    std::string traits, scores, valences, listing;
    for (const auto& e : p.traits) {
      const std::string sep = traits.empty() ? "" : " ";
      traits += sep + e.word;
      scores += sep + format_number(e.score);
      valences += sep + format_number(e.valence);
      listing += (listing.empty() ? "" : ", ") + e.word;
    }
    const std::string mean = p.mean_valence ? format_number(*p.mean_valence) : "NA";
    tsv << to_string(g.category) << '\t' << g.id << '\t' << g.comparison_id << '\t' << mean
        << '\t' << p.requested << '\t' << p.traits.size() << '\t'
        << (p.shortfall() ? "shortfall" : "") << '\t' << traits << '\t' << scores << '\t'
        << valences << '\n';

    std::string cat(to_string(g.category)), id = g.id;
    cat.resize(std::max<std::size_t>(cat.size(), 12), ' ');
    id.resize(std::max<std::size_t>(id.size(), 16), ' ');
    std::string val = p.mean_valence ? format_fixed(*p.mean_valence, 2) : "NA";
    val.insert(0, val.size() < 7 ? 7 - val.size() : 0, ' ');
    text << cat << ' ' << id << ' ' << val << "  " << (listing.empty() ? "(none)" : listing);
    if (p.shortfall()) {
      text << "  [shortfall: " << p.traits.size() << "/" << p.requested << "]";
    }
    text << '\n';
  }
  return {tsv.str(), text.str()};
}

// ---------------------------------------------------------------------------
// Valence series.

inline constexpr std::string_view kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                                "#66a61e", "#e6ab02", "#a6761d", "#666666",
                                                "#1f78b4", "#b2182b"};

inline EmittedTable emit_valence_series(std::span<const ValenceSeries> series,
                                        std::string_view config_hash) {
  std::ostringstream tsv;
  tsv << config_hash_line(config_hash);
  tsv << "GROUP\tCOMPARISON\tSLICE\tSTART\tMEAN_VALENCE\tN_TRAITS\n";
  std::set<int> starts;
  double extent = 0.5;
  for (const auto& s : series) {
    for (const auto& [slice, v] : s.points) {
      const auto n = s.profiles.count(slice) ? s.profiles.at(slice).traits.size() : 0;
      tsv << s.group << '\t' << s.comparison << '\t' << slice.label() << '\t' << slice.start_year
          << '\t' << format_number(v) << '\t' << n << '\n';
      starts.insert(slice.start_year);
      extent = std::max(extent, std::abs(v));
    }
    for (const auto& slice : s.missing) starts.insert(slice.start_year);
  }
  extent = std::ceil(extent * 2) / 2;

  constexpr double kLeft = 80, kRight = 640, kTop = 60, kBottom = 520;
  svg::Document doc(800, 600);
  doc.comment("config_hash=" + std::string(config_hash));
  doc.rect(0, 0, 800, 600, "#ffffff");
  doc.text(400, 30, "Mean valence of top traits by period", "middle", 16);
  const std::vector<int> xs(starts.begin(), starts.end());
  auto x_of = [&](int start) {
    const auto it = std::lower_bound(xs.begin(), xs.end(), start);
    const auto i = static_cast<double>(it - xs.begin());
    return xs.size() < 2 ? (kLeft + kRight) / 2
                         : kLeft + i * (kRight - kLeft) / static_cast<double>(xs.size() - 1);
  };
  auto y_of = [&](double v) { return kTop + (extent - v) / (2 * extent) * (kBottom - kTop); };
  doc.line(kLeft, kBottom, kRight, kBottom, "#000000");
  doc.line(kLeft, kTop, kLeft, kBottom, "#000000");
  doc.line(kLeft, y_of(0), kRight, y_of(0), "#999999", 0.5);
  for (double v : {-extent, 0.0, extent}) {
    doc.text(kLeft - 8, y_of(v) + 4, format_fixed(v, 1), "end", 11);
  }
  for (int s : xs) doc.text(x_of(s), kBottom + 18, std::to_string(s) + "s", "middle", 11);

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string color(kPalette[i % std::size(kPalette)]);
    // Break the line wherever a period is missing.
    std::string points;
    auto flush = [&] {
      if (!points.empty()) doc.polyline(points, color);
      points.clear();
    };
    for (int start : xs) {
      auto it = std::find_if(s.points.begin(), s.points.end(),
                             [&](const auto& kv) { return kv.first.start_year == start; });
      if (it == s.points.end()) {
        flush();
        continue;
      }
      points += (points.empty() ? "" : " ") + svg::Document::num(x_of(start)) + "," +
                svg::Document::num(y_of(it->second));
    }
    flush();
    for (const auto& [slice, v] : s.points) doc.circle(x_of(slice.start_year), y_of(v), 3, color);
    const double ly = kTop + 20.0 * static_cast<double>(i);
    doc.line(kRight + 20, ly, kRight + 40, ly, color, 2);
    doc.text(kRight + 46, ly + 4, s.group + " vs " + s.comparison, "start", 11);
  }
  return {tsv.str(), doc.finish()};
}

// ---------------------------------------------------------------------------
// Event report.

inline std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

inline EmittedTable emit_event_report(std::span<const EventImpact> impacts,
                                      std::string_view config_hash) {
  std::ostringstream tsv, text;
  tsv << config_hash_line(config_hash);
  write_event_tsv(tsv, impacts);
  for (const auto& e : impacts) {
    text << e.group << "  event " << e.event_year << "  t(" << format_fixed(e.df, 1)
         << ") = " << format_fixed(e.t, 3) << ", p = " << format_fixed(e.p, 4)
         << ", d = " << format_fixed(e.d, 3) << ' ' << significance_stars(e.p) << "  (n = "
         << e.pre.size() << " / " << e.post.size() << ")\n";
  }
  return {tsv.str(), text.str()};
}

}  // namespace diachron
