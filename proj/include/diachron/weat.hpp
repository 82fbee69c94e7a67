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

// Temporal WEAT: WEAT(G, t) = MAC(G, P, t) - MAC(G, U, t), where MAC(G, S, t)
// averages MAC(G, s, t) over the in-vocabulary words s of S. Event impact
// compares per-(label, year) scores in the windows before and after an event.

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "diachron/association.hpp"
#include "diachron/error.hpp"
#include "diachron/format.hpp"
#include "diachron/lexicon.hpp"
#include "diachron/stats.hpp"

namespace diachron {

struct HistoricalEvent {
  int year = 0;
  std::string name;
};

inline std::vector<HistoricalEvent> builtin_events() {
  return {{1966, "Cultural Revolution onset"}, {1978, "Reform and Opening Up"}};
}

// MAC(G, S, t); absent when no word of S (or no label) is in the vocabulary.
inline std::optional<double> set_association(const EmbeddingSpace& space,
                                             std::span<const std::string> labels,
                                             std::span<const std::string> words) {
  double sum = 0;
  int n = 0;
  for (const auto& w : words) {
    if (auto m = mac(space, labels, w)) {
      sum += m->value;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

inline std::optional<double> weat_score(const EmbeddingSpace& space,
                                        std::span<const std::string> labels,
                                        const AttributeSets& attrs) {
  auto p = set_association(space, labels, attrs.pleasant);
  auto u = set_association(space, labels, attrs.unpleasant);
  if (!p || !u) return std::nullopt;
  return *p - *u;
}

inline std::optional<double> weat_score(const EmbeddingSpace& space, const SocialGroup& g,
                                        const AttributeSets& attrs) {
  const auto labels = g.labels_for(space.slice);
  return weat_score(space, labels, attrs);
}

struct WeatPoint {
  int year = 0;
  double score = 0;
  std::vector<std::string> labels;  // in-vocabulary labels, parallel to label_scores
  std::vector<double> label_scores;
};

struct WeatSeries {
  std::string group;
  std::vector<WeatPoint> points;  // years strictly increasing
  std::vector<int> missing_years;

  const WeatPoint* at(int year) const {
    for (const auto& p : points) {
      if (p.year == year) return &p;
    }
    return nullptr;
  }
};

inline WeatSeries weat_series(const SpaceMap& annual_spaces, const SocialGroup& g,
                              const AttributeSets& attrs) {
  WeatSeries series{g.id, {}, {}};
  for (const auto& [slice, space] : annual_spaces) {
    if (slice.resolution != Resolution::kAnnual) {
      throw UserError("WEAT series requires annual slices, got " + slice.label());
    }
    const auto labels = g.labels_for(slice);
    auto score = weat_score(space, labels, attrs);
    if (!score) {
      series.missing_years.push_back(slice.start_year);
      continue;
    }
    WeatPoint point{slice.start_year, *score, {}, {}};
    for (const auto& l : labels) {
      const std::string one[] = {l};
      if (auto s = weat_score(space, one, attrs)) {
        point.labels.push_back(l);
        point.label_scores.push_back(*s);
      }
    }
    series.points.push_back(std::move(point));
  }
  return series;
}

enum class SampleUnit {
  kLabelYear,  // one sample per (label, year) score
  kYearMean,   // one sample per year
};

// Which window the event year itself falls in.
enum class EventYearWindow { kPost, kPre };

struct EventImpact {
  std::string group;
  int event_year = 0;
  int window_years = 5;
  std::vector<double> pre;
  std::vector<double> post;
  double t = 0;
  double df = 0;
  double p = 1;
  double d = 0;
};

// Pre window: [event - window, event - 1]; post window: [event, event + window - 1].
// With EventYearWindow::kPre both windows shift one year later.
inline EventImpact event_impact(const WeatSeries& series, int event_year, int window_years = 5,
                                SampleUnit unit = SampleUnit::kLabelYear,
                                EventYearWindow placement = EventYearWindow::kPost) {
  if (window_years < 1) throw UserError("event window must be >= 1 year");
  EventImpact impact{series.group, event_year, window_years, {}, {}, 0, 0, 1, 0};
  const int split = placement == EventYearWindow::kPost ? event_year : event_year + 1;
  for (const auto& point : series.points) {
    std::vector<double>* dst = nullptr;
    if (point.year >= split - window_years && point.year < split) {
      dst = &impact.pre;
    } else if (point.year >= split && point.year < split + window_years) {
      dst = &impact.post;
    }
    if (!dst) continue;
    if (unit == SampleUnit::kLabelYear) {
      dst->insert(dst->end(), point.label_scores.begin(), point.label_scores.end());
    } else {
      dst->push_back(point.score);
    }
  }
  if (impact.pre.size() < 2 || impact.post.size() < 2) {
    throw UserError("insufficient samples for event " + std::to_string(event_year) +
                    " in group " + series.group + ": " + std::to_string(impact.pre.size()) +
                    " before, " + std::to_string(impact.post.size()) + " after");
  }
  const auto welch = stats::welch_t_test(impact.pre, impact.post);
  impact.t = welch.t;
  impact.df = welch.df;
  impact.p = welch.p;
  impact.d = stats::cohens_d(impact.pre, impact.post);
  return impact;
}

// GROUP YEAR WEAT
inline void write_weat_series_tsv(std::ostream& out, std::span<const WeatSeries> series,
                                  bool header = true) {
  if (header) out << "GROUP\tYEAR\tWEAT\n";
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      out << s.group << '\t' << p.year << '\t' << format_number(p.score) << '\n';
    }
  }
}

// GROUP EVENTYEAR T DF P D NPRE NPOST
inline void write_event_tsv(std::ostream& out, std::span<const EventImpact> impacts,
                            bool header = true) {
  if (header) out << "GROUP\tEVENTYEAR\tT\tDF\tP\tD\tNPRE\tNPOST\n";
  for (const auto& e : impacts) {
    out << e.group << '\t' << e.event_year << '\t' << format_number(e.t) << '\t'
        << format_number(e.df) << '\t' << format_number(e.p) << '\t' << format_number(e.d)
        << '\t' << e.pre.size() << '\t' << e.post.size() << '\n';
  }
}

}  // namespace diachron
