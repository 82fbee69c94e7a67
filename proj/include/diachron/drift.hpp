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

// Year-to-year stability of a group's trait associations: per-year MAC
// vectors, their pairwise correlation matrix, and runs of years that
// correlate weakly with the rest of the series.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "diachron/association.hpp"
#include "diachron/error.hpp"
#include "diachron/format.hpp"
#include "diachron/lexicon.hpp"
#include "diachron/svg.hpp"

namespace diachron {

struct AssociationVector {
  std::string group;
  int year = 0;
  std::map<std::string, double> entries;  // trait -> MAC(G, w, t)
};

// MAC for every trait in the slice vocabulary. Absent when no group label is
// in the vocabulary.
inline std::optional<AssociationVector> association_vector(const EmbeddingSpace& space,
                                                           const SocialGroup& g,
                                                           std::span<const TraitEntry> traits) {
  const auto labels = g.labels_for(space.slice);
  const bool any_label = std::any_of(labels.begin(), labels.end(), [&](const std::string& l) {
    return space.vocab.contains(l);
  });
  if (!any_label) return std::nullopt;
  AssociationVector v{g.id, space.slice.start_year, {}};
  for (const auto& t : traits) {
    if (auto m = mac(space, labels, t.word)) v.entries[t.word] = m->value;
  }
  return v;
}

enum class CorrelationMethod { kPearson, kSpearman };

inline CorrelationMethod parse_correlation_method(std::string_view s) {
  if (s == "pearson") return CorrelationMethod::kPearson;
  if (s == "spearman") return CorrelationMethod::kSpearman;
  throw UserError("unknown correlation method '" + std::string(s) + "'");
}

struct CorrelationOptions {
  std::size_t min_overlap = 10;
  CorrelationMethod method = CorrelationMethod::kPearson;
};

// Pearson r; absent for fewer than two points or zero variance on either side.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Average ranks (1-based), ties share their mean rank.
inline std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

// Correlation over the intersection of trait keys.
inline std::optional<double> correlate(const AssociationVector& a, const AssociationVector& b,
                                       const CorrelationOptions& opt = {}) {
  std::vector<double> x, y;
  for (const auto& [word, value] : a.entries) {
    auto it = b.entries.find(word);
    if (it == b.entries.end()) continue;
    x.push_back(value);
    y.push_back(it->second);
  }
  if (x.size() < opt.min_overlap) return std::nullopt;
  if (opt.method == CorrelationMethod::kSpearman) {
    auto rx = ranks(x), ry = ranks(y);
    return pearson(rx, ry);
  }
  return pearson(x, y);
}

struct CorrelationMatrix {
  std::string group;
  std::vector<int> years;
  std::vector<std::optional<double>> values;  // row-major, years x years

  std::size_t size() const noexcept { return years.size(); }
  const std::optional<double>& at(std::size_t i, std::size_t j) const {
    return values[i * years.size() + j];
  }
  std::optional<double>& at(std::size_t i, std::size_t j) { return values[i * years.size() + j]; }
};

inline CorrelationMatrix correlation_matrix(std::span<const AssociationVector> vectors,
                                            const CorrelationOptions& opt = {}) {
  if (vectors.size() < 2) {
    throw UserError("correlation matrix needs at least 2 usable years, got " +
                    std::to_string(vectors.size()));
  }
  CorrelationMatrix m;
  m.group = vectors.front().group;
  const std::size_t n = vectors.size();
  for (const auto& v : vectors) m.years.push_back(v.year);
  m.values.assign(n * n, std::nullopt);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const auto r = correlate(vectors[i], vectors[j], opt);
      m.at(i, j) = r;
      m.at(j, i) = r;
    }
  }
  return m;
}

// Builds per-year vectors from annual spaces; years without any in-vocabulary
// group label are reported in `missing_years`.
inline CorrelationMatrix correlation_matrix(const SpaceMap& annual_spaces, const SocialGroup& g,
                                            std::span<const TraitEntry> traits,
                                            const CorrelationOptions& opt = {},
                                            std::vector<int>* missing_years = nullptr) {
  std::vector<AssociationVector> vectors;
  for (const auto& [slice, space] : annual_spaces) {
    if (auto v = association_vector(space, g, traits)) {
      vectors.push_back(std::move(*v));
    } else if (missing_years) {
      missing_years->push_back(slice.start_year);
    }
  }
  if (vectors.size() < 2) {
    throw UserError("group '" + g.id + "': correlation matrix needs at least 2 usable years, got " +
                    std::to_string(vectors.size()));
  }
  auto m = correlation_matrix(vectors, opt);
  m.group = g.id;
  return m;
}

struct DisruptionBand {
  int start_year = 0;
  int end_year = 0;
  double mean_r = 0;  // mean off-diagonal correlation over the band's rows
  friend bool operator==(const DisruptionBand&, const DisruptionBand&) = default;
};

// Mean of the defined off-diagonal entries of each row.
inline std::vector<std::optional<double>> row_means(const CorrelationMatrix& m) {
  std::vector<std::optional<double>> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    double sum = 0;
    int n = 0;
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (i == j || !m.at(i, j)) continue;
      sum += *m.at(i, j);
      ++n;
    }
    if (n > 0) out[i] = sum / n;
  }
  return out;
}

// Maximal runs of consecutive years whose mean off-diagonal correlation is
// below `threshold`, keeping runs of at least `min_run` years.
inline std::vector<DisruptionBand> disruption_bands(const CorrelationMatrix& m, double threshold,
                                                    int min_run) {
  if (!(threshold > 0 && threshold < 1)) throw UserError("band threshold must be in (0, 1)");
  const auto means = row_means(m);
  std::vector<DisruptionBand> bands;
  std::size_t i = 0;
  while (i < m.size()) {
    auto low = [&](std::size_t k) { return means[k] && *means[k] < threshold; };
    if (!low(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    double sum = *means[i];
    while (j + 1 < m.size() && low(j + 1) && m.years[j + 1] == m.years[j] + 1) {
      ++j;
      sum += *means[j];
    }
    const auto len = static_cast<int>(j - i + 1);
    if (len >= min_run) bands.push_back({m.years[i], m.years[j], sum / len});
    i = j + 1;
  }
  return bands;
}

// Header row and first column carry years; missing entries are "NA".
inline void write_matrix_tsv(std::ostream& out, const CorrelationMatrix& m) {
  out << "YEAR";
  for (int y : m.years) out << '\t' << y;
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << m.years[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      const auto& v = m.at(i, j);
      out << '\t' << (v ? format_number(*v) : "NA");
    }
    out << '\n';
  }
}

inline std::string render_heatmap_svg(const CorrelationMatrix& m, std::string_view note = {}) {
  constexpr double kLeft = 70, kTop = 50, kGrid = 480, kLegendX = 600;
  svg::Document doc(800, 600);
  if (!note.empty()) doc.comment(note);
  doc.rect(0, 0, 800, 600, "#ffffff");
  doc.text(kLeft + kGrid / 2, 30, "Year-to-year trait association correlation: " + m.group,
           "middle", 16);
  const std::size_t n = m.size();
  const double cell = n > 0 ? kGrid / static_cast<double>(n) : kGrid;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& v = m.at(i, j);
      const std::string title = std::to_string(m.years[i]) + " x " + std::to_string(m.years[j]) +
                                ": " + (v ? format_fixed(*v, 3) : "NA");
      doc.rect(kLeft + j * cell, kTop + i * cell, cell, cell,
               v ? svg::hex(svg::diverging(*v)) : std::string(svg::kMissingColor), title);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (m.years[i] % 10 != 0) continue;
    const std::string label = std::to_string(m.years[i]);
    const double c = (static_cast<double>(i) + 0.5) * cell;
    doc.text(kLeft - 6, kTop + c + 4, label, "end", 11);
    doc.text(kLeft + c, kTop + kGrid + 16, label, "end", 11, -45);
  }
  // Legend: -1 .. 1 in 20 steps, plus the missing swatch.
  constexpr int kSteps = 20;
  const double step_h = 300.0 / kSteps;
  for (int s = 0; s < kSteps; ++s) {
    const double v = 1.0 - 2.0 * (s + 0.5) / kSteps;
    doc.rect(kLegendX, kTop + s * step_h, 24, step_h, svg::hex(svg::diverging(v)));
  }
  doc.text(kLegendX + 30, kTop + 10, "1.0");
  doc.text(kLegendX + 30, kTop + 155, "0.0");
  doc.text(kLegendX + 30, kTop + 300, "-1.0");
  doc.rect(kLegendX, kTop + 330, 24, 15, svg::kMissingColor);
  doc.text(kLegendX + 30, kTop + 342, "NA");
  return doc.finish();
}

}  // namespace diachron
