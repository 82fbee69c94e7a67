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

#include "diachron/report.hpp"

#include "gtest/gtest.h"

namespace diachron {
namespace {

TEST(StarsTest, Thresholds) {
  EXPECT_EQ(significance_stars(0.0005), "***");
  EXPECT_EQ(significance_stars(0.005), "**");
  EXPECT_EQ(significance_stars(0.03), "*");
  EXPECT_EQ(significance_stars(0.05), "");
  EXPECT_EQ(significance_stars(0.2), "");
}

SocialGroup group(const std::string& id, GroupCategory c, const std::string& comparison) {
  return SocialGroup{id, c, comparison, {id}, {}};
}

TEST(ProfileTableTest, OrderingAndShortfall) {
  const auto woman = group("woman", GroupCategory::kGender, "man");
  const auto young = group("young", GroupCategory::kAge, "elderly");
  const auto man = group("man", GroupCategory::kGender, "woman");
  TraitProfile pw{"woman", {{"勤劳", 0.31, 1.5}, {"善良", 0.2, 0.5}}, 1.0, 2};
  TraitProfile py{"young", {}, std::nullopt, 10};
  TraitProfile pm{"man", {{"懒惰", 0.1, -1.25}}, -1.25, 10};
  const auto t = emit_profile_table({{woman, pw}, {young, py}, {man, pm}}, "abc123");

  std::vector<std::string> lines;
  std::istringstream in(t.tsv);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "# config_hash=abc123");
  EXPECT_EQ(lines[2].substr(0, 11), "gender\tman\t");
  EXPECT_EQ(lines[3],
            "gender\twoman\tman\t1\t2\t2\t\t勤劳 善良\t0.31 0.2\t1.5 0.5");
  EXPECT_EQ(lines[4], "age\tyoung\telderly\tNA\t10\t0\tshortfall\t\t\t");

  EXPECT_NE(t.text.find("1.00  勤劳, 善良"), std::string::npos) << t.text;
  EXPECT_NE(t.text.find("-1.25  懒惰  [shortfall: 1/10]"), std::string::npos) << t.text;
  EXPECT_NE(t.text.find("(none)  [shortfall: 0/10]"), std::string::npos) << t.text;

  const auto again = emit_profile_table({{woman, pw}, {young, py}, {man, pm}}, "abc123");
  EXPECT_EQ(again.tsv, t.tsv);
  EXPECT_EQ(again.text, t.text);
}

ValenceSeries series(const std::vector<int>& decades, const std::vector<int>& missing) {
  ValenceSeries s{"woman", "man", {}, {}, {}};
  for (int d : decades) s.points[TimeSlice::decade_of(d)] = (d - 1980) / 40.0;
  for (int d : missing) s.missing.push_back(TimeSlice::decade_of(d));
  return s;
}

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + 1)) ++n;
  return n;
}

TEST(ValenceSeriesOutputTest, OnePolylinePerUnbrokenRun) {
  const auto full = series({1950, 1960, 1970, 1980, 1990, 2000, 2010}, {});
  const auto out = emit_valence_series(std::span(&full, 1), "h");
  EXPECT_EQ(count(out.text, "<polyline"), 1u);
  EXPECT_EQ(count(out.text, "<circle"), 7u);
  EXPECT_EQ(count(out.tsv, "\n"), 2u + 7u);
  EXPECT_NE(out.tsv.find("woman\tman\t1950s\t1950\t-0.75\t0\n"), std::string::npos) << out.tsv;
  EXPECT_NE(out.text.find("config_hash=h"), std::string::npos);
  EXPECT_NE(out.text.find("viewBox=\"0 0 800 600\""), std::string::npos);

  const auto gap = series({1950, 1960, 1980, 1990}, {1970});
  const auto broken = emit_valence_series(std::span(&gap, 1), "h");
  EXPECT_EQ(count(broken.text, "<polyline"), 2u);
  EXPECT_EQ(emit_valence_series(std::span(&gap, 1), "h").text, broken.text);
}

TEST(EventReportTest, Formatting) {
  EventImpact e{"woman", 1966, 5, {1, 2, 3}, {4, 5}, -4.1234567, 2.5, 0.0005, -1.23456};
  const auto out = emit_event_report(std::span(&e, 1), "h");
  EXPECT_NE(out.text.find("d = -1.235 ***"), std::string::npos) << out.text;
  EXPECT_NE(out.text.find("t(2.5) = -4.123"), std::string::npos) << out.text;
  // Unrounded values in the TSV.
  EXPECT_NE(out.tsv.find("woman\t1966\t-4.1234567\t2.5\t5e-04\t-1.23456\t3\t2\n"),
            std::string::npos)
      << out.tsv;
}

TEST(ManifestTest, OnlyManifestCarriesTimestamp) {
  RunManifest m;
  m.config_hash = "abc";
  m.created = "2026-01-01T00:00:00Z";
  m.slices.push_back({TimeSlice::annual(1950), {100, 7}});
  m.skipped_slices.push_back({TimeSlice::annual(1951), "empty slice vocabulary"});
  m.notes.push_back("hello");
  const auto tsv = m.to_tsv();
  EXPECT_NE(tsv.find("config_hash\tabc\n"), std::string::npos);
  EXPECT_NE(tsv.find("created\t2026-01-01T00:00:00Z\n"), std::string::npos);
  EXPECT_NE(tsv.find("slice\tannual\t1950\t1950\t100\t7\n"), std::string::npos) << tsv;
  EXPECT_NE(tsv.find("skipped\tannual\t1951\t1951\tempty slice vocabulary\n"), std::string::npos);
  EXPECT_NE(tsv.find("note\thello\n"), std::string::npos);
}

}  // namespace
}  // namespace diachron
