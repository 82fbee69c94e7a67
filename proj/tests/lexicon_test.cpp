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

#include "diachron/lexicon.hpp"

#include <sstream>

#include "gtest/gtest.h"

namespace diachron {
namespace {

GroupLexicon groups_from(const std::string& text) {
  std::istringstream in(text);
  return load_groups(in);
}

std::vector<TraitEntry> traits_from(const std::string& text, bool normalize) {
  std::istringstream in(text);
  return load_traits(in, normalize);
}

AttributeSets attributes_from(const std::string& text) {
  std::istringstream in(text);
  return load_attributes(in);
}

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const UserError& e) {
    return e.what();
  }
  return "";
}

const std::string kGroups =
    "# id\tcategory\tcomparison\tslices\tlabels\n"
    "woman\tgender\tman\t*\t女性 妇女\n"
    "woman\tgender\tman\t1950s\t妇女同志\n"
    "man\tgender\twoman\t*\t男性 男人\n"
    "\n"
    "young\tage\telderly\t*\t青年\n"
    "elderly\tage\tyoung\t1966-1976\t老人家\n"
    "elderly\tage\tyoung\t*\t老人\n";

TEST(LoadGroupsTest, MutualComparisons) {
  const auto lex = groups_from(kGroups);
  ASSERT_EQ(lex.groups.size(), 4u);
  EXPECT_EQ(lex.comparison_of(lex.at("woman")).id, "man");
  EXPECT_EQ(lex.comparison_of(lex.at("man")).id, "woman");
  EXPECT_EQ(lex.at("elderly").category, GroupCategory::kAge);
  EXPECT_EQ(lex.find("nobody"), nullptr);
  EXPECT_THROW(lex.at("nobody"), UserError);
}

TEST(LoadGroupsTest, EraLabelsAddToDefaults) {
  const auto lex = groups_from(kGroups);
  const auto& woman = lex.at("woman");
  EXPECT_EQ(woman.labels_for(TimeSlice::decade_of(1950)),
            (std::vector<std::string>{"女性", "妇女", "妇女同志"}));
  EXPECT_EQ(woman.labels_for(TimeSlice::decade_of(1980)),
            (std::vector<std::string>{"女性", "妇女"}));
  EXPECT_EQ(woman.labels_for(TimeSlice::annual(1955)).size(), 3u);
  // A decade slice overlapping only part of a range still picks it up.
  const auto& elderly = lex.at("elderly");
  EXPECT_EQ(elderly.labels_for(TimeSlice::decade_of(1970)).size(), 2u);
  EXPECT_EQ(elderly.labels_for(TimeSlice::annual(1977)).size(), 1u);
}

TEST(LoadGroupsTest, LabelsAreNeverEmpty) {
  const auto lex = groups_from(kGroups);
  for (const auto& g : lex.groups) {
    for (int year = 1950; year <= 2019; ++year) {
      EXPECT_FALSE(g.labels_for(TimeSlice::annual(year)).empty());
      EXPECT_FALSE(g.labels_for(TimeSlice::decade_of(year)).empty());
    }
  }
}

TEST(LoadGroupsTest, DanglingComparisonIsAnError) {
  const auto msg = error_of([] {
    groups_from("woman\tgender\tmen\t*\t女性\nman\tgender\twoman\t*\t男性\n");
  });
  EXPECT_NE(msg.find("men"), std::string::npos) << msg;
}

TEST(LoadGroupsTest, NonMutualComparisonIsAnError) {
  EXPECT_THROW(groups_from("a\tgender\tb\t*\tx\nb\tgender\tc\t*\ty\nc\tgender\tb\t*\tz\n"),
               UserError);
}

TEST(LoadGroupsTest, DuplicateGroupIsAnError) {
  EXPECT_THROW(groups_from("a\tgender\tb\t*\tx\na\tgender\tb\t*\tw\nb\tgender\ta\t*\ty\n"),
               UserError);
  EXPECT_THROW(groups_from("a\tgender\tb\t*\tx\na\tage\tb\t1950s\tw\nb\tgender\ta\t*\ty\n"),
               UserError);
}

TEST(LoadGroupsTest, MalformedRows) {
  EXPECT_THROW(groups_from("a\tgender\tb\t*\n"), UserError);
  EXPECT_THROW(groups_from("a\tcolour\tb\t*\tx\n"), UserError);
  EXPECT_THROW(groups_from("a\tgender\tb\t1961s\tx\n"), UserError);
  EXPECT_THROW(groups_from("a\tgender\tb\t1970-1960\tx\n"), UserError);
  EXPECT_THROW(groups_from("a\tgender\tb\t*\t \n"), UserError);
  // Ranged labels without a default set.
  EXPECT_THROW(groups_from("a\tgender\tb\t1950s\tx\nb\tgender\ta\t*\ty\n"), UserError);
  const auto msg = error_of([] { groups_from("a\tgender\tb\t*\tx\nb\tgender\n"); });
  EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
}

TEST(LoadTraitsTest, ZScoresWithPopulationSd) {
  const auto t = traits_from("低\t2\t1\n中\t4\t1\n高\t6\t0\n", true);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_NEAR(t[0].valence, -1.224744871391589, 1e-12);
  EXPECT_NEAR(t[1].valence, 0.0, 1e-12);
  EXPECT_NEAR(t[2].valence, 1.224744871391589, 1e-12);
  EXPECT_FALSE(t[2].stable);
}

TEST(LoadTraitsTest, PassThroughWithoutNormalization) {
  const auto t = traits_from("勤劳\t7.25\t1\n", false);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].valence, 7.25);
}

TEST(LoadTraitsTest, Errors) {
  const auto msg = error_of([] { traits_from("a\t1\t1\nb\thigh\t1\n", false); });
  EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("non-numeric"), std::string::npos) << msg;
  EXPECT_THROW(traits_from("a\t1\t1\na\t2\t1\n", false), UserError);
  EXPECT_THROW(traits_from("a\tnan\t1\n", false), UserError);
  EXPECT_THROW(traits_from("a\t1\tmaybe\n", false), UserError);
  EXPECT_THROW(traits_from("a\t3\t1\nb\t3\t1\n", true), UserError);
}

TEST(LoadAttributesTest, Loads) {
  const auto a = attributes_from("P\t幸福\nU\t痛苦\nP\t美好\n");
  EXPECT_EQ(a.pleasant, (std::vector<std::string>{"幸福", "美好"}));
  EXPECT_EQ(a.unpleasant, (std::vector<std::string>{"痛苦"}));
}

TEST(LoadAttributesTest, OverlapIsAnError) {
  const auto msg = error_of([] { attributes_from("P\t好\nU\t好\n"); });
  EXPECT_NE(msg.find("好"), std::string::npos) << msg;
  EXPECT_THROW(attributes_from("P\t好\n"), UserError);
  EXPECT_THROW(attributes_from("X\t好\nU\t坏\n"), UserError);
}

TEST(LoadLexiconTest, InvalidUtf8) {
  EXPECT_THROW(attributes_from("P\t\xff\nU\tx\n"), EncodingError);
}

TEST(LexiconRoundTripTest, WriteThenLoad) {
  const auto lex = groups_from(kGroups);
  std::ostringstream g;
  write_groups(g, lex);
  EXPECT_EQ(groups_from(g.str()).groups, lex.groups);

  const auto traits = traits_from("a\t2\t1\nb\t4.125\t0\nc\t6\t1\n", true);
  std::ostringstream t;
  write_traits(t, traits);
  EXPECT_EQ(traits_from(t.str(), false), traits);

  const auto attrs = attributes_from("P\t幸福\nU\t痛苦\nP\t美好\n");
  std::ostringstream a;
  write_attributes(a, attrs);
  EXPECT_EQ(attributes_from(a.str()), attrs);
}

TEST(ShippedLexiconTest, LoadsCleanly) {
  const std::filesystem::path dir = DIACHRON_DATA_DIR;
  const auto lex = load_groups(dir / "groups.tsv");
  EXPECT_GE(lex.groups.size(), 2u);
  EXPECT_FALSE(load_traits(dir / "traits.tsv", true).empty());
  EXPECT_FALSE(load_attributes(dir / "attributes.tsv").pleasant.empty());
  EXPECT_THROW(load_groups(dir / "missing.tsv"), UserError);
}

}  // namespace
}  // namespace diachron
