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

#include "diachron/association.hpp"

#include <random>

#include "gtest/gtest.h"
#include "oracle.hpp"

namespace diachron {
namespace {

using Vectors = std::vector<std::pair<std::string, std::vector<float>>>;

SocialGroup group(const std::string& id, const std::string& comparison,
                  std::vector<std::string> labels) {
  return SocialGroup{id, GroupCategory::kGender, comparison, std::move(labels), {}};
}

TEST(CosineTest, Basics) {
  const std::vector<float> a = {1, 2, 3}, z = {0, 0, 0}, neg = {-1, -2, -3};
  EXPECT_DOUBLE_EQ(cosine(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine(a, neg), -1.0);
  EXPECT_EQ(cosine(a, z), 0.0);
  EXPECT_EQ(cosine(z, z), 0.0);
}

TEST(MacTest, IdenticalVectorGivesOne) {
  const auto s = make_embedding_space(TimeSlice::annual(1960), {{"l", {0.3f, -2}}, {"w", {0.3f, -2}}});
  const std::vector<std::string> labels = {"l"};
  ASSERT_TRUE(mac(s, labels, "w"));
  EXPECT_NEAR(mac(s, labels, "w")->value, 1.0, 1e-15);
}

TEST(MacTest, MeanOverLabels) {
  // cos(l1, w) = 0.6, cos(l2, w) = 0.2 with w = (1, 0).
  const double s2 = std::sqrt(1 - 0.04);
  const auto s = make_embedding_space(
      TimeSlice::annual(1960),
      {{"w", {1, 0}}, {"l1", {0.6f, 0.8f}}, {"l2", {0.2f, static_cast<float>(s2)}}});
  const std::vector<std::string> labels = {"l1", "l2", "absent"};
  const auto m = mac(s, labels, "w");
  ASSERT_TRUE(m);
  EXPECT_NEAR(m->value, 0.4, 1e-7);
  EXPECT_EQ(m->label_coverage, 2);
}

TEST(MacTest, AbsentTraitOrLabels) {
  const auto s = make_embedding_space(TimeSlice::annual(1960), {{"l", {1, 0}}, {"w", {0, 1}}});
  const std::vector<std::string> labels = {"l"}, none = {"x", "y"};
  EXPECT_FALSE(mac(s, labels, "absent"));
  EXPECT_FALSE(mac(s, none, "w"));
}

TEST(DiffMacTest, SubtractsComparison) {
  const auto s = make_embedding_space(
      TimeSlice::annual(1960), {{"w", {1, 0}}, {"g", {0.5f, std::sqrt(0.75f)}}, {"c", {0, 1}}});
  const auto g = group("g", "c", {"g"});
  const auto c = group("c", "g", {"c"});
  EXPECT_NEAR(*diff_mac(s, g, c, "w"), 0.5, 1e-7);
  EXPECT_EQ(*diff_mac(s, g, g, "w"), 0.0);
  const auto lost = group("c", "g", {"missing"});
  EXPECT_FALSE(diff_mac(s, g, lost, "w"));
  const auto stranger = group("x", "y", {"c"});
  EXPECT_THROW(diff_mac(s, g, stranger, "w"), UserError);
}

SliceAssociation slice_with(int decade, double g, double c) {
  return {TimeSlice::decade_of(decade), MacValue{g, 1}, MacValue{c, 1}};
}

TEST(AggDiffMacTest, MeanOverQualifyingPeriods) {
  const std::vector<SliceAssociation> s = {slice_with(1950, 0.5, 0.4), slice_with(1960, 0.5, 0.3),
                                           slice_with(1970, 0.6, 0.3)};
  const auto agg = agg_diff_mac(s);
  ASSERT_TRUE(agg);
  EXPECT_NEAR(agg->value, 0.2, 1e-12);
  EXPECT_EQ(agg->periods, 3);
}

TEST(AggDiffMacTest, PersistenceRule) {
  const std::vector<SliceAssociation> s = {slice_with(1950, 0.5, 0.4), slice_with(1960, 0.5, 0.3),
                                           SliceAssociation{TimeSlice::decade_of(1970),
                                                            MacValue{0.5, 1}, std::nullopt}};
  EXPECT_FALSE(agg_diff_mac(s));
  EXPECT_TRUE(agg_diff_mac(s, {2, 0.2, false}));
  EXPECT_THROW(agg_diff_mac(s, {0, 0.2, false}), UserError);
}

TEST(AggDiffMacTest, FloorBoundary) {
  std::vector<SliceAssociation> s = {slice_with(1950, 0.19, 0.0), slice_with(1960, 0.2, 0.0),
                                     slice_with(1970, 0.3, 0.0), slice_with(1980, 0.4, 0.0)};
  auto agg = agg_diff_mac(s);
  ASSERT_TRUE(agg);
  EXPECT_EQ(agg->periods, 3);
  EXPECT_NEAR(agg->value, 0.3, 1e-12);
  // Floor applies to G only unless symmetric.
  s = {slice_with(1950, 0.3, 0.1), slice_with(1960, 0.3, 0.1), slice_with(1970, 0.3, 0.1)};
  EXPECT_TRUE(agg_diff_mac(s));
  EXPECT_FALSE(agg_diff_mac(s, {3, 0.2, true}));
}

// Random tables shared by the property and oracle tests: 20 words in 3-d so
// cosines spread across [-1, 1]; each slice drops a few words at random.
struct RandomWorld {
  std::vector<std::string> words;
  std::vector<oracle::Table> tables;
  SpaceMap spaces;
};

RandomWorld random_world(std::uint64_t seed, int slices, std::size_t d = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0, 1);
  RandomWorld w;
  for (int i = 0; i < 20; ++i) w.words.push_back("w" + std::to_string(i));
  for (int s = 0; s < slices; ++s) {
    Vectors vecs;
    oracle::Table table;
    for (const auto& word : w.words) {
      if (rng() % 6 == 0) continue;
      std::vector<float> v(d);
      for (auto& x : v) x = n(rng);
      vecs.push_back({word, v});
      table[word] = std::vector<double>(v.begin(), v.end());
    }
    const auto slice = TimeSlice::decade_of(1950 + 10 * s);
    w.spaces.emplace(slice, make_embedding_space(slice, vecs));
    w.tables.push_back(std::move(table));
  }
  return w;
}

TEST(AssociationOracleTest, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto world = random_world(seed, 6);
    const std::vector<std::string> gl = {"w0", "w1", "w2"}, cl = {"w3", "w4"};
    const auto g = group("g", "c", gl);
    const auto c = group("c", "g", cl);
    for (int i = 5; i < 20; ++i) {
      const std::string word = "w" + std::to_string(i);
      std::size_t s = 0;
      for (const auto& [slice, space] : world.spaces) {
        const auto& table = world.tables[s++];
        const auto lib = mac(space, gl, word);
        const auto ref = oracle::mac(table, gl, word);
        ASSERT_EQ(lib.has_value(), ref.has_value());
        if (ref) {
          EXPECT_NEAR(lib->value, *ref, 1e-12);
        }
        const auto ld = diff_mac(space, g, c, word);
        const auto rd = oracle::diff(table, gl, cl, word);
        ASSERT_EQ(ld.has_value(), rd.has_value());
        if (rd) {
          EXPECT_NEAR(*ld, *rd, 1e-12);
        }
      }
      for (int min_periods : {1, 3, 5}) {
        for (double floor : {-1.0, 0.0, 0.2}) {
          const auto lib = agg_diff_mac(slice_associations(world.spaces, g, c, word),
                                        {min_periods, floor, false});
          const auto ref = oracle::agg(world.tables, gl, cl, word, min_periods, floor);
          ASSERT_EQ(lib.has_value(), ref.has_value()) << seed << " " << word;
          if (ref) {
            EXPECT_NEAR(lib->value, ref->value, 1e-12);
            EXPECT_EQ(lib->periods, ref->periods);
          }
        }
      }
    }
  }
}

TEST(AssociationPropertyTest, RangeAndAntisymmetry) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto world = random_world(seed, 4, 8);
    const auto g = group("g", "c", {"w0", "w1"});
    const auto c = group("c", "g", {"w2", "w3", "w4"});
    for (int i = 5; i < 20; ++i) {
      const std::string word = "w" + std::to_string(i);
      for (const auto& [slice, space] : world.spaces) {
        const auto gc = diff_mac(space, g, c, word);
        const auto cg = diff_mac(space, c, g, word);
        ASSERT_EQ(gc.has_value(), cg.has_value());
        if (gc) {
          EXPECT_EQ(*gc, -*cg);
          EXPECT_LE(std::abs(*gc), 2.0);
        }
        if (auto m = mac(space, g.default_labels, word)) {
          EXPECT_GE(m->value, -1.0);
          EXPECT_LE(m->value, 1.0);
        }
      }
      if (auto agg = agg_diff_mac(slice_associations(world.spaces, g, c, word), {1, -1, false})) {
        EXPECT_LE(std::abs(agg->value), 2.0);
      }
    }
  }
}

TEST(AssociationPropertyTest, ScaleAndPermutationInvariance) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<float> scale(0.01f, 100.0f);
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    const auto world = random_world(seed, 1, 16);
    const auto& space = world.spaces.begin()->second;
    std::vector<std::string> labels = {"w0", "w1", "w2", "w3"};
    EmbeddingSpace scaled = space;
    for (std::size_t r = 0; r < scaled.vocab.size(); ++r) {
      const float c = scale(rng);
      for (std::size_t k = 0; k < scaled.dimension; ++k) scaled.input[r * scaled.dimension + k] *= c;
    }
    for (int i = 4; i < 20; ++i) {
      const std::string word = "w" + std::to_string(i);
      const auto base = mac(space, labels, word);
      if (!base) continue;
      EXPECT_NEAR(mac(scaled, labels, word)->value, base->value, 1e-6);
      auto shuffled = labels;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      EXPECT_NEAR(mac(space, shuffled, word)->value, base->value, 1e-15);
    }
  }
}

std::vector<TraitEntry> traits_abc() {
  return {{"a", -1, true}, {"b", 1, true}, {"c", 0.5, true}};
}

TEST(TopTraitsTest, SortedByScore) {
  const std::map<std::string, AggDiffMac> agg = {{"a", {0.3, 3}}, {"b", {0.5, 3}}, {"c", {0.1, 3}}};
  const auto traits = traits_abc();
  const auto p = top_traits("g", agg, traits, 2);
  ASSERT_EQ(p.traits.size(), 2u);
  EXPECT_EQ(p.traits[0].word, "b");
  EXPECT_EQ(p.traits[1].word, "a");
  EXPECT_DOUBLE_EQ(*p.mean_valence, 0.0);
  EXPECT_FALSE(p.shortfall());
}

TEST(TopTraitsTest, ShortfallAndTies) {
  const auto traits = traits_abc();
  const auto one = top_traits("g", {{"c", {0.2, 3}}}, traits, 10);
  EXPECT_EQ(one.traits.size(), 1u);
  EXPECT_TRUE(one.shortfall());
  const auto tie = top_traits("g", {{"c", {0.2, 3}}, {"a", {0.2, 4}}}, traits, 1);
  EXPECT_EQ(tie.traits[0].word, "a");
  const auto empty = top_traits("g", {}, traits, 3);
  EXPECT_FALSE(empty.mean_valence);
  EXPECT_THROW(top_traits("g", {}, traits, 0), UserError);
}

TEST(TopTraitsTest, PrefixStableAsKGrows) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TraitEntry> traits;
    std::map<std::string, AggDiffMac> agg;
    for (int i = 0; i < 30; ++i) {
      const std::string w = "t" + std::to_string(i);
      traits.push_back({w, u(rng), true});
      // Coarse values force ties.
      agg[w] = {std::round(u(rng) * 5) / 5, 3};
    }
    for (std::size_t k1 = 1; k1 < 30; k1 += 3) {
      const auto small = top_traits("g", agg, traits, k1);
      const auto big = top_traits("g", agg, traits, k1 + 1 + trial % 5);
      for (std::size_t i = 0; i < k1; ++i) EXPECT_EQ(small.traits[i].word, big.traits[i].word);
    }
  }
}

TEST(ValenceSeriesTest, PositiveWhenLabelsNearPositiveTraits) {
  // G's label sits on the positive traits, C's label on the negative ones.
  const Vectors vecs = {{"g", {1, 0.1f}}, {"c", {0.1f, 1}},  {"good1", {1, 0}},
                        {"good2", {0.9f, 0.2f}}, {"bad1", {0, 1}}, {"bad2", {0.2f, 0.9f}}};
  const std::vector<TraitEntry> traits = {
      {"good1", 1.5, true}, {"good2", 1.0, true}, {"bad1", -1.5, true}, {"bad2", -1.0, true}};
  SpaceMap spaces;
  for (int decade : {1950, 1960}) {
    spaces.emplace(TimeSlice::decade_of(decade), make_embedding_space(TimeSlice::decade_of(decade), vecs));
  }
  const auto g = group("g", "c", {"g"});
  const auto c = group("c", "g", {"c"});
  const auto series = decade_valence_series(spaces, g, c, traits, 2);
  ASSERT_EQ(series.points.size(), 2u);
  EXPECT_GT(series.points.at(TimeSlice::decade_of(1950)), 0);
  EXPECT_EQ(series.points.at(TimeSlice::decade_of(1950)), series.points.at(TimeSlice::decade_of(1960)));
  const auto swapped = decade_valence_series(spaces, c, g, traits, 2);
  EXPECT_LT(swapped.points.at(TimeSlice::decade_of(1950)), 0);
}

TEST(ValenceSeriesTest, DecadeWithoutQualifyingTraitsIsMissing) {
  const Vectors vecs = {{"g", {1, 0}}, {"c", {0, 1}}, {"t", {-1, 0}}};
  SpaceMap spaces;
  spaces.emplace(TimeSlice::decade_of(1950), make_embedding_space(TimeSlice::decade_of(1950), vecs));
  const std::vector<TraitEntry> traits = {{"t", 1, true}};
  const auto series = decade_valence_series(spaces, group("g", "c", {"g"}), group("c", "g", {"c"}),
                                            traits, 10);
  EXPECT_TRUE(series.points.empty());
  ASSERT_EQ(series.missing.size(), 1u);

  SpaceMap annual;
  annual.emplace(TimeSlice::annual(1950), make_embedding_space(TimeSlice::annual(1950), vecs));
  EXPECT_THROW(decade_valence_series(annual, group("g", "c", {"g"}), group("c", "g", {"c"}),
                                     traits, 10),
               UserError);
}

TEST(AssociationTableTest, TsvMarksAbsentValues) {
  const Vectors vecs = {{"g", {1, 0}}, {"t", {1, 1}}};
  SpaceMap spaces;
  spaces.emplace(TimeSlice::decade_of(1950), make_embedding_space(TimeSlice::decade_of(1950), vecs));
  const std::vector<TraitEntry> traits = {{"t", 1, true}, {"gone", 1, true}};
  const auto table = build_association_table(spaces, group("g", "c", {"g"}),
                                             group("c", "g", {"c"}), traits, {1, 0.2, false});
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_TRUE(table.aggregate.empty());
  std::ostringstream out;
  write_association_tsv(out, std::span(&table, 1));
  EXPECT_NE(out.str().find("g\tc\tt\t1950s\t0.7071067"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("\tNA\tNA\n"), std::string::npos) << out.str();
}

}  // namespace
}  // namespace diachron
