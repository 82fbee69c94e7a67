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

// Synthetic corpus generator with planted group/word-set co-occurrence.
//
// Plant specification (TSV, '#' comments):
//
//   years            FIRST  LAST
//   tokens_per_year  N
//   filler           VOCAB_SIZE
//   zipf             EXPONENT
//   sentence_length  LEN
//   group_rate       FRACTION        # sentences mentioning a group
//   set_rate         FRACTION        # sentences with set words but no group
//   set_words        K               # set words placed next to a label
//   set    NAME  word word ...
//   group  NAME  label label ...
//   plant  GROUP  SET  STRENGTH  FIRST  LAST
//
// In a group sentence the word set is drawn with probability STRENGTH for each
// active plant; leftover mass is spread evenly over the remaining sets. The
// label and its set words form one contiguous shuffled block so they fall
// inside a small context window.

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "diachron/corpus.hpp"
#include "diachron/error.hpp"
#include "diachron/lexicon.hpp"
#include "diachron/sgns.hpp"

namespace diachron {

struct WordSet {
  std::string name;
  std::vector<std::string> words;
};

struct PlantedGroup {
  std::string name;
  std::vector<std::string> labels;
};

struct Plant {
  std::string group;
  std::string set;
  double strength = 0;
  int first_year = 0;
  int last_year = 0;
};

struct SynthSpec {
  int first_year = 1950;
  int last_year = 1959;
  std::uint64_t tokens_per_year = 100000;
  std::size_t filler_vocab = 2000;
  double zipf_exponent = 1.0;
  std::size_t sentence_length = 10;
  double group_rate = 0.3;
  double set_rate = 0.2;
  std::size_t set_words = 3;
  std::vector<WordSet> sets;
  std::vector<PlantedGroup> groups;
  std::vector<Plant> plants;

  // Probability of each set (by index) for a group sentence of `group` in `year`.
  std::vector<double> set_distribution(const std::string& group, int year) const {
    std::vector<double> p(sets.size(), 0.0);
    std::vector<bool> targeted(sets.size(), false);
    double used = 0;
    for (const auto& pl : plants) {
      if (pl.group != group || year < pl.first_year || year > pl.last_year) continue;
      const auto idx = set_index(pl.set);
      p[idx] += pl.strength;
      targeted[idx] = true;
      used += pl.strength;
    }
    const double rest = std::max(0.0, 1.0 - used);
    std::size_t untargeted = std::count(targeted.begin(), targeted.end(), false);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (untargeted == 0) {
        p[i] += rest / static_cast<double>(sets.size());
      } else if (!targeted[i]) {
        p[i] += rest / static_cast<double>(untargeted);
      }
    }
    return p;
  }

  std::size_t set_index(const std::string& name) const {
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (sets[i].name == name) return i;
    }
    throw UserError("synth spec: unknown set '" + name + "'");
  }

  void validate() const {
    if (groups.empty()) throw UserError("synth spec: no groups defined");
    if (sets.empty()) throw UserError("synth spec: no word sets defined");
    if (first_year > last_year) throw UserError("synth spec: years out of order");
    if (first_year < kMinAcceptedYear || last_year > kMaxAcceptedYear) {
      throw UserError("synth spec: years must lie in [1000, 3000]");
    }
    if (tokens_per_year == 0 || sentence_length < 2 || filler_vocab < 1) {
      throw UserError("synth spec: tokens_per_year, sentence_length and filler must be positive");
    }
    if (set_words + 1 > sentence_length) {
      throw UserError("synth spec: set_words + 1 exceeds sentence_length");
    }
    auto prob = [](double x) { return x >= 0 && x <= 1; };
    if (!prob(group_rate) || !prob(set_rate) || group_rate + set_rate > 1) {
      throw UserError("synth spec: group_rate and set_rate must be probabilities summing to <= 1");
    }
    for (const auto& s : sets) {
      if (s.words.size() < set_words) {
        throw UserError("synth spec: set '" + s.name + "' has fewer than set_words words");
      }
    }
    for (const auto& pl : plants) {
      if (std::none_of(groups.begin(), groups.end(),
                       [&](const PlantedGroup& g) { return g.name == pl.group; })) {
        throw UserError("synth spec: plant names unknown group '" + pl.group + "'");
      }
      set_index(pl.set);
      if (!prob(pl.strength)) {
        throw UserError("synth spec: plant strength must lie in [0, 1]");
      }
    }
    for (const auto& g : groups) {
      for (int y = first_year; y <= last_year; ++y) {
        double total = 0;
        for (const auto& pl : plants) {
          if (pl.group == g.name && y >= pl.first_year && y <= pl.last_year) total += pl.strength;
        }
        if (total > 1 + 1e-12) {
          throw UserError("synth spec: plant strengths for group '" + g.name + "' in " +
                          std::to_string(y) + " sum to more than 1");
        }
      }
    }
  }
};

inline SynthSpec parse_synth_spec(std::istream& in, const std::string& source = "<synth>") {
  SynthSpec spec;
  bool any = false;
  detail::for_each_tsv_line(in, source, [&](std::size_t n, const std::vector<std::string>& f) {
    any = true;
    auto fail = [&](const std::string& what) { throw detail::line_error(source, n, what); };
    auto need = [&](std::size_t count) {
      if (f.size() != count) fail("'" + f[0] + "' expects " + std::to_string(count - 1) + " fields");
    };
    auto integer = [&](const std::string& s) {
      auto v = detail::parse_int<long long>(s);
      if (!v) fail("bad integer '" + s + "'");
      return *v;
    };
    auto real = [&](const std::string& s) {
      auto v = detail::parse_double(s);
      if (!v) fail("bad number '" + s + "'");
      return *v;
    };
    const auto& key = f[0];
    if (key == "years") {
      need(3);
      spec.first_year = static_cast<int>(integer(f[1]));
      spec.last_year = static_cast<int>(integer(f[2]));
    } else if (key == "tokens_per_year") {
      need(2);
      spec.tokens_per_year = static_cast<std::uint64_t>(integer(f[1]));
    } else if (key == "filler") {
      need(2);
      spec.filler_vocab = static_cast<std::size_t>(integer(f[1]));
    } else if (key == "zipf") {
      need(2);
      spec.zipf_exponent = real(f[1]);
    } else if (key == "sentence_length") {
      need(2);
      spec.sentence_length = static_cast<std::size_t>(integer(f[1]));
    } else if (key == "group_rate") {
      need(2);
      spec.group_rate = real(f[1]);
    } else if (key == "set_rate") {
      need(2);
      spec.set_rate = real(f[1]);
    } else if (key == "set_words") {
      need(2);
      spec.set_words = static_cast<std::size_t>(integer(f[1]));
    } else if (key == "set") {
      need(3);
      spec.sets.push_back({f[1], detail::split_tokens(f[2])});
      if (spec.sets.back().words.empty()) fail("empty set");
    } else if (key == "group") {
      need(3);
      spec.groups.push_back({f[1], detail::split_tokens(f[2])});
      if (spec.groups.back().labels.empty()) fail("group without labels");
    } else if (key == "plant") {
      need(6);
      spec.plants.push_back({f[1], f[2], real(f[3]), static_cast<int>(integer(f[4])),
                             static_cast<int>(integer(f[5]))});
    } else {
      fail("unknown directive '" + key + "'");
    }
  });
  if (!any) throw UserError(source + ": empty synth spec");
  spec.validate();
  return spec;
}

inline std::string filler_token(std::size_t i) {
  std::string digits = std::to_string(i);
  return "f" + std::string(digits.size() < 5 ? 5 - digits.size() : 0, '0') + digits;
}

// Writes a docPerLine corpus. Identical (spec, seed) pairs give identical bytes.
inline void generate_corpus(const SynthSpec& spec, std::uint64_t seed, std::ostream& out) {
  spec.validate();
  Rng rng(seed);
  std::vector<double> zipf(spec.filler_vocab);
  for (std::size_t i = 0; i < zipf.size(); ++i) {
    zipf[i] = 1.0 / std::pow(static_cast<double>(i + 1), spec.zipf_exponent);
  }
  const AliasSampler filler(zipf);
  std::vector<std::string> fillers(spec.filler_vocab);
  for (std::size_t i = 0; i < fillers.size(); ++i) fillers[i] = filler_token(i);

  auto pick_distinct = [&](const std::vector<std::string>& words, std::size_t k) {
    std::vector<std::size_t> idx(words.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    std::vector<std::string> out_words;
    for (std::size_t i = 0; i < k; ++i) out_words.push_back(words[idx[i]]);
    return out_words;
  };
  auto shuffle = [&](std::vector<std::string>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(rng.below(i))]);
    }
  };
  auto draw_set = [&](const std::vector<double>& p) {
    double u = rng.uniform();
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (u < p[i]) return i;
      u -= p[i];
    }
    return p.size() - 1;
  };

  std::map<std::string, std::vector<double>> dist;
  for (int year = spec.first_year; year <= spec.last_year; ++year) {
    dist.clear();
    for (const auto& g : spec.groups) dist[g.name] = spec.set_distribution(g.name, year);
    std::uint64_t written = 0;
    while (written < spec.tokens_per_year) {
      std::vector<std::string> block;
      const double u = rng.uniform();
      if (u < spec.group_rate) {
        const auto& g = spec.groups[static_cast<std::size_t>(rng.below(spec.groups.size()))];
        const auto& set = spec.sets[draw_set(dist[g.name])];
        block = pick_distinct(set.words, spec.set_words);
        block.push_back(g.labels[static_cast<std::size_t>(rng.below(g.labels.size()))]);
        shuffle(block);
      } else if (u < spec.group_rate + spec.set_rate) {
        const auto& set = spec.sets[static_cast<std::size_t>(rng.below(spec.sets.size()))];
        block = pick_distinct(set.words, spec.set_words);
      }
      const std::size_t fill = spec.sentence_length - block.size();
      const std::size_t offset = static_cast<std::size_t>(rng.below(fill + 1));
      std::vector<std::string> sentence;
      sentence.reserve(spec.sentence_length);
      for (std::size_t i = 0; i < offset; ++i) sentence.push_back(fillers[filler.sample(rng)]);
      sentence.insert(sentence.end(), block.begin(), block.end());
      for (std::size_t i = offset; i < fill; ++i) sentence.push_back(fillers[filler.sample(rng)]);

      out << year << '\t';
      for (std::size_t i = 0; i < sentence.size(); ++i) {
        if (i) out << ' ';
        out << sentence[i];
      }
      out << '\n';
      written += sentence.size();
    }
  }
}

}  // namespace diachron
