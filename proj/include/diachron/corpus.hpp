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

// Corpus ingestion, calendar time slicing, vocabulary construction and
// skip-gram pair enumeration.

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "diachron/error.hpp"
#include "diachron/utf8.hpp"

namespace diachron {

inline constexpr int kMinAcceptedYear = 1000;
inline constexpr int kMaxAcceptedYear = 3000;
inline constexpr std::size_t kMaxNgramLength = 5;

enum class Resolution : std::uint8_t { kAnnual = 0, kDecade = 1 };

inline std::string_view to_string(Resolution r) {
  return r == Resolution::kAnnual ? "annual" : "decade";
}

inline Resolution parse_resolution(std::string_view s) {
  if (s == "annual") return Resolution::kAnnual;
  if (s == "decade") return Resolution::kDecade;
  throw UserError("unknown resolution '" + std::string(s) +
                  "' (expected annual or decade)");
}

// Inclusive year interval; an analysis window such as 1950-2019.
struct YearRange {
  int first = 1950;
  int last = 2019;

  bool contains(int year) const noexcept { return year >= first && year <= last; }
  friend bool operator==(const YearRange&, const YearRange&) = default;
};

// A contiguous span of calendar years over which one embedding space is
// trained. Annual slices cover one year; decade slices are calendar decades.
struct TimeSlice {
  Resolution resolution = Resolution::kAnnual;
  int start_year = 0;
  int end_year = 0;

  static TimeSlice annual(int year) { return {Resolution::kAnnual, year, year}; }

  static TimeSlice decade_of(int year) {
    // Floor modulo so negative years still align; accepted years are >= 1000.
    int rem = year % 10;
    if (rem < 0) rem += 10;
    const int start = year - rem;
    return {Resolution::kDecade, start, start + 9};
  }

  static TimeSlice containing(int year, Resolution r) {
    return r == Resolution::kAnnual ? annual(year) : decade_of(year);
  }

  bool contains(int year) const noexcept {
    return year >= start_year && year <= end_year;
  }
  bool overlaps(int first, int last) const noexcept {
    return start_year <= last && first <= end_year;
  }
  bool is_valid() const noexcept {
    if (resolution == Resolution::kAnnual) return start_year == end_year;
    return end_year == start_year + 9 && decade_of(start_year).start_year == start_year;
  }

  // "1966" for annual slices, "1960s" for decades.
  std::string label() const {
    return resolution == Resolution::kAnnual ? std::to_string(start_year)
                                             : std::to_string(start_year) + "s";
  }
  // Filesystem-friendly identifier, e.g. "decade_1960_1969".
  std::string key() const {
    return std::string(to_string(resolution)) + "_" + std::to_string(start_year) + "_" +
           std::to_string(end_year);
  }

  friend auto operator<=>(const TimeSlice&, const TimeSlice&) = default;
};

// ---------------------------------------------------------------------------
// Records and line parsing.

struct Document {
  int year = 0;
  std::vector<std::string> tokens;
  friend bool operator==(const Document&, const Document&) = default;
};

struct NgramRecord {
  std::vector<std::string> tokens;
  int year = 0;
  std::uint64_t match_count = 1;
  friend bool operator==(const NgramRecord&, const NgramRecord&) = default;
};

using Record = std::variant<Document, NgramRecord>;

enum class InputFormat { kDocPerLine, kNgramTsv };

inline InputFormat parse_input_format(std::string_view s) {
  if (s == "doc" || s == "docPerLine" || s == "doc-per-line") return InputFormat::kDocPerLine;
  if (s == "ngram" || s == "ngramTsv" || s == "ngram-tsv") return InputFormat::kNgramTsv;
  throw UserError("unknown corpus format '" + std::string(s) +
                  "' (expected docPerLine or ngramTsv)");
}

inline int record_year(const Record& r) {
  return std::visit([](const auto& x) { return x.year; }, r);
}
inline std::uint64_t record_weight(const Record& r) {
  if (const auto* n = std::get_if<NgramRecord>(&r)) return n->match_count;
  return 1;
}
inline const std::vector<std::string>& record_tokens(const Record& r) {
  return std::visit([](const auto& x) -> const std::vector<std::string>& { return x.tokens; },
                    r);
}

namespace detail {

// Splits on ASCII spaces, dropping empty fields (runs of spaces).
inline std::vector<std::string> split_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class Int>
std::optional<Int> parse_int(std::string_view s) {
  Int value{};
  if (s.empty()) return std::nullopt;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

inline std::optional<int> parse_year(std::string_view s) {
  auto y = parse_int<int>(s);
  if (!y || *y < kMinAcceptedYear || *y > kMaxAcceptedYear) return std::nullopt;
  return y;
}

inline bool has_forbidden_whitespace(std::string_view token) {
  return token.find_first_of("\t\r\n\v\f") != std::string_view::npos;
}

}  // namespace detail

// "YEAR<TAB>tok tok tok". Returns nullopt for malformed lines.
inline std::optional<Document> parse_document_line(std::string_view line) {
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) return std::nullopt;
  auto year = detail::parse_year(line.substr(0, tab));
  if (!year) return std::nullopt;
  const auto body = line.substr(tab + 1);
  if (detail::has_forbidden_whitespace(body)) return std::nullopt;
  Document doc{*year, detail::split_tokens(body)};
  if (doc.tokens.empty()) return std::nullopt;
  return doc;
}

// "tok1 tok2 ...<TAB>YEAR<TAB>COUNT". Returns nullopt for malformed lines.
inline std::optional<NgramRecord> parse_ngram_line(std::string_view line) {
  const auto t1 = line.find('\t');
  if (t1 == std::string_view::npos) return std::nullopt;
  const auto t2 = line.find('\t', t1 + 1);
  if (t2 == std::string_view::npos) return std::nullopt;
  if (line.find('\t', t2 + 1) != std::string_view::npos) return std::nullopt;
  auto tokens = detail::split_tokens(line.substr(0, t1));
  if (tokens.empty() || tokens.size() > kMaxNgramLength) return std::nullopt;
  for (const auto& t : tokens) {
    if (detail::has_forbidden_whitespace(t)) return std::nullopt;
  }
  auto year = detail::parse_year(line.substr(t1 + 1, t2 - t1 - 1));
  if (!year) return std::nullopt;
  auto count = detail::parse_int<std::uint64_t>(line.substr(t2 + 1));
  if (!count || *count < 1) return std::nullopt;
  return NgramRecord{std::move(tokens), *year, *count};
}

// Streams records from a text source one line at a time. Malformed lines are
// skipped and counted; invalid UTF-8 is fatal.
class RecordReader {
 public:
  RecordReader(std::istream& in, InputFormat format) : in_(&in), format_(format) {}

  // Throws EncodingError carrying the absolute byte offset of the bad byte.
  std::optional<Record> next() {
    std::string line;
    while (std::getline(*in_, line)) {
      const std::uint64_t line_start = offset_;
      offset_ += line.size() + 1;
      ++line_number_;
      if (auto bad = utf8::find_invalid(line)) {
        throw EncodingError("invalid UTF-8 on line " + std::to_string(line_number_),
                            line_start + *bad);
      }
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (format_ == InputFormat::kDocPerLine) {
        if (auto d = parse_document_line(line)) return Record{std::move(*d)};
      } else {
        if (auto n = parse_ngram_line(line)) return Record{std::move(*n)};
      }
      ++malformed_;
      if (malformed_lines_.size() < kKeptMalformedLines) {
        malformed_lines_.push_back(line_number_);
      }
    }
    return std::nullopt;
  }

  std::uint64_t malformed_count() const noexcept { return malformed_; }
  // Line numbers (1-based) of the first malformed lines, for reporting.
  const std::vector<std::uint64_t>& malformed_lines() const noexcept { return malformed_lines_; }
  std::uint64_t lines_read() const noexcept { return line_number_; }

 private:
  static constexpr std::size_t kKeptMalformedLines = 20;

  std::istream* in_;
  InputFormat format_;
  std::uint64_t offset_ = 0;
  std::uint64_t line_number_ = 0;
  std::uint64_t malformed_ = 0;
  std::vector<std::uint64_t> malformed_lines_;
};

// Reads every record from a stream.
inline std::vector<Record> read_records(std::istream& in, InputFormat format,
                                        std::uint64_t* malformed = nullptr) {
  RecordReader reader(in, format);
  std::vector<Record> out;
  while (auto r = reader.next()) out.push_back(std::move(*r));
  if (malformed) *malformed = reader.malformed_count();
  return out;
}

// ---------------------------------------------------------------------------
// Interned storage.

// Bidirectional token <-> id map shared by all slices of one corpus.
class TokenTable {
 public:
  std::uint32_t intern(std::string_view token) {
    auto [it, inserted] =
        ids_.try_emplace(std::string(token), static_cast<std::uint32_t>(tokens_.size()));
    if (inserted) tokens_.push_back(it->first);
    return it->second;
  }
  std::optional<std::uint32_t> find(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& token(std::uint32_t id) const { return tokens_.at(id); }
  std::size_t size() const noexcept { return tokens_.size(); }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> tokens_;
};

// Records of one slice, stored as concatenated token ids. Documents carry
// weight 1; n-gram records carry their match count.
struct SliceBucket {
  std::vector<std::uint32_t> token_ids;
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint64_t> weights;
  std::vector<int> years;
  std::uint64_t token_count = 0;  // weighted

  std::size_t record_count() const noexcept { return weights.size(); }
  std::span<const std::uint32_t> record(std::size_t i) const {
    return std::span<const std::uint32_t>(token_ids).subspan(offsets[i],
                                                             offsets[i + 1] - offsets[i]);
  }
  void add(int year, std::span<const std::uint32_t> ids, std::uint64_t weight) {
    token_ids.insert(token_ids.end(), ids.begin(), ids.end());
    offsets.push_back(token_ids.size());
    weights.push_back(weight);
    years.push_back(year);
    token_count += weight * ids.size();
  }
  bool empty() const noexcept { return weights.empty(); }
};

// Everything ingested from one or more corpus files, before slicing.
struct Corpus {
  std::shared_ptr<TokenTable> tokens = std::make_shared<TokenTable>();
  SliceBucket records;

  void add(const Record& r) {
    const auto& toks = record_tokens(r);
    std::vector<std::uint32_t> ids;
    ids.reserve(toks.size());
    for (const auto& t : toks) ids.push_back(tokens->intern(t));
    records.add(record_year(r), ids, record_weight(r));
  }
};

struct IngestStats {
  std::uint64_t records = 0;
  std::uint64_t malformed = 0;
  std::vector<std::uint64_t> malformed_lines;
};

inline IngestStats ingest(std::istream& in, InputFormat format, Corpus& into) {
  RecordReader reader(in, format);
  IngestStats stats;
  while (auto r = reader.next()) {
    into.add(*r);
    ++stats.records;
  }
  stats.malformed = reader.malformed_count();
  stats.malformed_lines = reader.malformed_lines();
  return stats;
}

struct SlicedCorpus {
  Resolution resolution = Resolution::kAnnual;
  std::shared_ptr<const TokenTable> tokens;
  std::map<TimeSlice, SliceBucket> slices;
  SliceBucket out_of_range;
};

// Assigns every record to exactly one slice at the given resolution. Records
// whose year lies outside `range` go to the out-of-range bucket.
inline SlicedCorpus slice_corpus(const Corpus& corpus, Resolution resolution,
                                 YearRange range = {}) {
  SlicedCorpus out;
  out.resolution = resolution;
  out.tokens = corpus.tokens;
  const SliceBucket& all = corpus.records;
  for (std::size_t i = 0; i < all.record_count(); ++i) {
    const int year = all.years[i];
    SliceBucket& dst = range.contains(year)
                           ? out.slices[TimeSlice::containing(year, resolution)]
                           : out.out_of_range;
    dst.add(year, all.record(i), all.weights[i]);
  }
  return out;
}

// "RESOLUTION<TAB>START<TAB>END<TAB>TOKENCOUNT<TAB>VOCABSIZE"
inline std::string slice_manifest_line(const TimeSlice& slice, std::uint64_t token_count,
                                       std::size_t vocab_size) {
  return std::string(to_string(slice.resolution)) + "\t" + std::to_string(slice.start_year) +
         "\t" + std::to_string(slice.end_year) + "\t" + std::to_string(token_count) + "\t" +
         std::to_string(vocab_size);
}

// ---------------------------------------------------------------------------
// Vocabulary.

class Vocabulary {
 public:
  struct Entry {
    std::string token;
    std::uint64_t frequency = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  Vocabulary() = default;

  // Entries are taken in the given order; index i is entries[i].
  explicit Vocabulary(std::vector<Entry> entries) : entries_(std::move(entries)) {
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!index_.try_emplace(entries_[i].token, static_cast<std::uint32_t>(i)).second) {
        throw UserError("duplicate vocabulary token '" + entries_[i].token + "'");
      }
    }
  }

  // Keeps tokens with frequency strictly greater than min_count. Indices are
  // assigned by descending frequency, ties by byte-wise (code point) order.
  static Vocabulary from_counts(std::vector<Entry> counts, std::uint64_t min_count,
                                const std::string& slice_name) {
    std::erase_if(counts, [&](const Entry& e) { return e.frequency <= min_count; });
    if (counts.empty()) throw UserError("empty slice vocabulary for slice " + slice_name);
    std::sort(counts.begin(), counts.end(), [](const Entry& a, const Entry& b) {
      if (a.frequency != b.frequency) return a.frequency > b.frequency;
      return a.token < b.token;
    });
    return Vocabulary(std::move(counts));
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::string& token(std::size_t i) const { return entries_.at(i).token; }
  std::uint64_t frequency(std::size_t i) const { return entries_.at(i).frequency; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  std::optional<std::uint32_t> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(std::string_view token) const { return find(token).has_value(); }

  std::uint64_t total_frequency() const noexcept {
    std::uint64_t total = 0;
    for (const auto& e : entries_) total += e.frequency;
    return total;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Builds the vocabulary of one slice bucket.
inline Vocabulary build_vocabulary(const SliceBucket& bucket, const TokenTable& tokens,
                                   std::uint64_t min_count, const TimeSlice& slice) {
  std::vector<std::uint64_t> counts(tokens.size(), 0);
  for (std::size_t r = 0; r < bucket.record_count(); ++r) {
    const std::uint64_t w = bucket.weights[r];
    for (std::uint32_t id : bucket.record(r)) counts[id] += w;
  }
  std::vector<Vocabulary::Entry> entries;
  for (std::uint32_t id = 0; id < counts.size(); ++id) {
    if (counts[id] > 0) entries.push_back({tokens.token(id), counts[id]});
  }
  return Vocabulary::from_counts(std::move(entries), min_count, slice.label());
}

// Builds a vocabulary directly from parsed records; n-gram tokens contribute
// their match count per occurrence.
inline Vocabulary build_vocabulary(std::span<const Record> records, std::uint64_t min_count,
                                   const std::string& slice_name = "<records>") {
  std::map<std::string, std::uint64_t, std::less<>> counts;
  for (const auto& r : records) {
    const std::uint64_t w = record_weight(r);
    for (const auto& t : record_tokens(r)) counts[t] += w;
  }
  std::vector<Vocabulary::Entry> entries;
  entries.reserve(counts.size());
  for (auto& [tok, c] : counts) entries.push_back({tok, c});
  return Vocabulary::from_counts(std::move(entries), min_count, slice_name);
}

// ---------------------------------------------------------------------------
// Pair enumeration.

struct TrainingPair {
  std::uint32_t center = 0;
  std::uint32_t context = 0;
  std::uint64_t weight = 1;
  friend auto operator<=>(const TrainingPair&, const TrainingPair&) = default;
};

// Calls f(center, context) for every ordered pair of distinct positions at
// distance <= window within an already-encoded (OOV-free) sequence.
template <class F>
void for_each_window_pair(std::span<const std::uint32_t> seq, int window, F&& f) {
  const auto n = static_cast<std::ptrdiff_t>(seq.size());
  const auto w = static_cast<std::ptrdiff_t>(window);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - w);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + w);
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      if (j != i) f(seq[static_cast<std::size_t>(i)], seq[static_cast<std::size_t>(j)]);
    }
  }
}

// Number of pairs for_each_window_pair emits for a sequence of length n.
inline std::uint64_t window_pair_count(std::size_t n, int window) {
  std::uint64_t total = 0;
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t i = 0; i < n; ++i) {
    total += std::min(i, w) + std::min(n - 1 - i, w);
  }
  return total;
}

// Maps tokens to vocabulary indices, deleting out-of-vocabulary tokens so that
// the remaining positions close up.
inline std::vector<std::uint32_t> encode(std::span<const std::string> tokens,
                                         const Vocabulary& vocab) {
  std::vector<std::uint32_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (auto idx = vocab.find(t)) out.push_back(*idx);
  }
  return out;
}

inline std::vector<TrainingPair> generate_pairs(const Record& record, const Vocabulary& vocab,
                                                int window) {
  if (window < 1) throw UserError("window must be >= 1");
  const auto seq = encode(record_tokens(record), vocab);
  const std::uint64_t weight = record_weight(record);
  std::vector<TrainingPair> out;
  for_each_window_pair(seq, window, [&](std::uint32_t c, std::uint32_t o) {
    out.push_back({c, o, weight});
  });
  return out;
}

}  // namespace diachron
