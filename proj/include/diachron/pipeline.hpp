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

// End-to-end commands: synth, train, analyze, report. The CLI is a thin
// wrapper over these so they can be exercised directly from tests.

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "diachron/association.hpp"
#include "diachron/config.hpp"
#include "diachron/corpus.hpp"
#include "diachron/drift.hpp"
#include "diachron/embedding_io.hpp"
#include "diachron/error.hpp"
#include "diachron/hash.hpp"
#include "diachron/lexicon.hpp"
#include "diachron/report.hpp"
#include "diachron/sgns.hpp"
#include "diachron/synth.hpp"
#include "diachron/weat.hpp"

namespace diachron {

namespace fs = std::filesystem;

inline constexpr std::string_view kOutEnvVar = "DIACHRON_OUT";
inline constexpr std::string_view kEmbeddingDir = "embeddings";

struct CorpusSource {
  fs::path path;
  InputFormat format = InputFormat::kDocPerLine;
};

struct RunConfig {
  std::vector<CorpusSource> corpora;
  YearRange years;
  std::vector<Resolution> resolutions{Resolution::kAnnual, Resolution::kDecade};
  TrainerConfig trainer;

  std::optional<fs::path> groups_path, traits_path, attributes_path;
  bool normalize_valence = true;
  bool require_stable = true;

  std::size_t top_k = 10;
  AggregationOptions aggregation;
  int event_window = 5;
  std::vector<HistoricalEvent> events = builtin_events();
  SampleUnit sample_unit = SampleUnit::kLabelYear;
  EventYearWindow event_year_window = EventYearWindow::kPost;
  CorrelationOptions correlation;
  double band_threshold = 0.4;
  int band_min_run = 3;
  std::vector<std::string> group_filter;

  std::optional<fs::path> synth_spec;
  std::optional<fs::path> synth_output;

  fs::path out = "diachron_out";
  std::string config_hash;

  fs::path embedding_dir() const { return out / kEmbeddingDir; }

  static const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "corpus.path", "corpus.format", "corpus.years",
        "train.resolutions", "train.dimension", "train.window", "train.negatives",
        "train.epochs", "train.learning_rate", "train.min_count", "train.subsample",
        "train.unigram_power", "workers", "strict", "seed",
        "lexicon.groups", "lexicon.traits", "lexicon.attributes", "lexicon.normalize",
        "lexicon.require_stable",
        "analysis.k", "analysis.mac_floor", "analysis.min_periods", "analysis.symmetric_floor",
        "analysis.window_years", "analysis.events", "analysis.sample_unit",
        "analysis.event_year_window",
        "analysis.min_overlap", "analysis.correlation", "analysis.band_threshold",
        "analysis.band_min_run", "analysis.groups",
        "synth.spec", "synth.output", "out"};
    return keys;
  }

  static RunConfig from(const Config& c) {
    c.check_known(known_keys());
    RunConfig r;
    const auto format = parse_input_format(c.get_or("corpus.format", "docPerLine"));
    for (const auto& p : c.get_paths("corpus.path")) r.corpora.push_back({p, format});
    if (auto years = c.get("corpus.years")) {
      bool ok = true;
      auto range = detail::parse_slice_spec(*years, ok);
      if (!ok || !range) throw UserError("corpus.years must look like 1950-2019");
      r.years = {range->first, range->second};
    }
    if (auto res = c.get("train.resolutions")) {
      r.resolutions.clear();
      for (const auto& part : Config::split_list(*res)) {
        r.resolutions.push_back(parse_resolution(part));
      }
      if (r.resolutions.empty()) throw UserError("train.resolutions is empty");
    }
    auto& t = r.trainer;
    t.dimension = c.get_number<std::size_t>("train.dimension", t.dimension);
    t.window = c.get_number<int>("train.window", t.window);
    t.negatives = c.get_number<int>("train.negatives", t.negatives);
    t.epochs = c.get_number<int>("train.epochs", t.epochs);
    t.initial_learning_rate = c.get_number<double>("train.learning_rate", t.initial_learning_rate);
    t.min_count = c.get_number<std::uint64_t>("train.min_count", t.min_count);
    if (auto s = c.get("train.subsample")) {
      if (*s == "none" || *s == "0") {
        t.subsample_threshold.reset();
      } else {
        t.subsample_threshold = c.get_number<double>("train.subsample", 1e-4);
      }
    }
    t.unigram_power = c.get_number<double>("train.unigram_power", t.unigram_power);
    t.workers = c.get_number<int>("workers", t.workers);
    t.strict = c.get_bool("strict", t.strict);
    t.seed = c.get_number<std::uint64_t>("seed", t.seed);
    t.validate();

    r.groups_path = c.get_path("lexicon.groups");
    r.traits_path = c.get_path("lexicon.traits");
    r.attributes_path = c.get_path("lexicon.attributes");
    r.normalize_valence = c.get_bool("lexicon.normalize", r.normalize_valence);
    r.require_stable = c.get_bool("lexicon.require_stable", r.require_stable);

    r.top_k = c.get_number<std::size_t>("analysis.k", r.top_k);
    if (r.top_k < 1) throw UserError("analysis.k must be >= 1");
    r.aggregation.mac_floor = c.get_number<double>("analysis.mac_floor", r.aggregation.mac_floor);
    r.aggregation.min_periods =
        c.get_number<int>("analysis.min_periods", r.aggregation.min_periods);
    if (r.aggregation.min_periods < 1) throw UserError("analysis.min_periods must be >= 1");
    r.aggregation.symmetric_floor =
        c.get_bool("analysis.symmetric_floor", r.aggregation.symmetric_floor);
    r.event_window = c.get_number<int>("analysis.window_years", r.event_window);
    if (r.event_window < 1) throw UserError("analysis.window_years must be >= 1");
    if (auto ev = c.get("analysis.events")) {
      r.events.clear();
      // "1966" or "1966:Name", comma separated
      for (const auto& part : Config::split_list(*ev)) {
        const auto colon = part.find(':');
        auto year = detail::parse_int<int>(part.substr(0, colon));
        if (!year) throw UserError("analysis.events: bad year in '" + part + "'");
        r.events.push_back({*year, colon == std::string::npos ? "" : part.substr(colon + 1)});
      }
    }
    if (auto unit = c.get("analysis.sample_unit")) {
      if (*unit == "label_year") {
        r.sample_unit = SampleUnit::kLabelYear;
      } else if (*unit == "year_mean") {
        r.sample_unit = SampleUnit::kYearMean;
      } else {
        throw UserError("analysis.sample_unit must be label_year or year_mean");
      }
    }
    if (auto w = c.get("analysis.event_year_window")) {
      if (*w == "post") {
        r.event_year_window = EventYearWindow::kPost;
      } else if (*w == "pre") {
        r.event_year_window = EventYearWindow::kPre;
      } else {
        throw UserError("analysis.event_year_window must be post or pre");
      }
    }
    r.correlation.min_overlap =
        c.get_number<std::size_t>("analysis.min_overlap", r.correlation.min_overlap);
    if (auto m = c.get("analysis.correlation")) r.correlation.method = parse_correlation_method(*m);
    r.band_threshold = c.get_number<double>("analysis.band_threshold", r.band_threshold);
    if (!(r.band_threshold > 0 && r.band_threshold < 1)) {
      throw UserError("analysis.band_threshold must be in (0, 1)");
    }
    r.band_min_run = c.get_number<int>("analysis.band_min_run", r.band_min_run);
    if (auto g = c.get("analysis.groups")) r.group_filter = Config::split_list(*g);

    r.synth_spec = c.get_path("synth.spec");
    r.synth_output = c.get_path("synth.output");

    if (auto out = c.get_path("out")) {
      r.out = *out;
    } else if (const char* env = std::getenv(std::string(kOutEnvVar).c_str()); env && *env) {
      r.out = env;
    }
    r.config_hash = hex64(fnv1a64(c.canonical({"out", "synth.output"})));
    return r;
  }
};

namespace detail {

inline std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open " + path.string());
  Fnv1a64 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto n = static_cast<std::size_t>(in.gcount());
    h.update(std::as_bytes(std::span<const char>(buf.data(), n)));
  }
  return hex64(h.digest());
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

inline void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UserError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw UserError("failed writing " + path.string());
}

inline void require_file(const std::optional<fs::path>& path, const std::string& what) {
  if (!path) throw UserError("missing " + what + " (set it in the config)");
  if (!fs::is_regular_file(*path)) throw UserError(what + " not found: " + path->string());
}

// Group ids are user data; keep file names portable.
inline std::string safe_file_component(std::string_view id) {
  std::string out;
  for (unsigned char c : id) {
    out += (std::isalnum(c) || c == '-' || c == '_' || c >= 0x80) ? static_cast<char>(c) : '_';
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline fs::path cmd_synth(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.synth_spec) throw UserError("synth needs a plant specification (synth.spec)");
  if (!fs::is_regular_file(*cfg.synth_spec)) {
    throw UserError("synth spec not found: " + cfg.synth_spec->string());
  }
  std::ifstream in(*cfg.synth_spec);
  const auto spec = parse_synth_spec(in, cfg.synth_spec->string());
  const fs::path target = cfg.synth_output.value_or(cfg.out / "synthetic_corpus.tsv");
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  if (!out) throw UserError("cannot write " + target.string());
  generate_corpus(spec, cfg.trainer.seed, out);
  out.close();
  log << "wrote synthetic corpus " << target.string() << "\n";
  return target;
}

inline RunManifest cmd_train(const RunConfig& cfg, std::ostream& log) {
  if (cfg.corpora.empty()) throw UserError("no corpus configured (corpus.path)");
  for (const auto& src : cfg.corpora) {
    if (!fs::is_regular_file(src.path)) throw UserError("corpus not found: " + src.path.string());
  }
  RunManifest manifest;
  manifest.config_hash = cfg.config_hash;
  manifest.created = detail::utc_timestamp();

  Corpus corpus;
  for (const auto& src : cfg.corpora) {
    std::ifstream in(src.path, std::ios::binary);
    if (!in) throw UserError("cannot open corpus " + src.path.string());
    IngestStats stats;
    try {
      stats = ingest(in, src.format, corpus);
    } catch (const EncodingError& e) {
      throw EncodingError(src.path.string() + ": " + e.what(), e.byte_offset());
    }
    manifest.corpus_digests.emplace_back(src.path.string(), detail::file_digest(src.path));
    manifest.notes.push_back(src.path.string() + ": " + std::to_string(stats.records) +
                             " records, " + std::to_string(stats.malformed) + " malformed lines");
    log << src.path.string() << ": " << stats.records << " records, " << stats.malformed
        << " malformed lines\n";
  }

  const fs::path dir = cfg.embedding_dir();
  fs::create_directories(dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == kEmbeddingExtension) fs::remove(entry.path());
  }

  std::ostringstream slices_tsv;
  bool any = false;
  std::vector<std::string> errors;
  for (Resolution res : cfg.resolutions) {
    const auto sliced = slice_corpus(corpus, res, cfg.years);
    if (!sliced.out_of_range.empty()) {
      manifest.notes.push_back(std::string(to_string(res)) + ": " +
                               std::to_string(sliced.out_of_range.record_count()) +
                               " records outside " + std::to_string(cfg.years.first) + "-" +
                               std::to_string(cfg.years.last));
    }
    if (sliced.slices.empty()) continue;
    try {
      auto report = train_all_slices(sliced, cfg.trainer, [&](EmbeddingSpace&& space) {
        save_embedding(space, dir / embedding_file_name(space.slice));
        log << "trained " << space.slice.key() << " |V|=" << space.vocab.size() << "\n";
      });
      for (const auto& [slice, inv] : report.inventory) {
        manifest.slices.emplace_back(slice, inv);
        slices_tsv << slice_manifest_line(slice, inv.first, inv.second) << '\n';
      }
      for (const auto& s : report.skipped) {
        manifest.skipped_slices.emplace_back(s.slice, s.reason);
        log << "skipped " << s.slice.key() << ": " << s.reason << "\n";
      }
      any = true;
    } catch (const UserError& e) {
      errors.push_back(e.what());
    }
  }
  if (!any) {
    throw UserError(errors.empty() ? "no records fall inside the analysis range"
                                   : errors.front());
  }
  detail::write_file(dir / "slices.tsv", slices_tsv.str());
  detail::write_file(dir / "manifest.tsv", manifest.to_tsv());
  return manifest;
}

struct LoadedSpaces {
  SpaceMap annual;
  SpaceMap decade;
};

inline LoadedSpaces load_spaces(const fs::path& dir) {
  LoadedSpaces out;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != kEmbeddingExtension) continue;
      auto space = load_embedding(entry.path());
      auto& target = space.slice.resolution == Resolution::kAnnual ? out.annual : out.decade;
      const auto key = space.slice;
      target.emplace(key, std::move(space));
    }
  }
  if (out.annual.empty() && out.decade.empty()) {
    throw UserError("no embeddings found in " + dir.string() + " (run train first)");
  }
  return out;
}

// Names of every file cmd_analyze writes for the given groups.
inline std::vector<std::string> analysis_outputs(const std::vector<std::string>& group_ids) {
  std::vector<std::string> files = {"manifest.tsv",       "profiles.tsv",   "profiles.txt",
                                    "associations.tsv",   "valence_series.tsv",
                                    "valence_series.svg", "weat_series.tsv", "events.tsv",
                                    "events.txt",         "bands.tsv"};
  for (const auto& g : group_ids) {
    files.push_back("corr_" + detail::safe_file_component(g) + ".tsv");
    files.push_back("corr_" + detail::safe_file_component(g) + ".svg");
  }
  return files;
}

struct AnalysisSummary {
  std::vector<GroupProfile> profiles;
  std::vector<ValenceSeries> valence;
  std::vector<WeatSeries> weat;
  std::vector<EventImpact> events;
  std::map<std::string, CorrelationMatrix> correlations;
  std::map<std::string, std::vector<DisruptionBand>> bands;
  RunManifest manifest;
};

inline AnalysisSummary cmd_analyze(const RunConfig& cfg, std::ostream& log) {
  detail::require_file(cfg.groups_path, "group lexicon (lexicon.groups)");
  detail::require_file(cfg.traits_path, "trait lexicon (lexicon.traits)");
  detail::require_file(cfg.attributes_path, "attribute lexicon (lexicon.attributes)");
  const auto groups = load_groups(*cfg.groups_path);
  auto all_traits = load_traits(*cfg.traits_path, cfg.normalize_valence);
  const auto attrs = load_attributes(*cfg.attributes_path);
  std::vector<TraitEntry> traits;
  for (auto& t : all_traits) {
    if (t.stable || !cfg.require_stable) traits.push_back(t);
  }
  const auto spaces = load_spaces(cfg.embedding_dir());

  std::vector<const SocialGroup*> selected;
  for (const auto& id : cfg.group_filter) selected.push_back(&groups.at(id));
  if (selected.empty()) {
    for (const auto& g : groups.groups) selected.push_back(&g);
  }
  std::stable_sort(selected.begin(), selected.end(), [](const auto* a, const auto* b) {
    if (a->category != b->category) return a->category < b->category;
    return a->id < b->id;
  });

  AnalysisSummary summary;
  auto& manifest = summary.manifest;
  manifest.config_hash = cfg.config_hash;
  manifest.created = detail::utc_timestamp();
  manifest.lexicon_digests = {
      {"groups:" + cfg.groups_path->string(), detail::file_digest(*cfg.groups_path)},
      {"traits:" + cfg.traits_path->string(), detail::file_digest(*cfg.traits_path)},
      {"attributes:" + cfg.attributes_path->string(), detail::file_digest(*cfg.attributes_path)}};
  for (const auto* sm : {&spaces.decade, &spaces.annual}) {
    for (const auto& [slice, space] : *sm) {
      manifest.slices.push_back({slice, {space.vocab.total_frequency(), space.vocab.size()}});
    }
  }
  const std::string& hash = cfg.config_hash;
  fs::create_directories(cfg.out);

  // Decade-level: aggregated profiles and per-decade valence.
  std::vector<AssociationTable> tables;
  if (!spaces.decade.empty()) {
    for (const auto* g : selected) {
      const auto& c = groups.comparison_of(*g);
      tables.push_back(build_association_table(spaces.decade, *g, c, traits, cfg.aggregation));
      auto profile = top_traits(g->id, tables.back().aggregate, traits, cfg.top_k);
      if (profile.shortfall()) {
        manifest.notes.push_back("profile " + g->id + ": only " +
                                 std::to_string(profile.traits.size()) + " of " +
                                 std::to_string(cfg.top_k) + " traits qualify");
      }
      summary.profiles.push_back({*g, std::move(profile)});
      auto series = decade_valence_series(spaces.decade, *g, c, traits, cfg.top_k,
                                          cfg.aggregation);
      for (const auto& s : series.missing) {
        manifest.notes.push_back("valence " + g->id + ": no qualifying traits in " + s.label());
      }
      summary.valence.push_back(std::move(series));
    }
  } else {
    manifest.notes.push_back("no decade embeddings: profiles and valence series are empty");
  }

  // Annual: WEAT series, events, drift.
  std::ostringstream bands_tsv;
  bands_tsv << config_hash_line(hash) << "GROUP\tSTART\tEND\tMEAN_R\tTHRESHOLD\n";
  if (!spaces.annual.empty()) {
    for (const auto* g : selected) {
      auto series = weat_series(spaces.annual, *g, attrs);
      for (int y : series.missing_years) {
        manifest.notes.push_back("weat " + g->id + ": no score in " + std::to_string(y));
      }
      for (const auto& ev : cfg.events) {
        try {
          summary.events.push_back(
              event_impact(series, ev.year, cfg.event_window, cfg.sample_unit,
                           cfg.event_year_window));
        } catch (const UserError& e) {
          manifest.notes.push_back(std::string("event skipped: ") + e.what());
        }
      }
      summary.weat.push_back(std::move(series));
      try {
        std::vector<int> missing;
        auto m = correlation_matrix(spaces.annual, *g, traits, cfg.correlation, &missing);
        for (int y : missing) {
          manifest.notes.push_back("drift " + g->id + ": no group label in vocabulary in " +
                                   std::to_string(y));
        }
        auto bands = disruption_bands(m, cfg.band_threshold, cfg.band_min_run);
        for (const auto& b : bands) {
          bands_tsv << g->id << '\t' << b.start_year << '\t' << b.end_year << '\t'
                    << format_number(b.mean_r) << '\t' << format_number(cfg.band_threshold)
                    << '\n';
        }
        summary.bands[g->id] = std::move(bands);
        summary.correlations.emplace(g->id, std::move(m));
      } catch (const UserError& e) {
        manifest.notes.push_back(std::string("drift skipped: ") + e.what());
      }
    }
  } else {
    manifest.notes.push_back("no annual embeddings: WEAT, events and drift are empty");
  }

  // Emit.
  const fs::path& out = cfg.out;
  {
    std::ostringstream tsv;
    tsv << config_hash_line(hash);
    write_association_tsv(tsv, tables);
    detail::write_file(out / "associations.tsv", tsv.str());
  }
  const auto profiles = emit_profile_table(summary.profiles, hash);
  detail::write_file(out / "profiles.tsv", profiles.tsv);
  detail::write_file(out / "profiles.txt", profiles.text);
  const auto valence = emit_valence_series(summary.valence, hash);
  detail::write_file(out / "valence_series.tsv", valence.tsv);
  detail::write_file(out / "valence_series.svg", valence.text);
  {
    std::ostringstream tsv;
    tsv << config_hash_line(hash);
    write_weat_series_tsv(tsv, summary.weat);
    detail::write_file(out / "weat_series.tsv", tsv.str());
  }
  const auto events = emit_event_report(summary.events, hash);
  detail::write_file(out / "events.tsv", events.tsv);
  detail::write_file(out / "events.txt", events.text);
  detail::write_file(out / "bands.tsv", bands_tsv.str());
  for (const auto* g : selected) {
    const std::string stem = "corr_" + detail::safe_file_component(g->id);
    auto it = summary.correlations.find(g->id);
    std::ostringstream tsv;
    tsv << config_hash_line(hash);
    std::string svg_text;
    if (it != summary.correlations.end()) {
      write_matrix_tsv(tsv, it->second);
      svg_text = render_heatmap_svg(it->second, "config_hash=" + hash);
    } else {
      CorrelationMatrix empty;
      empty.group = g->id;
      write_matrix_tsv(tsv, empty);
      svg_text = render_heatmap_svg(empty, "config_hash=" + hash);
    }
    detail::write_file(out / (stem + ".tsv"), tsv.str());
    detail::write_file(out / (stem + ".svg"), svg_text);
  }
  manifest.notes.push_back("disruption bands are a derived summary (threshold " +
                           format_number(cfg.band_threshold) + ", min run " +
                           std::to_string(cfg.band_min_run) + ")");
  detail::write_file(out / "manifest.tsv", manifest.to_tsv());
  log << profiles.text << events.text;
  log << "wrote report to " << out.string() << "\n";
  return summary;
}

// Checks that a report directory is complete and that every file carries the
// manifest's config hash, then prints the formatted tables.
inline void cmd_report(const RunConfig& cfg, std::ostream& log) {
  const fs::path& dir = cfg.out;
  const fs::path manifest_path = dir / "manifest.tsv";
  if (!fs::is_regular_file(manifest_path)) {
    throw UserError("no report found in " + dir.string() + " (run analyze first)");
  }
  std::ifstream min(manifest_path);
  std::string line, hash;
  while (std::getline(min, line)) {
    if (line.starts_with("config_hash\t")) hash = line.substr(12);
  }
  if (hash.empty()) throw UserError(manifest_path.string() + " has no config_hash");
  const std::string tag = "config_hash=" + hash;
  std::vector<fs::path> checked;
  for (const auto& name : analysis_outputs({})) {
    if (name == "manifest.tsv" || name.ends_with(".txt")) continue;
    if (!fs::is_regular_file(dir / name)) throw UserError("missing " + (dir / name).string());
    checked.push_back(dir / name);
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().filename().string().starts_with("corr_")) checked.push_back(entry.path());
  }
  for (const auto& path : checked) {
    std::ifstream in(path);
    std::string head;
    std::getline(in, head);
    if (path.extension() == ".svg") std::getline(in, head);
    if (head.find(tag) == std::string::npos) {
      throw UserError(path.string() + " does not reference config hash " + hash);
    }
  }
  for (const char* name : {"profiles.txt", "events.txt"}) {
    std::ifstream in(dir / name);
    if (!in) throw UserError("missing " + (dir / name).string());
    log << in.rdbuf();
  }
  log << "report " << dir.string() << " is consistent with config " << hash << "\n";
}

}  // namespace diachron
