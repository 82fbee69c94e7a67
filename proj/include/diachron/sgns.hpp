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

// Skip-gram with negative sampling, trained independently per time slice.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "diachron/corpus.hpp"
#include "diachron/error.hpp"

namespace diachron {

struct TrainerConfig {
  std::size_t dimension = 300;
  int window = 3;
  int negatives = 5;
  int epochs = 5;
  double initial_learning_rate = 0.025;
  std::uint64_t min_count = 10;
  std::optional<double> subsample_threshold = 1e-4;
  std::uint64_t seed = 1;
  double unigram_power = 0.75;
  // Worker threads per slice. Ignored (forced to 1) in strict mode.
  int workers = 1;
  // Single worker, fixed update order: bit-identical output for a given seed.
  bool strict = false;

  void validate() const {
    if (dimension < 1) throw UserError("train.dimension must be >= 1");
    if (window < 1) throw UserError("train.window must be >= 1");
    if (negatives < 1) throw UserError("train.negatives must be >= 1");
    if (epochs < 1) throw UserError("train.epochs must be >= 1");
    if (!(initial_learning_rate > 0) || !std::isfinite(initial_learning_rate)) {
      throw UserError("train.learning_rate must be > 0");
    }
    if (subsample_threshold && !(*subsample_threshold > 0)) {
      throw UserError("train.subsample must be > 0 or 'none'");
    }
    if (!std::isfinite(unigram_power)) throw UserError("train.unigram_power must be finite");
    if (workers < 1) throw UserError("workers must be >= 1");
  }
  int effective_workers() const noexcept { return strict ? 1 : workers; }
};

// One trained vector space. Rows of `input` are the analysis vectors; the
// output (context) matrix is kept for reproducibility.
struct EmbeddingSpace {
  TimeSlice slice;
  Vocabulary vocab;
  std::size_t dimension = 0;
  std::vector<float> input;   // |V| x d, row-major
  std::vector<float> output;  // |V| x d, row-major

  std::span<const float> input_row(std::size_t i) const {
    return std::span<const float>(input).subspan(i * dimension, dimension);
  }
  std::span<const float> output_row(std::size_t i) const {
    return std::span<const float>(output).subspan(i * dimension, dimension);
  }
  std::optional<std::span<const float>> vector(std::string_view token) const {
    auto idx = vocab.find(token);
    if (!idx) return std::nullopt;
    return input_row(*idx);
  }
  bool all_finite() const {
    auto finite = [](float x) { return std::isfinite(x); };
    return std::all_of(input.begin(), input.end(), finite) &&
           std::all_of(output.begin(), output.end(), finite);
  }
  friend bool operator==(const EmbeddingSpace&, const EmbeddingSpace&) = default;
};

// ---------------------------------------------------------------------------
// Randomness. The engine is fully specified by the standard; conversions are
// done by hand so draws are identical across standard libraries.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Walker alias table: O(1) draws from a fixed discrete distribution.
class AliasSampler {
 public:
  AliasSampler() = default;

  explicit AliasSampler(std::span<const double> weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw UserError("alias sampler needs at least one weight");
    double total = 0;
    for (double w : weights) {
      if (!(w >= 0) || !std::isfinite(w)) throw UserError("alias weights must be finite and >= 0");
      total += w;
    }
    if (!(total > 0)) throw UserError("alias weights sum to zero");
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const auto s = small.back();
      small.pop_back();
      const auto l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (auto i : large) prob_[i] = 1.0;
    for (auto i : small) prob_[i] = 1.0;  // numerical leftovers
  }

  std::uint32_t sample(Rng& rng) const {
    const auto column = static_cast<std::uint32_t>(rng.below(prob_.size()));
    return rng.uniform() < prob_[column] ? column : alias_[column];
  }
  std::size_t size() const noexcept { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

// Negative-sampling distribution: frequency^power, normalised.
inline std::vector<double> unigram_weights(const Vocabulary& vocab, double power) {
  std::vector<double> w(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    w[i] = std::pow(static_cast<double>(vocab.frequency(i)), power);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Objective and gradients.

template <std::floating_point T>
T sigmoid(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <std::floating_point T>
T log_sigmoid(T x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

// d/ds log sigmoid(+s) for a positive pair, d/ds log sigmoid(-s) for a
// negative sample, where s is the center/context dot product.
template <std::floating_point T>
T score_gradient(T score, bool positive) {
  return (positive ? T(1) : T(0)) - sigmoid(score);
}

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
  const std::size_t n = a.size();
  T s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
    s4 += a[i + 4] * b[i + 4];
    s5 += a[i + 5] * b[i + 5];
    s6 += a[i + 6] * b[i + 6];
    s7 += a[i + 7] * b[i + 7];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return ((s0 + s4) + (s1 + s5)) + ((s2 + s6) + (s3 + s7));
}

template <class T>
void axpy(T alpha, std::span<const T> x, std::span<T> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// SGNS objective of one weighted training pair with a fixed list of negative
// context vectors:
//   weight * ( log s(c.o) + sum_k log s(-c.n_k) )
template <std::floating_point T>
T sgns_pair_objective(std::span<const T> center, std::span<const T> context,
                      std::span<const std::span<const T>> negatives, T weight = 1) {
  T total = log_sigmoid(dot(center, context));
  for (auto neg : negatives) total += log_sigmoid(-dot(center, neg));
  return weight * total;
}

template <std::floating_point T>
struct SgnsPairGradient {
  std::vector<T> center;
  std::vector<T> context;
  std::vector<std::vector<T>> negatives;
};

// Analytic gradient of sgns_pair_objective with respect to every vector it
// touches. Uses the same score_gradient the trainer applies.
template <std::floating_point T>
SgnsPairGradient<T> sgns_pair_gradient(std::span<const T> center, std::span<const T> context,
                                       std::span<const std::span<const T>> negatives,
                                       T weight = 1) {
  const std::size_t d = center.size();
  SgnsPairGradient<T> g{std::vector<T>(d, T(0)), std::vector<T>(d, T(0)), {}};
  const T gp = weight * score_gradient(dot(center, context), true);
  axpy<T>(gp, context, g.center);
  axpy<T>(gp, center, g.context);
  for (auto neg : negatives) {
    const T gn = weight * score_gradient(dot(center, neg), false);
    axpy<T>(gn, neg, g.center);
    std::vector<T> gneg(d, T(0));
    axpy<T>(gn, center, gneg);
    g.negatives.push_back(std::move(gneg));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Pair sources. A source is split into units (sequences or individual pairs)
// that workers claim in contiguous shards.

template <class S>
concept PairSource = requires(const S& s, std::size_t unit, Rng& rng) {
  { s.unit_count() } -> std::convertible_to<std::size_t>;
  // Weighted pair count of a unit before subsampling; drives the
  // learning-rate schedule.
  { s.unit_progress(unit) } -> std::convertible_to<std::uint64_t>;
  s.visit(unit, rng, [](std::uint32_t, std::uint32_t, std::uint64_t) {});
};

// Sequences of vocabulary indices (OOV already removed) with weights.
struct EncodedCorpus {
  std::vector<std::uint32_t> indices;
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint64_t> weights;

  std::size_t size() const noexcept { return weights.size(); }
  std::span<const std::uint32_t> sequence(std::size_t i) const {
    return std::span<const std::uint32_t>(indices).subspan(offsets[i],
                                                           offsets[i + 1] - offsets[i]);
  }
  void add(std::span<const std::uint32_t> seq, std::uint64_t weight) {
    if (seq.size() < 2) return;  // no pairs
    indices.insert(indices.end(), seq.begin(), seq.end());
    offsets.push_back(indices.size());
    weights.push_back(weight);
  }

  static EncodedCorpus from_bucket(const SliceBucket& bucket, const TokenTable& tokens,
                                   const Vocabulary& vocab) {
    constexpr auto kOov = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> to_vocab(tokens.size(), kOov);
    for (std::uint32_t id = 0; id < tokens.size(); ++id) {
      if (auto v = vocab.find(tokens.token(id))) to_vocab[id] = *v;
    }
    EncodedCorpus out;
    std::vector<std::uint32_t> seq;
    for (std::size_t r = 0; r < bucket.record_count(); ++r) {
      seq.clear();
      for (std::uint32_t id : bucket.record(r)) {
        if (to_vocab[id] != kOov) seq.push_back(to_vocab[id]);
      }
      out.add(seq, bucket.weights[r]);
    }
    return out;
  }

  static EncodedCorpus from_records(std::span<const Record> records, const Vocabulary& vocab) {
    EncodedCorpus out;
    for (const auto& r : records) out.add(encode(record_tokens(r), vocab), record_weight(r));
    return out;
  }
};

// Word2vec-style frequent-word subsampling: token i is kept with probability
// min(1, (sqrt(f/(t N)) + 1) * t N / f).
inline std::vector<double> keep_probabilities(const Vocabulary& vocab,
                                              std::optional<double> threshold) {
  std::vector<double> keep(vocab.size(), 1.0);
  if (!threshold) return keep;
  const double tn = *threshold * static_cast<double>(vocab.total_frequency());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const double f = static_cast<double>(vocab.frequency(i));
    keep[i] = std::min(1.0, (std::sqrt(f / tn) + 1.0) * tn / f);
  }
  return keep;
}

class SequencePairSource {
 public:
  SequencePairSource(const EncodedCorpus& corpus, int window, std::vector<double> keep)
      : corpus_(&corpus), window_(window), keep_(std::move(keep)) {}

  std::size_t unit_count() const noexcept { return corpus_->size(); }
  std::uint64_t unit_progress(std::size_t unit) const {
    return corpus_->weights[unit] *
           window_pair_count(corpus_->sequence(unit).size(), window_);
  }
  template <class F>
  void visit(std::size_t unit, Rng& rng, F&& f) const {
    thread_local std::vector<std::uint32_t> kept;
    kept.clear();
    for (std::uint32_t idx : corpus_->sequence(unit)) {
      if (keep_[idx] >= 1.0 || rng.uniform() < keep_[idx]) kept.push_back(idx);
    }
    const std::uint64_t w = corpus_->weights[unit];
    for_each_window_pair(kept, window_,
                         [&](std::uint32_t c, std::uint32_t o) { f(c, o, w); });
  }

 private:
  const EncodedCorpus* corpus_;
  int window_;
  std::vector<double> keep_;
};

// An explicit list of weighted pairs, trained in the given order.
class PairListSource {
 public:
  explicit PairListSource(std::span<const TrainingPair> pairs) : pairs_(pairs) {}

  std::size_t unit_count() const noexcept { return pairs_.size(); }
  std::uint64_t unit_progress(std::size_t unit) const { return pairs_[unit].weight; }
  template <class F>
  void visit(std::size_t unit, Rng&, F&& f) const {
    f(pairs_[unit].center, pairs_[unit].context, pairs_[unit].weight);
  }

 private:
  std::span<const TrainingPair> pairs_;
};

// ---------------------------------------------------------------------------
// Trainer.

// Weighted pairs scale the step; the product lr * weight is capped so a
// single high-count n-gram cannot blow up the parameters.
inline constexpr double kMaxScaledLearningRate = 0.5;
inline constexpr double kMinLearningRateFraction = 1e-4;

class SgnsTrainer {
 public:
  SgnsTrainer(const Vocabulary& vocab, TrainerConfig cfg) : vocab_(&vocab), cfg_(cfg) {
    cfg_.validate();
    if (vocab.empty()) throw UserError("cannot train on an empty vocabulary");
    const auto w = unigram_weights(vocab, cfg_.unigram_power);
    sampler_ = AliasSampler(w);
  }

  const AliasSampler& negative_sampler() const noexcept { return sampler_; }

  template <PairSource S>
  EmbeddingSpace train(const S& source, const TimeSlice& slice) const {
    const std::size_t d = cfg_.dimension;
    const std::size_t v = vocab_->size();
    EmbeddingSpace space{slice, *vocab_, d, std::vector<float>(v * d),
                         std::vector<float>(v * d, 0.0f)};
    Rng init_rng(mix_seed(cfg_.seed, 0));
    for (auto& x : space.input) {
      x = static_cast<float>((init_rng.uniform() - 0.5) / static_cast<double>(d));
    }

    std::uint64_t per_epoch = 0;
    for (std::size_t u = 0; u < source.unit_count(); ++u) per_epoch += source.unit_progress(u);
    const double total = static_cast<double>(per_epoch) * cfg_.epochs;

    const int workers = std::max(
        1, std::min<int>(cfg_.effective_workers(), static_cast<int>(source.unit_count())));
    std::atomic<std::uint64_t> progress{0};
    if (workers == 1) {
      run_worker(source, space, 0, source.unit_count(), 0, total, progress);
    } else {
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
      {
        std::vector<std::jthread> threads;
        const std::size_t units = source.unit_count();
        for (int t = 0; t < workers; ++t) {
          const std::size_t begin = units * t / workers;
          const std::size_t end = units * (t + 1) / workers;
          threads.emplace_back([&, t, begin, end] {
            try {
              run_worker(source, space, begin, end, static_cast<std::uint64_t>(t), total,
                         progress);
            } catch (...) {
              errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
          });
        }
      }
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    if (!space.all_finite()) {
      throw NumericalError("non-finite parameter after training slice " + slice.label());
    }
    return space;
  }

 private:
  template <PairSource S>
  void run_worker(const S& source, EmbeddingSpace& space, std::size_t begin, std::size_t end,
                  std::uint64_t worker, double total,
                  std::atomic<std::uint64_t>& progress) const {
    const std::size_t d = cfg_.dimension;
    Rng rng(mix_seed(cfg_.seed, worker + 1));
    std::vector<float> center_grad(d);
    const std::span<float> input(space.input);
    const std::span<float> output(space.output);
    const double lr0 = cfg_.initial_learning_rate;
    std::uint64_t step = 0;

    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      for (std::size_t u = begin; u < end; ++u) {
        const double done = static_cast<double>(progress.load(std::memory_order_relaxed));
        const double lr =
            lr0 * std::max(kMinLearningRateFraction, total > 0 ? 1.0 - done / total : 1.0);
        source.visit(u, rng, [&](std::uint32_t c, std::uint32_t o, std::uint64_t weight) {
          ++step;
          const float rate = static_cast<float>(
              std::min(lr * static_cast<double>(weight), kMaxScaledLearningRate));
          std::span<float> vc = input.subspan(std::size_t{c} * d, d);
          std::fill(center_grad.begin(), center_grad.end(), 0.0f);
          for (int k = 0; k <= cfg_.negatives; ++k) {
            std::uint32_t target = o;
            if (k > 0) {
              target = sampler_.sample(rng);
              if (target == o) continue;
            }
            std::span<float> ut = output.subspan(std::size_t{target} * d, d);
            const float score = dot<float>(vc, ut);
            if (!std::isfinite(score)) {
              throw NumericalError("non-finite score for token '" + vocab_->token(c) +
                                   "' (context '" + vocab_->token(target) + "') at step " +
                                   std::to_string(step) + " of epoch " +
                                   std::to_string(epoch + 1));
            }
            const float g = rate * score_gradient(score, k == 0);
            axpy<float>(g, ut, center_grad);
            axpy<float>(g, vc, ut);
          }
          axpy<float>(1.0f, center_grad, vc);
        });
        progress.fetch_add(source.unit_progress(u), std::memory_order_relaxed);
      }
    }
  }

  const Vocabulary* vocab_;
  TrainerConfig cfg_;
  AliasSampler sampler_;
};

inline EmbeddingSpace train(const EncodedCorpus& corpus, const Vocabulary& vocab,
                            const TrainerConfig& cfg, const TimeSlice& slice) {
  SgnsTrainer trainer(vocab, cfg);
  SequencePairSource source(corpus, cfg.window,
                            keep_probabilities(vocab, cfg.subsample_threshold));
  return trainer.train(source, slice);
}

inline EmbeddingSpace train(std::span<const TrainingPair> pairs, const Vocabulary& vocab,
                            const TrainerConfig& cfg, const TimeSlice& slice) {
  for (const auto& p : pairs) {
    if (p.center >= vocab.size() || p.context >= vocab.size()) {
      throw UserError("training pair index out of range");
    }
  }
  SgnsTrainer trainer(vocab, cfg);
  return trainer.train(PairListSource(pairs), slice);
}

// Mean SGNS objective over `pairs`, with negatives drawn from the unigram
// distribution using a fixed seed so two spaces can be compared on the same
// draws.
inline double mean_sgns_objective(const EmbeddingSpace& space, std::span<const TrainingPair> pairs,
                                  int negatives, double unigram_power, std::uint64_t seed) {
  if (pairs.empty()) return 0.0;
  AliasSampler sampler(unigram_weights(space.vocab, unigram_power));
  Rng rng(seed);
  const std::size_t d = space.dimension;
  std::vector<double> c(d), o(d);
  std::vector<std::vector<double>> negs(static_cast<std::size_t>(negatives),
                                        std::vector<double>(d));
  std::vector<std::span<const double>> neg_views;
  double total = 0;
  for (const auto& p : pairs) {
    auto to_double = [&](std::span<const float> src, std::vector<double>& dst) {
      std::copy(src.begin(), src.end(), dst.begin());
    };
    to_double(space.input_row(p.center), c);
    to_double(space.output_row(p.context), o);
    neg_views.clear();
    for (auto& n : negs) {
      to_double(space.output_row(sampler.sample(rng)), n);
      neg_views.emplace_back(n);
    }
    total += sgns_pair_objective<double>(c, o, neg_views);
  }
  return total / static_cast<double>(pairs.size());
}

// ---------------------------------------------------------------------------
// Whole-corpus training.

struct SkippedSlice {
  TimeSlice slice;
  std::string reason;
};

struct SliceTrainingReport {
  std::vector<TimeSlice> trained;
  std::vector<SkippedSlice> skipped;
  std::map<TimeSlice, std::pair<std::uint64_t, std::size_t>> inventory;  // tokens, |V|
};

// Trains one space per slice and hands each to `sink` as soon as it is ready,
// so callers can persist spaces without holding all of them. Slices whose
// vocabulary is empty are skipped and reported.
inline SliceTrainingReport train_all_slices(
    const SlicedCorpus& corpus, const TrainerConfig& cfg,
    const std::function<void(EmbeddingSpace&&)>& sink) {
  cfg.validate();
  SliceTrainingReport report;
  for (const auto& [slice, bucket] : corpus.slices) {
    Vocabulary vocab;
    try {
      vocab = build_vocabulary(bucket, *corpus.tokens, cfg.min_count, slice);
    } catch (const UserError& e) {
      report.skipped.push_back({slice, e.what()});
      continue;
    }
    report.inventory[slice] = {bucket.token_count, vocab.size()};
    const auto encoded = EncodedCorpus::from_bucket(bucket, *corpus.tokens, vocab);
    sink(train(encoded, vocab, cfg, slice));
    report.trained.push_back(slice);
  }
  if (report.trained.empty()) {
    throw UserError("all slices are empty: no slice has a token with frequency above " +
                    std::to_string(cfg.min_count));
  }
  return report;
}

inline std::map<TimeSlice, EmbeddingSpace> train_all_slices(const SlicedCorpus& corpus,
                                                            const TrainerConfig& cfg,
                                                            SliceTrainingReport* report = nullptr) {
  std::map<TimeSlice, EmbeddingSpace> spaces;
  auto r = train_all_slices(corpus, cfg, [&](EmbeddingSpace&& s) {
    const auto key = s.slice;
    spaces.emplace(key, std::move(s));
  });
  if (report) *report = std::move(r);
  return spaces;
}

// Builds a space from explicit input vectors (output matrix zeroed). Token
// frequencies are set to 1; every vector must have the same dimension.
inline EmbeddingSpace make_embedding_space(
    const TimeSlice& slice,
    const std::vector<std::pair<std::string, std::vector<float>>>& vectors) {
  EmbeddingSpace space;
  space.slice = slice;
  space.dimension = vectors.empty() ? 0 : vectors.front().second.size();
  std::vector<Vocabulary::Entry> entries;
  for (const auto& [token, v] : vectors) {
    if (v.size() != space.dimension) throw UserError("inconsistent vector dimension for " + token);
    entries.push_back({token, 1});
    space.input.insert(space.input.end(), v.begin(), v.end());
  }
  space.vocab = Vocabulary(std::move(entries));
  space.output.assign(space.input.size(), 0.0f);
  return space;
}

}  // namespace diachron
