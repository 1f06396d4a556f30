// Copyright 2026 The sergap Authors.
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

#include "sergap/speat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "sergap/error.hpp"
#include "sergap/kernels.hpp"

namespace sergap {
namespace {

constexpr double kMinStdDev = 1e-12;

std::vector<AggregatedEmbedding> aggregate_set(const std::vector<StimulusItem>& items,
                                               const AggregationMode& mode,
                                               std::vector<std::string>* warnings) {
  std::vector<AggregatedEmbedding> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(aggregate(item, mode, warnings));
  return out;
}

double norm_or_throw(std::span<const double> v, const std::string& utt_id) {
  const double n = std::sqrt(kernels::squared_norm(v));
  if (!(n > 0.0)) raise(ErrorKind::ZeroVector, "zero-norm embedding for '" + utt_id + "'");
  return n;
}

// Mean of the unit vectors of a set: mean_a cos(w, a) = w . centroid / |w|.
std::vector<double> unit_centroid(std::span<const AggregatedEmbedding> set, std::size_t dim) {
  std::vector<double> c(dim, 0.0);
  for (const auto& e : set) {
    if (e.values.size() != dim) {
      raise(ErrorKind::SchemaMismatch, "embedding '" + e.utt_id + "' has the wrong dimension");
    }
    kernels::axpy(1.0 / norm_or_throw(e.values, e.utt_id), e.values, c);
  }
  kernels::scale(1.0 / static_cast<double>(set.size()), c);
  return c;
}

double association_with(const AggregatedEmbedding& w, std::span<const double> contrast) {
  if (w.values.size() != contrast.size()) {
    raise(ErrorKind::SchemaMismatch, "embedding '" + w.utt_id + "' has the wrong dimension");
  }
  return kernels::dot(w.values, contrast) / norm_or_throw(w.values, w.utt_id);
}

std::vector<double> contrast_vector(std::span<const AggregatedEmbedding> a_set,
                                    std::span<const AggregatedEmbedding> b_set, std::size_t dim) {
  if (a_set.empty() || b_set.empty()) {
    raise(ErrorKind::ValidationError, "association needs non-empty A and B sets");
  }
  std::vector<double> contrast = unit_centroid(a_set, dim);
  kernels::axpy(-1.0, unit_centroid(b_set, dim), contrast);
  return contrast;
}

struct Numerators {
  double sum;
  double mean;
};

Numerators numerators(std::span<const double> xs, std::span<const double> ys) {
  const double sx = kernels::sum(xs);
  const double sy = kernels::sum(ys);
  return {sx - sy, sx / static_cast<double>(xs.size()) - sy / static_cast<double>(ys.size())};
}

double stat_of(const Numerators& n, Numerator which) {
  return which == Numerator::Sum ? n.sum : n.mean;
}

PermutationTest run_permutation_test(std::span<const double> pooled, std::size_t nx,
                                     double observed, const SpeatOptions& opt) {
  PermutationTest out;
  out.permutations = opt.permutations;
  out.seed = opt.seed;
  const double threshold = std::abs(observed) * (1.0 - 1e-12);

  auto count_range = [&](std::size_t begin, std::size_t end) {
    std::vector<double> shuffled(pooled.begin(), pooled.end());
    std::size_t hits = 0;
    for (std::size_t i = begin; i < end; ++i) {
      std::copy(pooled.begin(), pooled.end(), shuffled.begin());
      SplitMix64 rng = SplitMix64::for_stream(opt.seed, i);
      for (std::size_t j = shuffled.size(); j > 1; --j) {
        std::swap(shuffled[j - 1], shuffled[rng.below(j)]);
      }
      std::span<const double> all(shuffled);
      const Numerators n = numerators(all.first(nx), all.subspan(nx));
      if (std::abs(stat_of(n, opt.numerator)) >= threshold) ++hits;
    }
    return hits;
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, 64));
  if (threads == 1 || opt.permutations < 2 * threads) {
    out.at_least_as_extreme = count_range(0, opt.permutations);
  } else {
    std::vector<std::size_t> hits(threads, 0);
    {
      std::vector<std::jthread> workers;
      const std::size_t chunk = (opt.permutations + threads - 1) / threads;
      for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = std::min(opt.permutations, t * chunk);
        const std::size_t end = std::min(opt.permutations, begin + chunk);
        workers.emplace_back([&, t, begin, end] { hits[t] = count_range(begin, end); });
      }
    }
    out.at_least_as_extreme = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
  }
  out.p_value = static_cast<double>(out.at_least_as_extreme + 1) /
                static_cast<double>(opt.permutations + 1);
  return out;
}

}  // namespace

std::string_view aggregation_name(AggregationKind k) noexcept {
  return k == AggregationKind::Mean ? "mean" : "weighted";
}
std::string_view numerator_name(Numerator n) noexcept {
  return n == Numerator::Sum ? "sum" : "mean";
}
std::string_view stddev_name(StdDevKind s) noexcept {
  return s == StdDevKind::Population ? "population" : "sample";
}
std::optional<AggregationKind> parse_aggregation(std::string_view t) noexcept {
  if (t == "mean") return AggregationKind::Mean;
  if (t == "weighted") return AggregationKind::Weighted;
  return std::nullopt;
}
std::optional<Numerator> parse_numerator(std::string_view t) noexcept {
  if (t == "sum") return Numerator::Sum;
  if (t == "mean") return Numerator::Mean;
  return std::nullopt;
}
std::optional<StdDevKind> parse_stddev(std::string_view t) noexcept {
  if (t == "population") return StdDevKind::Population;
  if (t == "sample") return StdDevKind::Sample;
  return std::nullopt;
}

AggregationMode AggregationMode::weighted(const LayerWeights& w) {
  return {AggregationKind::Weighted, average_fold_weights(w), w.model_id, w.corpus_id};
}

std::vector<double> aggregate_mean(const LayerStack& stack) {
  std::vector<double> out(stack.dim(), 0.0);
  for (std::size_t l = 0; l < stack.layers(); ++l) kernels::axpy(1.0, stack.layer(l), out);
  if (stack.layers() > 0) kernels::scale(1.0 / static_cast<double>(stack.layers()), out);
  return out;
}

std::vector<double> average_fold_weights(const LayerWeights& weights) {
  if (weights.folds.empty()) raise(ErrorKind::ValidationError, "no folds in layer weights");
  const std::size_t L = weights.folds.front().size();
  std::vector<double> mean(L, 0.0);
  for (const auto& fold : weights.folds) {
    if (fold.size() != L) raise(ErrorKind::SchemaMismatch, "fold weight vectors differ in length");
    kernels::axpy(1.0, fold, mean);
  }
  kernels::scale(1.0 / static_cast<double>(weights.folds.size()), mean);
  const double total = kernels::sum(mean);
  if (!(total > 0.0)) raise(ErrorKind::DegenerateWeights, "average layer weights are all zero");
  kernels::scale(1.0 / total, mean);
  return mean;
}

std::vector<double> aggregate_weighted(const LayerStack& stack, std::span<const double> weights,
                                       std::vector<std::string>* warnings) {
  if (weights.size() != stack.layers()) {
    raise(ErrorKind::SchemaMismatch, std::to_string(weights.size()) + " layer weights for " +
                                         std::to_string(stack.layers()) + " layers");
  }
  const double total = kernels::sum(weights);
  if (!(total > 0.0)) raise(ErrorKind::DegenerateWeights, "layer weights sum to zero");
  const bool renormalize = std::abs(total - 1.0) > 1e-9;
  if (renormalize && warnings) {
    warnings->push_back("layer weights summed to " + std::to_string(total) + "; renormalized");
  }
  const double factor = renormalize ? 1.0 / total : 1.0;
  std::vector<double> out(stack.dim(), 0.0);
  for (std::size_t l = 0; l < stack.layers(); ++l) {
    if (weights[l] != 0.0) kernels::axpy(weights[l] * factor, stack.layer(l), out);
  }
  return out;
}

AggregatedEmbedding aggregate(const StimulusItem& item, const AggregationMode& mode,
                              std::vector<std::string>* warnings) {
  AggregatedEmbedding out;
  out.utt_id = item.utt_id;
  out.mode = mode.kind;
  out.values = mode.kind == AggregationKind::Mean
                   ? aggregate_mean(item.stack)
                   : aggregate_weighted(item.stack, mode.weights, warnings);
  return out;
}

double association(const AggregatedEmbedding& w, std::span<const AggregatedEmbedding> a_set,
                   std::span<const AggregatedEmbedding> b_set) {
  const auto contrast = contrast_vector(a_set, b_set, w.values.size());
  return association_with(w, contrast);
}

double association(std::span<const double> w, const std::vector<std::vector<double>>& a_set,
                   const std::vector<std::vector<double>>& b_set) {
  auto wrap = [](const std::vector<std::vector<double>>& vs, const char* name) {
    std::vector<AggregatedEmbedding> out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      out.push_back({std::string(name) + "[" + std::to_string(i) + "]", vs[i]});
    }
    return out;
  };
  const AggregatedEmbedding target{"w", std::vector<double>(w.begin(), w.end())};
  return association(target, wrap(a_set, "A"), wrap(b_set, "B"));
}

SpeatResult effect_size(const StimulusEmbeddings& stimuli, const AggregationMode& mode,
                        const SpeatOptions& options) {
  stimuli.validate();
  SpeatResult result;
  result.numerator = options.numerator;
  result.stddev = options.stddev;
  result.aggregation = mode.kind;
  result.weights_model_id = mode.model_id;
  result.weights_corpus_id = mode.corpus_id;
  for (StimulusSet s : kStimulusSets) {
    result.set_sizes[static_cast<std::size_t>(s)] = stimuli.set(s).size();
  }

  const auto xs = aggregate_set(stimuli.set(StimulusSet::X), mode, &result.warnings);
  const auto ys = aggregate_set(stimuli.set(StimulusSet::Y), mode, nullptr);
  const auto as = aggregate_set(stimuli.set(StimulusSet::A), mode, nullptr);
  const auto bs = aggregate_set(stimuli.set(StimulusSet::B), mode, nullptr);
  const auto contrast = contrast_vector(as, bs, stimuli.dim());

  std::vector<double> pooled;
  pooled.reserve(xs.size() + ys.size());
  for (const auto& x : xs) {
    pooled.push_back(association_with(x, contrast));
    result.x_associations.push_back({x.utt_id, pooled.back()});
  }
  for (const auto& y : ys) {
    pooled.push_back(association_with(y, contrast));
    result.y_associations.push_back({y.utt_id, pooled.back()});
  }

  const std::size_t count = pooled.size();
  const double mean = kernels::sum(pooled) / static_cast<double>(count);
  double ss = 0.0;
  for (double s : pooled) ss += (s - mean) * (s - mean);
  if (options.stddev == StdDevKind::Sample && count < 2) {
    raise(ErrorKind::DegenerateAssociations, "sample standard deviation needs two associations");
  }
  const double denom = options.stddev == StdDevKind::Population ? static_cast<double>(count)
                                                               : static_cast<double>(count - 1);
  result.stddev_value = std::sqrt(ss / denom);
  if (!(result.stddev_value > kMinStdDev)) {
    raise(ErrorKind::DegenerateAssociations,
          "all associations are identical (standard deviation " +
              std::to_string(result.stddev_value) + ")");
  }

  std::span<const double> all(pooled);
  const Numerators num = numerators(all.first(xs.size()), all.subspan(xs.size()));
  result.numerator_sum = num.sum;
  result.numerator_mean = num.mean;
  result.d_s_sum = num.sum / result.stddev_value;
  result.d_s_mean = num.mean / result.stddev_value;
  result.d_s = options.numerator == Numerator::Sum ? result.d_s_sum : result.d_s_mean;

  if (options.permutations > 0) {
    result.permutation =
        run_permutation_test(pooled, xs.size(), stat_of(num, options.numerator), options);
  }
  return result;
}

SplitMix64 SplitMix64::for_stream(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mixer(seed);
  const std::uint64_t base = mixer.next();
  return SplitMix64(base ^ SplitMix64(index).next());
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
}

}  // namespace sergap
