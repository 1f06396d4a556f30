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

#pragma once

// Speech embedding association test.
//
//   s(w, A, B) = mean_{a in A} cos(w, a) - mean_{b in B} cos(w, b)
//   d_s        = (sum_{x in X} s(x) - sum_{y in Y} s(y)) / sd_{w in X u Y} s(w)
//
// X/Y are the two speaker-group stimulus sets and A/B the positive/negative
// valence sets. Each stimulus is an L x D layer stack reduced to one vector
// by Mean (plain layer average) or Weighted (downstream layer weights c_i,
// averaged over folds) aggregation.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sergap/ingestion.hpp"

namespace sergap {

enum class AggregationKind { Mean, Weighted };
enum class Numerator { Sum, Mean };
enum class StdDevKind { Population, Sample };

std::string_view aggregation_name(AggregationKind k) noexcept;
std::string_view numerator_name(Numerator n) noexcept;
std::string_view stddev_name(StdDevKind s) noexcept;
std::optional<AggregationKind> parse_aggregation(std::string_view token) noexcept;
std::optional<Numerator> parse_numerator(std::string_view token) noexcept;
std::optional<StdDevKind> parse_stddev(std::string_view token) noexcept;

struct AggregationMode {
  AggregationKind kind = AggregationKind::Mean;
  std::vector<double> weights;  // length L, Weighted only
  std::string model_id;         // provenance of the weights, Weighted only
  std::string corpus_id;

  static AggregationMode mean() { return {}; }
  static AggregationMode weighted(const LayerWeights& w);
};

struct AggregatedEmbedding {
  std::string utt_id;
  std::vector<double> values;
  AggregationKind mode = AggregationKind::Mean;
};

std::vector<double> aggregate_mean(const LayerStack& stack);

// Elementwise fold mean, renormalized to sum to 1. Throws DegenerateWeights
// when the mean is all zeros, SchemaMismatch for ragged folds.
std::vector<double> average_fold_weights(const LayerWeights& weights);

// sum_i c_i * layer_i. Weights that do not sum to 1 (beyond 1e-9) are
// renormalized and a note is appended to `warnings` when given. Throws
// SchemaMismatch on a length mismatch, DegenerateWeights on all-zero weights.
std::vector<double> aggregate_weighted(const LayerStack& stack, std::span<const double> weights,
                                       std::vector<std::string>* warnings = nullptr);

AggregatedEmbedding aggregate(const StimulusItem& item, const AggregationMode& mode,
                              std::vector<std::string>* warnings = nullptr);

// Throws ZeroVector naming the offending utt_id, SchemaMismatch on dimension
// mismatch. Result lies in [-2, 2].
double association(const AggregatedEmbedding& w, std::span<const AggregatedEmbedding> a_set,
                   std::span<const AggregatedEmbedding> b_set);
double association(std::span<const double> w, const std::vector<std::vector<double>>& a_set,
                   const std::vector<std::vector<double>>& b_set);

struct SpeatOptions {
  Numerator numerator = Numerator::Sum;
  StdDevKind stddev = StdDevKind::Population;
  // 0 disables the permutation test.
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  // Worker threads for the permutation test; results do not depend on it.
  unsigned threads = 1;
};

struct PermutationTest {
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  std::size_t at_least_as_extreme = 0;
  // Two-sided, (count + 1) / (permutations + 1).
  double p_value = 1.0;
};

struct ItemAssociation {
  std::string utt_id;
  double value = 0.0;
};

struct SpeatResult {
  double d_s = 0.0;  // under the selected numerator
  double d_s_sum = 0.0;
  double d_s_mean = 0.0;
  double numerator_sum = 0.0;
  double numerator_mean = 0.0;
  double stddev_value = 0.0;
  Numerator numerator = Numerator::Sum;
  StdDevKind stddev = StdDevKind::Population;
  AggregationKind aggregation = AggregationKind::Mean;
  std::string weights_model_id;
  std::string weights_corpus_id;
  std::array<std::size_t, 4> set_sizes{};  // |X|, |Y|, |A|, |B|
  std::vector<ItemAssociation> x_associations;
  std::vector<ItemAssociation> y_associations;
  std::vector<std::string> warnings;
  std::optional<PermutationTest> permutation;
};

// Throws DegenerateAssociations when the standard deviation is <= 1e-12,
// ValidationError for invalid stimuli.
SpeatResult effect_size(const StimulusEmbeddings& stimuli, const AggregationMode& mode,
                        const SpeatOptions& options = {});

// Counter-based generator: the stream for permutation i depends only on
// (seed, i).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static SplitMix64 for_stream(std::uint64_t seed, std::uint64_t index);
  std::uint64_t next();
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

}  // namespace sergap
