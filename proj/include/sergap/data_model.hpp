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

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sergap {

// Affect polarity of an emotion class. Neutral covers classes that belong to
// none of the positive, negative or both-valence sets (e.g. "Neutral",
// "Other") and are left out of the valence gap.
enum class Valence { Positive, Negative, Both, Neutral };

std::string_view valence_name(Valence v) noexcept;
std::optional<Valence> parse_valence(std::string_view token) noexcept;

// Built-in emotion -> valence taxonomy (case-insensitive, accepts common
// adjective forms such as "Happy" or "Angry").
std::optional<Valence> default_valence(std::string_view class_name);

class EmotionSchema {
 public:
  // Throws SchemaMismatch on an empty roster, fewer than two classes,
  // duplicate names, or a class without a valence entry.
  EmotionSchema(std::string corpus_id, std::vector<std::string> classes,
                const std::map<std::string, Valence>& valence_of);

  // Valences taken from default_valence(); unknown names are an error.
  static EmotionSchema with_default_taxonomy(std::string corpus_id,
                                             std::vector<std::string> classes);

  const std::string& corpus_id() const noexcept { return corpus_id_; }
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  std::size_t size() const noexcept { return classes_.size(); }
  const std::string& class_name(std::size_t k) const { return classes_.at(k); }
  Valence valence(std::size_t k) const { return valence_.at(k); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  // Same schema with the class order rearranged: new class j is old class order[j].
  EmotionSchema permuted(std::span<const std::size_t> order) const;

  bool operator==(const EmotionSchema&) const = default;

 private:
  std::string corpus_id_;
  std::vector<std::string> classes_;
  std::vector<Valence> valence_;
};

struct GroupPair {
  std::string advantaged = "female";
  std::string disadvantaged = "male";

  // Throws SchemaMismatch when the labels coincide.
  static GroupPair make(std::string advantaged, std::string disadvantaged);
  GroupPair swapped() const { return {disadvantaged, advantaged}; }
  bool operator==(const GroupPair&) const = default;
};

struct UtteranceRecord {
  std::string utt_id;
  std::string group;
  std::vector<double> gold;
  std::optional<std::vector<double>> pred;
  // Only meaningful for utterances of both-valence classes; Positive or Negative.
  std::optional<Valence> valence_tag;
  std::optional<int> fold;

  bool operator==(const UtteranceRecord&) const = default;
};

// Throws ValidationError describing the first violated invariant.
void validate_record(const UtteranceRecord& record, std::size_t n_classes);

enum class GoldThresholdRule { SameAsPred, Argmax };

std::string_view gold_rule_name(GoldThresholdRule rule) noexcept;
std::optional<GoldThresholdRule> parse_gold_rule(std::string_view token) noexcept;

inline constexpr double kDefaultSmoothing = 0.05;

// Annotation counts -> frequency distribution -> label smoothing,
// out_k = (1 - epsilon) * freq_k + epsilon / n, positional in schema order.
std::vector<double> build_soft_label(const std::map<std::string, double>& annotation_counts,
                                     const EmotionSchema& schema,
                                     double epsilon = kDefaultSmoothing);

// Indices k (ascending) with distribution[k] > 1/n, strictly.
std::vector<std::size_t> binarize(std::span<const double> distribution, std::size_t n);

// Gold label set under the configured rule. Argmax breaks ties toward the
// lowest index.
std::vector<std::size_t> binarize_gold(std::span<const double> distribution, std::size_t n,
                                       GoldThresholdRule rule);

}  // namespace sergap
