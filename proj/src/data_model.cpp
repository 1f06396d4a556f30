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

#include "sergap/data_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "sergap/error.hpp"

namespace sergap {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct TaxonomyEntry {
  std::string_view name;
  Valence valence;
};

constexpr TaxonomyEntry kTaxonomy[] = {
    {"happiness", Valence::Positive},     {"happy", Valence::Positive},
    {"excitement", Valence::Positive},    {"excited", Valence::Positive},
    {"relax", Valence::Positive},         {"relaxed", Valence::Positive},
    {"joy", Valence::Positive},
    {"anger", Valence::Negative},         {"angry", Valence::Negative},
    {"disgust", Valence::Negative},       {"disgusted", Valence::Negative},
    {"contempt", Valence::Negative},      {"frustration", Valence::Negative},
    {"frustrated", Valence::Negative},    {"disappointment", Valence::Negative},
    {"disappointed", Valence::Negative},  {"sadness", Valence::Negative},
    {"sad", Valence::Negative},           {"fear", Valence::Negative},
    {"fearful", Valence::Negative},
    {"surprise", Valence::Both},          {"surprised", Valence::Both},
    {"neutral", Valence::Neutral},        {"other", Valence::Neutral},
};

std::string describe_index(std::size_t k) { return "index " + std::to_string(k); }

}  // namespace

std::string_view valence_name(Valence v) noexcept {
  switch (v) {
    case Valence::Positive: return "positive";
    case Valence::Negative: return "negative";
    case Valence::Both: return "both";
    case Valence::Neutral: return "neutral";
  }
  return "unknown";
}

std::optional<Valence> parse_valence(std::string_view token) noexcept {
  if (token == "positive") return Valence::Positive;
  if (token == "negative") return Valence::Negative;
  if (token == "both") return Valence::Both;
  if (token == "neutral") return Valence::Neutral;
  return std::nullopt;
}

std::optional<Valence> default_valence(std::string_view class_name) {
  const std::string key = lower(class_name);
  for (const auto& entry : kTaxonomy) {
    if (entry.name == key) return entry.valence;
  }
  return std::nullopt;
}

EmotionSchema::EmotionSchema(std::string corpus_id, std::vector<std::string> classes,
                             const std::map<std::string, Valence>& valence_of)
    : corpus_id_(std::move(corpus_id)), classes_(std::move(classes)) {
  if (classes_.size() < 2) {
    raise(ErrorKind::SchemaMismatch, "a schema needs at least two classes, got " +
                                         std::to_string(classes_.size()));
  }
  std::set<std::string_view> seen;
  valence_.reserve(classes_.size());
  for (const auto& name : classes_) {
    if (name.empty()) raise(ErrorKind::SchemaMismatch, "empty class name");
    if (!seen.insert(name).second) raise(ErrorKind::SchemaMismatch, "duplicate class '" + name + "'");
    auto it = valence_of.find(name);
    if (it == valence_of.end()) {
      raise(ErrorKind::SchemaMismatch, "class '" + name + "' has no valence category");
    }
    valence_.push_back(it->second);
  }
  for (const auto& [name, v] : valence_of) {
    if (!seen.contains(name)) {
      raise(ErrorKind::SchemaMismatch, "valence given for undeclared class '" + name + "'");
    }
  }
}

EmotionSchema EmotionSchema::with_default_taxonomy(std::string corpus_id,
                                                   std::vector<std::string> classes) {
  std::map<std::string, Valence> valence_of;
  for (const auto& name : classes) {
    auto v = default_valence(name);
    if (!v) raise(ErrorKind::SchemaMismatch, "no default valence for class '" + name + "'");
    valence_of[name] = *v;
  }
  return EmotionSchema(std::move(corpus_id), std::move(classes), valence_of);
}

std::optional<std::size_t> EmotionSchema::index_of(std::string_view name) const {
  auto it = std::find(classes_.begin(), classes_.end(), name);
  if (it == classes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - classes_.begin());
}

EmotionSchema EmotionSchema::permuted(std::span<const std::size_t> order) const {
  if (order.size() != size()) {
    raise(ErrorKind::SchemaMismatch, "permutation length does not match class count");
  }
  std::vector<std::string> names;
  std::map<std::string, Valence> valence_of;
  for (std::size_t k : order) {
    names.push_back(classes_.at(k));
    valence_of[classes_.at(k)] = valence_.at(k);
  }
  return EmotionSchema(corpus_id_, std::move(names), valence_of);
}

GroupPair GroupPair::make(std::string advantaged, std::string disadvantaged) {
  if (advantaged == disadvantaged) {
    raise(ErrorKind::SchemaMismatch, "group labels must differ, both are '" + advantaged + "'");
  }
  return GroupPair{std::move(advantaged), std::move(disadvantaged)};
}

void validate_record(const UtteranceRecord& record, std::size_t n_classes) {
  const std::string where = "record '" + record.utt_id + "': ";
  if (record.gold.size() != n_classes) {
    raise(ErrorKind::ValidationError, where + "gold has " + std::to_string(record.gold.size()) +
                                          " entries, schema has " + std::to_string(n_classes));
  }
  double total = 0.0;
  for (std::size_t k = 0; k < record.gold.size(); ++k) {
    const double g = record.gold[k];
    if (!std::isfinite(g) || g < 0.0 || g > 1.0) {
      raise(ErrorKind::ValidationError, where + "gold " + describe_index(k) + " outside [0,1]");
    }
    total += g;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    raise(ErrorKind::ValidationError, where + "gold sums to " + std::to_string(total) + ", not 1");
  }
  if (record.pred) {
    if (record.pred->size() != n_classes) {
      raise(ErrorKind::ValidationError, where + "pred has " + std::to_string(record.pred->size()) +
                                            " entries, schema has " + std::to_string(n_classes));
    }
    for (std::size_t k = 0; k < record.pred->size(); ++k) {
      const double p = (*record.pred)[k];
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        raise(ErrorKind::ValidationError, where + "pred " + describe_index(k) + " outside [0,1]");
      }
    }
  }
  if (record.valence_tag && *record.valence_tag != Valence::Positive &&
      *record.valence_tag != Valence::Negative) {
    raise(ErrorKind::ValidationError, where + "valence_tag must be positive or negative");
  }
}

std::string_view gold_rule_name(GoldThresholdRule rule) noexcept {
  return rule == GoldThresholdRule::Argmax ? "argmax" : "same_as_pred";
}

std::optional<GoldThresholdRule> parse_gold_rule(std::string_view token) noexcept {
  if (token == "same_as_pred") return GoldThresholdRule::SameAsPred;
  if (token == "argmax") return GoldThresholdRule::Argmax;
  return std::nullopt;
}

std::vector<double> build_soft_label(const std::map<std::string, double>& annotation_counts,
                                     const EmotionSchema& schema, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    raise(ErrorKind::ValidationError, "smoothing epsilon must lie in [0,1)");
  }
  const std::size_t n = schema.size();
  std::vector<double> freq(n, 0.0);
  double total = 0.0;
  for (const auto& [name, count] : annotation_counts) {
    auto k = schema.index_of(name);
    if (!k) raise(ErrorKind::SchemaMismatch, "annotated class '" + name + "' not in schema");
    if (!std::isfinite(count) || count < 0.0) {
      raise(ErrorKind::ValidationError, "negative annotation count for '" + name + "'");
    }
    freq[*k] += count;
    total += count;
  }
  if (total <= 0.0) raise(ErrorKind::EmptyAnnotation, "all annotation counts are zero");

  const double floor = epsilon / static_cast<double>(n);
  for (double& f : freq) f = (1.0 - epsilon) * (f / total) + floor;
  return freq;
}

std::vector<std::size_t> binarize(std::span<const double> distribution, std::size_t n) {
  if (distribution.size() != n || n < 2) {
    raise(ErrorKind::SchemaMismatch, "distribution of length " +
                                         std::to_string(distribution.size()) +
                                         " for a " + std::to_string(n) + "-class task");
  }
  const double threshold = 1.0 / static_cast<double>(n);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < n; ++k) {
    if (distribution[k] > threshold) out.push_back(k);
  }
  return out;
}

std::vector<std::size_t> binarize_gold(std::span<const double> distribution, std::size_t n,
                                       GoldThresholdRule rule) {
  if (rule == GoldThresholdRule::SameAsPred) return binarize(distribution, n);
  if (distribution.size() != n || n < 2) {
    raise(ErrorKind::SchemaMismatch, "distribution length does not match class count");
  }
  auto it = std::max_element(distribution.begin(), distribution.end());
  return {static_cast<std::size_t>(it - distribution.begin())};
}

}  // namespace sergap
