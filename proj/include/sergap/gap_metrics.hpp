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

// Group-wise F1 and the gender-gap metrics derived from it:
//   d_e  per-class F1 gap, advantaged minus disadvantaged
//   d_c  mean |d_e| over classes with a defined gap
//   d_v  sum of d_e over positive classes minus sum over negative classes,
//        plus p+ * d_{e,+} - p- * d_{e,-} for each both-valence class
//   d_d  difference of mean gold soft labels in the training split
//
// F1 convention for a (group, class) cell:
//   gold positives = 0 and predicted positives = 0  ->  Undefined
//   otherwise TP = 0                                 ->  0
//   otherwise                                        ->  2 TP / (gold + predicted)

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sergap/data_model.hpp"

namespace sergap {

struct ClassScore {
  std::size_t gold_positives = 0;
  std::size_t predicted_positives = 0;
  std::size_t true_positives = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

struct GroupScores {
  std::string group;
  std::size_t records = 0;
  std::vector<ClassScore> classes;
  // Mean F1 over classes with a defined F1; absent when none is defined.
  std::optional<double> macro_f1;
};

struct GroupF1Table {
  GroupScores advantaged;
  GroupScores disadvantaged;
  // Records whose group is neither side of the pair.
  std::size_t ignored_records = 0;
};

ClassScore score_from_counts(std::size_t gold_positives, std::size_t predicted_positives,
                             std::size_t true_positives);

// Throws ValidationError when a record lacks pred or has the wrong length,
// GroupEmpty when either group has no records.
GroupF1Table group_f1(std::span<const UtteranceRecord> records, const EmotionSchema& schema,
                      const GroupPair& pair,
                      GoldThresholdRule gold_rule = GoldThresholdRule::SameAsPred);

using GapVector = std::vector<std::optional<double>>;

GapVector emotion_gap(const GroupF1Table& table);

struct CorpusGap {
  double value = 0.0;
  std::vector<std::size_t> excluded;  // class indices with Undefined d_e
};

// Throws MetricUndefined when no entry is defined.
CorpusGap corpus_gap(const GapVector& d_e);

struct ValenceSplit {
  std::size_t class_index = 0;
  std::size_t tagged_positive = 0;
  std::size_t tagged_negative = 0;
  std::size_t untagged = 0;
  double p_plus = 0.0;
  double p_minus = 0.0;
  std::optional<double> d_plus;
  std::optional<double> d_minus;
};

struct ValenceGap {
  double value = 0.0;
  std::vector<ValenceSplit> splits;  // one per both-valence class, schema order
  // Human-readable names of terms that were Undefined and contributed 0,
  // e.g. "Anger" or "Surprise(+)".
  std::vector<std::string> excluded;
};

// Throws MissingValenceTags when a both-valence class has gold positives but
// none of them carries a valence tag.
ValenceGap valence_gap(std::span<const UtteranceRecord> records, const EmotionSchema& schema,
                       const GroupPair& pair,
                       GoldThresholdRule gold_rule = GoldThresholdRule::SameAsPred);

struct DataBiasVector {
  std::vector<double> values;
  std::size_t advantaged_records = 0;
  std::size_t disadvantaged_records = 0;
};

// Throws GroupEmpty when either group has no training records.
DataBiasVector data_bias(std::span<const UtteranceRecord> training_records,
                         const EmotionSchema& schema, const GroupPair& pair);

struct GapReport {
  std::string model_id;
  EmotionSchema schema;
  GroupPair pair;
  GroupF1Table table;
  GapVector d_e;
  CorpusGap d_c;
  ValenceGap d_v;
  // Macro column: mean of defined d_e (primary) and the gap of macro-F1s.
  std::optional<double> macro_gap;
  std::optional<double> macro_f1_gap;
  std::optional<DataBiasVector> d_d;
};

GapReport compute_gap_report(std::string model_id, std::span<const UtteranceRecord> records,
                             const EmotionSchema& schema, const GroupPair& pair,
                             GoldThresholdRule gold_rule = GoldThresholdRule::SameAsPred,
                             std::span<const UtteranceRecord> training_records = {});

}  // namespace sergap
