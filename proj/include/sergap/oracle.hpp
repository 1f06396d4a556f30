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

// Reference evaluation of the bias metrics written as direct, unoptimized
// transcriptions of their definitions. Nothing here calls into gap_metrics,
// speat or kernels; the synthetic-data generator and the test suites use it
// as the independent side of every equivalence check.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sergap/data_model.hpp"

namespace sergap::oracle {

using Vector = std::vector<double>;

// One utterance as the generator planned it: label sets, not distributions.
struct PlannedUtterance {
  std::string group;
  std::vector<std::size_t> gold;  // gold label set
  std::vector<std::size_t> pred;  // predicted label set
  std::optional<Valence> tag;
};

struct Gaps {
  std::vector<std::optional<double>> d_e;
  std::optional<double> d_c;
  double d_v = 0.0;
  // Per both-valence class in schema order.
  std::vector<double> p_plus, p_minus;
  std::vector<std::optional<double>> d_plus, d_minus;
};

// F1 from counts with the Undefined/0 convention.
std::optional<double> f1(std::size_t tp, std::size_t gold, std::size_t pred);

Gaps gaps_from_plan(const std::vector<PlannedUtterance>& plan, const EmotionSchema& schema,
                    const std::string& advantaged, const std::string& disadvantaged);

// Same metrics from stored distributions, thresholding each entry against
// 1/n (or argmax for gold) inline.
Gaps gaps_from_records(const std::vector<UtteranceRecord>& records, const EmotionSchema& schema,
                       const std::string& advantaged, const std::string& disadvantaged,
                       GoldThresholdRule gold_rule = GoldThresholdRule::SameAsPred);

Vector data_bias(const std::vector<UtteranceRecord>& records, std::size_t n_classes,
                 const std::string& advantaged, const std::string& disadvantaged);

double cosine(const Vector& a, const Vector& b);
double association(const Vector& w, const std::vector<Vector>& a_set,
                   const std::vector<Vector>& b_set);

struct EffectSize {
  double d_s_sum = 0.0;
  double d_s_mean = 0.0;
  double stddev = 0.0;
};

EffectSize effect_size(const std::vector<Vector>& x, const std::vector<Vector>& y,
                       const std::vector<Vector>& a, const std::vector<Vector>& b,
                       bool sample_stddev = false);

Vector layer_mean(const std::vector<Vector>& layers);
Vector layer_weighted(const std::vector<Vector>& layers, const Vector& weights);
Vector fold_average(const std::vector<Vector>& folds);

double pearson(const Vector& xs, const Vector& ys);

}  // namespace sergap::oracle
