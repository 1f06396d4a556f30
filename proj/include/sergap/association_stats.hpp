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
#include <span>
#include <string>

#include "sergap/gap_metrics.hpp"

namespace sergap {

struct CorrelationCell {
  double r = 0.0;
  std::size_t n = 0;
  std::string pair_description;
};

// Pearson product-moment correlation. Throws SchemaMismatch on unequal
// lengths or fewer than two points, DegenerateSeries when either series is
// constant.
CorrelationCell pearson(std::span<const double> xs, std::span<const double> ys,
                        std::string pair_description = {});

// Correlates d_d with d_e over the classes where d_e is defined. Throws
// MetricUndefined when fewer than two classes remain.
CorrelationCell data_vs_gap(const DataBiasVector& d_d, const GapVector& d_e,
                            std::string pair_description = "d_d vs d_e");

// Series keyed by model id; both must list the same models. Correlated in
// key order.
CorrelationCell valence_vs_upstream(const std::map<std::string, double>& d_v_by_model,
                                    const std::map<std::string, double>& d_s_by_model,
                                    std::string pair_description = "d_v vs d_s");

}  // namespace sergap
