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

#include "sergap/association_stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sergap/error.hpp"
#include "sergap/kernels.hpp"

namespace sergap {
namespace {

// Centered copy of a series; throws DegenerateSeries when it is constant up
// to rounding.
std::vector<double> centered(std::span<const double> v, const char* which) {
  const double n = static_cast<double>(v.size());
  const double mean = kernels::sum(v) / n;
  std::vector<double> out(v.begin(), v.end());
  double scale = 1.0;
  for (double& x : out) {
    scale = std::max(scale, std::abs(x));
    x -= mean;
  }
  const double sd = std::sqrt(kernels::squared_norm(out) / n);
  if (!(sd > 1e-12 * scale)) {
    raise(ErrorKind::DegenerateSeries, std::string(which) + " series has zero variance");
  }
  return out;
}

}  // namespace

CorrelationCell pearson(std::span<const double> xs, std::span<const double> ys,
                        std::string pair_description) {
  if (xs.size() != ys.size()) {
    raise(ErrorKind::SchemaMismatch, "series lengths differ: " + std::to_string(xs.size()) +
                                         " vs " + std::to_string(ys.size()));
  }
  if (xs.size() < 2) raise(ErrorKind::SchemaMismatch, "correlation needs at least two points");
  for (double v : xs) {
    if (!std::isfinite(v)) raise(ErrorKind::ValidationError, "non-finite value in series");
  }
  for (double v : ys) {
    if (!std::isfinite(v)) raise(ErrorKind::ValidationError, "non-finite value in series");
  }
  const auto dx = centered(xs, "first");
  const auto dy = centered(ys, "second");
  const double r = kernels::dot(dx, dy) /
                   std::sqrt(kernels::squared_norm(dx) * kernels::squared_norm(dy));
  return {std::clamp(r, -1.0, 1.0), xs.size(), std::move(pair_description)};
}

CorrelationCell data_vs_gap(const DataBiasVector& d_d, const GapVector& d_e,
                            std::string pair_description) {
  if (d_d.values.size() != d_e.size()) {
    raise(ErrorKind::SchemaMismatch, "d_d and d_e cover different class counts");
  }
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < d_e.size(); ++k) {
    if (!d_e[k]) continue;
    xs.push_back(d_d.values[k]);
    ys.push_back(*d_e[k]);
  }
  if (xs.size() < 2) {
    raise(ErrorKind::MetricUndefined, "fewer than two classes with a defined gap");
  }
  return pearson(xs, ys, std::move(pair_description));
}

CorrelationCell valence_vs_upstream(const std::map<std::string, double>& d_v_by_model,
                                    const std::map<std::string, double>& d_s_by_model,
                                    std::string pair_description) {
  std::vector<double> xs, ys;
  for (const auto& [model, d_v] : d_v_by_model) {
    auto it = d_s_by_model.find(model);
    if (it == d_s_by_model.end()) {
      raise(ErrorKind::SchemaMismatch, "model '" + model + "' has d_v but no d_s");
    }
    xs.push_back(d_v);
    ys.push_back(it->second);
  }
  if (d_s_by_model.size() != d_v_by_model.size()) {
    raise(ErrorKind::SchemaMismatch, "d_s lists models without d_v");
  }
  return pearson(xs, ys, std::move(pair_description));
}

}  // namespace sergap
