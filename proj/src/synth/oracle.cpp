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

#include "sergap/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace sergap::oracle {
namespace {

bool contains(const std::vector<std::size_t>& set, std::size_t k) {
  return std::find(set.begin(), set.end(), k) != set.end();
}

struct GroupCounts {
  std::size_t records = 0;
  std::vector<std::size_t> tp, gold, pred;
};

GroupCounts count(const std::vector<PlannedUtterance>& plan, const std::string& group,
                  std::size_t n, std::optional<Valence> only_tag) {
  GroupCounts c{0, std::vector<std::size_t>(n), std::vector<std::size_t>(n),
                std::vector<std::size_t>(n)};
  for (const auto& u : plan) {
    if (u.group != group) continue;
    if (only_tag && u.tag != only_tag) continue;
    c.records += 1;
    for (std::size_t k = 0; k < n; ++k) {
      const bool g = contains(u.gold, k);
      const bool p = contains(u.pred, k);
      if (g) c.gold[k] += 1;
      if (p) c.pred[k] += 1;
      if (g && p) c.tp[k] += 1;
    }
  }
  return c;
}

std::optional<double> gap(const GroupCounts& a, const GroupCounts& b, std::size_t k) {
  if (a.records == 0 || b.records == 0) return std::nullopt;
  auto fa = f1(a.tp[k], a.gold[k], a.pred[k]);
  auto fb = f1(b.tp[k], b.gold[k], b.pred[k]);
  if (!fa || !fb) return std::nullopt;
  return *fa - *fb;
}

}  // namespace

std::optional<double> f1(std::size_t tp, std::size_t gold, std::size_t pred) {
  if (gold == 0 && pred == 0) return std::nullopt;
  if (tp == 0) return 0.0;
  const double precision = double(tp) / double(pred);
  const double recall = double(tp) / double(gold);
  return 2.0 * precision * recall / (precision + recall);
}

Gaps gaps_from_plan(const std::vector<PlannedUtterance>& plan, const EmotionSchema& schema,
                    const std::string& advantaged, const std::string& disadvantaged) {
  const std::size_t n = schema.size();
  Gaps out;
  const GroupCounts a = count(plan, advantaged, n, std::nullopt);
  const GroupCounts b = count(plan, disadvantaged, n, std::nullopt);
  for (std::size_t k = 0; k < n; ++k) out.d_e.push_back(gap(a, b, k));

  // d_c: mean absolute gap over defined classes
  double abs_total = 0.0;
  int defined = 0;
  for (const auto& d : out.d_e) {
    if (d) {
      abs_total += std::fabs(*d);
      defined += 1;
    }
  }
  if (defined > 0) out.d_c = abs_total / defined;

  // d_v
  double sum_positive = 0.0;
  double sum_negative = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!out.d_e[k]) continue;
    if (schema.valence(k) == Valence::Positive) sum_positive += *out.d_e[k];
    if (schema.valence(k) == Valence::Negative) sum_negative += *out.d_e[k];
  }
  const GroupCounts a_pos = count(plan, advantaged, n, Valence::Positive);
  const GroupCounts b_pos = count(plan, disadvantaged, n, Valence::Positive);
  const GroupCounts a_neg = count(plan, advantaged, n, Valence::Negative);
  const GroupCounts b_neg = count(plan, disadvantaged, n, Valence::Negative);
  double sum_both = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (schema.valence(k) != Valence::Both) continue;
    double tagged_pos = 0, tagged_neg = 0;
    for (const auto& u : plan) {
      if (u.group != advantaged && u.group != disadvantaged) continue;
      if (!contains(u.gold, k) || !u.tag) continue;
      if (*u.tag == Valence::Positive) tagged_pos += 1;
      if (*u.tag == Valence::Negative) tagged_neg += 1;
    }
    double p_plus = 0.0, p_minus = 0.0;
    if (tagged_pos + tagged_neg > 0) {
      p_plus = tagged_pos / (tagged_pos + tagged_neg);
      p_minus = tagged_neg / (tagged_pos + tagged_neg);
    }
    auto d_plus = gap(a_pos, b_pos, k);
    auto d_minus = gap(a_neg, b_neg, k);
    out.p_plus.push_back(p_plus);
    out.p_minus.push_back(p_minus);
    out.d_plus.push_back(d_plus);
    out.d_minus.push_back(d_minus);
    sum_both += (d_plus ? p_plus * *d_plus : 0.0) - (d_minus ? p_minus * *d_minus : 0.0);
  }
  out.d_v = sum_positive - sum_negative + sum_both;
  return out;
}

Gaps gaps_from_records(const std::vector<UtteranceRecord>& records, const EmotionSchema& schema,
                       const std::string& advantaged, const std::string& disadvantaged,
                       GoldThresholdRule gold_rule) {
  const std::size_t n = schema.size();
  const double threshold = 1.0 / double(n);
  std::vector<PlannedUtterance> plan;
  for (const auto& r : records) {
    PlannedUtterance u{r.group, {}, {}, r.valence_tag};
    if (gold_rule == GoldThresholdRule::Argmax) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < n; ++k) {
        if (r.gold[k] > r.gold[best]) best = k;
      }
      u.gold.push_back(best);
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        if (r.gold[k] > threshold) u.gold.push_back(k);
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (r.pred && (*r.pred)[k] > threshold) u.pred.push_back(k);
    }
    plan.push_back(std::move(u));
  }
  return gaps_from_plan(plan, schema, advantaged, disadvantaged);
}

Vector data_bias(const std::vector<UtteranceRecord>& records, std::size_t n_classes,
                 const std::string& advantaged, const std::string& disadvantaged) {
  Vector mean_a(n_classes, 0.0), mean_b(n_classes, 0.0);
  double count_a = 0, count_b = 0;
  for (const auto& r : records) {
    if (r.group == advantaged) {
      for (std::size_t k = 0; k < n_classes; ++k) mean_a[k] += r.gold[k];
      count_a += 1;
    } else if (r.group == disadvantaged) {
      for (std::size_t k = 0; k < n_classes; ++k) mean_b[k] += r.gold[k];
      count_b += 1;
    }
  }
  Vector out(n_classes);
  for (std::size_t k = 0; k < n_classes; ++k) out[k] = mean_a[k] / count_a - mean_b[k] / count_b;
  return out;
}

double cosine(const Vector& a, const Vector& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

double association(const Vector& w, const std::vector<Vector>& a_set,
                   const std::vector<Vector>& b_set) {
  double mean_a = 0, mean_b = 0;
  for (const auto& a : a_set) mean_a += cosine(w, a);
  for (const auto& b : b_set) mean_b += cosine(w, b);
  return mean_a / double(a_set.size()) - mean_b / double(b_set.size());
}

EffectSize effect_size(const std::vector<Vector>& x, const std::vector<Vector>& y,
                       const std::vector<Vector>& a, const std::vector<Vector>& b,
                       bool sample_stddev) {
  std::vector<double> sx, sy, all;
  for (const auto& w : x) sx.push_back(association(w, a, b));
  for (const auto& w : y) sy.push_back(association(w, a, b));
  all = sx;
  all.insert(all.end(), sy.begin(), sy.end());

  double sum_x = 0, sum_y = 0;
  for (double s : sx) sum_x += s;
  for (double s : sy) sum_y += s;

  double mean = 0;
  for (double s : all) mean += s;
  mean /= double(all.size());
  double var = 0;
  for (double s : all) var += (s - mean) * (s - mean);
  var /= sample_stddev ? double(all.size() - 1) : double(all.size());

  EffectSize out;
  out.stddev = std::sqrt(var);
  out.d_s_sum = (sum_x - sum_y) / out.stddev;
  out.d_s_mean = (sum_x / double(sx.size()) - sum_y / double(sy.size())) / out.stddev;
  return out;
}

Vector layer_mean(const std::vector<Vector>& layers) {
  Vector out(layers.front().size(), 0.0);
  for (const auto& l : layers) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += l[i];
  }
  for (double& v : out) v /= double(layers.size());
  return out;
}

Vector layer_weighted(const std::vector<Vector>& layers, const Vector& weights) {
  double total = 0;
  for (double w : weights) total += w;
  Vector out(layers.front().size(), 0.0);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[l] / total * layers[l][i];
  }
  return out;
}

Vector fold_average(const std::vector<Vector>& folds) {
  Vector out(folds.front().size(), 0.0);
  for (const auto& f : folds) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += f[i] / double(folds.size());
  }
  double total = 0;
  for (double v : out) total += v;
  for (double& v : out) v /= total;
  return out;
}

double pearson(const Vector& xs, const Vector& ys) {
  const double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    syy += ys[i] * ys[i];
    sxy += xs[i] * ys[i];
  }
  // textbook single-pass form
  return (n * sxy - sx * sy) / (std::sqrt(n * sxx - sx * sx) * std::sqrt(n * syy - sy * sy));
}

}  // namespace sergap::oracle
