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

#include "sergap/gap_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "sergap/error.hpp"
#include "sergap/kernels.hpp"

namespace sergap {
namespace {

enum class Side { Advantaged, Disadvantaged, Other };

Side side_of(const UtteranceRecord& r, const GroupPair& pair) {
  if (r.group == pair.advantaged) return Side::Advantaged;
  if (r.group == pair.disadvantaged) return Side::Disadvantaged;
  return Side::Other;
}

struct Counts {
  std::size_t records = 0;
  std::vector<std::size_t> gold, pred, tp;
  explicit Counts(std::size_t n) : gold(n, 0), pred(n, 0), tp(n, 0) {}
};

// Multi-hot membership of one label set.
std::vector<char> to_mask(const std::vector<std::size_t>& indices, std::size_t n) {
  std::vector<char> mask(n, 0);
  for (std::size_t k : indices) mask[k] = 1;
  return mask;
}

void accumulate(Counts& c, const UtteranceRecord& r, std::size_t n, GoldThresholdRule rule) {
  if (!r.pred) {
    raise(ErrorKind::ValidationError, "record '" + r.utt_id + "' has no prediction");
  }
  if (r.gold.size() != n || r.pred->size() != n) {
    raise(ErrorKind::ValidationError, "record '" + r.utt_id + "' does not match the schema");
  }
  const auto gold = to_mask(binarize_gold(r.gold, n, rule), n);
  const auto pred = to_mask(binarize(*r.pred, n), n);
  ++c.records;
  for (std::size_t k = 0; k < n; ++k) {
    c.gold[k] += gold[k];
    c.pred[k] += pred[k];
    c.tp[k] += static_cast<std::size_t>(gold[k] && pred[k]);
  }
}

GroupScores finish(const Counts& c, const std::string& group) {
  GroupScores s;
  s.group = group;
  s.records = c.records;
  double f1_sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t k = 0; k < c.gold.size(); ++k) {
    s.classes.push_back(score_from_counts(c.gold[k], c.pred[k], c.tp[k]));
    if (s.classes.back().f1) {
      f1_sum += *s.classes.back().f1;
      ++defined;
    }
  }
  if (defined > 0) s.macro_f1 = f1_sum / static_cast<double>(defined);
  return s;
}

template <class Filter>
GroupF1Table tally(std::span<const UtteranceRecord> records, const EmotionSchema& schema,
                   const GroupPair& pair, GoldThresholdRule rule, Filter&& keep) {
  const std::size_t n = schema.size();
  Counts adv(n), dis(n);
  GroupF1Table table;
  for (const auto& r : records) {
    if (!keep(r)) continue;
    switch (side_of(r, pair)) {
      case Side::Advantaged: accumulate(adv, r, n, rule); break;
      case Side::Disadvantaged: accumulate(dis, r, n, rule); break;
      case Side::Other: ++table.ignored_records; break;
    }
  }
  if (adv.records == 0) raise(ErrorKind::GroupEmpty, "no records for group '" + pair.advantaged + "'");
  if (dis.records == 0) {
    raise(ErrorKind::GroupEmpty, "no records for group '" + pair.disadvantaged + "'");
  }
  table.advantaged = finish(adv, pair.advantaged);
  table.disadvantaged = finish(dis, pair.disadvantaged);
  return table;
}

std::optional<double> gap_for_class(const GroupF1Table& t, std::size_t k) {
  const auto& a = t.advantaged.classes.at(k).f1;
  const auto& d = t.disadvantaged.classes.at(k).f1;
  if (!a || !d) return std::nullopt;
  return *a - *d;
}

}  // namespace

ClassScore score_from_counts(std::size_t gold_positives, std::size_t predicted_positives,
                             std::size_t true_positives) {
  ClassScore s;
  s.gold_positives = gold_positives;
  s.predicted_positives = predicted_positives;
  s.true_positives = true_positives;
  const double tp = static_cast<double>(true_positives);
  if (predicted_positives > 0) s.precision = tp / static_cast<double>(predicted_positives);
  if (gold_positives > 0) s.recall = tp / static_cast<double>(gold_positives);
  if (gold_positives == 0 && predicted_positives == 0) return s;
  if (true_positives == 0) {
    s.f1 = 0.0;
  } else {
    s.f1 = 2.0 * tp / static_cast<double>(gold_positives + predicted_positives);
  }
  return s;
}

GroupF1Table group_f1(std::span<const UtteranceRecord> records, const EmotionSchema& schema,
                      const GroupPair& pair, GoldThresholdRule gold_rule) {
  return tally(records, schema, pair, gold_rule, [](const UtteranceRecord&) { return true; });
}

GapVector emotion_gap(const GroupF1Table& table) {
  GapVector out;
  const std::size_t n = table.advantaged.classes.size();
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(gap_for_class(table, k));
  return out;
}

CorpusGap corpus_gap(const GapVector& d_e) {
  CorpusGap out;
  double total = 0.0;
  std::size_t defined = 0;
  for (std::size_t k = 0; k < d_e.size(); ++k) {
    if (d_e[k]) {
      total += std::abs(*d_e[k]);
      ++defined;
    } else {
      out.excluded.push_back(k);
    }
  }
  if (defined == 0) raise(ErrorKind::MetricUndefined, "every per-class gap is Undefined");
  out.value = total / static_cast<double>(defined);
  return out;
}

ValenceGap valence_gap(std::span<const UtteranceRecord> records, const EmotionSchema& schema,
                       const GroupPair& pair, GoldThresholdRule gold_rule) {
  const std::size_t n = schema.size();
  const GapVector d_e = emotion_gap(group_f1(records, schema, pair, gold_rule));

  ValenceGap out;
  double positive = 0.0;
  double negative = 0.0;
  double both = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Valence v = schema.valence(k);
    if (v != Valence::Positive && v != Valence::Negative) continue;
    if (!d_e[k]) {
      out.excluded.push_back(schema.class_name(k));
      continue;
    }
    (v == Valence::Positive ? positive : negative) += *d_e[k];
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (schema.valence(k) != Valence::Both) continue;
    ValenceSplit split;
    split.class_index = k;
    for (const auto& r : records) {
      if (side_of(r, pair) == Side::Other) continue;
      const auto gold = binarize_gold(r.gold, n, gold_rule);
      if (std::find(gold.begin(), gold.end(), k) == gold.end()) continue;
      if (!r.valence_tag) {
        ++split.untagged;
      } else if (*r.valence_tag == Valence::Positive) {
        ++split.tagged_positive;
      } else {
        ++split.tagged_negative;
      }
    }
    const std::size_t tagged = split.tagged_positive + split.tagged_negative;
    if (tagged == 0 && split.untagged > 0) {
      raise(ErrorKind::MissingValenceTags, "class '" + schema.class_name(k) + "' has " +
                                               std::to_string(split.untagged) +
                                               " gold-positive utterances and no valence tags");
    }
    if (tagged > 0) {
      split.p_plus = static_cast<double>(split.tagged_positive) / static_cast<double>(tagged);
      split.p_minus = static_cast<double>(split.tagged_negative) / static_cast<double>(tagged);
    }
    auto split_gap = [&](Valence tag) -> std::optional<double> {
      try {
        auto t = tally(records, schema, pair, gold_rule,
                       [tag](const UtteranceRecord& r) { return r.valence_tag == tag; });
        return gap_for_class(t, k);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::GroupEmpty) throw;
        return std::nullopt;
      }
    };
    split.d_plus = split_gap(Valence::Positive);
    split.d_minus = split_gap(Valence::Negative);

    const std::string& name = schema.class_name(k);
    if (split.d_plus) {
      both += split.p_plus * *split.d_plus;
    } else if (split.p_plus > 0.0) {
      out.excluded.push_back(name + "(+)");
    }
    if (split.d_minus) {
      both -= split.p_minus * *split.d_minus;
    } else if (split.p_minus > 0.0) {
      out.excluded.push_back(name + "(-)");
    }
    out.splits.push_back(split);
  }
  out.value = positive - negative + both;
  return out;
}

DataBiasVector data_bias(std::span<const UtteranceRecord> training_records,
                         const EmotionSchema& schema, const GroupPair& pair) {
  const std::size_t n = schema.size();
  std::vector<double> adv(n, 0.0), dis(n, 0.0);
  DataBiasVector out;
  for (const auto& r : training_records) {
    if (r.gold.size() != n) {
      raise(ErrorKind::ValidationError, "record '" + r.utt_id + "' does not match the schema");
    }
    switch (side_of(r, pair)) {
      case Side::Advantaged:
        kernels::axpy(1.0, r.gold, adv);
        ++out.advantaged_records;
        break;
      case Side::Disadvantaged:
        kernels::axpy(1.0, r.gold, dis);
        ++out.disadvantaged_records;
        break;
      case Side::Other:
        break;
    }
  }
  if (out.advantaged_records == 0) {
    raise(ErrorKind::GroupEmpty, "no training records for group '" + pair.advantaged + "'");
  }
  if (out.disadvantaged_records == 0) {
    raise(ErrorKind::GroupEmpty, "no training records for group '" + pair.disadvantaged + "'");
  }
  kernels::scale(1.0 / static_cast<double>(out.advantaged_records), adv);
  kernels::scale(1.0 / static_cast<double>(out.disadvantaged_records), dis);
  // Plain difference of the two means keeps d_d exactly antisymmetric.
  kernels::axpy(-1.0, dis, adv);
  out.values = std::move(adv);
  return out;
}

GapReport compute_gap_report(std::string model_id, std::span<const UtteranceRecord> records,
                             const EmotionSchema& schema, const GroupPair& pair,
                             GoldThresholdRule gold_rule,
                             std::span<const UtteranceRecord> training_records) {
  GroupF1Table table = group_f1(records, schema, pair, gold_rule);
  GapVector d_e = emotion_gap(table);
  CorpusGap d_c = corpus_gap(d_e);
  ValenceGap d_v = valence_gap(records, schema, pair, gold_rule);

  std::optional<double> macro_gap;
  double total = 0.0;
  std::size_t defined = 0;
  for (const auto& g : d_e) {
    if (g) {
      total += *g;
      ++defined;
    }
  }
  if (defined > 0) macro_gap = total / static_cast<double>(defined);
  std::optional<double> macro_f1_gap;
  if (table.advantaged.macro_f1 && table.disadvantaged.macro_f1) {
    macro_f1_gap = *table.advantaged.macro_f1 - *table.disadvantaged.macro_f1;
  }
  std::optional<DataBiasVector> d_d;
  if (!training_records.empty()) d_d = data_bias(training_records, schema, pair);

  return GapReport{std::move(model_id), schema,       pair,         std::move(table),
                   std::move(d_e),      std::move(d_c), std::move(d_v), macro_gap,
                   macro_f1_gap,        std::move(d_d)};
}

}  // namespace sergap
