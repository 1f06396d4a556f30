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

#include <gtest/gtest.h>

#include "sergap/gap_metrics.hpp"
#include "support/expect_error.hpp"

namespace sergap {
namespace {

// Classes: Anger (negative), Happy (positive), Surprise (both), Neutral.
const EmotionSchema kSchema =
    EmotionSchema::with_default_taxonomy("T", {"Anger", "Happy", "Surprise", "Neutral"});
constexpr std::size_t kAnger = 0, kHappy = 1, kSurprise = 2;
constexpr int kNone = -1;

std::vector<double> one_hot_ish(int k) {
  if (k == kNone) return {0.25, 0.25, 0.25, 0.25};
  std::vector<double> d(4, 0.1);
  d[static_cast<std::size_t>(k)] = 0.7;
  return d;
}

UtteranceRecord rec(const std::string& group, int gold, int pred,
                    std::optional<Valence> tag = std::nullopt) {
  static int serial = 0;
  return {"u" + std::to_string(serial++), group, one_hot_ish(gold), one_hot_ish(pred), tag,
          std::nullopt};
}

void add(std::vector<UtteranceRecord>& out, std::size_t count, const std::string& group, int gold,
         int pred, std::optional<Valence> tag = std::nullopt) {
  for (std::size_t i = 0; i < count; ++i) out.push_back(rec(group, gold, pred, tag));
}

TEST(GroupF1Test, HandComputedCounts) {
  std::vector<UtteranceRecord> r;
  add(r, 2, "female", kHappy, kHappy);
  add(r, 1, "male", kHappy, kHappy);
  add(r, 1, "male", kHappy, kNone);
  const GroupF1Table t = group_f1(r, kSchema, GroupPair{});
  EXPECT_DOUBLE_EQ(*t.advantaged.classes[kHappy].f1, 1.0);
  const ClassScore& m = t.disadvantaged.classes[kHappy];
  EXPECT_DOUBLE_EQ(*m.precision, 1.0);
  EXPECT_DOUBLE_EQ(*m.recall, 0.5);
  EXPECT_NEAR(*m.f1, 2.0 / 3.0, 1e-15);
  EXPECT_FALSE(t.advantaged.classes[kAnger].f1.has_value());

  const GapVector d = emotion_gap(t);
  EXPECT_NEAR(*d[kHappy], 1.0 / 3.0, 1e-15);
  EXPECT_FALSE(d[kAnger].has_value());
}

TEST(GroupF1Test, ConventionTable) {
  const ClassScore none = score_from_counts(0, 0, 0);
  EXPECT_FALSE(none.f1.has_value());
  const ClassScore missed = score_from_counts(3, 0, 0);
  EXPECT_FALSE(missed.precision.has_value());
  EXPECT_DOUBLE_EQ(*missed.recall, 0.0);
  EXPECT_DOUBLE_EQ(*missed.f1, 0.0);
  const ClassScore spurious = score_from_counts(0, 2, 0);
  EXPECT_FALSE(spurious.recall.has_value());
  EXPECT_DOUBLE_EQ(*spurious.f1, 0.0);
  EXPECT_DOUBLE_EQ(*score_from_counts(4, 2, 2).f1, 4.0 / 6.0);
}

TEST(GroupF1Test, IdenticalGroupsGiveIdenticalRows) {
  std::vector<UtteranceRecord> r;
  for (const std::string g : {"female", "male"}) {
    add(r, 3, g, kHappy, kHappy);
    add(r, 2, g, kAnger, kHappy);
    add(r, 1, g, kSurprise, kNone, Valence::Positive);
  }
  const GroupF1Table t = group_f1(r, kSchema, GroupPair{});
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(t.advantaged.classes[k].f1, t.disadvantaged.classes[k].f1);
  }
  for (const auto& g : emotion_gap(t)) {
    if (g) {
      EXPECT_EQ(*g, 0.0);
    }
  }
}

TEST(GroupF1Test, Errors) {
  std::vector<UtteranceRecord> r;
  add(r, 2, "female", kHappy, kHappy);
  EXPECT_SERGAP_ERROR(group_f1(r, kSchema, GroupPair{}), ErrorKind::GroupEmpty);
  add(r, 1, "male", kHappy, kHappy);
  r.back().pred.reset();
  EXPECT_SERGAP_ERROR(group_f1(r, kSchema, GroupPair{}), ErrorKind::ValidationError);
}

TEST(GroupF1Test, OtherGroupsAreCountedAsIgnored) {
  std::vector<UtteranceRecord> r;
  add(r, 1, "female", kHappy, kHappy);
  add(r, 1, "male", kHappy, kHappy);
  add(r, 3, "unknown", kHappy, kHappy);
  EXPECT_EQ(group_f1(r, kSchema, GroupPair{}).ignored_records, 3u);
}

TEST(CorpusGapTest, MeanAbsoluteOverDefined) {
  EXPECT_NEAR(corpus_gap({0.2, -0.1}).value, 0.15, 1e-15);
  EXPECT_EQ(corpus_gap({0.0, 0.0, 0.0}).value, 0.0);
  const CorpusGap c = corpus_gap({0.3, std::nullopt, -0.3});
  EXPECT_NEAR(c.value, 0.3, 1e-15);
  EXPECT_EQ(c.excluded, (std::vector<std::size_t>{1}));
  EXPECT_SERGAP_ERROR(corpus_gap({std::nullopt, std::nullopt}), ErrorKind::MetricUndefined);
}

// Realizes d_Happy = 0.1, d_Anger = -0.2, p+ = 0.6, p- = 0.4,
// d_Surprise(+) = 0.05, d_Surprise(-) = -0.1 with plain counts.
std::vector<UtteranceRecord> ValenceFixture() {
  std::vector<UtteranceRecord> r;
  add(r, 9, "female", kHappy, kHappy);  // F1 18/20
  add(r, 2, "female", kHappy, kNone);
  add(r, 2, "male", kHappy, kHappy);  // F1 4/5
  add(r, 1, "male", kHappy, kNone);
  add(r, 3, "female", kAnger, kAnger);  // F1 6/10
  add(r, 4, "female", kAnger, kNone);
  add(r, 2, "male", kAnger, kAnger);  // F1 4/5
  add(r, 1, "male", kAnger, kNone);
  add(r, 9, "female", kSurprise, kSurprise, Valence::Positive);  // F1 1
  add(r, 19, "male", kSurprise, kSurprise, Valence::Positive);   // F1 38/40
  add(r, 2, "male", kSurprise, kNone, Valence::Positive);
  add(r, 9, "female", kSurprise, kSurprise, Valence::Negative);  // F1 18/20
  add(r, 2, "female", kSurprise, kNone, Valence::Negative);
  add(r, 9, "male", kSurprise, kSurprise, Valence::Negative);  // F1 1
  return r;
}

TEST(ValenceGapTest, HandEvaluation) {
  const ValenceGap v = valence_gap(ValenceFixture(), kSchema, GroupPair{});
  ASSERT_EQ(v.splits.size(), 1u);
  const ValenceSplit& s = v.splits[0];
  EXPECT_EQ(s.class_index, kSurprise);
  EXPECT_EQ(s.tagged_positive, 30u);
  EXPECT_EQ(s.tagged_negative, 20u);
  EXPECT_NEAR(s.p_plus, 0.6, 1e-15);
  EXPECT_NEAR(s.p_minus, 0.4, 1e-15);
  EXPECT_NEAR(*s.d_plus, 0.05, 1e-12);
  EXPECT_NEAR(*s.d_minus, -0.1, 1e-12);
  EXPECT_NEAR(v.value, 0.37, 1e-12);
  EXPECT_TRUE(v.excluded.empty());
}

TEST(ValenceGapTest, NoBothClassDropsThirdTerm) {
  const EmotionSchema schema =
      EmotionSchema::with_default_taxonomy("T", {"Anger", "Happy", "Sad", "Neutral"});
  std::vector<UtteranceRecord> r;
  for (auto& x : ValenceFixture()) {
    if (x.valence_tag) continue;
    r.push_back(x);
  }
  const ValenceGap v = valence_gap(r, schema, GroupPair{});
  EXPECT_TRUE(v.splits.empty());
  EXPECT_NEAR(v.value, 0.1 + 0.2, 1e-12);
}

TEST(ValenceGapTest, SymmetricGroupsGiveZero) {
  std::vector<UtteranceRecord> r;
  for (const std::string g : {"female", "male"}) {
    add(r, 2, g, kHappy, kHappy);
    add(r, 1, g, kAnger, kHappy);
    add(r, 2, g, kSurprise, kSurprise, Valence::Positive);
    add(r, 1, g, kSurprise, kNone, Valence::Negative);
  }
  EXPECT_EQ(valence_gap(r, kSchema, GroupPair{}).value, 0.0);
}

TEST(ValenceGapTest, MissingTags) {
  std::vector<UtteranceRecord> r;
  add(r, 2, "female", kSurprise, kSurprise);
  add(r, 2, "male", kSurprise, kSurprise);
  EXPECT_SERGAP_ERROR(valence_gap(r, kSchema, GroupPair{}), ErrorKind::MissingValenceTags);
}

TEST(ValenceGapTest, OneSidedSplitIsExcludedByName) {
  std::vector<UtteranceRecord> r;
  add(r, 2, "female", kSurprise, kSurprise, Valence::Positive);
  add(r, 2, "male", kSurprise, kNone, Valence::Positive);
  add(r, 2, "female", kSurprise, kSurprise, Valence::Negative);
  const ValenceGap v = valence_gap(r, kSchema, GroupPair{});
  EXPECT_NEAR(v.value, 4.0 / 6.0, 1e-15);
  // Anger and Happy have no utterances at all, so their terms drop out too.
  EXPECT_EQ(v.excluded, (std::vector<std::string>{"Anger", "Happy", "Surprise(-)"}));
}

TEST(DataBiasTest, WorkedExample) {
  std::vector<UtteranceRecord> t{
      {"f1", "female", {0.2, 0.3, 0.4, 0.1}, std::nullopt, std::nullopt, std::nullopt},
      {"m1", "male", {0.1, 0.2, 0.4, 0.3}, std::nullopt, std::nullopt, std::nullopt}};
  const DataBiasVector d = data_bias(t, kSchema, GroupPair{});
  const std::vector<double> expected{0.1, 0.1, 0.0, -0.2};
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(d.values[k], expected[k], 1e-12);
  double total = 0.0;
  for (double v : d.values) total += v;
  EXPECT_NEAR(total, 0.0, 1e-12);
  EXPECT_EQ(d.advantaged_records, 1u);

  t.pop_back();
  EXPECT_SERGAP_ERROR(data_bias(t, kSchema, GroupPair{}), ErrorKind::GroupEmpty);
}

TEST(DataBiasTest, IdenticalMeansGiveZero) {
  std::vector<UtteranceRecord> t{
      {"f1", "female", {0.5, 0.5, 0.0, 0.0}, std::nullopt, std::nullopt, std::nullopt},
      {"f2", "female", {0.0, 0.0, 0.5, 0.5}, std::nullopt, std::nullopt, std::nullopt},
      {"m1", "male", {0.25, 0.25, 0.25, 0.25}, std::nullopt, std::nullopt, std::nullopt}};
  for (double v : data_bias(t, kSchema, GroupPair{}).values) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(GapReportTest, SwapNegatesSignedMetrics) {
  const auto r = ValenceFixture();
  const GapReport a = compute_gap_report("m", r, kSchema, GroupPair{});
  const GapReport b = compute_gap_report("m", r, kSchema, GroupPair{}.swapped());
  for (std::size_t k = 0; k < 4; ++k) {
    ASSERT_EQ(a.d_e[k].has_value(), b.d_e[k].has_value());
    if (a.d_e[k]) {
      EXPECT_EQ(*a.d_e[k], -*b.d_e[k]);
    }
  }
  EXPECT_DOUBLE_EQ(a.d_c.value, b.d_c.value);
  EXPECT_NEAR(a.d_v.value, -b.d_v.value, 1e-15);
  EXPECT_NEAR(*a.macro_gap, -*b.macro_gap, 1e-15);
  EXPECT_FALSE(a.d_d.has_value());
}

}  // namespace
}  // namespace sergap
