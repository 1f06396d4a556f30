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

#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "sergap/gap_metrics.hpp"
#include "sergap/speat.hpp"
#include "sergap/synth.hpp"
#include "support/expect_error.hpp"

namespace sergap::synth {
namespace {

namespace fs = std::filesystem;

PredictionSpec HappySpec() {
  PredictionSpec p;
  p.classes = {"Anger", "Happy", "Neutral", "Sad"};
  for (const auto& c : p.classes) p.valence[c] = *default_valence(c);
  p.cells["female"]["Happy"] = {2, 1.0, 1.0, std::nullopt};
  p.cells["male"]["Happy"] = {2, 0.5, 1.0, std::nullopt};
  return p;
}

TEST(SynthPredictionsTest, PlantedHappyGap) {
  const SynthPredictions s = generate_predictions(HappySpec(), 11);
  EXPECT_EQ(s.records.size(), 4u);
  ASSERT_TRUE(s.expected.d_e[1].has_value());
  EXPECT_NEAR(*s.expected.d_e[1], 1.0 / 3.0, 1e-12);
  EXPECT_FALSE(s.expected.d_e[0].has_value());
  EXPECT_NEAR(*s.expected.d_c, 1.0 / 3.0, 1e-12);

  const GapReport r =
      compute_gap_report("m", s.records, s.manifest.schema, s.manifest.group_pair);
  EXPECT_NEAR(r.d_c.value, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.d_v.value, 1.0 / 3.0, 1e-12);
}

TEST(SynthPredictionsTest, IdenticalGroupsGiveZeroReport) {
  PredictionSpec p = HappySpec();
  p.cells["male"] = p.cells["female"];
  p.cells["male"]["Anger"] = p.cells["female"]["Anger"] = {3, 2.0 / 3.0, std::nullopt, 1};
  const SynthPredictions s = generate_predictions(p, 5);
  const GapReport r =
      compute_gap_report("m", s.records, s.manifest.schema, s.manifest.group_pair);
  for (const auto& d : r.d_e) {
    if (d) {
      EXPECT_EQ(*d, 0.0);
    }
  }
  EXPECT_EQ(r.d_c.value, 0.0);
  EXPECT_EQ(r.d_v.value, 0.0);
}

TEST(SynthPredictionsTest, PlantedTrainingBias) {
  PredictionSpec p = HappySpec();
  p.training["female"] = {7, {0.2, 0.3, 0.4, 0.1}};
  p.training["male"] = {4, {0.1, 0.2, 0.4, 0.3}};
  const SynthPredictions s = generate_predictions(p, 3);
  EXPECT_EQ(s.training_records.size(), 11u);
  const DataBiasVector d = data_bias(s.training_records, s.manifest.schema, s.manifest.group_pair);
  const std::vector<double> expected{0.1, 0.1, 0.0, -0.2};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(d.values[k], expected[k], 1e-9);
    EXPECT_NEAR((*s.expected_d_d)[k], expected[k], 1e-9);
  }
  for (const auto& r : s.training_records) EXPECT_NO_THROW(validate_record(r, 4));
}

TEST(SynthPredictionsTest, FalsePositivesAndTags) {
  PredictionSpec p;
  p.classes = {"Anger", "Happy", "Surprise"};
  for (const auto& c : p.classes) p.valence[c] = *default_valence(c);
  p.cells["female"]["Surprise"] = {8, 0.75, 0.5, std::nullopt};
  p.cells["female"]["Anger"] = {4, 0.5, std::nullopt, 1};
  p.cells["male"]["Surprise"] = {4, 1.0, std::nullopt, 2};
  p.cells["male"]["Happy"] = {6, 0.5, 1.0, std::nullopt};
  p.empty_gold["female"] = 4;
  p.positive_fraction["Surprise"]["female"] = 0.25;
  const SynthPredictions s = generate_predictions(p, 9);
  const GapReport r =
      compute_gap_report("m", s.records, s.manifest.schema, s.manifest.group_pair);
  for (std::size_t k = 0; k < 3; ++k) {
    ASSERT_EQ(r.d_e[k].has_value(), s.expected.d_e[k].has_value());
    if (r.d_e[k]) {
      EXPECT_NEAR(*r.d_e[k], *s.expected.d_e[k], 1e-12);
    }
  }
  EXPECT_NEAR(r.d_v.value, s.expected.d_v, 1e-12);
  ASSERT_EQ(r.d_v.splits.size(), 1u);
  EXPECT_EQ(r.d_v.splits[0].tagged_positive, 2u + 2u);
  const ClassScore& fs = r.table.advantaged.classes[2];
  EXPECT_EQ(fs.true_positives, 6u);
  EXPECT_EQ(fs.predicted_positives, 12u);
}

TEST(SynthPredictionsTest, UnachievablePlans) {
  PredictionSpec p = HappySpec();
  p.cells["female"]["Anger"] = {0, 0.5, std::nullopt, std::nullopt};
  EXPECT_SERGAP_ERROR(generate_predictions(p, 1), ErrorKind::SpecError);
  p = HappySpec();
  p.cells["male"]["Sad"] = {0, std::nullopt, std::nullopt, 40};
  EXPECT_SERGAP_ERROR(generate_predictions(p, 1), ErrorKind::SpecError);
  p = HappySpec();
  p.cells["male"]["Happy"] = {2, 0.0, 0.5, std::nullopt};
  EXPECT_SERGAP_ERROR(generate_predictions(p, 1), ErrorKind::SpecError);
  p = HappySpec();
  p.training["female"] = {2, {0.5, 0.5, 0.5, 0.5}};
  p.training["male"] = {2, {0.25, 0.25, 0.25, 0.25}};
  EXPECT_SERGAP_ERROR(generate_predictions(p, 1), ErrorKind::SpecError);
  p = HappySpec();
  p.cells["robot"]["Happy"] = {1, 1.0, std::nullopt, std::nullopt};
  EXPECT_SERGAP_ERROR(generate_predictions(p, 1), ErrorKind::SpecError);
}

TEST(SynthSpecTest, ParseErrors) {
  EXPECT_SERGAP_ERROR(parse_spec("{"), ErrorKind::SpecError);
  EXPECT_SERGAP_ERROR(parse_spec(R"({"wat": 1})"), ErrorKind::SpecError);
  EXPECT_SERGAP_ERROR(parse_spec(R"({"predictions": {"classes": ["A", "B"], "cells": {}}})"),
                      ErrorKind::SpecError);
  EXPECT_SERGAP_ERROR(parse_spec(R"({"embeddings": {"dim": "two"}})"), ErrorKind::SpecError);
  EXPECT_SERGAP_ERROR(load_spec("/no/such/spec.json"), ErrorKind::SpecError);
  const SynthSpec s = parse_spec(R"({"predictions": {"classes": ["Happy", "Sad"],
      "cells": {"female": {"Happy": {"gold": 1, "recall": 1}}, "male": {"Sad": {"gold": 1, "recall": 0}}}}})");
  ASSERT_TRUE(s.predictions.has_value());
  EXPECT_EQ(s.predictions->valence.at("Sad"), Valence::Negative);
  EXPECT_FALSE(s.embeddings.has_value());
}

EmbeddingSpec Planted(double strength, std::size_t size, std::size_t layers, double noise) {
  EmbeddingSpec e;
  e.size_x = e.size_y = size;
  e.size_a = e.size_b = 4;
  e.dim = 8;
  e.layers = layers;
  e.layer_strengths.assign(layers, 0.0);
  e.layer_strengths[0] = strength;
  e.noise = noise;
  return e;
}

TEST(SynthEmbeddingsTest, NoiselessHandFixture) {
  EmbeddingSpec e = Planted(1.0, 1, 1, 0.0);
  e.size_a = e.size_b = 1;
  e.dim = 2;
  const SynthEmbeddings s = generate_embeddings(e, 0);
  EXPECT_NEAR(s.expected_mean.d_s_sum, 2.0, 1e-12);
  EXPECT_NEAR(effect_size(s.stimuli, AggregationMode::mean()).d_s, 2.0, 1e-12);
}

TEST(SynthEmbeddingsTest, NullPlantingCentresOnZero) {
  double total = 0.0, squares = 0.0;
  const int runs = 200;
  for (int seed = 0; seed < runs; ++seed) {
    const SynthEmbeddings s = generate_embeddings(Planted(0.0, 50, 1, 0.3), seed);
    SpeatOptions o;
    o.numerator = Numerator::Mean;
    const double d = effect_size(s.stimuli, AggregationMode::mean(), o).d_s;
    EXPECT_NEAR(d, s.expected_mean.d_s_mean, 1e-9);
    total += d;
    squares += d * d;
  }
  const double mean = total / runs;
  const double sd = std::sqrt(squares / runs - mean * mean);
  // Sampling distribution of the mean-difference effect size at n = 50 per set.
  EXPECT_LT(std::fabs(mean), 0.05);
  EXPECT_GT(sd, 0.15);
  EXPECT_LT(sd, 0.25);
}

TEST(SynthEmbeddingsTest, WeightedRecoversSingleLayerPlanting) {
  for (int seed = 0; seed < 10; ++seed) {
    EmbeddingSpec e = Planted(0.6, 10, 4, 0.3);
    e.weights = {{1, 0, 0, 0}, {1, 0, 0, 0}};
    const SynthEmbeddings s = generate_embeddings(e, seed, "m", "IEM");
    ASSERT_TRUE(s.weights.has_value());
    const SpeatResult w = effect_size(s.stimuli, AggregationMode::weighted(*s.weights));
    const SpeatResult m = effect_size(s.stimuli, AggregationMode::mean());
    EXPECT_NEAR(w.d_s, s.expected_weighted->d_s_sum, 1e-9);
    EXPECT_NEAR(m.d_s, s.expected_mean.d_s_sum, 1e-9);
    EXPECT_GT(w.d_s, m.d_s);
  }
}

TEST(SynthEmbeddingsTest, SpecErrors) {
  EmbeddingSpec e = Planted(0.5, 3, 2, 0.1);
  e.dim = 1;
  EXPECT_SERGAP_ERROR(generate_embeddings(e, 0), ErrorKind::SpecError);
  e = Planted(0.5, 3, 2, 0.1);
  e.layer_strengths.pop_back();
  EXPECT_SERGAP_ERROR(generate_embeddings(e, 0), ErrorKind::SpecError);
  e = Planted(0.0, 3, 2, 0.0);
  EXPECT_SERGAP_ERROR(generate_embeddings(e, 0), ErrorKind::SpecError);
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(FixtureTest, DeterministicAndLoadable) {
  const SynthSpec spec = load_spec(fs::path(SERGAP_TEST_DATA_DIR) / "planted_dc.json");
  const fs::path root = fs::path(::testing::TempDir()) / "sergap_fixture";
  fs::remove_all(root);
  write_fixture(spec, 42, root / "a");
  write_fixture(spec, 42, root / "b");
  write_fixture(spec, 43, root / "c");
  for (const char* f : {"manifest.json", "predictions.jsonl", "training_gold.jsonl",
                        "embeddings.jsonl", "layer_weights.json", "expected.json"}) {
    EXPECT_EQ(Slurp(root / "a" / f), Slurp(root / "b" / f)) << f;
  }
  EXPECT_NE(Slurp(root / "a" / "embeddings.jsonl"), Slurp(root / "c" / "embeddings.jsonl"));

  const DatasetManifest m = load_manifest(root / "a" / "manifest.json");
  const auto records = load_predictions(*m.predictions_path, m);
  const auto training = load_predictions(*m.training_gold_path, m);
  const GapReport r =
      compute_gap_report("planted", records, m.schema, m.group_pair, m.gold_rule, training);
  const auto expected = nlohmann::json::parse(Slurp(root / "a" / "expected.json"));
  EXPECT_NEAR(r.d_c.value, expected["predictions"]["d_c"].get<double>(), 1e-9);
  EXPECT_NEAR(r.d_v.value, expected["predictions"]["d_v"].get<double>(), 1e-9);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(r.d_d->values[k], expected["predictions"]["d_d"][k].get<double>(), 1e-9);
  }
  const StimulusEmbeddings e = load_embeddings(root / "a" / "embeddings.jsonl");
  const LayerWeights w = load_layer_weights(root / "a" / "layer_weights.json");
  EXPECT_NEAR(effect_size(e, AggregationMode::weighted(w)).d_s,
              expected["embeddings"]["weighted"]["d_s_sum"].get<double>(), 1e-9);
}

TEST(NoiseSourceTest, PortableStream) {
  NoiseSource a(1), b(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform(), b.uniform());
  NoiseSource c(5489);
  // First mt19937_64 output for the default seed 5489.
  EXPECT_EQ(c.uniform(), double(14514284786278117030ULL >> 11) * 0x1.0p-53);
}

}  // namespace
}  // namespace sergap::synth
