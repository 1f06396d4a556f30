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

// Deterministic synthetic fixtures with planted bias.
//
// Spec document (JSON), both sections optional:
//
//   {"model_id": "synth",
//    "predictions": {
//      "corpus_id": "SYN", "classes": [...], "valence": {...},
//      "groups": {"advantaged": "female", "disadvantaged": "male"},
//      "cells": {"female": {"Happy": {"gold": 2, "recall": 1.0, "precision": 1.0}, ...},
//                "male":   {...}},
//      "empty_gold": {"female": 0, "male": 0},
//      "positive_fraction": {"Surprise": {"female": 0.5, "male": 0.5}},
//      "training": {"female": {"count": 10, "mean": [...]}, "male": {...}}},
//    "embeddings": {
//      "sizes": {"X": 8, "Y": 8, "A": 8, "B": 8}, "dim": 16, "layers": 3,
//      "layer_strengths": [1.0, 0.0, 0.0], "noise": 0.2,
//      "weights": [[1, 0, 0]]}}
//
// A cell's "gold" is the number of utterances whose gold label set is
// exactly that class. The generator realizes TP = round(recall * gold)
// and predicted positives = round(TP / precision) (or TP + "false_positives"
// when given), then derives every expectation from the realized label sets.
//
// Noise: std::mt19937_64 seeded with the fixture seed; uniforms are the top
// 53 bits scaled by 2^-53; normals use Box-Muller with both outputs consumed
// in order. Embedding entries are quantized to 1e-6 so files round-trip.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sergap/data_model.hpp"
#include "sergap/ingestion.hpp"
#include "sergap/oracle.hpp"

namespace sergap::synth {

struct CellTarget {
  std::size_t gold = 0;
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<std::size_t> false_positives;
};

struct TrainingTarget {
  std::size_t count = 0;
  std::vector<double> mean;
};

struct PredictionSpec {
  std::string corpus_id = "SYN";
  std::vector<std::string> classes;
  std::map<std::string, Valence> valence;
  GroupPair groups;
  // group -> class -> target
  std::map<std::string, std::map<std::string, CellTarget>> cells;
  std::map<std::string, std::size_t> empty_gold;
  // both-valence class -> group -> fraction of its utterances tagged positive
  std::map<std::string, std::map<std::string, double>> positive_fraction;
  std::map<std::string, TrainingTarget> training;
};

struct EmbeddingSpec {
  std::size_t size_x = 1, size_y = 1, size_a = 1, size_b = 1;
  std::size_t dim = 2;
  std::size_t layers = 1;
  std::vector<double> layer_strengths;  // per layer, in [-1, 1]
  double noise = 0.0;
  std::vector<std::vector<double>> weights;  // optional folds
};

struct SynthSpec {
  std::string model_id = "synth";
  std::optional<PredictionSpec> predictions;
  std::optional<EmbeddingSpec> embeddings;
};

// Throws SpecError on malformed or unachievable specs.
SynthSpec parse_spec(const std::string& text);
SynthSpec load_spec(const std::filesystem::path& path);

struct SynthPredictions {
  DatasetManifest manifest;
  std::vector<UtteranceRecord> records;
  std::vector<UtteranceRecord> training_records;
  std::vector<oracle::PlannedUtterance> plan;
  oracle::Gaps expected;
  std::optional<std::vector<double>> expected_d_d;
};

SynthPredictions generate_predictions(const PredictionSpec& spec, std::uint64_t seed);

struct SynthEmbeddings {
  StimulusEmbeddings stimuli;
  std::optional<LayerWeights> weights;
  oracle::EffectSize expected_mean;
  std::optional<oracle::EffectSize> expected_weighted;
};

SynthEmbeddings generate_embeddings(const EmbeddingSpec& spec, std::uint64_t seed,
                                    const std::string& model_id = "synth",
                                    const std::string& corpus_id = "SYN");

// Writes manifest.json, predictions.jsonl, training_gold.jsonl,
// embeddings.jsonl, layer_weights.json and expected.json (whichever apply)
// into `out_dir`.
void write_fixture(const SynthSpec& spec, std::uint64_t seed,
                   const std::filesystem::path& out_dir);

// Portable noise source described above.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed);
  double uniform();  // [0, 1)
  double normal();
  std::size_t below(std::size_t bound);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace sergap::synth
