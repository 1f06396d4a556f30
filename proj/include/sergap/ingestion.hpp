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

// On-disk formats.
//
//   manifest (one JSON document)
//     {"classes":[...],"corpus_id":"...","gold_threshold_rule":"same_as_pred",
//      "groups":{"advantaged":"female","disadvantaged":"male","extra":[...]},
//      "n_folds":5,"paths":{"predictions":"...","training_gold":"..."},
//      "smoothing":0.05,"valence":{"<class>":"positive|negative|both|neutral"}}
//   predictions (JSON lines)
//     {"fold":0,"gold":[...],"group":"female","pred":[...],"utt_id":"...","valence_tag":"positive"}
//   embeddings (JSON lines)
//     {"layers":[[...],[...]],"set":"X|Y|A|B","utt_id":"..."}
//   layer weights (one JSON document)
//     {"corpus_id":"...","folds":[[...],[...]],"model_id":"..."}
//
// Writers emit canonical_dump() form: sorted keys, no whitespace, floats with
// 9 significant digits. Optional fields are omitted when absent.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sergap/data_model.hpp"

namespace sergap {

struct DatasetManifest {
  EmotionSchema schema;
  GroupPair group_pair;
  std::vector<std::string> extra_groups;
  std::optional<int> n_folds;
  std::optional<std::filesystem::path> predictions_path;
  std::optional<std::filesystem::path> training_gold_path;
  GoldThresholdRule gold_rule = GoldThresholdRule::SameAsPred;
  double smoothing = kDefaultSmoothing;

  const std::string& corpus_id() const noexcept { return schema.corpus_id(); }
  bool knows_group(const std::string& tag) const;
};

// `base_dir` resolves relative paths; `origin` names the source in errors.
// Throws ManifestError.
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                               const std::string& origin = "manifest");
DatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, const DatasetManifest& manifest,
                    const std::filesystem::path& base_dir);

// Records keep file order. Blank lines are skipped. Throws ValidationError
// with "<origin>:<line>:" context.
std::vector<UtteranceRecord> read_predictions(std::istream& in, const DatasetManifest& manifest,
                                              const std::string& origin = "predictions");
std::vector<UtteranceRecord> load_predictions(const std::filesystem::path& path,
                                              const DatasetManifest& manifest);
std::string predictions_line(const UtteranceRecord& record);
void write_predictions(std::ostream& out, std::span<const UtteranceRecord> records);

enum class StimulusSet { X = 0, Y = 1, A = 2, B = 3 };
inline constexpr std::array<StimulusSet, 4> kStimulusSets = {StimulusSet::X, StimulusSet::Y,
                                                            StimulusSet::A, StimulusSet::B};
std::string_view stimulus_set_name(StimulusSet s) noexcept;
std::optional<StimulusSet> parse_stimulus_set(std::string_view token) noexcept;

// Row-major L x D stack of per-layer (time-averaged) embeddings.
class LayerStack {
 public:
  LayerStack() = default;
  LayerStack(std::size_t layers, std::size_t dim, std::vector<double> values);
  static LayerStack from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t layers() const noexcept { return layers_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> layer(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const LayerStack&) const = default;

 private:
  std::size_t layers_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

struct StimulusItem {
  std::string utt_id;
  LayerStack stack;
  bool operator==(const StimulusItem&) const = default;
};

struct StimulusEmbeddings {
  std::array<std::vector<StimulusItem>, 4> sets;

  std::vector<StimulusItem>& set(StimulusSet s) { return sets[static_cast<std::size_t>(s)]; }
  const std::vector<StimulusItem>& set(StimulusSet s) const {
    return sets[static_cast<std::size_t>(s)];
  }
  std::size_t layers() const;
  std::size_t dim() const;

  // Throws ValidationError: empty set, ragged L or D, non-finite entries.
  void validate() const;
  bool operator==(const StimulusEmbeddings&) const = default;
};

StimulusEmbeddings read_embeddings(std::istream& in, const std::string& origin = "embeddings");
StimulusEmbeddings load_embeddings(const std::filesystem::path& path);
// Lines are emitted set by set (X, Y, A, B), items in stored order.
void write_embeddings(std::ostream& out, const StimulusEmbeddings& embeddings);

struct LayerWeights {
  std::string model_id;
  std::string corpus_id;
  std::vector<std::vector<double>> folds;

  std::size_t layers() const { return folds.empty() ? 0 : folds.front().size(); }
  // Throws ValidationError: no folds, ragged folds, negative or non-finite entries.
  void validate() const;
  bool operator==(const LayerWeights&) const = default;
};

LayerWeights parse_layer_weights(const std::string& text,
                                 const std::string& origin = "layer weights");
LayerWeights load_layer_weights(const std::filesystem::path& path);
void write_layer_weights(std::ostream& out, const LayerWeights& weights);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace sergap
