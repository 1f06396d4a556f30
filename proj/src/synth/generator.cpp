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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "sergap/canonical_json.hpp"
#include "sergap/error.hpp"
#include "sergap/synth.hpp"

namespace sergap::synth {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::int64_t kMassScale = 10000;  // training gold resolution 1e-4
constexpr double kQuantaPerUnit = 1e6;  // embedding entries are multiples of 1e-6

[[noreturn]] void spec_error(const std::string& msg) { raise(ErrorKind::SpecError, msg); }

template <class T>
void shuffle(std::vector<T>& v, NoiseSource& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

// The value a 9-significant-digit file stores for v.
double stored(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

// Distribution whose entries exceed 1/n exactly on `set`, snapped to what the
// file format stores so a written fixture thresholds the same way. An empty
// set is uniform, rounded down: 1/6 stored as 0.166666667 would cross the
// strict threshold.
std::vector<double> distribution_for(const std::vector<std::size_t>& set, std::size_t n) {
  const double nn = static_cast<double>(n);
  if (set.empty()) {
    double u = stored(1.0 / nn);
    if (u > 1.0 / nn) u = stored(u - std::pow(10.0, std::floor(std::log10(u)) - 8.0));
    return std::vector<double>(n, u);
  }
  const double m = static_cast<double>(set.size());
  const double high = (1.0 / nn + 1.0 / m) / 2.0;
  const double low = (1.0 - m * high) / (nn - m);
  std::vector<double> out(n, stored(low));
  for (std::size_t k : set) out[k] = stored(high);
  return out;
}

// Dividing the rounded integer yields the double nearest k * 1e-6, which the
// 9-digit file format reproduces exactly.
double quantize(double v) { return std::round(v * kQuantaPerUnit) / kQuantaPerUnit; }

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) spec_error(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      spec_error("unknown field '" + key + "' in " + where);
    }
  }
}

struct GroupBuild {
  std::vector<oracle::PlannedUtterance> utterances;
  std::vector<std::optional<std::size_t>> primary;
};

GroupBuild build_group(const PredictionSpec& spec, const EmotionSchema& schema,
                       const std::string& group, NoiseSource& rng) {
  const std::size_t n = schema.size();
  GroupBuild g;
  const auto cells_it = spec.cells.find(group);
  const std::map<std::string, CellTarget> no_cells;
  const auto& cells = cells_it == spec.cells.end() ? no_cells : cells_it->second;
  for (const auto& [name, target] : cells) {
    if (!schema.index_of(name)) spec_error("cell for unknown class '" + name + "'");
  }

  std::vector<std::size_t> tp(n, 0), fp(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    auto it = cells.find(schema.class_name(k));
    const CellTarget target = it == cells.end() ? CellTarget{} : it->second;
    const std::string where = "group '" + group + "', class '" + schema.class_name(k) + "'";
    if (target.recall && (*target.recall < 0.0 || *target.recall > 1.0)) {
      spec_error(where + ": recall outside [0,1]");
    }
    if (target.precision && (*target.precision <= 0.0 || *target.precision > 1.0)) {
      spec_error(where + ": precision outside (0,1]");
    }
    if (target.gold == 0) {
      if (target.recall) spec_error(where + ": recall target with zero gold positives");
    } else if (!target.recall) {
      spec_error(where + ": gold positives without a recall target");
    }
    tp[k] = target.gold == 0
                ? 0
                : static_cast<std::size_t>(std::llround(*target.recall * double(target.gold)));
    if (target.false_positives) {
      fp[k] = *target.false_positives;
    } else if (tp[k] > 0) {
      const double precision = target.precision.value_or(1.0);
      const auto predicted =
          static_cast<std::size_t>(std::llround(double(tp[k]) / precision));
      fp[k] = predicted - tp[k];
    } else if (target.precision) {
      spec_error(where + ": precision target with zero true positives");
    }
    for (std::size_t i = 0; i < target.gold; ++i) {
      g.utterances.push_back({group, {k}, {}, std::nullopt});
      g.primary.push_back(k);
    }
  }
  auto empty_it = spec.empty_gold.find(group);
  const std::size_t empty = empty_it == spec.empty_gold.end() ? 0 : empty_it->second;
  for (std::size_t i = 0; i < empty; ++i) {
    g.utterances.push_back({group, {}, {}, std::nullopt});
    g.primary.push_back(std::nullopt);
  }
  if (g.utterances.empty()) spec_error("group '" + group + "' has no utterances");

  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < g.primary.size(); ++i) {
      if (g.primary[i] == k) members.push_back(i);
    }
    // Valence tags, independent of the TP draw.
    if (schema.valence(k) == Valence::Both) {
      double fraction = 0.5;
      auto pf = spec.positive_fraction.find(schema.class_name(k));
      if (pf != spec.positive_fraction.end()) {
        auto gf = pf->second.find(group);
        if (gf != pf->second.end()) fraction = gf->second;
      }
      if (fraction < 0.0 || fraction > 1.0) spec_error("positive_fraction outside [0,1]");
      shuffle(members, rng);
      const auto positives = static_cast<std::size_t>(std::llround(fraction * double(members.size())));
      for (std::size_t j = 0; j < members.size(); ++j) {
        g.utterances[members[j]].tag = j < positives ? Valence::Positive : Valence::Negative;
      }
    }
    shuffle(members, rng);
    for (std::size_t j = 0; j < tp[k]; ++j) g.utterances[members[j]].pred.push_back(k);
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (fp[k] == 0) continue;
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < g.utterances.size(); ++i) {
      if (g.primary[i] == k) continue;
      if (g.utterances[i].pred.size() + 1 >= n) continue;
      candidates.push_back(i);
    }
    if (candidates.size() < fp[k]) {
      spec_error("group '" + group + "', class '" + schema.class_name(k) + "': " +
                 std::to_string(fp[k]) + " false positives but only " +
                 std::to_string(candidates.size()) + " utterances can take them");
    }
    shuffle(candidates, rng);
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      return g.utterances[a].pred.size() < g.utterances[b].pred.size();
    });
    for (std::size_t j = 0; j < fp[k]; ++j) g.utterances[candidates[j]].pred.push_back(k);
  }
  for (auto& u : g.utterances) std::sort(u.pred.begin(), u.pred.end());
  return g;
}

std::vector<UtteranceRecord> build_training(const TrainingTarget& target, const std::string& group,
                                            std::size_t n, NoiseSource& rng) {
  if (target.count == 0) spec_error("training count for '" + group + "' must be positive");
  if (target.mean.size() != n) spec_error("training mean for '" + group + "' has wrong length");
  std::vector<std::int64_t> mass(n);
  std::int64_t total = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (target.mean[k] < 0.0) spec_error("negative training mean for '" + group + "'");
    mass[k] = std::llround(target.mean[k] * double(kMassScale));
    total += mass[k];
  }
  if (total != kMassScale) spec_error("training mean for '" + group + "' does not sum to 1");

  std::vector<UtteranceRecord> out;
  auto emit = [&](const std::vector<std::int64_t>& m) {
    UtteranceRecord r;
    r.utt_id = "train_" + group + "_" + std::to_string(out.size());
    r.group = group;
    for (std::int64_t v : m) r.gold.push_back(double(v) / double(kMassScale));
    out.push_back(std::move(r));
  };
  std::vector<std::int64_t> cap(n);
  for (std::size_t k = 0; k < n; ++k) cap[k] = std::min(mass[k], kMassScale - mass[k]) / 2;
  for (std::size_t pair = 0; pair < target.count / 2; ++pair) {
    std::vector<std::int64_t> delta(n, 0);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t j = rng.below(n);
      const std::size_t k = rng.below(n);
      if (j == k) continue;
      const std::int64_t room = std::min(cap[j] - std::abs(delta[j]), cap[k] - std::abs(delta[k]));
      if (room <= 0) continue;
      const auto amount = static_cast<std::int64_t>(rng.below(static_cast<std::size_t>(room) + 1));
      delta[j] += amount;
      delta[k] -= amount;
    }
    std::vector<std::int64_t> plus(n), minus(n);
    for (std::size_t k = 0; k < n; ++k) {
      plus[k] = mass[k] + delta[k];
      minus[k] = mass[k] - delta[k];
    }
    emit(plus);
    emit(minus);
  }
  if (target.count % 2 == 1) emit(mass);
  return out;
}

json gaps_json(const oracle::Gaps& g) {
  json d_e = json::array();
  for (const auto& v : g.d_e) d_e.push_back(v ? json(*v) : json(nullptr));
  return {{"d_e", d_e}, {"d_c", g.d_c ? json(*g.d_c) : json(nullptr)}, {"d_v", g.d_v}};
}

json effect_json(const oracle::EffectSize& e) {
  return {{"d_s_sum", e.d_s_sum}, {"d_s_mean", e.d_s_mean}, {"stddev", e.stddev}};
}

}  // namespace

NoiseSource::NoiseSource(std::uint64_t seed) : engine_(seed) {}

double NoiseSource::uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

double NoiseSource::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * 3.14159265358979323846 * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::size_t NoiseSource::below(std::size_t bound) {
  return static_cast<std::size_t>(uniform() * double(bound));
}

SynthPredictions generate_predictions(const PredictionSpec& spec, std::uint64_t seed) {
  std::optional<EmotionSchema> schema;
  try {
    schema.emplace(spec.corpus_id, spec.classes, spec.valence);
  } catch (const Error& e) {
    spec_error(e.what());
  }
  if (spec.groups.advantaged == spec.groups.disadvantaged) spec_error("group labels must differ");
  for (const auto& [group, cells] : spec.cells) {
    if (group != spec.groups.advantaged && group != spec.groups.disadvantaged) {
      spec_error("cells for undeclared group '" + group + "'");
    }
  }

  NoiseSource rng(seed);
  const std::size_t n = schema->size();
  std::vector<oracle::PlannedUtterance> plan;
  for (const auto& group : {spec.groups.advantaged, spec.groups.disadvantaged}) {
    GroupBuild g = build_group(spec, *schema, group, rng);
    plan.insert(plan.end(), g.utterances.begin(), g.utterances.end());
  }
  shuffle(plan, rng);

  DatasetManifest manifest{*schema, spec.groups, {}, std::nullopt, std::nullopt, std::nullopt};
  SynthPredictions out{std::move(manifest), {}, {}, plan, {}, std::nullopt};
  std::map<std::string, std::size_t> serial;
  for (const auto& u : plan) {
    UtteranceRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "%05zu", serial[u.group]++);
    r.utt_id = u.group + "_" + id;
    r.group = u.group;
    r.gold = distribution_for(u.gold, n);
    r.pred = distribution_for(u.pred, n);
    r.valence_tag = u.tag;
    out.records.push_back(std::move(r));
  }
  out.expected = oracle::gaps_from_plan(plan, *schema, spec.groups.advantaged,
                                        spec.groups.disadvantaged);

  if (!spec.training.empty()) {
    for (const auto& group : {spec.groups.advantaged, spec.groups.disadvantaged}) {
      auto it = spec.training.find(group);
      if (it == spec.training.end()) spec_error("training target missing for '" + group + "'");
      auto recs = build_training(it->second, group, n, rng);
      out.training_records.insert(out.training_records.end(), recs.begin(), recs.end());
    }
    out.expected_d_d = oracle::data_bias(out.training_records, n, spec.groups.advantaged,
                                         spec.groups.disadvantaged);
  }
  return out;
}

SynthEmbeddings generate_embeddings(const EmbeddingSpec& spec, std::uint64_t seed,
                                    const std::string& model_id, const std::string& corpus_id) {
  if (spec.dim < 2) spec_error("embedding dimension must be at least 2");
  if (spec.layers < 1) spec_error("at least one layer is required");
  if (spec.layer_strengths.size() != spec.layers) {
    spec_error("layer_strengths must list one value per layer");
  }
  for (double s : spec.layer_strengths) {
    if (s < -1.0 || s > 1.0) spec_error("layer strengths must lie in [-1, 1]");
  }
  if (spec.noise < 0.0) spec_error("noise must be non-negative");
  if (!spec.size_x || !spec.size_y || !spec.size_a || !spec.size_b) {
    spec_error("every stimulus set needs at least one item");
  }
  for (const auto& fold : spec.weights) {
    if (fold.size() != spec.layers) spec_error("weight folds must have one entry per layer");
    for (double w : fold) {
      if (w < 0.0) spec_error("layer weights must be non-negative");
    }
  }

  NoiseSource rng(seed);
  SynthEmbeddings out;
  std::map<StimulusSet, std::vector<std::vector<oracle::Vector>>> raw;

  auto draw = [&](StimulusSet set, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<oracle::Vector> layers;
      for (std::size_t l = 0; l < spec.layers; ++l) {
        const double s = spec.layer_strengths[l];
        oracle::Vector anchor(spec.dim, 0.0);
        switch (set) {
          case StimulusSet::X: anchor[0] = (1 + s) / 2; anchor[1] = (1 - s) / 2; break;
          case StimulusSet::Y: anchor[0] = (1 - s) / 2; anchor[1] = (1 + s) / 2; break;
          case StimulusSet::A: anchor[0] = 1.0; break;
          case StimulusSet::B: anchor[1] = 1.0; break;
        }
        for (double& v : anchor) v = quantize(v + spec.noise * rng.normal());
        layers.push_back(std::move(anchor));
      }
      char id[32];
      std::snprintf(id, sizeof id, "%s_%04zu", std::string(stimulus_set_name(set)).c_str(), i);
      out.stimuli.set(set).push_back({id, LayerStack::from_rows(layers)});
      raw[set].push_back(std::move(layers));
    }
  };
  draw(StimulusSet::X, spec.size_x);
  draw(StimulusSet::Y, spec.size_y);
  draw(StimulusSet::A, spec.size_a);
  draw(StimulusSet::B, spec.size_b);

  auto reduce = [&](StimulusSet set, const std::optional<oracle::Vector>& weights) {
    std::vector<oracle::Vector> out_vectors;
    for (const auto& layers : raw[set]) {
      out_vectors.push_back(weights ? oracle::layer_weighted(layers, *weights)
                                    : oracle::layer_mean(layers));
    }
    return out_vectors;
  };
  auto expect = [&](const std::optional<oracle::Vector>& weights) {
    auto e = oracle::effect_size(reduce(StimulusSet::X, weights), reduce(StimulusSet::Y, weights),
                                 reduce(StimulusSet::A, weights), reduce(StimulusSet::B, weights));
    if (!(e.stddev > 1e-12)) spec_error("planted structure gives identical associations");
    return e;
  };
  out.expected_mean = expect(std::nullopt);
  if (!spec.weights.empty()) {
    // Weights as the file stores them, so reloaded fixtures agree exactly.
    std::vector<std::vector<double>> folds = spec.weights;
    for (auto& fold : folds) {
      for (double& w : fold) w = stored(w);
    }
    out.weights = LayerWeights{model_id, corpus_id, folds};
    out.expected_weighted = expect(oracle::fold_average(folds));
  }
  return out;
}

SynthSpec parse_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    spec_error(std::string("malformed spec: ") + e.what());
  }
  try {
    check_keys(doc, {"model_id", "predictions", "embeddings"}, "spec");
    SynthSpec spec;
    if (doc.contains("model_id")) spec.model_id = doc["model_id"].get<std::string>();
    if (doc.contains("predictions")) {
      const json& p = doc["predictions"];
      check_keys(p,
                 {"corpus_id", "classes", "valence", "groups", "cells", "empty_gold",
                  "positive_fraction", "training"},
                 "predictions");
      PredictionSpec ps;
      if (p.contains("corpus_id")) ps.corpus_id = p["corpus_id"].get<std::string>();
      ps.classes = p.at("classes").get<std::vector<std::string>>();
      if (p.contains("valence")) {
        for (const auto& [name, token] : p["valence"].items()) {
          auto v = parse_valence(token.get<std::string>());
          if (!v) spec_error("unknown valence '" + token.get<std::string>() + "'");
          ps.valence[name] = *v;
        }
      }
      for (const auto& name : ps.classes) {
        if (ps.valence.contains(name)) continue;
        auto v = default_valence(name);
        if (!v) spec_error("no valence given for class '" + name + "'");
        ps.valence[name] = *v;
      }
      if (p.contains("groups")) {
        check_keys(p["groups"], {"advantaged", "disadvantaged"}, "groups");
        ps.groups = GroupPair{p["groups"].at("advantaged").get<std::string>(),
                              p["groups"].at("disadvantaged").get<std::string>()};
      }
      for (const auto& [group, cells] : p.at("cells").items()) {
        for (const auto& [cls, cell] : cells.items()) {
          check_keys(cell, {"gold", "recall", "precision", "false_positives"}, "cell");
          CellTarget t;
          t.gold = cell.at("gold").get<std::size_t>();
          if (cell.contains("recall")) t.recall = cell["recall"].get<double>();
          if (cell.contains("precision")) t.precision = cell["precision"].get<double>();
          if (cell.contains("false_positives")) {
            t.false_positives = cell["false_positives"].get<std::size_t>();
          }
          ps.cells[group][cls] = t;
        }
      }
      if (p.contains("empty_gold")) {
        ps.empty_gold = p["empty_gold"].get<std::map<std::string, std::size_t>>();
      }
      if (p.contains("positive_fraction")) {
        ps.positive_fraction =
            p["positive_fraction"].get<std::map<std::string, std::map<std::string, double>>>();
      }
      if (p.contains("training")) {
        for (const auto& [group, t] : p["training"].items()) {
          check_keys(t, {"count", "mean"}, "training");
          ps.training[group] = TrainingTarget{t.at("count").get<std::size_t>(),
                                              t.at("mean").get<std::vector<double>>()};
        }
      }
      spec.predictions = std::move(ps);
    }
    if (doc.contains("embeddings")) {
      const json& e = doc["embeddings"];
      check_keys(e, {"sizes", "dim", "layers", "layer_strengths", "noise", "weights"},
                 "embeddings");
      EmbeddingSpec es;
      const json& sizes = e.at("sizes");
      check_keys(sizes, {"X", "Y", "A", "B"}, "sizes");
      es.size_x = sizes.at("X").get<std::size_t>();
      es.size_y = sizes.at("Y").get<std::size_t>();
      es.size_a = sizes.at("A").get<std::size_t>();
      es.size_b = sizes.at("B").get<std::size_t>();
      es.dim = e.at("dim").get<std::size_t>();
      es.layers = e.value("layers", std::size_t{1});
      es.layer_strengths = e.at("layer_strengths").get<std::vector<double>>();
      es.noise = e.value("noise", 0.0);
      if (e.contains("weights")) es.weights = e["weights"].get<std::vector<std::vector<double>>>();
      spec.embeddings = std::move(es);
    }
    return spec;
  } catch (const json::exception& e) {
    spec_error(std::string("malformed spec: ") + e.what());
  }
}

SynthSpec load_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) spec_error("cannot open spec " + path.string());
  return parse_spec(read_text_file(path));
}

void write_fixture(const SynthSpec& spec, std::uint64_t seed, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  json expected{{"seed", seed}, {"model_id", spec.model_id}};
  std::string corpus_id = "SYN";

  if (spec.predictions) {
    SynthPredictions p = generate_predictions(*spec.predictions, seed);
    corpus_id = p.manifest.corpus_id();
    {
      std::ofstream f(out_dir / "predictions.jsonl", std::ios::binary);
      write_predictions(f, p.records);
    }
    p.manifest.predictions_path = out_dir / "predictions.jsonl";
    if (!p.training_records.empty()) {
      std::ofstream f(out_dir / "training_gold.jsonl", std::ios::binary);
      write_predictions(f, p.training_records);
      p.manifest.training_gold_path = out_dir / "training_gold.jsonl";
    }
    {
      std::ofstream f(out_dir / "manifest.json", std::ios::binary);
      write_manifest(f, p.manifest, out_dir);
    }
    json pe = gaps_json(p.expected);
    if (p.expected_d_d) pe["d_d"] = *p.expected_d_d;
    expected["predictions"] = pe;
  }
  if (spec.embeddings) {
    SynthEmbeddings e = generate_embeddings(*spec.embeddings, seed, spec.model_id, corpus_id);
    {
      std::ofstream f(out_dir / "embeddings.jsonl", std::ios::binary);
      write_embeddings(f, e.stimuli);
    }
    json ee{{"mean", effect_json(e.expected_mean)}};
    if (e.weights) {
      std::ofstream f(out_dir / "layer_weights.json", std::ios::binary);
      write_layer_weights(f, *e.weights);
      ee["weighted"] = effect_json(*e.expected_weighted);
    }
    expected["embeddings"] = ee;
  }
  std::ofstream f(out_dir / "expected.json", std::ios::binary);
  f << expected.dump(2) << '\n';
}

}  // namespace sergap::synth
