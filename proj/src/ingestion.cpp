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

#include "sergap/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sergap/canonical_json.hpp"
#include "sergap/error.hpp"

namespace sergap {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// 1-based line of the first occurrence of `needle`, or 0.
std::size_t line_of(const std::string& text, const std::string& needle, std::size_t nth = 1) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < nth; ++i) {
    pos = text.find(needle, i == 0 ? 0 : pos + 1);
    if (pos == std::string::npos) return 0;
  }
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n')) + 1;
}

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n')) + 1;
}

json parse_document(const std::string& text, const std::string& origin, ErrorKind kind) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    raise(kind, origin + ":" + std::to_string(line_of_byte(text, e.byte)) +
                    ": malformed JSON (" + e.what() + ")");
  }
}

// Context prefix "<origin>:<line>: field '<field>': " for manifest messages.
std::string manifest_context(const std::string& origin, const std::string& text,
                             const std::string& field, const std::string& token) {
  std::size_t line = line_of(text, "\"" + token + "\"");
  std::string out = origin;
  if (line > 0) out += ":" + std::to_string(line);
  return out + ": field '" + field + "': ";
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::function<void(const std::string&)>& fail) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(key);
  }
}

std::vector<double> number_array(const json& value, const std::string& what,
                                  const std::function<void(const std::string&)>& fail) {
  if (!value.is_array()) fail(what + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& item : value) {
    if (!item.is_number()) fail(what + " must be an array of numbers");
    const double v = item.get<double>();
    if (!std::isfinite(v)) fail(what + " contains a non-finite value");
    out.push_back(v);
  }
  return out;
}

json number_json(std::span<const double> values) {
  json arr = json::array();
  for (double v : values) arr.push_back(v);
  return arr;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::ValidationError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// Manifest

bool DatasetManifest::knows_group(const std::string& tag) const {
  return tag == group_pair.advantaged || tag == group_pair.disadvantaged ||
         std::find(extra_groups.begin(), extra_groups.end(), tag) != extra_groups.end();
}

DatasetManifest parse_manifest(const std::string& text, const fs::path& base_dir,
                               const std::string& origin) {
  const json doc = parse_document(text, origin, ErrorKind::ManifestError);
  auto fail = [&](const std::string& field, const std::string& token, const std::string& msg) {
    raise(ErrorKind::ManifestError, manifest_context(origin, text, field, token) + msg);
  };
  if (!doc.is_object()) raise(ErrorKind::ManifestError, origin + ": top level must be an object");
  check_keys(doc,
             {"corpus_id", "classes", "valence", "groups", "n_folds", "paths",
              "gold_threshold_rule", "smoothing"},
             [&](const std::string& key) { fail(key, key, "unknown field"); });

  for (const char* required : {"corpus_id", "classes", "valence"}) {
    if (!doc.contains(required)) {
      raise(ErrorKind::ManifestError, origin + ": missing required field '" + required + "'");
    }
  }
  if (!doc["corpus_id"].is_string() || doc["corpus_id"].get<std::string>().empty()) {
    fail("corpus_id", "corpus_id", "must be a non-empty string");
  }
  const std::string corpus_id = doc["corpus_id"].get<std::string>();

  const json& classes_json = doc["classes"];
  if (!classes_json.is_array()) fail("classes", "classes", "must be an array of strings");
  std::vector<std::string> classes;
  std::set<std::string> seen;
  for (const auto& c : classes_json) {
    if (!c.is_string()) fail("classes", "classes", "must be an array of strings");
    std::string name = c.get<std::string>();
    if (!seen.insert(name).second) {
      std::size_t line = line_of(text, "\"" + name + "\"", 2);
      raise(ErrorKind::ManifestError, origin + (line ? ":" + std::to_string(line) : "") +
                                          ": field 'classes': duplicate class '" + name + "'");
    }
    classes.push_back(std::move(name));
  }
  if (classes.size() < 2) fail("classes", "classes", "at least two classes are required");

  const json& valence_json = doc["valence"];
  if (!valence_json.is_object()) fail("valence", "valence", "must be an object");
  std::map<std::string, Valence> valence_of;
  for (const auto& [name, token] : valence_json.items()) {
    if (!seen.contains(name)) fail("valence." + name, name, "class not declared in 'classes'");
    if (!token.is_string()) fail("valence." + name, name, "must be a string");
    auto v = parse_valence(token.get<std::string>());
    if (!v) {
      const std::string bad = token.get<std::string>();
      fail("valence." + name, bad,
           "unknown valence '" + bad + "' (expected positive, negative, both or neutral)");
    }
    valence_of[name] = *v;
  }
  for (const auto& name : classes) {
    if (!valence_of.contains(name)) {
      raise(ErrorKind::ManifestError,
            origin + ": field 'valence': missing valence for class '" + name + "'");
    }
  }

  GroupPair pair;
  std::vector<std::string> extra;
  if (doc.contains("groups")) {
    const json& g = doc["groups"];
    if (!g.is_object()) fail("groups", "groups", "must be an object");
    check_keys(g, {"advantaged", "disadvantaged", "extra"},
               [&](const std::string& key) { fail("groups." + key, key, "unknown field"); });
    for (const char* key : {"advantaged", "disadvantaged"}) {
      if (!g.contains(key) || !g[key].is_string()) {
        fail(std::string("groups.") + key, "groups", "missing or not a string");
      }
    }
    if (g["advantaged"] == g["disadvantaged"]) {
      fail("groups", "groups", "advantaged and disadvantaged labels must differ");
    }
    pair = GroupPair{g["advantaged"].get<std::string>(), g["disadvantaged"].get<std::string>()};
    if (g.contains("extra")) {
      if (!g["extra"].is_array()) fail("groups.extra", "extra", "must be an array of strings");
      for (const auto& e : g["extra"]) {
        if (!e.is_string()) fail("groups.extra", "extra", "must be an array of strings");
        extra.push_back(e.get<std::string>());
      }
    }
  }

  DatasetManifest manifest{EmotionSchema(corpus_id, classes, valence_of), pair, extra,
                           std::nullopt, std::nullopt, std::nullopt};

  if (doc.contains("n_folds")) {
    const json& nf = doc["n_folds"];
    if (!nf.is_number_integer() || nf.get<int>() < 1) {
      fail("n_folds", "n_folds", "must be a positive integer");
    }
    manifest.n_folds = nf.get<int>();
  }
  if (doc.contains("gold_threshold_rule")) {
    const json& r = doc["gold_threshold_rule"];
    auto rule = r.is_string() ? parse_gold_rule(r.get<std::string>()) : std::nullopt;
    if (!rule) fail("gold_threshold_rule", "gold_threshold_rule", "expected same_as_pred or argmax");
    manifest.gold_rule = *rule;
  }
  if (doc.contains("smoothing")) {
    const json& s = doc["smoothing"];
    if (!s.is_number() || s.get<double>() < 0.0 || s.get<double>() >= 1.0) {
      fail("smoothing", "smoothing", "must be a number in [0,1)");
    }
    manifest.smoothing = s.get<double>();
  }
  if (doc.contains("paths")) {
    const json& p = doc["paths"];
    if (!p.is_object()) fail("paths", "paths", "must be an object");
    check_keys(p, {"predictions", "training_gold"},
               [&](const std::string& key) { fail("paths." + key, key, "unknown field"); });
    auto resolve = [&](const char* key) -> std::optional<fs::path> {
      if (!p.contains(key)) return std::nullopt;
      if (!p[key].is_string()) fail(std::string("paths.") + key, key, "must be a string");
      fs::path path = p[key].get<std::string>();
      if (path.is_relative()) path = base_dir / path;
      if (!fs::exists(path)) {
        fail(std::string("paths.") + key, key, "file does not exist: " + path.string());
      }
      return path;
    };
    manifest.predictions_path = resolve("predictions");
    manifest.training_gold_path = resolve("training_gold");
  }
  return manifest;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream probe(path);
  if (!probe) raise(ErrorKind::ManifestError, "cannot open manifest " + path.string());
  return parse_manifest(read_text_file(path), path.parent_path(), path.string());
}

void write_manifest(std::ostream& out, const DatasetManifest& manifest, const fs::path& base_dir) {
  json doc;
  doc["corpus_id"] = manifest.corpus_id();
  doc["classes"] = manifest.schema.classes();
  json valence = json::object();
  for (std::size_t k = 0; k < manifest.schema.size(); ++k) {
    valence[manifest.schema.class_name(k)] = valence_name(manifest.schema.valence(k));
  }
  doc["valence"] = valence;
  json groups{{"advantaged", manifest.group_pair.advantaged},
              {"disadvantaged", manifest.group_pair.disadvantaged}};
  if (!manifest.extra_groups.empty()) groups["extra"] = manifest.extra_groups;
  doc["groups"] = groups;
  if (manifest.n_folds) doc["n_folds"] = *manifest.n_folds;
  doc["gold_threshold_rule"] = gold_rule_name(manifest.gold_rule);
  doc["smoothing"] = manifest.smoothing;
  json paths = json::object();
  auto rel = [&](const fs::path& p) {
    fs::path r = p.lexically_relative(base_dir);
    return (r.empty() ? p : r).generic_string();
  };
  if (manifest.predictions_path) paths["predictions"] = rel(*manifest.predictions_path);
  if (manifest.training_gold_path) paths["training_gold"] = rel(*manifest.training_gold_path);
  if (!paths.empty()) doc["paths"] = paths;
  out << canonical_dump(doc) << '\n';
}

// ---------------------------------------------------------------------------
// Predictions

std::vector<UtteranceRecord> read_predictions(std::istream& in, const DatasetManifest& manifest,
                                              const std::string& origin) {
  std::vector<UtteranceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  const std::size_t n = manifest.schema.size();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    auto fail = [&](const std::string& msg) { raise(ErrorKind::ValidationError, where + msg); };

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(std::string("malformed record (") + e.what() + ")");
    }
    if (!obj.is_object()) fail("record must be an object");
    check_keys(obj, {"utt_id", "group", "fold", "valence_tag", "gold", "pred"},
               [&](const std::string& key) { fail("unknown field '" + key + "'"); });
    for (const char* key : {"utt_id", "group", "gold"}) {
      if (!obj.contains(key)) fail(std::string("missing field '") + key + "'");
    }
    if (!obj["utt_id"].is_string()) fail("utt_id must be a string");
    if (!obj["group"].is_string()) fail("group must be a string");

    UtteranceRecord rec;
    rec.utt_id = obj["utt_id"].get<std::string>();
    rec.group = obj["group"].get<std::string>();
    if (!manifest.knows_group(rec.group)) fail("unknown group tag '" + rec.group + "'");
    rec.gold = number_array(obj["gold"], "gold", fail);
    if (obj.contains("pred")) rec.pred = number_array(obj["pred"], "pred", fail);
    if (obj.contains("fold")) {
      if (!obj["fold"].is_number_integer()) fail("fold must be an integer");
      rec.fold = obj["fold"].get<int>();
    }
    if (obj.contains("valence_tag")) {
      const json& t = obj["valence_tag"];
      auto v = t.is_string() ? parse_valence(t.get<std::string>()) : std::nullopt;
      if (!v || (*v != Valence::Positive && *v != Valence::Negative)) {
        fail("valence_tag must be \"positive\" or \"negative\"");
      }
      rec.valence_tag = v;
    }
    try {
      validate_record(rec, n);
    } catch (const Error& e) {
      fail(e.what());
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<UtteranceRecord> load_predictions(const fs::path& path,
                                              const DatasetManifest& manifest) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::ValidationError, "cannot open predictions " + path.string());
  return read_predictions(in, manifest, path.string());
}

std::string predictions_line(const UtteranceRecord& record) {
  json obj;
  obj["utt_id"] = record.utt_id;
  obj["group"] = record.group;
  obj["gold"] = number_json(record.gold);
  if (record.pred) obj["pred"] = number_json(*record.pred);
  if (record.fold) obj["fold"] = *record.fold;
  if (record.valence_tag) obj["valence_tag"] = valence_name(*record.valence_tag);
  return canonical_dump(obj);
}

void write_predictions(std::ostream& out, std::span<const UtteranceRecord> records) {
  for (const auto& rec : records) out << predictions_line(rec) << '\n';
}

// ---------------------------------------------------------------------------
// Embeddings

std::string_view stimulus_set_name(StimulusSet s) noexcept {
  switch (s) {
    case StimulusSet::X: return "X";
    case StimulusSet::Y: return "Y";
    case StimulusSet::A: return "A";
    case StimulusSet::B: return "B";
  }
  return "?";
}

std::optional<StimulusSet> parse_stimulus_set(std::string_view token) noexcept {
  for (StimulusSet s : kStimulusSets) {
    if (stimulus_set_name(s) == token) return s;
  }
  return std::nullopt;
}

LayerStack::LayerStack(std::size_t layers, std::size_t dim, std::vector<double> values)
    : layers_(layers), dim_(dim), values_(std::move(values)) {
  if (values_.size() != layers_ * dim_) {
    raise(ErrorKind::SchemaMismatch, "layer stack storage does not match L x D");
  }
}

LayerStack LayerStack::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * dim);
  for (const auto& row : rows) {
    if (row.size() != dim) raise(ErrorKind::ValidationError, "ragged layer stack");
    values.insert(values.end(), row.begin(), row.end());
  }
  return LayerStack(rows.size(), dim, std::move(values));
}

std::size_t StimulusEmbeddings::layers() const {
  for (const auto& s : sets) {
    if (!s.empty()) return s.front().stack.layers();
  }
  return 0;
}

std::size_t StimulusEmbeddings::dim() const {
  for (const auto& s : sets) {
    if (!s.empty()) return s.front().stack.dim();
  }
  return 0;
}

void StimulusEmbeddings::validate() const {
  const std::size_t L = layers();
  const std::size_t D = dim();
  for (StimulusSet s : kStimulusSets) {
    const auto& items = set(s);
    if (items.empty()) {
      raise(ErrorKind::ValidationError,
            "stimulus set " + std::string(stimulus_set_name(s)) + " is empty");
    }
    for (const auto& item : items) {
      if (item.stack.layers() != L || item.stack.dim() != D) {
        raise(ErrorKind::ValidationError, "item '" + item.utt_id + "' in set " +
                                              std::string(stimulus_set_name(s)) +
                                              " has a ragged layer stack");
      }
      for (double v : item.stack.values()) {
        if (!std::isfinite(v)) {
          raise(ErrorKind::ValidationError, "item '" + item.utt_id + "' has non-finite entries");
        }
      }
    }
  }
  if (L < 1 || D < 1) raise(ErrorKind::ValidationError, "embeddings need L >= 1 and D >= 1");
}

StimulusEmbeddings read_embeddings(std::istream& in, const std::string& origin) {
  StimulusEmbeddings out;
  std::optional<std::pair<std::size_t, std::size_t>> shape;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    auto fail = [&](const std::string& msg) { raise(ErrorKind::ValidationError, where + msg); };

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(std::string("malformed record (") + e.what() + ")");
    }
    if (!obj.is_object()) fail("record must be an object");
    check_keys(obj, {"utt_id", "set", "layers"},
               [&](const std::string& key) { fail("unknown field '" + key + "'"); });
    if (!obj.contains("utt_id") || !obj["utt_id"].is_string()) fail("missing string utt_id");
    if (!obj.contains("set") || !obj["set"].is_string()) fail("missing string set");
    auto set = parse_stimulus_set(obj["set"].get<std::string>());
    if (!set) fail("set must be one of X, Y, A, B");
    if (!obj.contains("layers") || !obj["layers"].is_array() || obj["layers"].empty()) {
      fail("layers must be a non-empty array of vectors");
    }
    std::vector<std::vector<double>> rows;
    for (const auto& layer : obj["layers"]) rows.push_back(number_array(layer, "layer", fail));
    const std::size_t D = rows.front().size();
    if (D == 0) fail("layer vectors must be non-empty");
    for (const auto& row : rows) {
      if (row.size() != D) fail("ragged layer stack: layer dimensions differ within the item");
    }
    if (!shape) {
      shape.emplace(rows.size(), D);
    } else if (shape->first != rows.size() || shape->second != D) {
      fail("ragged layer stack: item has L=" + std::to_string(rows.size()) +
           ", D=" + std::to_string(D) + " but earlier items have L=" +
           std::to_string(shape->first) + ", D=" + std::to_string(shape->second));
    }
    out.set(*set).push_back({obj["utt_id"].get<std::string>(), LayerStack::from_rows(rows)});
  }
  try {
    out.validate();
  } catch (const Error& e) {
    raise(ErrorKind::ValidationError, origin + ": " + e.what());
  }
  return out;
}

StimulusEmbeddings load_embeddings(const fs::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::ValidationError, "cannot open embeddings " + path.string());
  return read_embeddings(in, path.string());
}

void write_embeddings(std::ostream& out, const StimulusEmbeddings& embeddings) {
  for (StimulusSet s : kStimulusSets) {
    for (const auto& item : embeddings.set(s)) {
      json layers = json::array();
      for (std::size_t l = 0; l < item.stack.layers(); ++l) {
        layers.push_back(number_json(item.stack.layer(l)));
      }
      json obj{{"utt_id", item.utt_id}, {"set", stimulus_set_name(s)}, {"layers", layers}};
      out << canonical_dump(obj) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Layer weights

void LayerWeights::validate() const {
  if (folds.empty()) raise(ErrorKind::ValidationError, "layer weights need at least one fold");
  const std::size_t L = folds.front().size();
  if (L == 0) raise(ErrorKind::ValidationError, "layer weight vectors must be non-empty");
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (folds[f].size() != L) {
      raise(ErrorKind::ValidationError, "fold " + std::to_string(f) + " has " +
                                            std::to_string(folds[f].size()) +
                                            " weights, expected " + std::to_string(L));
    }
    for (double w : folds[f]) {
      if (!std::isfinite(w) || w < 0.0) {
        raise(ErrorKind::ValidationError,
              "fold " + std::to_string(f) + " has a negative or non-finite weight");
      }
    }
  }
}

LayerWeights parse_layer_weights(const std::string& text, const std::string& origin) {
  const json doc = parse_document(text, origin, ErrorKind::ValidationError);
  auto fail = [&](const std::string& msg) { raise(ErrorKind::ValidationError, origin + ": " + msg); };
  if (!doc.is_object()) fail("top level must be an object");
  check_keys(doc, {"model_id", "corpus_id", "folds"},
             [&](const std::string& key) { fail("unknown field '" + key + "'"); });
  LayerWeights w;
  for (const char* key : {"model_id", "corpus_id"}) {
    if (!doc.contains(key) || !doc[key].is_string()) {
      fail(std::string("missing string field '") + key + "'");
    }
  }
  w.model_id = doc["model_id"].get<std::string>();
  w.corpus_id = doc["corpus_id"].get<std::string>();
  if (!doc.contains("folds") || !doc["folds"].is_array()) fail("missing array field 'folds'");
  for (const auto& fold : doc["folds"]) w.folds.push_back(number_array(fold, "fold", fail));
  try {
    w.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  return w;
}

LayerWeights load_layer_weights(const fs::path& path) {
  return parse_layer_weights(read_text_file(path), path.string());
}

void write_layer_weights(std::ostream& out, const LayerWeights& weights) {
  json folds = json::array();
  for (const auto& f : weights.folds) folds.push_back(number_json(f));
  json doc{{"model_id", weights.model_id}, {"corpus_id", weights.corpus_id}, {"folds", folds}};
  out << canonical_dump(doc) << '\n';
}

}  // namespace sergap
