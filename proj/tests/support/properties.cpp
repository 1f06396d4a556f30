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

#include "properties.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "random_inputs.hpp"
#include "sergap/association_stats.hpp"
#include "sergap/error.hpp"
#include "sergap/gap_metrics.hpp"
#include "sergap/oracle.hpp"
#include "sergap/speat.hpp"

namespace sergap::testing {
namespace {

namespace fs = std::filesystem;

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

std::string describe(const char* what, double got, double want) {
  std::ostringstream s;
  s.precision(17);
  s << what << ": got " << got << ", want " << want;
  return s.str();
}

// Report or the kind of error it raised.
struct Attempt {
  std::optional<GapReport> report;
  std::optional<ErrorKind> error;
};

Attempt try_report(const EmotionSchema& schema,
                   const std::vector<UtteranceRecord>& records,
                   const std::vector<UtteranceRecord>& training, const GroupPair& pair) {
  try {
    return {compute_gap_report("m", records, schema, pair, GoldThresholdRule::SameAsPred, training),
            std::nullopt};
  } catch (const Error& e) {
    return {std::nullopt, e.kind()};
  }
}

std::vector<oracle::Vector> reduce(const std::vector<StimulusItem>& items,
                                   const std::optional<oracle::Vector>& weights) {
  std::vector<oracle::Vector> out;
  for (const auto& item : items) {
    std::vector<oracle::Vector> layers;
    for (std::size_t l = 0; l < item.stack.layers(); ++l) {
      const auto layer = item.stack.layer(l);
      layers.emplace_back(layer.begin(), layer.end());
    }
    out.push_back(weights ? oracle::layer_weighted(layers, *weights) : oracle::layer_mean(layers));
  }
  return out;
}

oracle::EffectSize oracle_effect(const StimulusEmbeddings& e,
                                 const std::optional<oracle::Vector>& weights, bool sample) {
  return oracle::effect_size(reduce(e.set(StimulusSet::X), weights),
                             reduce(e.set(StimulusSet::Y), weights),
                             reduce(e.set(StimulusSet::A), weights),
                             reduce(e.set(StimulusSet::B), weights), sample);
}

Outcome compare_gaps(const GapReport& r, const oracle::Gaps& g, double tol) {
  for (std::size_t k = 0; k < g.d_e.size(); ++k) {
    if (r.d_e[k].has_value() != g.d_e[k].has_value()) {
      return Outcome::fail("d_e[" + std::to_string(k) + "] definedness differs");
    }
    if (g.d_e[k] && !close(*r.d_e[k], *g.d_e[k], tol)) {
      return Outcome::fail(describe("d_e", *r.d_e[k], *g.d_e[k]));
    }
  }
  if (!g.d_c) return Outcome::fail("oracle d_c undefined but report produced");
  if (!close(r.d_c.value, *g.d_c, tol)) return Outcome::fail(describe("d_c", r.d_c.value, *g.d_c));
  if (!close(r.d_v.value, g.d_v, tol)) return Outcome::fail(describe("d_v", r.d_v.value, g.d_v));
  if (r.d_v.splits.size() != g.p_plus.size()) return Outcome::fail("valence split count differs");
  for (std::size_t i = 0; i < g.p_plus.size(); ++i) {
    if (!close(r.d_v.splits[i].p_plus, g.p_plus[i], tol)) {
      return Outcome::fail(describe("p_plus", r.d_v.splits[i].p_plus, g.p_plus[i]));
    }
  }
  return {};
}

}  // namespace

Outcome check_group_swap(std::uint64_t seed) {
  const RandomAudit a = random_audit(seed);
  const Attempt x = try_report(a.schema, a.records, a.training, a.pair);
  const Attempt y = try_report(a.schema, a.records, a.training, a.pair.swapped());
  if (x.error || y.error) {
    if (x.error == y.error) return Outcome::skip("both orders raise " + std::string(error_kind_name(*x.error)));
    return Outcome::fail("only one group order raised an error");
  }
  const GapReport &r = *x.report, &s = *y.report;
  for (std::size_t k = 0; k < r.d_e.size(); ++k) {
    if (r.d_e[k].has_value() != s.d_e[k].has_value()) return Outcome::fail("d_e definedness");
    if (r.d_e[k] && *r.d_e[k] != -*s.d_e[k]) return Outcome::fail(describe("d_e", *r.d_e[k], -*s.d_e[k]));
    if (r.d_d->values[k] != -s.d_d->values[k]) {
      return Outcome::fail(describe("d_d", r.d_d->values[k], -s.d_d->values[k]));
    }
  }
  if (!close(r.d_c.value, s.d_c.value, 1e-15)) return Outcome::fail(describe("d_c", r.d_c.value, s.d_c.value));
  if (!close(r.d_v.value, -s.d_v.value, 1e-12)) return Outcome::fail(describe("d_v", r.d_v.value, -s.d_v.value));
  return {};
}

Outcome check_class_permutation(std::uint64_t seed) {
  const RandomAudit a = random_audit(seed);
  synth::NoiseSource rng(~seed);
  const auto order = random_permutation(a.schema.size(), rng);
  const EmotionSchema p = a.schema.permuted(order);
  const Attempt x = try_report(a.schema, a.records, a.training, a.pair);
  const Attempt y =
      try_report(p, permute_records(a.records, order), permute_records(a.training, order), a.pair);
  if (x.error || y.error) {
    if (x.error == y.error) return Outcome::skip("both orders raise");
    return Outcome::fail("only one class order raised an error");
  }
  const GapReport &r = *x.report, &s = *y.report;
  for (std::size_t j = 0; j < order.size(); ++j) {
    if (s.d_e[j] != r.d_e[order[j]]) return Outcome::fail("d_e not permuted");
    if (!close(s.d_d->values[j], r.d_d->values[order[j]], 1e-15)) return Outcome::fail("d_d not permuted");
  }
  if (!close(r.d_c.value, s.d_c.value, 1e-12)) return Outcome::fail(describe("d_c", s.d_c.value, r.d_c.value));
  if (!close(r.d_v.value, s.d_v.value, 1e-12)) return Outcome::fail(describe("d_v", s.d_v.value, r.d_v.value));
  return {};
}

Outcome check_speat_antisymmetry(std::uint64_t seed) {
  const StimulusEmbeddings e = random_stimuli(seed);
  const double d = effect_size(e, AggregationMode::mean()).d_s;
  const double tol = 1e-12 * std::max(1.0, std::fabs(d));
  StimulusEmbeddings xy = e;
  std::swap(xy.set(StimulusSet::X), xy.set(StimulusSet::Y));
  const double d_xy = effect_size(xy, AggregationMode::mean()).d_s;
  if (!close(d_xy, -d, tol)) return Outcome::fail(describe("X<->Y", d_xy, -d));
  StimulusEmbeddings ab = e;
  std::swap(ab.set(StimulusSet::A), ab.set(StimulusSet::B));
  const double d_ab = effect_size(ab, AggregationMode::mean()).d_s;
  if (!close(d_ab, -d, tol)) return Outcome::fail(describe("A<->B", d_ab, -d));
  return {};
}

Outcome check_uniform_weights(std::uint64_t seed) {
  const StimulusEmbeddings e = random_stimuli(seed);
  synth::NoiseSource rng(seed + 17);
  const double c = 0.1 + rng.uniform();
  LayerWeights w{"m", "c", std::vector<std::vector<double>>(1 + rng.below(4),
                                                           std::vector<double>(e.layers(), c))};
  const SpeatResult m = effect_size(e, AggregationMode::mean());
  const SpeatResult u = effect_size(e, AggregationMode::weighted(w));
  if (!close(m.d_s, u.d_s, 1e-10 * std::max(1.0, std::fabs(m.d_s)))) {
    return Outcome::fail(describe("uniform weighted", u.d_s, m.d_s));
  }
  if (!u.warnings.empty() && e.layers() > 1 && std::fabs(c * double(e.layers()) - 1.0) < 1e-12) {
    return Outcome::fail("unexpected renormalization warning");
  }
  return {};
}

Outcome check_gap_oracle(std::uint64_t seed) {
  const RandomAudit a = random_audit(seed);
  const oracle::Gaps g =
      oracle::gaps_from_records(a.records, a.schema, a.pair.advantaged, a.pair.disadvantaged);
  const Attempt x = try_report(a.schema, a.records, a.training, a.pair);
  if (x.error) {
    if (*x.error == ErrorKind::MetricUndefined && !g.d_c) return {};
    return Outcome::fail("unexpected " + std::string(error_kind_name(*x.error)));
  }
  if (Outcome o = compare_gaps(*x.report, g, 1e-12); !o.ok()) return o;
  const auto d = oracle::data_bias(a.training, a.schema.size(), a.pair.advantaged,
                                   a.pair.disadvantaged);
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!close(x.report->d_d->values[k], d[k], 1e-12)) {
      return Outcome::fail(describe("d_d", x.report->d_d->values[k], d[k]));
    }
  }
  return {};
}

Outcome check_speat_oracle(std::uint64_t seed) {
  const StimulusEmbeddings e = random_stimuli(seed);
  synth::NoiseSource rng(seed * 3 + 1);
  const bool sample = rng.below(2) == 1;
  std::vector<std::vector<double>> folds(1 + rng.below(3), std::vector<double>(e.layers()));
  for (auto& f : folds) {
    for (double& x : f) x = 0.01 + rng.uniform();
  }
  SpeatOptions o;
  o.stddev = sample ? StdDevKind::Sample : StdDevKind::Population;
  for (const bool weighted : {false, true}) {
    const LayerWeights w{"m", "c", folds};
    const SpeatResult r =
        effect_size(e, weighted ? AggregationMode::weighted(w) : AggregationMode::mean(), o);
    const auto want =
        oracle_effect(e, weighted ? std::optional(oracle::fold_average(folds)) : std::nullopt, sample);
    const double tol = 1e-9;
    if (!close(r.d_s_sum, want.d_s_sum, tol)) return Outcome::fail(describe("d_s sum", r.d_s_sum, want.d_s_sum));
    if (!close(r.d_s_mean, want.d_s_mean, tol)) return Outcome::fail(describe("d_s mean", r.d_s_mean, want.d_s_mean));
    if (!close(r.stddev_value, want.stddev, tol)) return Outcome::fail(describe("stddev", r.stddev_value, want.stddev));
  }
  return {};
}

Outcome check_pearson_oracle(std::uint64_t seed) {
  synth::NoiseSource rng(seed);
  const std::size_t n = 2 + rng.below(40);
  const double rho = 2.0 * rng.uniform() - 1.0;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = rho * x[i] + std::sqrt(1 - rho * rho) * rng.normal();
  }
  const double r = pearson(x, y).r;
  const double want = oracle::pearson(x, y);
  if (!close(r, want, 1e-9)) return Outcome::fail(describe("r", r, want));
  const double scale = rng.uniform() < 0.5 ? -3.5 : 0.25;
  std::vector<double> z(x);
  for (double& v : z) v = scale * v + 11.0;
  const double rz = pearson(z, y).r;
  if (!close(rz, scale < 0 ? -r : r, 1e-9)) return Outcome::fail(describe("affine r", rz, r));
  if (!close(pearson(y, x).r, r, 1e-15)) return Outcome::fail("r not symmetric");
  return {};
}

Outcome check_synth_fixture(std::uint64_t seed, const fs::path& dir) {
  const synth::SynthSpec spec = random_synth_spec(seed);
  try {
    synth::write_fixture(spec, seed, dir);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SpecError) return Outcome::skip(e.what());
    throw;
  }
  std::ifstream in(dir / "expected.json");
  const nlohmann::json expected = nlohmann::json::parse(in);
  const auto& p = expected.at("predictions");

  const DatasetManifest m = load_manifest(dir / "manifest.json");
  const auto records = load_predictions(*m.predictions_path, m);
  std::vector<UtteranceRecord> training;
  if (m.training_gold_path) training = load_predictions(*m.training_gold_path, m);

  oracle::Gaps g;
  for (const auto& v : p.at("d_e")) {
    g.d_e.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
  }
  if (!p.at("d_c").is_null()) g.d_c = p.at("d_c").get<double>();
  g.d_v = p.at("d_v").get<double>();
  try {
    const GapReport r = compute_gap_report(spec.model_id, records, m.schema, m.group_pair,
                                           m.gold_rule, training);
    for (std::size_t k = 0; k < g.d_e.size(); ++k) {
      if (r.d_e[k].has_value() != g.d_e[k].has_value()) return Outcome::fail("d_e definedness");
      if (g.d_e[k] && !close(*r.d_e[k], *g.d_e[k], 1e-9)) return Outcome::fail(describe("d_e", *r.d_e[k], *g.d_e[k]));
    }
    if (!g.d_c) return Outcome::fail("d_c defined but expected undefined");
    if (!close(r.d_c.value, *g.d_c, 1e-9)) return Outcome::fail(describe("d_c", r.d_c.value, *g.d_c));
    if (!close(r.d_v.value, g.d_v, 1e-9)) return Outcome::fail(describe("d_v", r.d_v.value, g.d_v));
    if (p.contains("d_d")) {
      if (!r.d_d) return Outcome::fail("d_d missing");
      for (std::size_t k = 0; k < r.d_d->values.size(); ++k) {
        const double want = p["d_d"][k].get<double>();
        if (!close(r.d_d->values[k], want, 1e-9)) return Outcome::fail(describe("d_d", r.d_d->values[k], want));
      }
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::MetricUndefined || g.d_c) {
      return Outcome::fail(std::string("unexpected error: ") + e.what());
    }
  }

  const auto& emb = expected.at("embeddings");
  const StimulusEmbeddings stimuli = load_embeddings(dir / "embeddings.jsonl");
  auto check = [&](const SpeatResult& r, const nlohmann::json& want) -> Outcome {
    if (!close(r.d_s_sum, want.at("d_s_sum").get<double>(), 1e-9)) {
      return Outcome::fail(describe("d_s sum", r.d_s_sum, want["d_s_sum"].get<double>()));
    }
    if (!close(r.d_s_mean, want.at("d_s_mean").get<double>(), 1e-9)) {
      return Outcome::fail(describe("d_s mean", r.d_s_mean, want["d_s_mean"].get<double>()));
    }
    if (!close(r.stddev_value, want.at("stddev").get<double>(), 1e-9)) {
      return Outcome::fail(describe("stddev", r.stddev_value, want["stddev"].get<double>()));
    }
    return {};
  };
  if (Outcome o = check(effect_size(stimuli, AggregationMode::mean()), emb.at("mean")); !o.ok()) return o;
  if (emb.contains("weighted")) {
    const LayerWeights w = load_layer_weights(dir / "layer_weights.json");
    if (Outcome o = check(effect_size(stimuli, AggregationMode::weighted(w)), emb["weighted"]); !o.ok()) {
      return o;
    }
  }
  return {};
}

}  // namespace sergap::testing
