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

#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sergap/error.hpp"
#include "sergap/gap_metrics.hpp"
#include "sergap/ingestion.hpp"
#include "sergap/report.hpp"
#include "sergap/speat.hpp"
#include "sergap/synth.hpp"

namespace sergap::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void usage(const std::string& msg) { raise(ErrorKind::UsageError, msg); }

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, round_half_away(v, decimals));
  return buf;
}

OutputFormat output_format(const std::string& token) {
  auto f = parse_output_format(token);
  if (!f) usage("unknown format '" + token + "' (expected json, csv or text)");
  return *f;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) raise(ErrorKind::ValidationError, "cannot write " + path);
  f << text;
}

json load_json(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    raise(ErrorKind::ValidationError, path + ": " + e.what());
  }
}

std::vector<GapReport> load_audits(const std::vector<std::string>& paths) {
  std::vector<GapReport> out;
  for (const auto& p : paths) {
    try {
      out.push_back(gap_report_from_json(load_json(p)));
    } catch (const json::exception& e) {
      raise(ErrorKind::ValidationError, p + ": " + e.what());
    }
  }
  return out;
}

std::vector<SpeatRecord> load_speats(const std::vector<std::string>& paths) {
  std::vector<SpeatRecord> out;
  for (const auto& p : paths) {
    try {
      out.push_back(speat_record_from_json(load_json(p)));
    } catch (const json::exception& e) {
      raise(ErrorKind::ValidationError, p + ": " + e.what());
    }
  }
  return out;
}

std::string structured(const json& doc) { return doc.dump(2) + "\n"; }

// ---- audit

struct AuditArgs {
  std::string manifest, predictions, training_gold, model = "model", group_order, out;
  std::string format = "json";
};

int audit(const AuditArgs& a, std::ostream& out) {
  DatasetManifest manifest = load_manifest(a.manifest);
  if (!a.predictions.empty()) manifest.predictions_path = a.predictions;
  if (!a.training_gold.empty()) manifest.training_gold_path = a.training_gold;
  if (!manifest.predictions_path) usage("no predictions file in the manifest or on the command line");

  GroupPair pair = manifest.group_pair;
  if (!a.group_order.empty()) {
    const auto comma = a.group_order.find(',');
    if (comma == std::string::npos) usage("--group-order expects 'advantaged,disadvantaged'");
    try {
      pair = GroupPair::make(a.group_order.substr(0, comma), a.group_order.substr(comma + 1));
    } catch (const Error& e) {
      usage(e.what());
    }
    for (const auto& g : {pair.advantaged, pair.disadvantaged}) {
      if (!manifest.knows_group(g)) usage("--group-order names undeclared group '" + g + "'");
    }
  }

  const auto records = load_predictions(*manifest.predictions_path, manifest);
  std::vector<UtteranceRecord> training;
  if (manifest.training_gold_path) training = load_predictions(*manifest.training_gold_path, manifest);

  const GapReport report = compute_gap_report(a.model, records, manifest.schema, pair,
                                               manifest.gold_rule, training);
  const OutputFormat format = output_format(a.format);
  if (!a.out.empty()) {
    emit(format == OutputFormat::Json
             ? structured(gap_report_to_json(report))
             : render(render_emotion_gap_table(std::span(&report, 1)), format),
         a.out, out);
  }
  out << "d_c=" << fixed(report.d_c.value, 3) << " d_v=" << fixed(report.d_v.value, 3) << '\n';
  return 0;
}

// ---- speat

struct SpeatArgs {
  std::string embeddings, weights, aggregation = "mean", numerator = "sum",
                                   stddev = "population", model = "model", stimuli = "stimuli",
                                   out, format = "json";
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

int speat(const SpeatArgs& a, std::ostream& out) {
  const auto kind = parse_aggregation(a.aggregation);
  const auto numerator = parse_numerator(a.numerator);
  const auto stddev = parse_stddev(a.stddev);
  if (!kind) usage("--aggregation must be mean or weighted");
  if (!numerator) usage("--numerator must be sum or mean");
  if (!stddev) usage("--stddev must be population or sample");
  if (*kind == AggregationKind::Weighted && a.weights.empty()) {
    usage("--aggregation weighted requires --weights");
  }
  if (*kind == AggregationKind::Mean && !a.weights.empty()) {
    usage("--weights only applies to --aggregation weighted");
  }
  if (a.threads == 0) usage("--threads must be positive");
  const OutputFormat format = output_format(a.format);

  const StimulusEmbeddings stimuli = load_embeddings(a.embeddings);
  AggregationMode mode = AggregationMode::mean();
  if (*kind == AggregationKind::Weighted) mode = AggregationMode::weighted(load_layer_weights(a.weights));
  SpeatOptions options{*numerator, *stddev, a.permutations, a.seed, a.threads};
  const SpeatRecord record{a.model, a.stimuli, effect_size(stimuli, mode, options)};

  if (!a.out.empty()) {
    emit(format == OutputFormat::Json ? structured(speat_record_to_json(record))
                                      : render(render_speat_table(std::span(&record, 1)), format),
         a.out, out);
  }
  out << "d_s=" << fixed(record.result.d_s, 2);
  if (record.result.permutation) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", record.result.permutation->p_value);
    out << " p=" << buf;
  }
  for (const auto& w : record.result.warnings) out << "\nwarning: " << w;
  out << '\n';
  return 0;
}

// ---- correlate

struct CorrelateArgs {
  std::string mode, out, format = "text";
  std::vector<std::string> audits, speats, corpora;
};

int correlate(const CorrelateArgs& a, std::ostream& out) {
  const OutputFormat format = output_format(a.format);
  const auto reports = load_audits(a.audits);
  if (reports.empty()) usage("--audit is required");
  std::vector<GridEntry> entries;
  Table table;

  if (a.mode == "data-vs-gap") {
    for (const auto& r : reports) {
      if (!r.d_d) {
        raise(ErrorKind::MetricUndefined, "audit for model '" + r.model_id + "' on '" +
                                              r.schema.corpus_id() + "' has no training gold");
      }
      entries.push_back({{r.model_id}, r.schema.corpus_id(),
                         data_vs_gap(*r.d_d, r.d_e,
                                     "d_d vs d_e, " + r.model_id + ", " + r.schema.corpus_id())});
    }
    table = render_correlation_grid(entries, {"Model"}, "Correlation of d_d and d_e", a.corpora);
  } else if (a.mode == "valence-vs-upstream") {
    const auto speats = load_speats(a.speats);
    if (speats.empty()) usage("--speat is required for valence-vs-upstream");
    std::map<std::string, std::map<std::string, double>> d_v;  // corpus -> model -> d_v
    std::vector<std::string> corpora;
    for (const auto& r : reports) {
      const std::string& c = r.schema.corpus_id();
      if (!d_v.contains(c)) corpora.push_back(c);
      if (!d_v[c].emplace(r.model_id, r.d_v.value).second) {
        raise(ErrorKind::ValidationError, "duplicate audit for model '" + r.model_id + "' on '" + c + "'");
      }
    }
    std::vector<std::pair<std::string, AggregationKind>> keys;
    for (const auto& s : speats) {
      std::pair key{s.stimuli, s.result.aggregation};
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    for (const auto& [stim, agg] : keys) {
      for (const auto& c : corpora) {
        std::map<std::string, double> d_s;
        for (const auto& s : speats) {
          if (s.stimuli != stim || s.result.aggregation != agg) continue;
          if (agg == AggregationKind::Weighted && s.result.weights_corpus_id != c) continue;
          if (!d_s.emplace(s.model_id, s.result.d_s).second) {
            raise(ErrorKind::ValidationError, "duplicate SpEAT result for model '" + s.model_id + "'");
          }
        }
        if (d_s.empty()) continue;
        const std::string agg_name(aggregation_name(agg));
        entries.push_back({{stim, agg_name}, c,
                           valence_vs_upstream(d_v[c], d_s,
                                               "d_v vs d_s, " + stim + ", " + agg_name + ", " + c)});
      }
    }
    table = render_correlation_grid(entries, {"Stimuli", "Aggregation"},
                                    "Correlation of d_v and d_s", a.corpora);
  } else {
    usage("--mode must be data-vs-gap or valence-vs-upstream");
  }
  emit(render(table, format), a.out, out);
  return 0;
}

// ---- tables

struct TablesArgs {
  std::string kind, out, format = "text";
  std::vector<std::string> audits, speats, models, corpora;
};

int tables(const TablesArgs& a, std::ostream& out) {
  const OutputFormat format = output_format(a.format);
  Table table;
  if (a.kind == "emotion-gap") {
    const auto reports = load_audits(a.audits);
    table = render_emotion_gap_table(reports, a.models);
  } else if (a.kind == "corpus-gap" || a.kind == "valence-gap") {
    const auto reports = load_audits(a.audits);
    table = render_dc_dv_table(reports,
                               a.kind == "corpus-gap" ? CorpusMetric::CorpusGap
                                                      : CorpusMetric::ValenceGap,
                               a.models, a.corpora);
  } else if (a.kind == "speat") {
    const auto records = load_speats(a.speats);
    table = render_speat_table(records, a.models, a.corpora);
  } else {
    usage("--kind must be emotion-gap, corpus-gap, valence-gap or speat");
  }
  emit(render(table, format), a.out, out);
  return 0;
}

// ---- synth

struct SynthArgs {
  std::string spec, out_dir;
  std::uint64_t seed = 0;
};

int synth(const SynthArgs& a, std::ostream& out) {
  synth::write_fixture(synth::load_spec(a.spec), a.seed, a.out_dir);
  out << "wrote " << a.out_dir << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gender-bias audit toolkit for speech emotion recognition", "sergap"};
  app.set_config("--config", "", "Read options from a TOML or INI file; flags override it");
  app.require_subcommand(1);

  AuditArgs audit_args;
  auto* audit_cmd = app.add_subcommand("audit", "Per-class, corpus and valence gaps for one model");
  audit_cmd->add_option("--manifest", audit_args.manifest, "Dataset manifest")->required();
  audit_cmd->add_option("--predictions", audit_args.predictions, "Predictions file (overrides manifest)");
  audit_cmd->add_option("--training-gold", audit_args.training_gold, "Training gold labels for d_d");
  audit_cmd->add_option("--model", audit_args.model, "Model id recorded in the report");
  audit_cmd->add_option("--group-order", audit_args.group_order, "advantaged,disadvantaged");
  audit_cmd->add_option("--out", audit_args.out, "Report destination ('-' for stdout)");
  audit_cmd->add_option("--format", audit_args.format, "json, csv or text");

  SpeatArgs speat_args;
  auto* speat_cmd = app.add_subcommand("speat", "Upstream embedding association effect size");
  speat_cmd->add_option("embeddings", speat_args.embeddings, "Stimulus embeddings")->required();
  speat_cmd->add_option("--weights", speat_args.weights, "Layer weights document");
  speat_cmd->add_option("--aggregation", speat_args.aggregation, "mean or weighted");
  speat_cmd->add_option("--numerator", speat_args.numerator, "sum or mean");
  speat_cmd->add_option("--stddev", speat_args.stddev, "population or sample");
  speat_cmd->add_option("--permutations", speat_args.permutations, "Permutation test size (0 = off)");
  speat_cmd->add_option("--seed", speat_args.seed, "Permutation test seed");
  speat_cmd->add_option("--threads", speat_args.threads, "Permutation worker threads");
  speat_cmd->add_option("--model", speat_args.model, "Upstream model id");
  speat_cmd->add_option("--stimuli", speat_args.stimuli, "Stimulus source label");
  speat_cmd->add_option("--out", speat_args.out, "Result destination ('-' for stdout)");
  speat_cmd->add_option("--format", speat_args.format, "json, csv or text");

  CorrelateArgs corr_args;
  auto* corr_cmd = app.add_subcommand("correlate", "Correlation grids across models and corpora");
  corr_cmd->add_option("--mode", corr_args.mode, "data-vs-gap or valence-vs-upstream")->required();
  corr_cmd->add_option("--audit", corr_args.audits, "Audit reports (JSON)")->delimiter(',');
  corr_cmd->add_option("--speat", corr_args.speats, "SpEAT results (JSON)")->delimiter(',');
  corr_cmd->add_option("--corpora", corr_args.corpora, "Column roster")->delimiter(',');
  corr_cmd->add_option("--out", corr_args.out, "Destination (default stdout)");
  corr_cmd->add_option("--format", corr_args.format, "json, csv or text");

  TablesArgs tables_args;
  auto* tables_cmd = app.add_subcommand("tables", "Render stored results as tables");
  tables_cmd->add_option("--kind", tables_args.kind, "emotion-gap, corpus-gap, valence-gap or speat")
      ->required();
  tables_cmd->add_option("--audit", tables_args.audits, "Audit reports (JSON)")->delimiter(',');
  tables_cmd->add_option("--speat", tables_args.speats, "SpEAT results (JSON)")->delimiter(',');
  tables_cmd->add_option("--models", tables_args.models, "Row roster")->delimiter(',');
  tables_cmd->add_option("--corpora", tables_args.corpora, "Column roster")->delimiter(',');
  tables_cmd->add_option("--out", tables_args.out, "Destination (default stdout)");
  tables_cmd->add_option("--format", tables_args.format, "json, csv or text");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic fixture with planted bias");
  synth_cmd->add_option("spec", synth_args.spec, "Fixture spec (JSON)")->required();
  synth_cmd->add_option("--seed", synth_args.seed, "Generator seed");
  synth_cmd->add_option("--out-dir", synth_args.out_dir, "Output directory")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : exit_code_for(ErrorKind::UsageError);
  }

  try {
    if (audit_cmd->parsed()) return audit(audit_args, out);
    if (speat_cmd->parsed()) return speat(speat_args, out);
    if (corr_cmd->parsed()) return correlate(corr_args, out);
    if (tables_cmd->parsed()) return tables(tables_args, out);
    if (synth_cmd->parsed()) return synth(synth_args, out);
  } catch (const Error& e) {
    err << "sergap: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "sergap: ValidationError: " << e.what() << '\n';
    return exit_code_for(ErrorKind::ValidationError);
  }
  return exit_code_for(ErrorKind::UsageError);
}

}  // namespace sergap::cli
