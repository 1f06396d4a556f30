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

#include "sergap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "sergap/error.hpp"

namespace sergap {
using nlohmann::json;

namespace {

constexpr const char* kUndefined = "\xE2\x80\x94";  // em dash

std::string_view format_name(CellFormat f) {
  switch (f) {
    case CellFormat::SignedPercent: return "signed_percent";
    case CellFormat::Percent: return "percent";
    case CellFormat::Fixed2: return "fixed2";
  }
  return "fixed2";
}

CellFormat parse_format_name(const std::string& s) {
  if (s == "signed_percent") return CellFormat::SignedPercent;
  if (s == "percent") return CellFormat::Percent;
  if (s == "fixed2") return CellFormat::Fixed2;
  raise(ErrorKind::ValidationError, "unknown cell format '" + s + "'");
}

std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80;
  return w;
}

// Stable index of `label` in `order`, appending unseen labels.
std::size_t slot(std::vector<std::string>& order, const std::string& label) {
  auto it = std::find(order.begin(), order.end(), label);
  if (it != order.end()) return static_cast<std::size_t>(it - order.begin());
  order.push_back(label);
  return order.size() - 1;
}

std::optional<double> mean_of_defined(const std::vector<Cell>& cells) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& c : cells) {
    if (c.value) {
      total += *c.value;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return total / static_cast<double>(n);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    raise(ErrorKind::ValidationError, std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

double round_half_away(double value, int decimals) {
  const double factor = std::pow(10.0, decimals);
  return std::round(value * factor) / factor;
}

std::string format_cell(const Cell& cell, CellFormat format) {
  if (!cell.value) return kUndefined;
  char buf[64];
  switch (format) {
    case CellFormat::SignedPercent: {
      double v = round_half_away(*cell.value * 100.0, 1);
      if (v == 0.0) return "0.0";
      std::snprintf(buf, sizeof buf, "%+.1f", v);
      break;
    }
    case CellFormat::Percent: {
      double v = round_half_away(*cell.value * 100.0, 1);
      std::snprintf(buf, sizeof buf, "%.1f", v == 0.0 ? 0.0 : v);
      break;
    }
    case CellFormat::Fixed2: {
      double v = round_half_away(*cell.value, 2);
      std::snprintf(buf, sizeof buf, "%.2f", v == 0.0 ? 0.0 : v);
      break;
    }
  }
  return buf;
}

std::string to_csv(const Table& table) {
  std::ostringstream out;
  bool first = true;
  for (const auto& h : table.row_header) {
    out << (first ? "" : ",") << csv_field(h);
    first = false;
  }
  for (const auto& c : table.columns) out << ',' << csv_field(c);
  out << '\n';
  for (std::size_t r = 0; r < table.row_keys.size(); ++r) {
    first = true;
    for (const auto& k : table.row_keys[r]) {
      out << (first ? "" : ",") << csv_field(k);
      first = false;
    }
    for (const auto& cell : table.cells[r]) {
      out << ',' << (cell.value ? format_cell(cell, table.format) : "");
    }
    out << '\n';
  }
  return out.str();
}

std::string to_text(const Table& table) {
  const std::size_t key_cols = table.row_header.size();
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = table.row_header;
  header.insert(header.end(), table.columns.begin(), table.columns.end());
  grid.push_back(header);
  for (std::size_t r = 0; r < table.row_keys.size(); ++r) {
    std::vector<std::string> row = table.row_keys[r];
    for (const auto& cell : table.cells[r]) row.push_back(format_cell(cell, table.format));
    grid.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], display_width(row[c]));
  }
  std::ostringstream out;
  if (!table.title.empty()) out << table.title << '\n';
  auto emit = [&](const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - display_width(row[c]), ' ');
      if (c > 0) line += (c == key_cols ? " | " : "  ");
      line += c < key_cols ? row[c] + pad : pad + row[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  };
  emit(grid.front());
  std::size_t rule = 0;
  for (std::size_t c = 0; c < width.size(); ++c) rule += width[c] + (c == 0 ? 0 : (c == key_cols ? 3 : 2));
  out << std::string(rule, '-') << '\n';
  for (std::size_t r = 1; r < grid.size(); ++r) emit(grid[r]);
  return out.str();
}

json to_json(const Table& table) {
  json rows = json::array();
  for (std::size_t r = 0; r < table.row_keys.size(); ++r) {
    json cells = json::array();
    for (const auto& cell : table.cells[r]) {
      json c{{"value", optional_json(cell.value)}};
      if (cell.n) c["n"] = *cell.n;
      cells.push_back(c);
    }
    rows.push_back({{"keys", table.row_keys[r]}, {"cells", cells}});
  }
  return json{{"kind", table.kind},          {"title", table.title},
              {"format", format_name(table.format)}, {"row_header", table.row_header},
              {"columns", table.columns},    {"rows", rows}};
}

Table table_from_json(const json& doc) {
  return guarded("table", [&] {
    Table t;
    t.kind = doc.at("kind").get<std::string>();
    t.title = doc.at("title").get<std::string>();
    t.format = parse_format_name(doc.at("format").get<std::string>());
    t.row_header = doc.at("row_header").get<std::vector<std::string>>();
    t.columns = doc.at("columns").get<std::vector<std::string>>();
    for (const auto& row : doc.at("rows")) {
      t.row_keys.push_back(row.at("keys").get<std::vector<std::string>>());
      std::vector<Cell> cells;
      for (const auto& c : row.at("cells")) {
        Cell cell{optional_from(c.at("value")), std::nullopt};
        if (c.contains("n")) cell.n = c["n"].get<std::size_t>();
        cells.push_back(cell);
      }
      if (cells.size() != t.columns.size()) {
        raise(ErrorKind::ValidationError, "table row width does not match its columns");
      }
      t.cells.push_back(std::move(cells));
    }
    return t;
  });
}

std::optional<OutputFormat> parse_output_format(std::string_view token) noexcept {
  if (token == "csv") return OutputFormat::Csv;
  if (token == "json") return OutputFormat::Json;
  if (token == "text") return OutputFormat::Text;
  return std::nullopt;
}

std::string render(const Table& table, OutputFormat format) {
  switch (format) {
    case OutputFormat::Csv: return to_csv(table);
    case OutputFormat::Json: return to_json(table).dump(2) + "\n";
    case OutputFormat::Text: return to_text(table);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Renderers

Table render_emotion_gap_table(std::span<const GapReport> reports, const Roster& models) {
  if (reports.empty()) raise(ErrorKind::NothingToRender, "no audit reports to render");
  const auto& classes = reports.front().schema.classes();
  for (const auto& r : reports) {
    if (r.schema.classes() != classes) {
      raise(ErrorKind::SchemaMismatch, "report '" + r.model_id + "' uses a different class roster");
    }
  }
  Table t;
  t.kind = "emotion_gap";
  t.title = "F1 gap by emotion (" + reports.front().pair.advantaged + " - " +
            reports.front().pair.disadvantaged + ", %), corpus " +
            reports.front().schema.corpus_id();
  t.format = CellFormat::SignedPercent;
  t.row_header = {"Model"};
  t.columns = classes;
  t.columns.push_back("Macro");

  std::vector<std::string> order = models;
  std::map<std::size_t, std::vector<Cell>> rows;
  for (const auto& r : reports) {
    std::vector<Cell> cells;
    for (const auto& g : r.d_e) cells.push_back({g, std::nullopt});
    cells.push_back({r.macro_gap, std::nullopt});
    rows[slot(order, r.model_id)] = std::move(cells);
  }
  for (const auto& [idx, cells] : rows) {
    t.row_keys.push_back({order[idx]});
    t.cells.push_back(cells);
  }
  return t;
}

Table render_dc_dv_table(std::span<const GapReport> reports, CorpusMetric metric,
                         const Roster& models, const Roster& corpora) {
  if (reports.empty()) raise(ErrorKind::NothingToRender, "no audit reports to render");
  Table t;
  const bool dc = metric == CorpusMetric::CorpusGap;
  t.kind = dc ? "corpus_gap" : "valence_gap";
  t.title = dc ? "Corpus-level gap d_c (%)" : "Valence gap d_v (%)";
  t.format = dc ? CellFormat::Percent : CellFormat::SignedPercent;
  t.row_header = {"Model"};

  std::vector<std::string> model_order = models;
  std::vector<std::string> corpus_order = corpora;
  std::map<std::pair<std::size_t, std::size_t>, double> values;
  for (const auto& r : reports) {
    const std::size_t m = slot(model_order, r.model_id);
    const std::size_t c = slot(corpus_order, r.schema.corpus_id());
    values[{m, c}] = dc ? r.d_c.value : r.d_v.value;
  }
  t.columns = corpus_order;
  t.columns.push_back("Mean");
  std::vector<bool> used(model_order.size(), false);
  for (const auto& [key, v] : values) used[key.first] = true;
  for (std::size_t m = 0; m < model_order.size(); ++m) {
    if (!used[m]) continue;
    std::vector<Cell> cells;
    for (std::size_t c = 0; c < corpus_order.size(); ++c) {
      auto it = values.find({m, c});
      cells.push_back({it == values.end() ? std::nullopt : std::optional<double>(it->second),
                       std::nullopt});
    }
    cells.push_back({mean_of_defined(cells), std::nullopt});
    t.row_keys.push_back({model_order[m]});
    t.cells.push_back(std::move(cells));
  }
  return t;
}

std::string SpeatRecord::column() const {
  return result.aggregation == AggregationKind::Mean ? "mean" : result.weights_corpus_id;
}

Table render_speat_table(std::span<const SpeatRecord> records, const Roster& models,
                         const Roster& corpora) {
  if (records.empty()) raise(ErrorKind::NothingToRender, "no SpEAT results to render");
  Table t;
  t.kind = "speat";
  t.title = "Upstream representation bias d_s";
  t.format = CellFormat::Fixed2;
  t.row_header = {"Model"};

  std::vector<std::string> model_order = models;
  std::vector<std::string> column_order{"mean"};
  for (const auto& c : corpora) slot(column_order, c);
  std::map<std::pair<std::size_t, std::size_t>, double> values;
  for (const auto& r : records) {
    values[{slot(model_order, r.model_id), slot(column_order, r.column())}] = r.result.d_s;
  }
  t.columns = column_order;
  std::vector<bool> used(model_order.size(), false);
  for (const auto& [key, v] : values) used[key.first] = true;
  for (std::size_t m = 0; m < model_order.size(); ++m) {
    if (!used[m]) continue;
    std::vector<Cell> cells;
    for (std::size_t c = 0; c < column_order.size(); ++c) {
      auto it = values.find({m, c});
      cells.push_back({it == values.end() ? std::nullopt : std::optional<double>(it->second),
                       std::nullopt});
    }
    t.row_keys.push_back({model_order[m]});
    t.cells.push_back(std::move(cells));
  }
  return t;
}

Table render_correlation_grid(std::span<const GridEntry> entries,
                              std::vector<std::string> row_header, std::string title,
                              const Roster& columns) {
  if (entries.empty()) raise(ErrorKind::NothingToRender, "no correlation cells to render");
  Table t;
  t.kind = "correlation";
  t.title = std::move(title);
  t.format = CellFormat::Fixed2;
  t.row_header = std::move(row_header);

  std::vector<std::vector<std::string>> row_order;
  std::vector<std::string> column_order = columns;
  std::map<std::pair<std::size_t, std::size_t>, CorrelationCell> values;
  for (const auto& e : entries) {
    if (e.row_key.size() != t.row_header.size()) {
      raise(ErrorKind::SchemaMismatch, "row key depth does not match the row header");
    }
    auto it = std::find(row_order.begin(), row_order.end(), e.row_key);
    const std::size_t r = static_cast<std::size_t>(it - row_order.begin());
    if (it == row_order.end()) row_order.push_back(e.row_key);
    values[{r, slot(column_order, e.column)}] = e.cell;
  }
  t.columns = column_order;
  for (std::size_t r = 0; r < row_order.size(); ++r) {
    std::vector<Cell> cells;
    for (std::size_t c = 0; c < column_order.size(); ++c) {
      auto it = values.find({r, c});
      if (it == values.end()) {
        cells.push_back({});
      } else {
        cells.push_back({it->second.r, it->second.n});
      }
    }
    t.row_keys.push_back(row_order[r]);
    t.cells.push_back(std::move(cells));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Structured results

json gap_report_to_json(const GapReport& report) {
  const auto& schema = report.schema;
  auto names = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    for (std::size_t k : idx) out.push_back(schema.class_name(k));
    return out;
  };
  auto group_json = [&](const GroupScores& g) {
    json classes = json::array();
    for (std::size_t k = 0; k < g.classes.size(); ++k) {
      const auto& c = g.classes[k];
      classes.push_back({{"class", schema.class_name(k)},
                         {"gold_positives", c.gold_positives},
                         {"predicted_positives", c.predicted_positives},
                         {"true_positives", c.true_positives},
                         {"precision", optional_json(c.precision)},
                         {"recall", optional_json(c.recall)},
                         {"f1", optional_json(c.f1)}});
    }
    return json{{"group", g.group},
                {"records", g.records},
                {"macro_f1", optional_json(g.macro_f1)},
                {"classes", classes}};
  };

  json valence = json::object();
  for (std::size_t k = 0; k < schema.size(); ++k) {
    valence[schema.class_name(k)] = valence_name(schema.valence(k));
  }
  json d_e = json::array();
  for (const auto& g : report.d_e) d_e.push_back(optional_json(g));
  json splits = json::array();
  for (const auto& s : report.d_v.splits) {
    splits.push_back({{"class", schema.class_name(s.class_index)},
                      {"tagged_positive", s.tagged_positive},
                      {"tagged_negative", s.tagged_negative},
                      {"untagged", s.untagged},
                      {"p_plus", s.p_plus},
                      {"p_minus", s.p_minus},
                      {"d_plus", optional_json(s.d_plus)},
                      {"d_minus", optional_json(s.d_minus)}});
  }
  json doc{{"model_id", report.model_id},
           {"corpus_id", schema.corpus_id()},
           {"groups",
            {{"advantaged", report.pair.advantaged},
             {"disadvantaged", report.pair.disadvantaged}}},
           {"classes", schema.classes()},
           {"valence", valence},
           {"d_e", d_e},
           {"d_c", report.d_c.value},
           {"d_c_excluded", names(report.d_c.excluded)},
           {"d_v", report.d_v.value},
           {"d_v_excluded", report.d_v.excluded},
           {"valence_split", splits},
           {"macro_gap", optional_json(report.macro_gap)},
           {"macro_f1_gap", optional_json(report.macro_f1_gap)},
           {"f1", {{"advantaged", group_json(report.table.advantaged)},
                   {"disadvantaged", group_json(report.table.disadvantaged)}}},
           {"ignored_records", report.table.ignored_records}};
  if (report.d_d) {
    doc["d_d"] = {{"values", report.d_d->values},
                  {"advantaged_records", report.d_d->advantaged_records},
                  {"disadvantaged_records", report.d_d->disadvantaged_records}};
  }
  return doc;
}

GapReport gap_report_from_json(const json& doc) {
  return guarded("audit report", [&] {
    std::vector<std::string> classes = doc.at("classes").get<std::vector<std::string>>();
    std::map<std::string, Valence> valence_of;
    for (const auto& [name, token] : doc.at("valence").items()) {
      auto v = parse_valence(token.get<std::string>());
      if (!v) raise(ErrorKind::ValidationError, "unknown valence in audit report");
      valence_of[name] = *v;
    }
    EmotionSchema schema(doc.at("corpus_id").get<std::string>(), classes, valence_of);
    GroupPair pair = GroupPair::make(doc.at("groups").at("advantaged").get<std::string>(),
                                     doc.at("groups").at("disadvantaged").get<std::string>());
    auto index = [&](const std::string& name) {
      auto k = schema.index_of(name);
      if (!k) raise(ErrorKind::ValidationError, "unknown class '" + name + "' in audit report");
      return *k;
    };
    auto group_from = [&](const json& g) {
      GroupScores s;
      s.group = g.at("group").get<std::string>();
      s.records = g.at("records").get<std::size_t>();
      s.macro_f1 = optional_from(g.at("macro_f1"));
      for (const auto& c : g.at("classes")) {
        ClassScore cs;
        cs.gold_positives = c.at("gold_positives").get<std::size_t>();
        cs.predicted_positives = c.at("predicted_positives").get<std::size_t>();
        cs.true_positives = c.at("true_positives").get<std::size_t>();
        cs.precision = optional_from(c.at("precision"));
        cs.recall = optional_from(c.at("recall"));
        cs.f1 = optional_from(c.at("f1"));
        s.classes.push_back(cs);
      }
      return s;
    };
    GroupF1Table table;
    table.advantaged = group_from(doc.at("f1").at("advantaged"));
    table.disadvantaged = group_from(doc.at("f1").at("disadvantaged"));
    table.ignored_records = doc.at("ignored_records").get<std::size_t>();

    GapVector d_e;
    for (const auto& g : doc.at("d_e")) d_e.push_back(optional_from(g));
    if (d_e.size() != schema.size()) raise(ErrorKind::ValidationError, "d_e length mismatch");
    CorpusGap d_c{doc.at("d_c").get<double>(), {}};
    for (const auto& name : doc.at("d_c_excluded")) d_c.excluded.push_back(index(name));
    ValenceGap d_v;
    d_v.value = doc.at("d_v").get<double>();
    d_v.excluded = doc.at("d_v_excluded").get<std::vector<std::string>>();
    for (const auto& s : doc.at("valence_split")) {
      ValenceSplit split;
      split.class_index = index(s.at("class").get<std::string>());
      split.tagged_positive = s.at("tagged_positive").get<std::size_t>();
      split.tagged_negative = s.at("tagged_negative").get<std::size_t>();
      split.untagged = s.at("untagged").get<std::size_t>();
      split.p_plus = s.at("p_plus").get<double>();
      split.p_minus = s.at("p_minus").get<double>();
      split.d_plus = optional_from(s.at("d_plus"));
      split.d_minus = optional_from(s.at("d_minus"));
      d_v.splits.push_back(split);
    }
    std::optional<DataBiasVector> d_d;
    if (doc.contains("d_d")) {
      const json& dd = doc["d_d"];
      d_d = DataBiasVector{dd.at("values").get<std::vector<double>>(),
                           dd.at("advantaged_records").get<std::size_t>(),
                           dd.at("disadvantaged_records").get<std::size_t>()};
    }
    return GapReport{doc.at("model_id").get<std::string>(),
                     schema,
                     pair,
                     std::move(table),
                     std::move(d_e),
                     std::move(d_c),
                     std::move(d_v),
                     optional_from(doc.at("macro_gap")),
                     optional_from(doc.at("macro_f1_gap")),
                     std::move(d_d)};
  });
}

json speat_record_to_json(const SpeatRecord& record) {
  const SpeatResult& r = record.result;
  auto assoc = [](const std::vector<ItemAssociation>& items) {
    json out = json::array();
    for (const auto& a : items) out.push_back({{"utt_id", a.utt_id}, {"s", a.value}});
    return out;
  };
  json doc{{"model_id", record.model_id},
           {"stimuli", record.stimuli},
           {"column", record.column()},
           {"d_s", r.d_s},
           {"d_s_sum", r.d_s_sum},
           {"d_s_mean", r.d_s_mean},
           {"numerator_sum", r.numerator_sum},
           {"numerator_mean", r.numerator_mean},
           {"stddev_value", r.stddev_value},
           {"numerator", numerator_name(r.numerator)},
           {"stddev", stddev_name(r.stddev)},
           {"aggregation", aggregation_name(r.aggregation)},
           {"weights_model_id", r.weights_model_id},
           {"weights_corpus_id", r.weights_corpus_id},
           {"set_sizes", {{"X", r.set_sizes[0]}, {"Y", r.set_sizes[1]},
                          {"A", r.set_sizes[2]}, {"B", r.set_sizes[3]}}},
           {"x_associations", assoc(r.x_associations)},
           {"y_associations", assoc(r.y_associations)},
           {"warnings", r.warnings}};
  if (r.permutation) {
    doc["permutation_test"] = {{"extension", "not part of the effect-size definition"},
                               {"permutations", r.permutation->permutations},
                               {"seed", r.permutation->seed},
                               {"at_least_as_extreme", r.permutation->at_least_as_extreme},
                               {"p_value", r.permutation->p_value}};
  }
  return doc;
}

SpeatRecord speat_record_from_json(const json& doc) {
  return guarded("SpEAT result", [&] {
    SpeatRecord rec;
    rec.model_id = doc.at("model_id").get<std::string>();
    rec.stimuli = doc.at("stimuli").get<std::string>();
    SpeatResult& r = rec.result;
    r.d_s = doc.at("d_s").get<double>();
    r.d_s_sum = doc.at("d_s_sum").get<double>();
    r.d_s_mean = doc.at("d_s_mean").get<double>();
    r.numerator_sum = doc.at("numerator_sum").get<double>();
    r.numerator_mean = doc.at("numerator_mean").get<double>();
    r.stddev_value = doc.at("stddev_value").get<double>();
    auto num = parse_numerator(doc.at("numerator").get<std::string>());
    auto sd = parse_stddev(doc.at("stddev").get<std::string>());
    auto agg = parse_aggregation(doc.at("aggregation").get<std::string>());
    if (!num || !sd || !agg) raise(ErrorKind::ValidationError, "unknown SpEAT option in result");
    r.numerator = *num;
    r.stddev = *sd;
    r.aggregation = *agg;
    r.weights_model_id = doc.at("weights_model_id").get<std::string>();
    r.weights_corpus_id = doc.at("weights_corpus_id").get<std::string>();
    const json& sizes = doc.at("set_sizes");
    r.set_sizes = {sizes.at("X").get<std::size_t>(), sizes.at("Y").get<std::size_t>(),
                   sizes.at("A").get<std::size_t>(), sizes.at("B").get<std::size_t>()};
    for (const auto& a : doc.at("x_associations")) {
      r.x_associations.push_back({a.at("utt_id").get<std::string>(), a.at("s").get<double>()});
    }
    for (const auto& a : doc.at("y_associations")) {
      r.y_associations.push_back({a.at("utt_id").get<std::string>(), a.at("s").get<double>()});
    }
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    if (doc.contains("permutation_test")) {
      const json& p = doc["permutation_test"];
      r.permutation = PermutationTest{p.at("permutations").get<std::size_t>(),
                                      p.at("seed").get<std::uint64_t>(),
                                      p.at("at_least_as_extreme").get<std::size_t>(),
                                      p.at("p_value").get<double>()};
    }
    return rec;
  });
}

}  // namespace sergap
