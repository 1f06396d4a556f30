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

// Table renderers for audit results and the three output sinks (delimited
// text, structured JSON, aligned plain text).
//
// Number formats: per-class and corpus gaps are percentages with one decimal
// (value * 100, rounded half away from zero; signed gaps carry an explicit
// '+'); d_s and correlation coefficients use two decimals. Undefined cells
// render as an em dash in plain text and as an empty field in CSV.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sergap/association_stats.hpp"
#include "sergap/gap_metrics.hpp"
#include "sergap/speat.hpp"

namespace sergap {

enum class CellFormat { SignedPercent, Percent, Fixed2 };

struct Cell {
  std::optional<double> value;
  std::optional<std::size_t> n;  // sample size, correlation cells only
  bool operator==(const Cell&) const = default;
};

struct Table {
  std::string kind;   // "emotion_gap", "corpus_gap", "valence_gap", "speat", "correlation"
  std::string title;
  CellFormat format = CellFormat::Fixed2;
  std::vector<std::string> row_header;  // one label per row-key level, e.g. {"Model"}
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> row_keys;
  std::vector<std::vector<Cell>> cells;  // [row][column]

  bool operator==(const Table&) const = default;
};

// Half away from zero at `decimals` places.
double round_half_away(double value, int decimals);
std::string format_cell(const Cell& cell, CellFormat format);

std::string to_csv(const Table& table);
std::string to_text(const Table& table);
nlohmann::json to_json(const Table& table);
Table table_from_json(const nlohmann::json& doc);

enum class OutputFormat { Csv, Json, Text };
std::optional<OutputFormat> parse_output_format(std::string_view token) noexcept;
std::string render(const Table& table, OutputFormat format);

// Row and column orders follow the rosters when given; labels missing from a
// roster are appended in first-seen order.
using Roster = std::vector<std::string>;

// Rows = models, columns = classes + "Macro" (mean of defined d_e). Throws
// SchemaMismatch when reports disagree on the class roster, NothingToRender
// on an empty input.
Table render_emotion_gap_table(std::span<const GapReport> reports, const Roster& models = {});

enum class CorpusMetric { CorpusGap, ValenceGap };
// Rows = models, columns = corpora + "Mean".
Table render_dc_dv_table(std::span<const GapReport> reports, CorpusMetric metric,
                         const Roster& models = {}, const Roster& corpora = {});

struct SpeatRecord {
  std::string model_id;
  std::string stimuli;  // stimulus source label, e.g. "MESS"
  SpeatResult result;

  // "mean" for Mean aggregation, the weights' corpus id for Weighted.
  std::string column() const;
};

// Rows = models, columns = "mean" followed by corpora.
Table render_speat_table(std::span<const SpeatRecord> records, const Roster& models = {},
                         const Roster& corpora = {});

struct GridEntry {
  std::vector<std::string> row_key;
  std::string column;
  CorrelationCell cell;
};

Table render_correlation_grid(std::span<const GridEntry> entries,
                              std::vector<std::string> row_header, std::string title,
                              const Roster& columns = {});

// Machine-readable audit and SpEAT results, lossless to double precision.
nlohmann::json gap_report_to_json(const GapReport& report);
GapReport gap_report_from_json(const nlohmann::json& doc);
nlohmann::json speat_record_to_json(const SpeatRecord& record);
SpeatRecord speat_record_from_json(const nlohmann::json& doc);

}  // namespace sergap
