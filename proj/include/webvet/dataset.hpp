#pragma once

// CSV ingestion: header row, a designated URL column, an optional row id
// column, schema fields, and passthrough columns carried to the output.

#include <set>
#include <string>
#include <vector>

#include "webvet/csv.hpp"
#include "webvet/errors.hpp"
#include "webvet/schema.hpp"
#include "webvet/text.hpp"

namespace webvet {

struct Dataset {
  SchemaSpec schema;
  std::vector<DataPoint> rows;
  std::vector<std::string> passthrough_columns;
};

struct DatasetOptions {
  std::string schema_annotation;
  std::string description;
  std::string url_column = "source_url";
  std::string id_column = "row_id";
};

/// Parses the CSV and builds the schema. Fails before any model call when
/// the input is malformed, the URL column is absent, a schema field has no
/// column, or row ids are duplicated.
inline Dataset load_dataset(std::string_view csv_text, const DatasetOptions& opts) {
  if (csv_text.size() >= 3 && csv_text.substr(0, 3) == "\xEF\xBB\xBF") csv_text.remove_prefix(3);
  if (text::trim(csv_text).empty()) throw DatasetError("input CSV is empty (a header row is required)");
  csv::Table table = csv::parse(csv_text);
  const auto& header = table.header;
  auto column = [&](const std::string& name) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (text::trim(header[i]) == name) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  std::ptrdiff_t url_col = column(opts.url_column);
  if (url_col < 0) throw DatasetError("no URL column '" + opts.url_column + "' in the input header");
  std::ptrdiff_t id_col = opts.id_column.empty() ? -1 : column(opts.id_column);

  std::vector<RawRecord> raw;
  raw.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    RawRecord r;
    for (std::size_t i = 0; i < header.size(); ++i) r[std::string(text::trim(header[i]))] = row[i];
    raw.push_back(std::move(r));
  }

  Dataset ds;
  ds.schema = generate_schema(opts.schema_annotation, raw, opts.description);
  std::set<std::string> schema_cols;
  for (const auto& f : ds.schema.fields) {
    if (column(f.name) < 0) throw DatasetError("schema field '" + f.name + "' has no column in the input");
    schema_cols.insert(f.name);
  }
  if (schema_cols.count(opts.url_column)) throw DatasetError("the URL column cannot also be a schema field");
  for (std::size_t i = 0; i < header.size(); ++i) {
    auto name = std::string(text::trim(header[i]));
    if (static_cast<std::ptrdiff_t>(i) == url_col || static_cast<std::ptrdiff_t>(i) == id_col || schema_cols.count(name))
      continue;
    ds.passthrough_columns.push_back(name);
  }

  std::set<std::string> ids;
  std::size_t width = std::to_string(table.rows.size()).size();
  for (std::size_t n = 0; n < table.rows.size(); ++n) {
    const auto& row = table.rows[n];
    DataPoint dp;
    if (id_col >= 0) {
      dp.row_id = std::string(text::trim(row[static_cast<std::size_t>(id_col)]));
      if (dp.row_id.empty()) throw DatasetError("row " + std::to_string(n + 1) + " has an empty row id");
    } else {
      std::string num = std::to_string(n + 1);
      dp.row_id = "r" + std::string(width - num.size(), '0') + num;
    }
    if (!ids.insert(dp.row_id).second) throw DatasetError("duplicate row id '" + dp.row_id + "'");
    dp.source_url = std::string(text::trim(row[static_cast<std::size_t>(url_col)]));
    for (const auto& f : ds.schema.fields) dp.values[f.name] = row[static_cast<std::size_t>(column(f.name))];
    for (const auto& p : ds.passthrough_columns) dp.passthrough.emplace_back(p, row[static_cast<std::size_t>(column(p))]);
    ds.rows.push_back(std::move(dp));
  }
  return ds;
}

/// Output columns: row_id, schema fields, passthrough columns, origin, source_url.
inline std::string format_records_csv(const std::vector<DataPoint>& records, const SchemaSpec& schema,
                                      const std::vector<std::string>& passthrough_columns) {
  csv::Table t;
  t.header.push_back("row_id");
  for (const auto& f : schema.fields) t.header.push_back(f.name);
  for (const auto& p : passthrough_columns) t.header.push_back(p);
  t.header.push_back("origin");
  t.header.push_back("source_url");
  for (const auto& r : records) {
    csv::Row row{r.row_id};
    for (const auto& f : schema.fields) row.push_back(r.value(f.name));
    for (const auto& p : passthrough_columns) {
      std::string v;
      for (const auto& [k, val] : r.passthrough)
        if (k == p) v = val;
      row.push_back(v);
    }
    row.push_back(std::string(to_string(r.origin)));
    row.push_back(r.source_url);
    t.rows.push_back(std::move(row));
  }
  return csv::format(t);
}

}  // namespace webvet
