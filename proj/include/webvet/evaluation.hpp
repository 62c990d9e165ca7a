#pragma once

// Scoring against a human-cleaned reference: record matching, P/R/F1,
// remediation recall, and multi-configuration comparison reports.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "webvet/csv.hpp"
#include "webvet/dates.hpp"
#include "webvet/decimal.hpp"
#include "webvet/runner.hpp"
#include "webvet/schema.hpp"
#include "webvet/text.hpp"

namespace webvet {

struct GroundTruth {
  std::vector<DataPoint> records;
  std::optional<std::set<std::string>> remediable_ids;  // absent: no `remediable` column
};

namespace detail {

inline bool truthy_marker(std::string_view v) {
  std::string s = text::lower(text::trim(v));
  return s == "1" || s == "true" || s == "yes" || s == "y" || s == "x";
}

inline std::ptrdiff_t column_index(const csv::Row& header, std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (text::trim(header[i]) == name) return static_cast<std::ptrdiff_t>(i);
  return -1;
}

}  // namespace detail

/// Reads a reference CSV: every schema field needs a column; `row_id`,
/// `remediable`, `origin` and `source_url` are optional. Values are coerced.
inline GroundTruth load_ground_truth(std::string_view csv_text, const SchemaSpec& schema,
                                     const std::string& id_column = "row_id") {
  csv::Table t = csv::parse(csv_text);
  std::vector<std::string> missing;
  for (const auto& f : schema.fields)
    if (detail::column_index(t.header, f.name) < 0) missing.push_back(f.name);
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw DatasetError("ground truth lacks schema columns: " + names);
  }
  auto id_col = detail::column_index(t.header, id_column);
  auto rem_col = detail::column_index(t.header, "remediable");
  auto url_col = detail::column_index(t.header, "source_url");
  GroundTruth gt;
  if (rem_col >= 0) gt.remediable_ids.emplace();
  std::set<std::string> ids;
  for (std::size_t n = 0; n < t.rows.size(); ++n) {
    const auto& row = t.rows[n];
    DataPoint dp;
    dp.row_id = id_col >= 0 ? std::string(text::trim(row[static_cast<std::size_t>(id_col)])) : "gt" + std::to_string(n + 1);
    if (dp.row_id.empty() || !ids.insert(dp.row_id).second)
      throw DatasetError("ground truth row " + std::to_string(n + 1) + " has an empty or duplicate id");
    if (url_col >= 0) dp.source_url = row[static_cast<std::size_t>(url_col)];
    for (const auto& f : schema.fields) dp.values[f.name] = row[static_cast<std::size_t>(detail::column_index(t.header, f.name))];
    try {
      dp = coerce_record(dp, schema);
    } catch (const Error& e) {
      throw DatasetError("ground truth row " + dp.row_id + ": " + e.what());
    }
    if (rem_col >= 0 && detail::truthy_marker(row[static_cast<std::size_t>(rem_col)])) gt.remediable_ids->insert(dp.row_id);
    gt.records.push_back(std::move(dp));
  }
  return gt;
}

/// Reads a pipeline output CSV back into records (row_id, schema fields,
/// optional origin and source_url columns).
inline std::vector<DataPoint> load_output_records(std::string_view csv_text, const SchemaSpec& schema) {
  csv::Table t = csv::parse(csv_text);
  for (const auto& f : schema.fields)
    if (detail::column_index(t.header, f.name) < 0) throw DatasetError("output lacks schema column '" + f.name + "'");
  auto id_col = detail::column_index(t.header, "row_id");
  auto origin_col = detail::column_index(t.header, "origin");
  auto url_col = detail::column_index(t.header, "source_url");
  std::vector<DataPoint> out;
  for (std::size_t n = 0; n < t.rows.size(); ++n) {
    const auto& row = t.rows[n];
    DataPoint dp;
    dp.row_id = id_col >= 0 ? row[static_cast<std::size_t>(id_col)] : "out" + std::to_string(n + 1);
    if (url_col >= 0) dp.source_url = row[static_cast<std::size_t>(url_col)];
    if (origin_col >= 0) {
      std::string o = text::upper(text::trim(row[static_cast<std::size_t>(origin_col)]));
      dp.origin = o == "REMEDIATED" ? Origin::kRemediated : o == "DISCOVERED" ? Origin::kDiscovered : Origin::kInitial;
    }
    for (const auto& f : schema.fields) dp.values[f.name] = row[static_cast<std::size_t>(detail::column_index(t.header, f.name))];
    out.push_back(std::move(dp));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matching

enum class MatchPolicy {
  kLenientDates,  // dates compared at the coarser of the two precisions
  kStrict,        // every field by canonical string equality
};

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (output index, gt index)
  std::vector<std::size_t> unmatched_output;
  std::vector<std::size_t> unmatched_gt;
};

inline bool dates_match(std::string_view a, std::string_view b) {
  auto da = detail::try_normalize_date(a);
  auto db = detail::try_normalize_date(b);
  if (!da || !db) return text::trim(a) == text::trim(b);
  DatePrecision p = std::min(da->precision, db->precision);
  return truncate_date(*da, p) == truncate_date(*db, p);
}

inline bool records_match(const DataPoint& out, const DataPoint& gt, const SchemaSpec& schema,
                          MatchPolicy policy = MatchPolicy::kLenientDates) {
  for (const auto& f : schema.fields) {
    std::string a = out.value(f.name), b = gt.value(f.name);
    if (f.type == FieldType::kDate && policy == MatchPolicy::kLenientDates) {
      if (!dates_match(a, b)) return false;
    } else if (a != b) {
      return false;
    }
  }
  return true;
}

/// Greedy one-to-one matching: each GT row in order takes the first
/// unmatched output row that matches it.
inline MatchResult match_records(const std::vector<DataPoint>& output, const std::vector<DataPoint>& gt,
                                 const SchemaSpec& schema, MatchPolicy policy = MatchPolicy::kLenientDates) {
  MatchResult m;
  std::vector<bool> used(output.size(), false);
  for (std::size_t g = 0; g < gt.size(); ++g) {
    bool found = false;
    for (std::size_t o = 0; o < output.size(); ++o) {
      if (used[o] || !records_match(output[o], gt[g], schema, policy)) continue;
      used[o] = true;
      m.pairs.emplace_back(o, g);
      found = true;
      break;
    }
    if (!found) m.unmatched_gt.push_back(g);
  }
  for (std::size_t o = 0; o < output.size(); ++o)
    if (!used[o]) m.unmatched_output.push_back(o);
  return m;
}

// ---------------------------------------------------------------------------
// Metrics

struct Metrics {
  std::optional<Decimal> precision;  // absent when the output is empty
  Decimal recall;
  Decimal f1;
  std::optional<Decimal> remediation_recall;  // absent without remediable ids
  std::size_t matched = 0;
  std::size_t output_rows = 0;
  std::size_t gt_rows = 0;
  std::size_t remediated_matched = 0;
};

/// 2PR/(P+R) on exact values, rounded half away from zero to one decimal.
inline Decimal f1_score(const Decimal& p, const Decimal& r) {
  if ((p + r).is_zero()) return Decimal(0);
  return (Decimal(2) * p * r / (p + r)).rounded(1);
}

inline Decimal percentage(std::size_t num, std::size_t den) {
  return (Decimal(static_cast<std::int64_t>(num)) * Decimal(100) / Decimal(static_cast<std::int64_t>(den))).rounded(1);
}

inline Metrics compute_metrics(const MatchResult& m, const std::vector<DataPoint>& output, const GroundTruth& gt) {
  Metrics r;
  r.matched = m.pairs.size();
  r.output_rows = output.size();
  r.gt_rows = gt.records.size();
  if (!output.empty()) r.precision = percentage(r.matched, output.size());
  r.recall = gt.records.empty() ? Decimal(0) : percentage(r.matched, gt.records.size());
  r.f1 = f1_score(r.precision.value_or(Decimal(0)), r.recall);
  if (gt.remediable_ids) {
    for (auto [o, g] : m.pairs)
      if (output[o].origin == Origin::kRemediated && gt.remediable_ids->count(gt.records[g].row_id)) ++r.remediated_matched;
    if (!gt.remediable_ids->empty()) r.remediation_recall = percentage(r.remediated_matched, gt.remediable_ids->size());
  }
  return r;
}

inline Metrics score(const std::vector<DataPoint>& output, const GroundTruth& gt, const SchemaSpec& schema,
                     MatchPolicy policy = MatchPolicy::kLenientDates) {
  return compute_metrics(match_records(output, gt.records, schema, policy), output, gt);
}

inline json to_json(const Metrics& m) {
  auto pct = [](const std::optional<Decimal>& d) { return d ? json(d->to_fixed(1)) : json(nullptr); };
  return {{"precision", pct(m.precision)},
          {"recall", m.recall.to_fixed(1)},
          {"f1", m.f1.to_fixed(1)},
          {"remediation_recall", pct(m.remediation_recall)},
          {"matched", m.matched},
          {"output_rows", m.output_rows},
          {"gt_rows", m.gt_rows},
          {"remediated_matched", m.remediated_matched}};
}

// ---------------------------------------------------------------------------
// Comparison

struct ComparisonEntry {
  RunConfig config;
  bool ok = false;
  std::string error;
  Metrics metrics;
  RunTotals totals;
};

struct ComparisonReport {
  std::size_t baseline = 0;
  std::vector<ComparisonEntry> entries;
};

struct ComparisonOptions {
  std::size_t baseline = 0;
  std::filesystem::path run_root;  // empty: no run directories
  MatchPolicy policy = MatchPolicy::kLenientDates;
};

/// Runs each config over the same dataset in order and scores it. A run that
/// throws becomes a failed entry.
inline ComparisonReport run_comparison(std::string_view csv_text, std::string_view gt_csv,
                                       const std::vector<RunConfig>& configs, const ComparisonOptions& opts = {}) {
  ComparisonReport rep;
  rep.baseline = opts.baseline < configs.size() ? opts.baseline : 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    ComparisonEntry e;
    e.config = configs[i];
    try {
      std::filesystem::path dir;
      if (!opts.run_root.empty()) dir = opts.run_root / (std::to_string(i + 1) + "-" + configs[i].label);
      EventLog events;
      RunReport r = execute_run(configs[i], csv_text, dir, events);
      GroundTruth gt = load_ground_truth(gt_csv, r.schema, configs[i].id_column);
      e.metrics = score(r.final_records, gt, r.schema, opts.policy);
      e.totals = r.totals;
      e.ok = true;
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

namespace detail {

inline std::string signed_delta(const Decimal& v, const Decimal& base) {
  Decimal d = (v - base).rounded(1);
  std::string s = d.to_fixed(1);
  if (d.sign() > 0) s = "+" + s;
  return s;
}

inline std::optional<Decimal> metric_value(const Metrics& m, std::string_view name) {
  if (name == "precision") return m.precision;
  if (name == "recall") return m.recall;
  if (name == "f1") return m.f1;
  return m.remediation_recall;
}

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"f1", "precision", "recall", "remediation_recall"};
  return names;
}

inline std::string seconds(std::int64_t ms) { return (Decimal(ms) / Decimal(1000)).to_fixed(1); }

}  // namespace detail

/// Metric minus the baseline's, as a signed one-decimal string ("n/a" when
/// either side has no value).
inline std::string metric_delta(const ComparisonReport& rep, std::size_t entry, std::string_view metric) {
  const auto& base = rep.entries.at(rep.baseline);
  const auto& e = rep.entries.at(entry);
  if (!e.ok || !base.ok) return "n/a";
  auto v = detail::metric_value(e.metrics, metric);
  auto b = detail::metric_value(base.metrics, metric);
  if (!v || !b) return "n/a";
  return detail::signed_delta(*v, *b);
}

inline json to_json(const ComparisonReport& rep) {
  json j;
  j["baseline"] = rep.entries.empty() ? json(nullptr) : json(rep.entries[rep.baseline].config.label);
  j["runs"] = json::array();
  for (std::size_t i = 0; i < rep.entries.size(); ++i) {
    const auto& e = rep.entries[i];
    json r{{"label", e.config.label}, {"config", to_json(e.config)}, {"status", e.ok ? "ok" : "failed"}};
    if (!e.ok) {
      r["error"] = e.error;
    } else {
      r["metrics"] = to_json(e.metrics);
      json d;
      for (const auto& m : detail::metric_names()) d[m] = metric_delta(rep, i, m);
      r["delta"] = d;
      r["totals"] = to_json(e.totals);
    }
    j["runs"].push_back(std::move(r));
  }
  return j;
}

/// Plain-text table: value (delta) per metric, then time, latency and cost.
inline std::string render_comparison_table(const ComparisonReport& rep) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"System", "F1", "P", "R", "Rem", "Time", "Lat", "Cost"});
  for (std::size_t i = 0; i < rep.entries.size(); ++i) {
    const auto& e = rep.entries[i];
    std::vector<std::string> row{e.config.label};
    if (!e.ok) {
      row.push_back("FAILED: " + e.error);
      rows.push_back(std::move(row));
      continue;
    }
    for (const auto& m : detail::metric_names()) {
      auto v = detail::metric_value(e.metrics, m);
      row.push_back(v ? v->to_fixed(1) + " (" + metric_delta(rep, i, m) + ")" : "n/a");
    }
    row.push_back(detail::seconds(e.totals.time_total_ms) + "s");
    row.push_back(detail::seconds(static_cast<std::int64_t>(std::llround(e.totals.latency_mean_ms))) + "s");
    row.push_back("$" + format_cost(e.totals.cost));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (r.size() == 2 && r[1].starts_with("FAILED")) continue;
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (width.size() <= c) width.push_back(0);
      width[c] = std::max(width[c], r[c].size());
    }
  }
  std::string out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      std::string cell = r[c];
      if (c + 1 < r.size() && c < width.size()) cell += std::string(width[c] - cell.size(), ' ');
      line += (c ? "  " : "") + cell;
    }
    out += line + "\n";
    if (k == 0) out += std::string(line.size(), '-') + "\n";
  }
  return out;
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::fixed << v;
  return os.str();
}

}  // namespace detail

/// Cost (x) against F1 (y), one bubble per successful run, area proportional
/// to total processing time.
inline std::string render_cost_f1_svg(const ComparisonReport& rep) {
  const double w = 720, h = 480, left = 70, right = 30, top = 30, bottom = 60;
  double max_cost = 0, max_time = 0;
  for (const auto& e : rep.entries) {
    if (!e.ok) continue;
    max_cost = std::max(max_cost, e.totals.cost.to_double());
    max_time = std::max(max_time, static_cast<double>(e.totals.time_total_ms));
  }
  if (max_cost <= 0) max_cost = 1;
  double pw = w - left - right, ph = h - top - bottom;
  auto x_of = [&](double c) { return left + c / (max_cost * 1.1) * pw; };
  auto y_of = [&](double f1) { return top + (1.0 - f1 / 100.0) * ph; };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(w) + "\" height=\"" + detail::num(h) +
                  "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(top + ph) + "\" x2=\"" + detail::num(left + pw) +
       "\" y2=\"" + detail::num(top + ph) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(top) + "\" x2=\"" + detail::num(left) + "\" y2=\"" +
       detail::num(top + ph) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 100; t += 20) {
    s += "<text x=\"" + detail::num(left - 8) + "\" y=\"" + detail::num(y_of(t) + 4) + "\" text-anchor=\"end\">" +
         std::to_string(t) + "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    double c = max_cost * 1.1 * t / 4;
    s += "<text x=\"" + detail::num(x_of(c)) + "\" y=\"" + detail::num(top + ph + 18) + "\" text-anchor=\"middle\">$" +
         Decimal::parse(detail::num(c)).value_or(Decimal()).to_fixed(2) + "</text>\n";
  }
  s += "<text x=\"" + detail::num(left + pw / 2) + "\" y=\"" + detail::num(h - 15) +
       "\" text-anchor=\"middle\">Total cost (USD)</text>\n";
  s += "<text x=\"18\" y=\"" + detail::num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       detail::num(top + ph / 2) + ")\">F1</text>\n";
  for (const auto& e : rep.entries) {
    if (!e.ok) continue;
    double t = static_cast<double>(e.totals.time_total_ms);
    double r = 4 + (max_time > 0 ? 26 * std::sqrt(t / max_time) : 0);
    double cx = x_of(e.totals.cost.to_double()), cy = y_of(e.metrics.f1.to_double());
    s += "<circle cx=\"" + detail::num(cx) + "\" cy=\"" + detail::num(cy) + "\" r=\"" + detail::num(r) +
         "\" fill=\"steelblue\" fill-opacity=\"0.45\" stroke=\"steelblue\"/>\n";
    s += "<text x=\"" + detail::num(cx + r + 3) + "\" y=\"" + detail::num(cy + 4) + "\">" +
         detail::xml_escape(e.config.label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace webvet
