#pragma once

// Final stage over all accepted rows: hierarchical deduplication, then the
// integrity gate (deterministic completeness plus batched plausibility).

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "webvet/context.hpp"
#include "webvet/dates.hpp"
#include "webvet/gateway.hpp"
#include "webvet/prompts.hpp"
#include "webvet/schema.hpp"

namespace webvet {

/// Injective encoding of a value tuple: '\' and '|' are escaped, values are
/// joined with '|'.
inline std::string encode_fingerprint(const std::vector<std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += '|';
    for (char c : values[i]) {
      if (c == '\\' || c == '|') out += '\\';
      out += c;
    }
  }
  return out;
}

/// Base fingerprint: every non-date field in schema order. With no date
/// field this covers all fields.
inline std::string fingerprint(const DataPoint& dp, const SchemaSpec& schema) {
  const FieldSpec* date = schema.date_field();
  std::vector<std::string> values;
  for (const auto& f : schema.fields)
    if (&f != date) values.push_back(dp.value(f.name));
  return encode_fingerprint(values);
}

enum class DropReason { kFilteredIncomplete, kDuplicate, kIncomplete, kImplausible };

inline std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::kFilteredIncomplete: return "FILTERED_INCOMPLETE";
    case DropReason::kDuplicate: return "DUPLICATE";
    case DropReason::kIncomplete: return "COMPLETENESS";
    case DropReason::kImplausible: return "PLAUSIBILITY";
  }
  return "";
}

struct DroppedRecord {
  DataPoint record;
  DropReason reason;
  std::string detail;
};

struct DedupResult {
  std::vector<DataPoint> kept;
  std::vector<DroppedRecord> dropped;
};

/// Keep-first dedup in one left-to-right pass. A dated record is checked only
/// against the seen-set of its own date precision.
inline DedupResult dedup(const std::vector<DataPoint>& records, const SchemaSpec& schema) {
  DedupResult out;
  const FieldSpec* date = schema.date_field();
  std::array<std::set<std::pair<std::string, std::string>>, 3> seen_by_precision;
  std::set<std::pair<std::string, std::string>> undated;
  for (const auto& r : records) {
    auto violations = validate_record(r, schema);
    auto missing = std::find_if(violations.begin(), violations.end(),
                                [](const Violation& v) { return v.kind == ViolationKind::kMissing; });
    if (missing != violations.end()) {
      out.dropped.push_back({r, DropReason::kFilteredIncomplete, "missing required field '" + missing->field + "'"});
      continue;
    }
    std::string fp = fingerprint(r, schema);
    bool inserted;
    if (!date) {
      inserted = undated.emplace(fp, "").second;
    } else {
      std::string raw = r.value(date->name);
      if (detail::trim(raw).empty()) {
        inserted = undated.emplace(fp, "").second;
      } else {
        auto d = detail::try_normalize_date(raw);
        if (!d) {
          out.dropped.push_back({r, DropReason::kFilteredIncomplete, "unparseable date '" + raw + "'"});
          continue;
        }
        inserted = seen_by_precision[static_cast<std::size_t>(d->precision)].emplace(fp, d->canonical).second;
      }
    }
    if (inserted) out.kept.push_back(r);
    else out.dropped.push_back({r, DropReason::kDuplicate, "same fingerprint and date as an earlier record"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Integrity

inline constexpr std::size_t kIntegrityBatchSize = 25;

enum class IntegrityRule { kCompleteness, kPlausibility };

inline std::string_view to_string(IntegrityRule r) {
  return r == IntegrityRule::kCompleteness ? "COMPLETENESS" : "PLAUSIBILITY";
}

struct IntegrityFinding {
  std::string row_id;
  IntegrityRule rule;
  std::string field;
  std::string explanation;
};

struct IntegrityResult {
  std::vector<DataPoint> accepted;
  std::vector<IntegrityFinding> findings;
  std::vector<DroppedRecord> dropped;
  std::vector<std::string> warnings;
};

inline const ResponseShape& integrity_response_shape() {
  static const ResponseShape shape{{"implausible", ValueKind::kList}};
  return shape;
}

namespace detail {

inline std::string integrity_fields(const SchemaSpec& schema, const OperationalContext* ctx) {
  std::string out;
  for (const auto& f : schema.fields) {
    std::string desc;
    if (ctx)
      if (auto it = ctx->per_field.find(f.name); it != ctx->per_field.end()) desc = it->second.entity_description;
    if (desc.empty()) desc = std::string(to_string(f.type)) + " value";
    out += "- " + f.name + ": " + desc + "\n";
  }
  return out;
}

}  // namespace detail

/// Completeness is checked here without any model call. When `gateway` is set,
/// the remaining records are judged for plausibility in batches; a batch whose
/// response cannot be parsed passes with a warning.
inline IntegrityResult integrity_check(const std::vector<DataPoint>& records, const SchemaSpec& schema,
                                       const OperationalContext* ctx, Gateway* gateway,
                                       std::size_t batch_size = kIntegrityBatchSize) {
  IntegrityResult out;
  std::vector<DataPoint> complete;
  for (const auto& r : records) {
    bool ok = true;
    for (const auto& v : validate_record(r, schema)) {
      if (v.kind != ViolationKind::kMissing) continue;
      IntegrityFinding f{r.row_id, IntegrityRule::kCompleteness, v.field, "required field '" + v.field + "' is empty"};
      out.findings.push_back(f);
      if (ok) out.dropped.push_back({r, DropReason::kIncomplete, f.explanation});
      ok = false;
    }
    if (ok) complete.push_back(r);
  }
  if (!gateway) {
    out.accepted = std::move(complete);
    return out;
  }
  std::string fields = detail::integrity_fields(schema, ctx);
  std::size_t batch_no = 0;
  for (std::size_t start = 0; start < complete.size(); start += batch_size) {
    std::size_t end = std::min(complete.size(), start + batch_size);
    std::string rows;
    std::set<std::string> ids;
    for (std::size_t i = start; i < end; ++i) {
      json row{{"row_id", complete[i].row_id}};
      for (const auto& f : schema.fields) row[f.name] = complete[i].value(f.name);
      rows += row.dump() + "\n";
      ids.insert(complete[i].row_id);
    }
    std::string key = "batch-" + std::to_string(++batch_no);
    std::string prompt = text::render(prompts::kIntegrity, {{"fields", fields}, {"records", rows},
                                                            {"shape", describe_shape(integrity_response_shape())}});
    std::map<std::string, IntegrityFinding> flagged;
    try {
      auto r = gateway->complete_structured(AgentKind::kIntegrity, key, prompt, integrity_response_shape());
      for (const auto& e : r.value.at("implausible")) {
        if (!e.is_object()) continue;
        std::string id = e.value("row_id", std::string());
        std::string field = e.value("field", std::string());
        if (!ids.count(id) || flagged.count(id)) continue;
        std::string why = e.value("explanation", std::string());
        if (text::trim(why).empty()) why = "value implausible for field '" + field + "'";
        flagged.emplace(id, IntegrityFinding{id, IntegrityRule::kPlausibility, field, why});
      }
    } catch (const ParseExhausted& e) {
      out.warnings.push_back(key + " passed unchecked: " + e.what());
    }
    for (std::size_t i = start; i < end; ++i) {
      auto it = flagged.find(complete[i].row_id);
      if (it == flagged.end()) {
        out.accepted.push_back(complete[i]);
      } else {
        out.findings.push_back(it->second);
        out.dropped.push_back({complete[i], DropReason::kImplausible, it->second.explanation});
      }
    }
  }
  return out;
}

}  // namespace webvet
