#pragma once

// Dynamic schema model, typed records, and the value coercion used by the
// formatter stage.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "webvet/dates.hpp"
#include "webvet/decimal.hpp"
#include "webvet/errors.hpp"

namespace webvet {

enum class FieldType { kText, kInteger, kFloat, kDate };

inline std::string_view to_string(FieldType t) {
  switch (t) {
    case FieldType::kText: return "text";
    case FieldType::kInteger: return "int";
    case FieldType::kFloat: return "float";
    case FieldType::kDate: return "date";
  }
  return "text";
}

inline std::optional<FieldType> parse_field_type(std::string_view s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "text") return FieldType::kText;
  if (lower == "int") return FieldType::kInteger;
  if (lower == "float") return FieldType::kFloat;
  if (lower == "date") return FieldType::kDate;
  return std::nullopt;
}

struct FieldSpec {
  std::string name;
  FieldType type = FieldType::kText;
  bool required = true;

  bool is_numeric() const { return type == FieldType::kInteger || type == FieldType::kFloat; }
  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

struct SchemaSpec {
  std::vector<FieldSpec> fields;
  std::string dataset_description;

  const FieldSpec* find(std::string_view name) const {
    for (const auto& f : fields)
      if (f.name == name) return &f;
    return nullptr;
  }

  /// The field used for date-aware deduplication: the DATE field named
  /// "date" if there is one, else the first DATE field.
  const FieldSpec* date_field() const {
    if (const FieldSpec* f = find("date"); f && f->type == FieldType::kDate) return f;
    for (const auto& f : fields)
      if (f.type == FieldType::kDate) return &f;
    return nullptr;
  }

  std::vector<std::string> field_names() const {
    std::vector<std::string> out;
    for (const auto& f : fields) out.push_back(f.name);
    return out;
  }

  friend bool operator==(const SchemaSpec&, const SchemaSpec&) = default;
};

enum class Origin { kInitial, kRemediated, kDiscovered };

inline std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::kInitial: return "INITIAL";
    case Origin::kRemediated: return "REMEDIATED";
    case Origin::kDiscovered: return "DISCOVERED";
  }
  return "INITIAL";
}

/// One row of the dataset. `values` holds schema fields only; any other input
/// columns ride along in `passthrough`, in input column order.
struct DataPoint {
  std::string row_id;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, std::string>> passthrough;
  std::string source_url;
  Origin origin = Origin::kInitial;

  std::string value(const std::string& field) const {
    auto it = values.find(field);
    return it == values.end() ? std::string() : it->second;
  }

  friend bool operator==(const DataPoint&, const DataPoint&) = default;
};

enum class ViolationKind { kMissing, kTypeMismatch };

struct Violation {
  std::string field;
  ViolationKind kind;
  friend bool operator==(const Violation&, const Violation&) = default;
};

// ---------------------------------------------------------------------------
// Value parsing

namespace detail {

inline std::string trim_copy(std::string_view s) { return std::string(detail::trim(s)); }

// Strips surrounding whitespace and well-formed thousands separators.
inline std::optional<std::string> strip_number(std::string_view raw) {
  std::string_view s = detail::trim(raw);
  if (s.empty()) return std::nullopt;
  if (s.find(',') == std::string_view::npos) return std::string(s);
  std::string_view sign;
  if (s.front() == '+' || s.front() == '-') {
    sign = s.substr(0, 1);
    s.remove_prefix(1);
  }
  auto dot = s.find('.');
  std::string_view int_part = s.substr(0, dot);
  std::string_view rest = dot == std::string_view::npos ? std::string_view() : s.substr(dot);
  if (rest.find(',') != std::string_view::npos) return std::nullopt;
  std::string digits;
  bool first = true;
  std::size_t start = 0;
  while (true) {
    auto comma = int_part.find(',', start);
    auto chunk = int_part.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (first ? (chunk.empty() || chunk.size() > 3) : chunk.size() != 3) return std::nullopt;
    if (!all_digits(chunk)) return std::nullopt;
    digits += chunk;
    first = false;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return std::string(sign) + digits + std::string(rest);
}

}  // namespace detail

/// Canonical integer text ("1200") or nullopt. Accepts sign, digits and
/// grouped thousands separators; no decimal point.
inline std::optional<std::string> parse_integer(std::string_view raw) {
  auto s = detail::strip_number(raw);
  if (!s) return std::nullopt;
  std::string_view v = *s;
  bool negative = false;
  if (!v.empty() && (v.front() == '+' || v.front() == '-')) {
    negative = v.front() == '-';
    v.remove_prefix(1);
  }
  if (!detail::all_digits(v)) return std::nullopt;
  while (v.size() > 1 && v.front() == '0') v.remove_prefix(1);
  if (v.size() > 18) return std::nullopt;
  if (v == "0") negative = false;
  return (negative ? "-" : "") + std::string(v);
}

/// Canonical decimal text ("1200.5") or nullopt.
inline std::optional<std::string> parse_float(std::string_view raw) {
  auto s = detail::strip_number(raw);
  if (!s) return std::nullopt;
  auto d = Decimal::parse(*s);
  if (!d) return std::nullopt;
  return d->to_plain(12);
}

inline bool parses_as(FieldType t, std::string_view raw) {
  switch (t) {
    case FieldType::kText: return true;
    case FieldType::kInteger: return parse_integer(raw).has_value();
    case FieldType::kFloat: return parse_float(raw).has_value();
    case FieldType::kDate: return detail::try_normalize_date(raw).has_value();
  }
  return false;
}

// ---------------------------------------------------------------------------
// Schema generation

inline bool is_valid_field_name(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

struct FieldAnnotation {
  std::string name;
  std::optional<FieldType> type;
};

/// Parses one "name" or "name:type" item.
inline FieldAnnotation parse_field_annotation(std::string_view item) {
  std::string_view s = detail::trim(item);
  FieldAnnotation a;
  auto colon = s.find(':');
  a.name = std::string(detail::trim(s.substr(0, colon)));
  if (!is_valid_field_name(a.name))
    throw SchemaError(a.name.empty() ? "empty field name in schema" : "invalid field name '" + a.name + "'");
  if (colon != std::string_view::npos) {
    auto type_text = detail::trim(s.substr(colon + 1));
    a.type = parse_field_type(type_text);
    if (!a.type) throw SchemaError("unknown type '" + std::string(type_text) + "' for field '" + a.name + "'");
  }
  return a;
}

/// Splits the comma-separated annotation grammar: `name[:type](,name[:type])*`.
inline std::vector<std::string> split_schema_annotation(std::string_view text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (true) {
    auto comma = text.find(',', start);
    items.emplace_back(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

/// Deterministic type inference from sample values: all integers, else all
/// decimals, else all dates, else text. No non-empty samples means text.
inline FieldType infer_field_type(const std::vector<std::string>& samples) {
  std::vector<std::string_view> present;
  for (const auto& s : samples)
    if (!detail::trim(s).empty()) present.push_back(s);
  if (present.empty()) return FieldType::kText;
  auto all = [&](FieldType t) {
    return std::all_of(present.begin(), present.end(), [t](std::string_view v) { return parses_as(t, v); });
  };
  if (all(FieldType::kInteger)) return FieldType::kInteger;
  if (all(FieldType::kFloat)) return FieldType::kFloat;
  if (all(FieldType::kDate)) return FieldType::kDate;
  return FieldType::kText;
}

using RawRecord = std::map<std::string, std::string>;

/// Builds the schema all stages adhere to. Explicit annotations win; a field
/// named "date" defaults to DATE; everything else is inferred from samples.
inline SchemaSpec generate_schema(const std::vector<std::string>& field_specs, const std::vector<RawRecord>& sample_rows,
                                  std::string dataset_description = {}) {
  if (field_specs.empty()) throw SchemaError("schema has no fields");
  SchemaSpec schema;
  schema.dataset_description = std::move(dataset_description);
  std::set<std::string> seen;
  for (const auto& spec : field_specs) {
    auto a = parse_field_annotation(spec);
    if (!seen.insert(a.name).second) throw SchemaError("duplicate field name '" + a.name + "'");
    FieldSpec f{a.name, FieldType::kText, true};
    if (a.type) {
      f.type = *a.type;
    } else if (a.name == "date") {
      f.type = FieldType::kDate;
    } else {
      std::vector<std::string> samples;
      for (const auto& row : sample_rows)
        if (auto it = row.find(a.name); it != row.end()) samples.push_back(it->second);
      f.type = infer_field_type(samples);
    }
    schema.fields.push_back(std::move(f));
  }
  return schema;
}

inline SchemaSpec generate_schema(std::string_view annotation, const std::vector<RawRecord>& sample_rows,
                                  std::string dataset_description = {}) {
  return generate_schema(split_schema_annotation(annotation), sample_rows, std::move(dataset_description));
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json to_json(const SchemaSpec& s) {
  nlohmann::ordered_json j;
  j["dataset_description"] = s.dataset_description;
  j["fields"] = nlohmann::ordered_json::array();
  for (const auto& f : s.fields)
    j["fields"].push_back({{"name", f.name}, {"type", std::string(to_string(f.type))}, {"required", f.required}});
  return j;
}

inline SchemaSpec schema_from_json(const nlohmann::json& j) {
  SchemaSpec s;
  s.dataset_description = j.value("dataset_description", "");
  std::set<std::string> seen;
  for (const auto& jf : j.at("fields")) {
    FieldSpec f;
    f.name = jf.at("name").get<std::string>();
    if (!is_valid_field_name(f.name)) throw SchemaError("invalid field name '" + f.name + "'");
    if (!seen.insert(f.name).second) throw SchemaError("duplicate field name '" + f.name + "'");
    auto t = parse_field_type(jf.at("type").get<std::string>());
    if (!t) throw SchemaError("unknown type for field '" + f.name + "'");
    f.type = *t;
    f.required = jf.value("required", true);
    s.fields.push_back(std::move(f));
  }
  if (s.fields.empty()) throw SchemaError("schema has no fields");
  return s;
}

// ---------------------------------------------------------------------------
// Validation and coercion

/// Empty result means the record is structurally consistent with the schema.
inline std::vector<Violation> validate_record(const DataPoint& dp, const SchemaSpec& schema) {
  std::vector<Violation> out;
  for (const auto& f : schema.fields) {
    auto it = dp.values.find(f.name);
    bool empty = it == dp.values.end() || detail::trim(it->second).empty();
    if (empty) {
      if (f.required) out.push_back({f.name, ViolationKind::kMissing});
      continue;
    }
    if (!parses_as(f.type, it->second)) out.push_back({f.name, ViolationKind::kTypeMismatch});
  }
  return out;
}

/// Canonical form of one value; throws UncoercibleValue.
inline std::string coerce_value(const FieldSpec& f, std::string_view raw) {
  std::optional<std::string> out;
  switch (f.type) {
    case FieldType::kText: out = detail::trim_copy(raw); break;
    case FieldType::kInteger: out = parse_integer(raw); break;
    case FieldType::kFloat: out = parse_float(raw); break;
    case FieldType::kDate:
      if (auto d = detail::try_normalize_date(raw)) out = d->canonical;
      break;
  }
  if (!out) throw UncoercibleValue(f.name, std::string(raw));
  return *out;
}

/// The formatter: numbers to canonical numerals, dates to ISO at native
/// precision, text trimmed. Idempotent. Empty required fields are uncoercible.
inline DataPoint coerce_record(const DataPoint& dp, const SchemaSpec& schema) {
  DataPoint out = dp;
  for (const auto& f : schema.fields) {
    auto it = out.values.find(f.name);
    bool empty = it == out.values.end() || detail::trim(it->second).empty();
    if (empty) {
      if (f.required) throw UncoercibleValue(f.name, it == out.values.end() ? std::string() : it->second);
      out.values[f.name] = "";
      continue;
    }
    it->second = coerce_value(f, it->second);
  }
  return out;
}


// ---------------------------------------------------------------------------
// Prompt-facing renderings

/// "- name (type, required)" per line, in schema order.
inline std::string describe_schema(const SchemaSpec& schema) {
  std::string out;
  for (const auto& f : schema.fields) {
    out += "- " + f.name + " (" + std::string(to_string(f.type)) + (f.required ? ", required" : ", optional");
    if (f.type == FieldType::kDate) out += ", YYYY-MM-DD, YYYY-MM or YYYY";
    out += ")\n";
  }
  return out;
}

/// "field: value" per schema field, then the source URL.
inline std::string describe_record(const DataPoint& dp, const SchemaSpec& schema) {
  std::string out;
  for (const auto& f : schema.fields) out += f.name + ": " + dp.value(f.name) + "\n";
  if (!dp.source_url.empty()) out += "source_url: " + dp.source_url + "\n";
  return out;
}

}  // namespace webvet
