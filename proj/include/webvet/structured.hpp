#pragma once

// Tolerant extraction of a machine-readable block from free-form model output,
// and validation of that block against a declared response shape.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "webvet/decimal.hpp"
#include "webvet/schema.hpp"
#include "webvet/text.hpp"

namespace webvet {

using json = nlohmann::json;

enum class ValueKind { kBoolean, kText, kNumber, kList, kObject };

inline std::string_view to_string(ValueKind k) {
  switch (k) {
    case ValueKind::kBoolean: return "boolean";
    case ValueKind::kText: return "text";
    case ValueKind::kNumber: return "number";
    case ValueKind::kList: return "list";
    case ValueKind::kObject: return "object";
  }
  return "text";
}

struct FieldDescriptor {
  std::string name;
  ValueKind kind;
  bool optional = false;  // may be absent or null
};

using ResponseShape = std::vector<FieldDescriptor>;

namespace detail {

inline std::vector<std::string_view> fenced_blocks(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while ((pos = text.find("```", pos)) != std::string_view::npos) {
    auto body = text.find('\n', pos + 3);
    if (body == std::string_view::npos) break;
    auto close = text.find("```", body + 1);
    if (close == std::string_view::npos) break;
    out.push_back(text.substr(body + 1, close - body - 1));
    pos = close + 3;
  }
  return out;
}

// Finds the balanced {...} starting at `open`, respecting string literals.
inline std::optional<std::string_view> balanced_object(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escape = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escape) escape = false;
      else if (c == '\\') escape = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return text.substr(open, i - open + 1);
  }
  return std::nullopt;
}

inline std::optional<json> parse_object(std::string_view s) {
  auto j = json::parse(s, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

}  // namespace detail

/// Returns the first well-formed JSON object found in `text`: fenced blocks
/// first, then the whole text, then the first balanced brace span.
inline std::optional<json> extract_json_block(std::string_view text) {
  for (auto block : detail::fenced_blocks(text))
    if (auto j = detail::parse_object(text::trim(block))) return j;
  if (auto j = detail::parse_object(text::trim(text))) return j;
  for (std::size_t open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
    if (auto span = detail::balanced_object(text, open))
      if (auto j = detail::parse_object(*span)) return j;
  }
  return std::nullopt;
}

/// Numeric value from a JSON number or a numeric string ("4,000,000").
inline std::optional<Decimal> json_decimal(const json& j) {
  if (j.is_number_integer()) return Decimal(j.get<std::int64_t>());
  if (j.is_number()) return Decimal::parse(j.dump());
  if (j.is_string()) {
    auto s = detail::strip_number(j.get<std::string>());
    if (!s) return std::nullopt;
    return Decimal::parse(*s);
  }
  return std::nullopt;
}

/// Checks `obj` against `shape`, normalizing lenient spellings in place
/// ("true" -> true, 12 -> "12" for text). Returns an error message or nullopt.
inline std::optional<std::string> conform_to_shape(json& obj, const ResponseShape& shape) {
  for (const auto& field : shape) {
    auto it = obj.find(field.name);
    if (it == obj.end() || it->is_null()) {
      if (field.optional) continue;
      return "missing required field '" + field.name + "' (" + std::string(to_string(field.kind)) + ")";
    }
    json& v = *it;
    bool ok = false;
    switch (field.kind) {
      case ValueKind::kBoolean:
        if (v.is_boolean()) {
          ok = true;
        } else if (v.is_string()) {
          auto s = text::lower(text::trim(v.get<std::string>()));
          if (s == "true" || s == "yes") v = true, ok = true;
          else if (s == "false" || s == "no") v = false, ok = true;
        }
        break;
      case ValueKind::kText:
        if (v.is_string()) ok = true;
        else if (v.is_number() || v.is_boolean()) v = v.dump(), ok = true;
        break;
      case ValueKind::kNumber: ok = json_decimal(v).has_value(); break;
      case ValueKind::kList: ok = v.is_array(); break;
      case ValueKind::kObject: ok = v.is_object(); break;
    }
    if (!ok)
      return "field '" + field.name + "' must be " + std::string(to_string(field.kind)) + ", got " + v.dump();
  }
  return std::nullopt;
}

/// Human-readable description of a shape, embedded in prompts and repair requests.
inline std::string describe_shape(const ResponseShape& shape) {
  std::string out = "{";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += "\"" + shape[i].name + "\": <" + std::string(to_string(shape[i].kind)) + (shape[i].optional ? " or null" : "") + ">";
  }
  out += "}";
  return out;
}

}  // namespace webvet
