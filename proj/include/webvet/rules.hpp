#pragma once

// Rule-based baseline: declarative per-field checks with no model calls and
// no fetching.
//
// Rulepack document:
//   {"fields": {"<name>": {"pattern": "<ECMAScript regex>", "min": n, "max": n,
//                          "allowed": ["..."], "max_length": n}},
//    "url": {"pattern": "<regex>", "blocked_domains": ["example.com"]}}

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "webvet/decimal.hpp"
#include "webvet/errors.hpp"
#include "webvet/schema.hpp"
#include "webvet/structured.hpp"
#include "webvet/url.hpp"

namespace webvet {

struct FieldRule {
  std::optional<std::string> pattern_text;
  std::optional<std::regex> pattern;
  std::optional<Decimal> min;
  std::optional<Decimal> max;
  std::vector<std::string> allowed;
  std::optional<std::size_t> max_length;
};

struct Rulepack {
  std::map<std::string, FieldRule> fields;
  std::optional<std::regex> url_pattern;
  std::vector<std::string> blocked_domains;
};

/// The generic pack: schema types, required fields, parseable http(s) source
/// URLs and a sanity bound on text length.
inline Rulepack default_rulepack(const SchemaSpec& schema) {
  Rulepack p;
  for (const auto& f : schema.fields)
    if (f.type == FieldType::kText) p.fields[f.name].max_length = 500;
  return p;
}

inline Rulepack rulepack_from_json(const json& j, const SchemaSpec& schema) {
  if (!j.is_object()) throw RulepackError("rulepack must be a JSON object");
  Rulepack p = default_rulepack(schema);
  auto regex = [](const json& v, const std::string& where) {
    if (!v.is_string()) throw RulepackError(where + ": pattern must be a string");
    try {
      return std::regex(v.get<std::string>(), std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw RulepackError(where + ": invalid pattern: " + e.what());
    }
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "fields") {
      if (!v.is_object()) throw RulepackError("'fields' must be an object");
      for (const auto& [name, spec] : v.items()) {
        const FieldSpec* f = schema.find(name);
        if (!f) throw RulepackError("rule for unknown field '" + name + "'");
        if (!spec.is_object()) throw RulepackError("fields." + name + " must be an object");
        FieldRule& r = p.fields[name];
        for (const auto& [rk, rv] : spec.items()) {
          std::string where = "fields." + name + "." + rk;
          if (rk == "pattern") {
            r.pattern = regex(rv, where);
            r.pattern_text = rv.get<std::string>();
          } else if (rk == "min" || rk == "max") {
            if (!f->is_numeric()) throw RulepackError(where + ": range on a non-numeric field");
            auto d = json_decimal(rv);
            if (!d) throw RulepackError(where + " must be a number");
            (rk == "min" ? r.min : r.max) = *d;
          } else if (rk == "allowed") {
            if (!rv.is_array()) throw RulepackError(where + " must be a list");
            for (const auto& a : rv) {
              if (!a.is_string()) throw RulepackError(where + " entries must be strings");
              r.allowed.push_back(a.get<std::string>());
            }
          } else if (rk == "max_length") {
            if (!rv.is_number_unsigned()) throw RulepackError(where + " must be a non-negative integer");
            r.max_length = rv.get<std::size_t>();
          } else {
            throw RulepackError("unknown rule '" + where + "'");
          }
        }
      }
    } else if (key == "url") {
      if (!v.is_object()) throw RulepackError("'url' must be an object");
      for (const auto& [uk, uv] : v.items()) {
        if (uk == "pattern") p.url_pattern = regex(uv, "url.pattern");
        else if (uk == "blocked_domains") {
          if (!uv.is_array()) throw RulepackError("url.blocked_domains must be a list");
          for (const auto& d : uv) p.blocked_domains.push_back(text::lower(d.get<std::string>()));
        } else throw RulepackError("unknown rule 'url." + uk + "'");
      }
    } else {
      throw RulepackError("unknown rulepack key '" + key + "'");
    }
  }
  return p;
}

inline Rulepack load_rulepack(const std::string& path, const SchemaSpec& schema) {
  std::ifstream in(path);
  if (!in) throw RulepackError("cannot open rulepack " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw RulepackError("rulepack " + path + " is not valid JSON");
  return rulepack_from_json(j, schema);
}

struct RuleOutcome {
  std::vector<std::string> failures;  // empty: accepted
  DataPoint record;                   // coerced when accepted
};

/// Coerces the row and applies every rule; all failures are reported.
inline RuleOutcome apply_rules(const DataPoint& dp, const SchemaSpec& schema, const Rulepack& pack) {
  RuleOutcome out{{}, dp};
  auto url = parse_url(dp.source_url);
  if (!url) {
    out.failures.push_back("source_url: not an http(s) URL");
  } else {
    std::string host = text::lower(url->host);
    for (const auto& d : pack.blocked_domains)
      if (host == d || (host.size() > d.size() && host.ends_with("." + d))) out.failures.push_back("source_url: blocked domain " + d);
    if (pack.url_pattern && !std::regex_search(dp.source_url, *pack.url_pattern))
      out.failures.push_back("source_url: fails pattern");
  }
  for (const auto& f : schema.fields) {
    std::string raw(detail::trim(dp.value(f.name)));
    if (raw.empty()) {
      if (f.required) out.failures.push_back(f.name + ": missing");
      continue;
    }
    std::string canonical;
    try {
      canonical = coerce_value(f, raw);
    } catch (const UncoercibleValue&) {
      out.failures.push_back(f.name + ": not a valid " + std::string(to_string(f.type)));
      continue;
    }
    out.record.values[f.name] = canonical;
    auto it = pack.fields.find(f.name);
    if (it == pack.fields.end()) continue;
    const FieldRule& r = it->second;
    if (r.pattern && !std::regex_search(raw, *r.pattern)) out.failures.push_back(f.name + ": fails pattern " + *r.pattern_text);
    if (r.max_length && raw.size() > *r.max_length) out.failures.push_back(f.name + ": longer than " + std::to_string(*r.max_length));
    if (!r.allowed.empty() && std::find(r.allowed.begin(), r.allowed.end(), canonical) == r.allowed.end())
      out.failures.push_back(f.name + ": value not in allowed list");
    if (r.min || r.max) {
      auto v = Decimal::parse(canonical);
      if (v && r.min && *v < *r.min) out.failures.push_back(f.name + ": below minimum");
      if (v && r.max && *v > *r.max) out.failures.push_back(f.name + ": above maximum");
    }
  }
  return out;
}

}  // namespace webvet
