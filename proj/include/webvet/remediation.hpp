#pragma once

// Self-correction loop for rejected rows (plan, lookup, apply, audit) and
// per-page discovery of additional data points.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "webvet/formula.hpp"
#include "webvet/gateway.hpp"
#include "webvet/prompts.hpp"
#include "webvet/retrieval.hpp"
#include "webvet/schema.hpp"
#include "webvet/search.hpp"
#include "webvet/single_flight.hpp"
#include "webvet/validators.hpp"

namespace webvet {

inline constexpr std::size_t kLookupBreadth = 3;

enum class RemediationStrategy { kDirectReplacement, kCalculation };

inline std::string_view to_string(RemediationStrategy s) {
  return s == RemediationStrategy::kDirectReplacement ? "DIRECT_REPLACEMENT" : "CALCULATION";
}

struct LookupSpec {
  std::string operand;
  std::string query;
};

struct RemediationPlan {
  RemediationStrategy strategy = RemediationStrategy::kDirectReplacement;
  std::vector<std::string> target_fields;
  std::map<std::string, std::string> replacements;
  std::string formula;
  std::vector<LookupSpec> lookups;
  std::string justification;
};

struct FactLookupResult {
  std::string operand;
  Decimal value;
  std::string source_url;
  std::string excerpt;
};

struct AuditVerdict {
  bool approved = false;
  std::string notes;
};

inline json to_json(const RemediationPlan& p) {
  json j{{"strategy", to_string(p.strategy)}, {"target_fields", p.target_fields}, {"justification", p.justification}};
  if (p.strategy == RemediationStrategy::kDirectReplacement) {
    j["replacements"] = p.replacements;
  } else {
    j["formula"] = p.formula;
    j["lookups"] = json::array();
    for (const auto& l : p.lookups) j["lookups"].push_back({{"operand", l.operand}, {"query", l.query}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// Plan

inline const ResponseShape& analyst_response_shape() {
  static const ResponseShape shape{{"strategy", ValueKind::kText},
                                   {"target_fields", ValueKind::kList, true},
                                   {"replacements", ValueKind::kObject, true},
                                   {"formula", ValueKind::kText, true},
                                   {"lookups", ValueKind::kList, true},
                                   {"justification", ValueKind::kText}};
  return shape;
}

namespace detail {

inline std::string json_scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    if (auto d = json_decimal(v)) return d->to_plain();
  }
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.is_null() ? std::string() : v.dump();
}

}  // namespace detail

/// Parses an analyst response and enforces the plan invariants. Strategy NONE
/// or any invariant violation throws PlanRejected.
inline RemediationPlan parse_plan(const json& v, const SchemaSpec& schema) {
  RemediationPlan p;
  std::string strategy = text::upper(text::trim(v.at("strategy").get<std::string>()));
  p.justification = v.at("justification").get<std::string>();
  if (strategy == "NONE" || strategy.empty()) throw PlanRejected("analyst found no supported correction");
  if (auto t = v.find("target_fields"); t != v.end())
    for (const auto& f : *t)
      if (f.is_string()) p.target_fields.push_back(f.get<std::string>());
  if (auto r = v.find("replacements"); r != v.end())
    for (const auto& [field, value] : r->items()) p.replacements[field] = detail::json_scalar_text(value);
  if (auto l = v.find("lookups"); l != v.end())
    for (const auto& e : *l) {
      if (!e.is_object()) throw PlanRejected("lookup entries must be objects");
      p.lookups.push_back({e.value("operand", std::string()), e.value("query", std::string())});
    }
  p.formula = v.value("formula", std::string());

  if (strategy == "DIRECT_REPLACEMENT") {
    p.strategy = RemediationStrategy::kDirectReplacement;
    if (p.replacements.empty()) throw PlanRejected("DIRECT_REPLACEMENT without replacements");
    if (!p.lookups.empty()) throw PlanRejected("DIRECT_REPLACEMENT must not request lookups");
    for (const auto& [field, value] : p.replacements)
      if (!schema.find(field)) throw PlanRejected("replacement for unknown field '" + field + "'");
    if (p.target_fields.empty())
      for (const auto& [field, value] : p.replacements) p.target_fields.push_back(field);
  } else if (strategy == "CALCULATION") {
    p.strategy = RemediationStrategy::kCalculation;
    if (p.target_fields.size() != 1) throw PlanRejected("CALCULATION needs exactly one target field");
    const FieldSpec* target = schema.find(p.target_fields[0]);
    if (!target || !target->is_numeric()) throw PlanRejected("CALCULATION target '" + p.target_fields[0] + "' is not numeric");
    if (text::trim(p.formula).empty()) throw PlanRejected("CALCULATION without formula");
    std::set<std::string> defined;
    for (const auto& l : p.lookups) {
      if (!is_valid_field_name(l.operand) || text::trim(l.query).empty())
        throw PlanRejected("lookup needs an operand name and a query");
      if (!defined.insert(l.operand).second) throw PlanRejected("operand '" + l.operand + "' defined twice");
    }
    std::set<std::string> used;
    try {
      used = formula_operands(p.formula);
    } catch (const FormulaError& e) {
      throw PlanRejected(std::string("invalid formula: ") + e.what());
    }
    for (const auto& name : used)
      if (!defined.count(name)) throw PlanRejected("formula operand '" + name + "' has no lookup");
  } else {
    throw PlanRejected("unknown strategy '" + strategy + "'");
  }
  return p;
}

inline std::string analyst_prompt(const DataPoint& dp, const Verdict& verdict, const PageContent& page,
                                  const SchemaSpec& schema, const std::string& fragment) {
  return text::render(prompts::kRemediationAnalyst, {{"record", describe_record(dp, schema)},
                                                     {"reasons", describe_reasons(verdict.reasons)},
                                                     {"notes", verdict.notes},
                                                     {"schema", describe_schema(schema)},
                                                     {"context", fragment},
                                                     {"url", page.final_url},
                                                     {"page", text::truncate_head_biased(page.markdown, kDefaultPageCharBudget)},
                                                     {"shape", describe_shape(analyst_response_shape())}});
}

/// One REMEDIATION_ANALYST call. Throws PlanRejected or ParseExhausted.
inline RemediationPlan plan_remediation(const DataPoint& dp, const Verdict& verdict, const PageContent& page,
                                        const SchemaSpec& schema, const std::string& fragment, Gateway& gateway) {
  auto r = gateway.complete_structured(AgentKind::kRemediationAnalyst, dp.row_id,
                                       analyst_prompt(dp, verdict, page, schema, fragment), analyst_response_shape());
  return parse_plan(r.value, schema);
}

// ---------------------------------------------------------------------------
// Lookup

inline const ResponseShape& lookup_response_shape() {
  static const ResponseShape shape{
      {"found", ValueKind::kBoolean}, {"value", ValueKind::kNumber, true}, {"excerpt", ValueKind::kText, true}};
  return shape;
}

/// Searches, then reads up to kLookupBreadth result pages until one yields the
/// figure. Throws LookupFailed when none does.
inline FactLookupResult lookup_fact(const LookupSpec& spec, SearchAdapter& search, PageFetcher& fetcher, Gateway& gateway) {
  if (text::trim(spec.query).empty()) throw LookupFailed("empty lookup query");
  auto urls = search.search(spec.query);
  std::size_t tried = 0;
  for (const auto& url : urls) {
    if (tried == kLookupBreadth) break;
    ++tried;
    PageContent page = fetcher.fetch(url);
    if (!page.usable()) continue;
    std::string prompt = text::render(prompts::kFactLookupExtract,
                                      {{"operand", spec.operand},
                                       {"query", spec.query},
                                       {"url", page.final_url},
                                       {"page", text::truncate_head_biased(page.markdown, kDefaultPageCharBudget)},
                                       {"shape", describe_shape(lookup_response_shape())}});
    try {
      auto r = gateway.complete_structured(AgentKind::kFactLookupExtract, page.final_url, prompt, lookup_response_shape());
      if (!r.value.at("found").get<bool>()) continue;
      auto value = r.value.contains("value") ? json_decimal(r.value["value"]) : std::nullopt;
      std::string excerpt = r.value.value("excerpt", std::string());
      if (!value || text::trim(excerpt).empty()) continue;
      return {spec.operand, *value, page.final_url, excerpt};
    } catch (const ParseExhausted&) {
      continue;
    }
  }
  throw LookupFailed("no value for '" + spec.operand + "' in " + std::to_string(tried) + " result page(s) for '" +
                     spec.query + "'");
}

// ---------------------------------------------------------------------------
// Apply

inline constexpr unsigned kFloatResultPlaces = 6;

/// Executes a plan. Only target fields change; they are coerced, the whole
/// record must then validate. Any failure throws ApplyFailed.
inline DataPoint apply_plan(const DataPoint& dp, const RemediationPlan& plan, const std::vector<FactLookupResult>& lookups,
                            const SchemaSpec& schema) {
  DataPoint out = dp;
  out.origin = Origin::kRemediated;
  try {
    if (plan.strategy == RemediationStrategy::kDirectReplacement) {
      for (const auto& [field, raw] : plan.replacements) {
        const FieldSpec* f = schema.find(field);
        if (!f) throw ApplyFailed("unknown field '" + field + "'");
        if (detail::trim(raw).empty()) {
          if (f->required) throw ApplyFailed("replacement empties required field '" + field + "'");
          out.values[field] = "";
        } else {
          out.values[field] = coerce_value(*f, raw);
        }
      }
    } else {
      std::map<std::string, Decimal> env;
      for (const auto& l : lookups) env[l.operand] = l.value;
      Decimal result = evaluate_formula(plan.formula, env);
      const FieldSpec* f = schema.find(plan.target_fields.at(0));
      if (!f) throw ApplyFailed("unknown target field");
      out.values[f->name] = f->type == FieldType::kInteger ? result.rounded(0).to_plain()
                                                          : coerce_value(*f, result.to_fixed(kFloatResultPlaces));
    }
  } catch (const UncoercibleValue& e) {
    throw ApplyFailed(e.what());
  } catch (const FormulaError& e) {
    throw ApplyFailed(e.what());
  }
  if (auto violations = validate_record(out, schema); !violations.empty())
    throw ApplyFailed("corrected record fails validation on '" + violations.front().field + "'");
  return out;
}

// ---------------------------------------------------------------------------
// Audit

inline const ResponseShape& audit_response_shape() {
  static const ResponseShape shape{{"approved", ValueKind::kBoolean}, {"notes", ValueKind::kText, true}};
  return shape;
}

inline std::string audit_prompt(const DataPoint& original, const DataPoint& corrected, const RemediationPlan& plan,
                                const std::vector<FactLookupResult>& lookups, const PageContent& page,
                                const SchemaSpec& schema) {
  std::string excerpts;
  for (const auto& l : lookups)
    excerpts += "- " + l.operand + " = " + l.value.to_plain() + " from " + l.source_url + ": \"" + l.excerpt + "\"\n";
  if (excerpts.empty()) excerpts = "(none)\n";
  json plan_json = to_json(plan);
  plan_json.erase("justification");
  return text::render(prompts::kRemediationAudit,
                      {{"original", describe_record(original, schema)},
                       {"corrected", describe_record(corrected, schema)},
                       {"plan", plan_json.dump(2)},
                       {"justification", plan.justification},
                       {"excerpts", excerpts},
                       {"url", page.final_url},
                       {"page", text::truncate_head_biased(page.markdown, kDefaultPageCharBudget)},
                       {"shape", describe_shape(audit_response_shape())}});
}

/// One REMEDIATION_AUDIT call. Unparseable responses are not approvals.
inline AuditVerdict audit_remediation(const DataPoint& original, const DataPoint& corrected, const RemediationPlan& plan,
                                      const std::vector<FactLookupResult>& lookups, const PageContent& page,
                                      const SchemaSpec& schema, Gateway& gateway) {
  try {
    auto r = gateway.complete_structured(AgentKind::kRemediationAudit, original.row_id,
                                         audit_prompt(original, corrected, plan, lookups, page, schema),
                                         audit_response_shape());
    AuditVerdict v{r.value.at("approved").get<bool>(), r.value.value("notes", std::string())};
    if (!v.approved && text::trim(v.notes).empty()) v.notes = "auditor rejected the correction without notes";
    return v;
  } catch (const ParseExhausted&) {
    return {false, "audit response unparseable"};
  }
}

// ---------------------------------------------------------------------------
// Discovery

inline const ResponseShape& discovery_response_shape() {
  static const ResponseShape shape{{"records", ValueKind::kList}};
  return shape;
}

struct DiscoveryResult {
  std::vector<DataPoint> records;
  std::vector<std::string> dropped;  // one diagnostic per rejected candidate
};

namespace detail {

/// Canonical view of a record for novelty checks; raw values where coercion fails.
inline std::vector<std::string> comparable_values(const DataPoint& dp, const SchemaSpec& schema) {
  std::vector<std::string> out;
  for (const auto& f : schema.fields) {
    std::string raw = dp.value(f.name);
    try {
      out.push_back(detail::trim(raw).empty() ? std::string() : coerce_value(f, raw));
    } catch (const UncoercibleValue&) {
      out.push_back(std::string(detail::trim(raw)));
    }
  }
  return out;
}

}  // namespace detail

/// One DISCOVERY call per page URL per run. Candidates must coerce, validate,
/// and differ from every known record. New rows are named `<base_row_id>-d<n>`.
class Discoverer {
 public:
  explicit Discoverer(Gateway& gateway) : gateway_(gateway) {}

  DiscoveryResult discover(const PageContent& page, const SchemaSpec& schema, const std::string& fragment,
                           const std::vector<DataPoint>& known, const std::string& base_row_id) {
    return cache_.get(page.url, [&] { return run(page, schema, fragment, known, base_row_id); });
  }

  bool attempted(const std::string& url) const { return cache_.contains(url); }

 private:
  DiscoveryResult run(const PageContent& page, const SchemaSpec& schema, const std::string& fragment,
                      const std::vector<DataPoint>& known, const std::string& base_row_id) {
    DiscoveryResult out;
    std::string known_text;
    std::set<std::vector<std::string>> known_keys;
    for (const auto& k : known) {
      known_keys.insert(detail::comparable_values(k, schema));
      json row = json::object();
      for (const auto& f : schema.fields) row[f.name] = k.value(f.name);
      if (k.source_url == page.url || k.source_url == page.final_url) known_text += row.dump() + "\n";
    }
    if (known_text.empty()) known_text = "(none)\n";
    std::string prompt = text::render(prompts::kDiscovery, {{"description", schema.dataset_description},
                                                            {"schema", describe_schema(schema)},
                                                            {"context", fragment},
                                                            {"known", known_text},
                                                            {"url", page.final_url},
                                                            {"page", text::truncate_head_biased(page.markdown, kDefaultPageCharBudget)},
                                                            {"shape", describe_shape(discovery_response_shape())}});
    json records;
    try {
      records = gateway_.complete_structured(AgentKind::kDiscovery, page.url, prompt, discovery_response_shape()).value.at("records");
    } catch (const ParseExhausted&) {
      out.dropped.push_back("discovery response unparseable");
      return out;
    }
    std::size_t n = 0;
    for (const auto& cand : records) {
      if (!cand.is_object()) {
        out.dropped.push_back("candidate is not an object");
        continue;
      }
      DataPoint dp;
      dp.source_url = page.url;
      dp.origin = Origin::kDiscovered;
      for (const auto& f : schema.fields)
        if (auto it = cand.find(f.name); it != cand.end()) dp.values[f.name] = detail::json_scalar_text(*it);
      try {
        dp = coerce_record(dp, schema);
      } catch (const UncoercibleValue& e) {
        out.dropped.push_back(std::string("candidate fails coercion: ") + e.what());
        continue;
      }
      if (!validate_record(dp, schema).empty()) {
        out.dropped.push_back("candidate fails validation");
        continue;
      }
      auto key = detail::comparable_values(dp, schema);
      if (!known_keys.insert(key).second) {
        out.dropped.push_back("candidate repeats a known record");
        continue;
      }
      dp.row_id = base_row_id + "-d" + std::to_string(++n);
      out.records.push_back(std::move(dp));
    }
    return out;
  }

  Gateway& gateway_;
  SingleFlight<std::string, DiscoveryResult> cache_;
};

}  // namespace webvet
