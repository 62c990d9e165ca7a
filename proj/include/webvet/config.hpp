#pragma once

// Run configuration: what to validate, how, and with which services.
// Credentials are never part of a config; only the name of the environment
// variable that holds them is.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "webvet/errors.hpp"
#include "webvet/structured.hpp"
#include "webvet/text.hpp"

namespace webvet {

enum class RunMode { kCommittee, kMonolith, kRules };

inline std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::kCommittee: return "COMMITTEE";
    case RunMode::kMonolith: return "MONOLITH";
    case RunMode::kRules: return "RULES";
  }
  return "COMMITTEE";
}

inline RunMode parse_run_mode(std::string_view s) {
  std::string u = text::upper(text::trim(s));
  if (u == "COMMITTEE") return RunMode::kCommittee;
  if (u == "MONOLITH") return RunMode::kMonolith;
  if (u == "RULES") return RunMode::kRules;
  throw Error("unknown mode '" + std::string(s) + "' (expected committee, monolith or rules)");
}

struct AgentToggles {
  bool relevancy = true;
  bool layout = true;
  bool source_scrutiny = true;
  bool fact_check = true;
  bool context = true;
  bool context_examples = true;
  bool remediation = true;
  bool discovery = true;
  bool integrity = true;
  bool formatter = true;

  friend bool operator==(const AgentToggles&, const AgentToggles&) = default;
};

inline const std::vector<std::pair<std::string, bool AgentToggles::*>>& toggle_fields() {
  static const std::vector<std::pair<std::string, bool AgentToggles::*>> fields{
      {"relevancy", &AgentToggles::relevancy},
      {"layout", &AgentToggles::layout},
      {"source_scrutiny", &AgentToggles::source_scrutiny},
      {"fact_check", &AgentToggles::fact_check},
      {"context", &AgentToggles::context},
      {"context_examples", &AgentToggles::context_examples},
      {"remediation", &AgentToggles::remediation},
      {"discovery", &AgentToggles::discovery},
      {"integrity", &AgentToggles::integrity},
      {"formatter", &AgentToggles::formatter}};
  return fields;
}

inline bool& toggle_ref(AgentToggles& t, std::string_view name) {
  for (const auto& [n, member] : toggle_fields())
    if (n == name) return t.*member;
  throw Error("unknown agent toggle '" + std::string(name) + "'");
}

struct ProviderSettings {
  std::string kind = "scripted";  // scripted | openai
  std::string model;              // empty: provider default
  std::string endpoint;           // openai: base URL
  std::string script;             // scripted: fixture path
  std::string credential_env = "OPENAI_API_KEY";

  friend bool operator==(const ProviderSettings&, const ProviderSettings&) = default;
};

struct SearchSettings {
  std::string kind = "none";  // none | fixture | http
  std::string source;         // fixture path or URL template with {query}
  std::string credential_env;

  friend bool operator==(const SearchSettings&, const SearchSettings&) = default;
};

struct RunConfig {
  std::string label = "run";
  std::string schema;  // annotation, e.g. "name, date, deaths:int"
  std::string description;
  std::uint64_t seed = 7;
  int parallelism = 4;
  int max_in_flight = 8;
  RunMode mode = RunMode::kCommittee;
  AgentToggles toggles;
  bool minimal_fact_check = false;  // fact-check prompt without audit principles and context
  bool context_samples = true;      // false: context generated from the description alone
  std::string url_column = "source_url";
  std::string id_column = "row_id";
  ProviderSettings provider;
  SearchSettings search;
  std::string pricing;   // pricing file; empty uses built-in rates
  std::string rulepack;  // RULES mode; empty uses the generic pack
  std::string replay;    // page snapshot directory to replay instead of fetching
  int politeness_ms = 1000;
  std::map<std::string, std::string> host_overrides;  // host -> "ip:port"

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline json to_json(const RunConfig& c) {
  json toggles = json::object();
  for (const auto& [name, member] : toggle_fields()) toggles[name] = c.toggles.*member;
  return {{"label", c.label},
          {"schema", c.schema},
          {"description", c.description},
          {"seed", c.seed},
          {"parallelism", c.parallelism},
          {"max_in_flight", c.max_in_flight},
          {"mode", to_string(c.mode)},
          {"toggles", toggles},
          {"minimal_fact_check", c.minimal_fact_check},
          {"context_samples", c.context_samples},
          {"url_column", c.url_column},
          {"id_column", c.id_column},
          {"provider",
           {{"kind", c.provider.kind},
            {"model", c.provider.model},
            {"endpoint", c.provider.endpoint},
            {"script", c.provider.script},
            {"credential_env", c.provider.credential_env}}},
          {"search", {{"kind", c.search.kind}, {"source", c.search.source}, {"credential_env", c.search.credential_env}}},
          {"pricing", c.pricing},
          {"rulepack", c.rulepack},
          {"replay", c.replay},
          {"politeness_ms", c.politeness_ms},
          {"host_overrides", c.host_overrides}};
}

/// Reads a config document over `base`; absent keys keep their base values.
/// Unknown keys are errors so typos do not silently change a run.
inline RunConfig config_from_json(const json& j, RunConfig base = {}) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  RunConfig c = std::move(base);
  auto str = [](const json& v, const std::string& key) {
    if (!v.is_string()) throw Error("config '" + key + "' must be a string");
    return v.get<std::string>();
  };
  auto integer = [](const json& v, const std::string& key) {
    if (!v.is_number_integer()) throw Error("config '" + key + "' must be an integer");
    return v.get<long long>();
  };
  auto boolean = [](const json& v, const std::string& key) {
    if (!v.is_boolean()) throw Error("config '" + key + "' must be true or false");
    return v.get<bool>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "label") c.label = str(v, key);
    else if (key == "schema") c.schema = str(v, key);
    else if (key == "description") c.description = str(v, key);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(integer(v, key));
    else if (key == "parallelism") c.parallelism = static_cast<int>(integer(v, key));
    else if (key == "max_in_flight") c.max_in_flight = static_cast<int>(integer(v, key));
    else if (key == "mode") c.mode = parse_run_mode(str(v, key));
    else if (key == "minimal_fact_check") c.minimal_fact_check = boolean(v, key);
    else if (key == "context_samples") c.context_samples = boolean(v, key);
    else if (key == "url_column") c.url_column = str(v, key);
    else if (key == "id_column") c.id_column = str(v, key);
    else if (key == "pricing") c.pricing = str(v, key);
    else if (key == "rulepack") c.rulepack = str(v, key);
    else if (key == "replay") c.replay = str(v, key);
    else if (key == "politeness_ms") c.politeness_ms = static_cast<int>(integer(v, key));
    else if (key == "toggles") {
      if (!v.is_object()) throw Error("config 'toggles' must be an object");
      for (const auto& [name, on] : v.items()) toggle_ref(c.toggles, name) = boolean(on, "toggles." + name);
    } else if (key == "disable") {
      if (!v.is_array()) throw Error("config 'disable' must be a list");
      for (const auto& name : v) toggle_ref(c.toggles, str(name, "disable")) = false;
    } else if (key == "provider") {
      if (!v.is_object()) throw Error("config 'provider' must be an object");
      for (const auto& [pk, pv] : v.items()) {
        if (pk == "kind") c.provider.kind = str(pv, "provider.kind");
        else if (pk == "model") c.provider.model = str(pv, "provider.model");
        else if (pk == "endpoint") c.provider.endpoint = str(pv, "provider.endpoint");
        else if (pk == "script") c.provider.script = str(pv, "provider.script");
        else if (pk == "credential_env") c.provider.credential_env = str(pv, "provider.credential_env");
        else throw Error("unknown config key 'provider." + pk + "'");
      }
    } else if (key == "search") {
      if (!v.is_object()) throw Error("config 'search' must be an object");
      for (const auto& [sk, sv] : v.items()) {
        if (sk == "kind") c.search.kind = str(sv, "search.kind");
        else if (sk == "source") c.search.source = str(sv, "search.source");
        else if (sk == "credential_env") c.search.credential_env = str(sv, "search.credential_env");
        else throw Error("unknown config key 'search." + sk + "'");
      }
    } else if (key == "host_overrides") {
      if (!v.is_object()) throw Error("config 'host_overrides' must be an object");
      for (const auto& [host, target] : v.items()) c.host_overrides[host] = str(target, "host_overrides." + host);
    } else {
      throw Error("unknown config key '" + key + "'");
    }
  }
  if (c.parallelism < 1) throw Error("parallelism must be at least 1");
  if (c.max_in_flight < 1 || c.max_in_flight > 1024) throw Error("max_in_flight must be in [1, 1024]");
  if (c.politeness_ms < 0) throw Error("politeness_ms must not be negative");
  if (c.provider.kind != "scripted" && c.provider.kind != "openai")
    throw Error("unknown provider kind '" + c.provider.kind + "'");
  if (c.search.kind != "none" && c.search.kind != "fixture" && c.search.kind != "http")
    throw Error("unknown search kind '" + c.search.kind + "'");
  return c;
}

/// Named ablation and baseline configurations, applied on top of `base`.
inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{
      "full",          "no-factcheck", "no-context",     "no-ctxexamples", "rem-only",      "no-integrity",
      "no-srcscrutiny", "no-ctxlearning", "no-remediation", "no-layout",     "discovery-only", "min-factcheck",
      "no-relevancy",  "no-formatter", "monolith",       "rules"};
  return names;
}

inline RunConfig apply_preset(RunConfig c, std::string_view name) {
  std::string n = text::lower(name);
  c.label = n;
  if (n == "full") return c;
  if (n == "no-factcheck") c.toggles.fact_check = false;
  else if (n == "no-context") c.toggles.context = false;
  else if (n == "no-ctxexamples") c.toggles.context_examples = false;
  else if (n == "rem-only") c.toggles.discovery = false;
  else if (n == "no-integrity") c.toggles.integrity = false;
  else if (n == "no-srcscrutiny") c.toggles.source_scrutiny = false;
  else if (n == "no-ctxlearning") c.context_samples = false;
  else if (n == "no-remediation") c.toggles.remediation = false;
  else if (n == "no-layout") c.toggles.layout = false;
  else if (n == "discovery-only") c.toggles.remediation = false;
  else if (n == "min-factcheck") c.minimal_fact_check = true;
  else if (n == "no-relevancy") c.toggles.relevancy = false;
  else if (n == "no-formatter") c.toggles.formatter = false;
  else if (n == "monolith") c.mode = RunMode::kMonolith;
  else if (n == "rules") c.mode = RunMode::kRules;
  else throw Error("unknown preset '" + std::string(name) + "'");
  return c;
}

}  // namespace webvet
