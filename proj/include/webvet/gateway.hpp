#pragma once

// Single choke point for every model call: structured-response parsing with
// bounded repair retries, usage accounting, and cost estimation.

#include <array>
#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "webvet/decimal.hpp"
#include "webvet/errors.hpp"
#include "webvet/structured.hpp"
#include "webvet/text.hpp"

namespace webvet {

enum class AgentKind {
  kContextGenerator,
  kRelevancy,
  kLayout,
  kSourceScrutiny,
  kFactCheck,
  kRemediationAnalyst,
  kFactLookupExtract,
  kRemediationAudit,
  kDiscovery,
  kIntegrity,
  kMonolith,
};

inline constexpr std::array<AgentKind, 11> kAllAgentKinds{
    AgentKind::kContextGenerator,   AgentKind::kRelevancy,         AgentKind::kLayout,
    AgentKind::kSourceScrutiny,     AgentKind::kFactCheck,         AgentKind::kRemediationAnalyst,
    AgentKind::kFactLookupExtract,  AgentKind::kRemediationAudit,  AgentKind::kDiscovery,
    AgentKind::kIntegrity,          AgentKind::kMonolith};

inline std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::kContextGenerator: return "CONTEXT_GENERATOR";
    case AgentKind::kRelevancy: return "RELEVANCY";
    case AgentKind::kLayout: return "LAYOUT";
    case AgentKind::kSourceScrutiny: return "SOURCE_SCRUTINY";
    case AgentKind::kFactCheck: return "FACT_CHECK";
    case AgentKind::kRemediationAnalyst: return "REMEDIATION_ANALYST";
    case AgentKind::kFactLookupExtract: return "FACT_LOOKUP_EXTRACT";
    case AgentKind::kRemediationAudit: return "REMEDIATION_AUDIT";
    case AgentKind::kDiscovery: return "DISCOVERY";
    case AgentKind::kIntegrity: return "INTEGRITY";
    case AgentKind::kMonolith: return "MONOLITH";
  }
  return "UNKNOWN";
}

inline std::optional<AgentKind> parse_agent_kind(std::string_view s) {
  for (auto k : kAllAgentKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

struct CallUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::chrono::milliseconds wall_time{0};
  std::string model_id;
};

// ---------------------------------------------------------------------------
// Pricing

struct ModelRates {
  Decimal input_per_1k;
  Decimal output_per_1k;
};

class PricingTable {
 public:
  PricingTable() = default;

  void set(std::string model_id, ModelRates rates) {
    if (rates.input_per_1k.sign() < 0 || rates.output_per_1k.sign() < 0)
      throw Error("negative rate for model '" + model_id + "'");
    rates_[std::move(model_id)] = std::move(rates);
  }

  const ModelRates* find(const std::string& model_id) const {
    auto it = rates_.find(model_id);
    return it == rates_.end() ? nullptr : &it->second;
  }

  /// `{"model": {"input_per_1k": 0.15, "output_per_1k": "0.60"}}`. Numbers are
  /// read through their decimal text so "0.15" stays exactly 0.15.
  static PricingTable from_json(const json& j) {
    PricingTable t;
    for (const auto& [model, rates] : j.items()) {
      auto in = json_decimal(rates.at("input_per_1k"));
      auto out = json_decimal(rates.at("output_per_1k"));
      if (!in || !out) throw Error("non-numeric rate for model '" + model + "'");
      t.set(model, {*in, *out});
    }
    return t;
  }

  static PricingTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open pricing file " + path);
    return from_json(json::parse(in));
  }

 private:
  std::map<std::string, ModelRates> rates_;
};

struct CostEstimate {
  Decimal total;
  std::set<std::string> unknown_models;  // priced at zero
};

inline CostEstimate estimate_cost(const std::vector<CallUsage>& usages, const PricingTable& pricing) {
  CostEstimate est;
  for (const auto& u : usages) {
    const ModelRates* r = pricing.find(u.model_id);
    if (!r) {
      if (u.prompt_tokens || u.completion_tokens) est.unknown_models.insert(u.model_id);
      continue;
    }
    est.total += Decimal(u.prompt_tokens) / Decimal(1000) * r->input_per_1k +
                 Decimal(u.completion_tokens) / Decimal(1000) * r->output_per_1k;
  }
  return est;
}

// ---------------------------------------------------------------------------
// Providers

struct ProviderRequest {
  AgentKind kind;
  std::string key;  // routing key: row id, URL, domain, ...
  std::string prompt;
  int attempt = 0;
};

struct ProviderResponse {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::optional<std::chrono::milliseconds> wall_time;  // provider-reported; measured otherwise
  std::string model_id;
};

class Provider {
 public:
  virtual ~Provider() = default;
  /// Throws ProviderError on transport/auth failure.
  virtual ProviderResponse complete(const ProviderRequest& request) = 0;
  virtual std::string model_id() const = 0;
};

inline std::int64_t approx_tokens(std::string_view s) { return static_cast<std::int64_t>((s.size() + 3) / 4); }

/// Deterministic fixture-backed provider. Responses are looked up by
/// "KIND/key", then "KIND/*", then the global default. A fixture value may be
/// a list; successive calls for the same key walk it and repeat the last entry.
class ScriptedProvider : public Provider {
 public:
  explicit ScriptedProvider(std::map<std::string, std::vector<std::string>> fixture,
                            std::optional<std::string> default_response = std::nullopt,
                            std::string model = "scripted")
      : fixture_(std::move(fixture)), default_(std::move(default_response)), model_(std::move(model)) {}

  /// Flat document: `{"FACT_CHECK/r7": "...", "LAYOUT/*": ["...", "..."], "*": "..."}`.
  static std::shared_ptr<ScriptedProvider> from_json(const json& j, std::string model = "scripted") {
    std::map<std::string, std::vector<std::string>> fixture;
    std::optional<std::string> fallback;
    for (const auto& [key, value] : j.items()) {
      std::vector<std::string> seq;
      if (value.is_array()) {
        for (const auto& v : value) seq.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      } else {
        seq.push_back(value.is_string() ? value.get<std::string>() : value.dump());
      }
      if (key == "*") {
        fallback = seq.front();
      } else {
        if (fixture.count(key)) throw Error("duplicate fixture key " + key);
        fixture.emplace(key, std::move(seq));
      }
    }
    return std::make_shared<ScriptedProvider>(std::move(fixture), std::move(fallback), std::move(model));
  }

  static std::shared_ptr<ScriptedProvider> load(const std::string& path, std::string model = "scripted") {
    std::ifstream in(path);
    if (!in) throw Error("cannot open fixture file " + path);
    return from_json(json::parse(in), std::move(model));
  }

  ProviderResponse complete(const ProviderRequest& request) override {
    std::string exact = std::string(to_string(request.kind)) + "/" + request.key;
    std::string wildcard = std::string(to_string(request.kind)) + "/*";
    std::string text;
    {
      std::lock_guard lock(mu_);
      const std::vector<std::string>* seq = nullptr;
      std::string used;
      if (auto it = fixture_.find(exact); it != fixture_.end()) {
        seq = &it->second;
        used = exact;
      } else if (auto wit = fixture_.find(wildcard); wit != fixture_.end()) {
        seq = &wit->second;
        used = exact;  // sequences advance per concrete key
      }
      if (seq) {
        std::size_t& cursor = cursors_[used];
        text = (*seq)[std::min(cursor, seq->size() - 1)];
        ++cursor;
      } else if (default_) {
        text = *default_;
      } else {
        throw ProviderError("no scripted response for " + exact);
      }
    }
    return ProviderResponse{text, approx_tokens(request.prompt), approx_tokens(text), latency_, model_};
  }

  std::string model_id() const override { return model_; }

  void set_latency(std::chrono::milliseconds latency) { latency_ = latency; }

 private:
  std::map<std::string, std::vector<std::string>> fixture_;
  std::optional<std::string> default_;
  std::string model_;
  std::chrono::milliseconds latency_{0};
  std::mutex mu_;
  std::map<std::string, std::size_t> cursors_;
};

// ---------------------------------------------------------------------------
// Usage ledger

struct LedgerEntry {
  AgentKind kind;
  std::string key;
  int attempt = 0;
  CallUsage usage;
  std::string prompt_digest;
  std::string response_digest;
  std::string outcome;  // "ok", "malformed", "provider_error"
};

/// Append-only, safe for concurrent appends.
class UsageLedger {
 public:
  void append(LedgerEntry e) {
    std::lock_guard lock(mu_);
    entries_.push_back(std::move(e));
  }

  std::vector<LedgerEntry> snapshot() const {
    std::lock_guard lock(mu_);
    return entries_;
  }

  std::vector<CallUsage> usages() const {
    std::lock_guard lock(mu_);
    std::vector<CallUsage> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.usage);
    return out;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

  /// Summed usage of every attempt recorded for (kind, key).
  CallUsage sum(AgentKind kind, const std::string& key) const {
    std::lock_guard lock(mu_);
    CallUsage total;
    for (const auto& e : entries_) {
      if (e.kind != kind || e.key != key) continue;
      total.prompt_tokens += e.usage.prompt_tokens;
      total.completion_tokens += e.usage.completion_tokens;
      total.wall_time += e.usage.wall_time;
      total.model_id = e.usage.model_id;
    }
    return total;
  }

  std::size_t count(AgentKind kind) const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.kind == kind;
    return n;
  }

 private:
  mutable std::mutex mu_;
  std::vector<LedgerEntry> entries_;
};

inline json to_json(const LedgerEntry& e, bool with_timing = true) {
  json j{{"kind", std::string(to_string(e.kind))},
         {"key", e.key},
         {"attempt", e.attempt},
         {"prompt_tokens", e.usage.prompt_tokens},
         {"completion_tokens", e.usage.completion_tokens},
         {"model", e.usage.model_id},
         {"prompt_digest", e.prompt_digest},
         {"response_digest", e.response_digest},
         {"outcome", e.outcome}};
  if (with_timing) j["wall_time_ms"] = e.usage.wall_time.count();
  return j;
}

// ---------------------------------------------------------------------------
// Gateway

struct GatewayOptions {
  int max_repairs = 2;
  int max_in_flight = 8;
};

struct StructuredResult {
  json value;
  CallUsage usage;  // summed over all attempts
  int attempts = 0;
};

class Gateway {
 public:
  Gateway(std::shared_ptr<Provider> provider, GatewayOptions options = {})
      : provider_(std::move(provider)),
        options_(options),
        in_flight_(std::max(1, options.max_in_flight)),
        ledger_(std::make_shared<UsageLedger>()) {}

  /// Sends `prompt` and returns a response object satisfying `shape`. A
  /// malformed completion is re-requested with the parse error appended, at
  /// most `max_repairs` times. Throws ProviderError or ParseExhausted.
  StructuredResult complete_structured(AgentKind kind, const std::string& key, const std::string& prompt,
                                       const ResponseShape& shape) {
    StructuredResult result;
    result.usage.model_id = provider_->model_id();
    std::string current = prompt;
    std::string last_error;
    for (int attempt = 0; attempt <= options_.max_repairs; ++attempt) {
      ProviderResponse resp;
      auto start = std::chrono::steady_clock::now();
      try {
        in_flight_.acquire();
        struct Release {
          std::counting_semaphore<1024>& s;
          ~Release() { s.release(); }
        } release{in_flight_};
        resp = provider_->complete({kind, key, current, attempt});
      } catch (const ProviderError&) {
        ledger_->append({kind, key, attempt, CallUsage{0, 0, elapsed(start), provider_->model_id()},
                         text::digest(current), "", "provider_error"});
        throw;
      }
      CallUsage usage{resp.prompt_tokens, resp.completion_tokens, resp.wall_time.value_or(elapsed(start)),
                      resp.model_id.empty() ? provider_->model_id() : resp.model_id};
      result.usage.prompt_tokens += usage.prompt_tokens;
      result.usage.completion_tokens += usage.completion_tokens;
      result.usage.wall_time += usage.wall_time;
      result.attempts = attempt + 1;

      auto parsed = extract_json_block(resp.text);
      if (!parsed) {
        last_error = "no well-formed JSON object found in the response";
      } else if (auto err = conform_to_shape(*parsed, shape)) {
        last_error = *err;
      } else {
        ledger_->append({kind, key, attempt, usage, text::digest(current), text::digest(resp.text), "ok"});
        result.value = std::move(*parsed);
        return result;
      }
      ledger_->append({kind, key, attempt, usage, text::digest(current), text::digest(resp.text), "malformed"});
      current = prompt + "\n\nYour previous response could not be used: " + last_error +
                ".\nReply again with a single ```json fenced block of the form " + describe_shape(shape) + ".";
    }
    throw ParseExhausted(std::string(to_string(kind)) + " response for '" + key + "' unparseable after " +
                         std::to_string(options_.max_repairs) + " repairs: " + last_error);
  }

  const std::shared_ptr<UsageLedger>& ledger() const { return ledger_; }
  std::string model_id() const { return provider_->model_id(); }

 private:
  static std::chrono::milliseconds elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  }

  std::shared_ptr<Provider> provider_;
  GatewayOptions options_;
  std::counting_semaphore<1024> in_flight_;
  std::shared_ptr<UsageLedger> ledger_;
};

}  // namespace webvet
