#pragma once

// Core validation: relevancy screening, source scrutiny, fact-checking and
// the rule-based arbiter.

#include <optional>
#include <string>
#include <vector>

#include "webvet/context.hpp"
#include "webvet/gateway.hpp"
#include "webvet/prompts.hpp"
#include "webvet/retrieval.hpp"
#include "webvet/schema.hpp"
#include "webvet/single_flight.hpp"
#include "webvet/url.hpp"

namespace webvet {

struct RelevancyVerdict {
  bool is_relevant = true;
  std::string reason;
};

enum class Reliability { kVeryLow, kLow, kMedium, kHigh, kVeryHigh };

inline constexpr std::array<Reliability, 5> kAllReliabilities{Reliability::kVeryLow, Reliability::kLow, Reliability::kMedium,
                                                              Reliability::kHigh, Reliability::kVeryHigh};

inline std::string_view to_string(Reliability r) {
  switch (r) {
    case Reliability::kVeryLow: return "VERY_LOW";
    case Reliability::kLow: return "LOW";
    case Reliability::kMedium: return "MEDIUM";
    case Reliability::kHigh: return "HIGH";
    case Reliability::kVeryHigh: return "VERY_HIGH";
  }
  return "MEDIUM";
}

inline std::optional<Reliability> parse_reliability(std::string_view s) {
  std::string u = text::upper(text::trim(s));
  for (char& c : u)
    if (c == ' ' || c == '-') c = '_';
  for (auto r : kAllReliabilities)
    if (to_string(r) == u) return r;
  return std::nullopt;
}

struct SourceAssessment {
  std::string source_type;
  Reliability reliability = Reliability::kMedium;
  std::string notes;
};

struct FactCheckReport {
  bool has_meaningful_content = false;
  bool supports_claims = false;
  std::optional<DateValue> extracted_date;
  std::string notes;
};

enum class Decision { kAccept, kReject };

enum class RejectReason { kNotRelevant, kNoMeaningfulContent, kClaimsUnsupported, kUnreliableSource, kFetchFailed };

inline std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::kNotRelevant: return "NOT_RELEVANT";
    case RejectReason::kNoMeaningfulContent: return "NO_MEANINGFUL_CONTENT";
    case RejectReason::kClaimsUnsupported: return "CLAIMS_UNSUPPORTED";
    case RejectReason::kUnreliableSource: return "UNRELIABLE_SOURCE";
    case RejectReason::kFetchFailed: return "FETCH_FAILED";
  }
  return "";
}

struct Verdict {
  Decision decision = Decision::kAccept;
  std::vector<RejectReason> reasons;
  std::string notes;

  bool accepted() const { return decision == Decision::kAccept; }
};

inline std::string describe_reasons(const std::vector<RejectReason>& reasons) {
  std::string out;
  for (auto r : reasons) out += (out.empty() ? "" : ",") + std::string(to_string(r));
  return out;
}

// ---------------------------------------------------------------------------
// Relevancy

inline const ResponseShape& relevancy_response_shape() {
  static const ResponseShape shape{{"is_relevant", ValueKind::kBoolean}, {"reason", ValueKind::kText, true}};
  return shape;
}

inline std::string relevancy_prompt(const DataPoint& dp, const SchemaSpec& schema, const std::string& fragment) {
  std::string record;
  for (const auto& f : schema.fields) record += f.name + ": " + dp.value(f.name) + "\n";
  return text::render(prompts::kRelevancy,
                      {{"context", fragment}, {"record", record}, {"shape", describe_shape(relevancy_response_shape())}});
}

/// Cheap topical screen on row values and the dataset description only.
/// Unparseable responses fail closed.
inline RelevancyVerdict assess_relevancy(const DataPoint& dp, const SchemaSpec& schema, const std::string& fragment,
                                         Gateway& gateway) {
  try {
    auto r = gateway.complete_structured(AgentKind::kRelevancy, dp.row_id, relevancy_prompt(dp, schema, fragment),
                                         relevancy_response_shape());
    RelevancyVerdict v{r.value.at("is_relevant").get<bool>(), r.value.value("reason", std::string())};
    if (!v.is_relevant && text::trim(v.reason).empty()) v.reason = "not relevant to the dataset description";
    return v;
  } catch (const ParseExhausted&) {
    return {false, "unparseable relevancy response"};
  }
}

// ---------------------------------------------------------------------------
// Source scrutiny

inline const ResponseShape& scrutiny_response_shape() {
  static const ResponseShape shape{
      {"source_type", ValueKind::kText}, {"reliability", ValueKind::kText}, {"notes", ValueKind::kText, true}};
  return shape;
}

/// Judges a source from its URL alone; one call per registrable domain per run.
class SourceScrutinizer {
 public:
  explicit SourceScrutinizer(Gateway& gateway) : gateway_(gateway) {}

  SourceAssessment scrutinize(const std::string& url) {
    auto parsed = parse_url(url);
    std::string domain = parsed ? registrable_domain(parsed->host) : url;
    return cache_.get(domain, [&] { return assess(url, domain); });
  }

 private:
  SourceAssessment assess(const std::string& url, const std::string& domain) {
    std::string prompt = text::render(prompts::kSourceScrutiny,
                                      {{"url", url}, {"domain", domain}, {"shape", describe_shape(scrutiny_response_shape())}});
    try {
      auto r = gateway_.complete_structured(AgentKind::kSourceScrutiny, domain, prompt, scrutiny_response_shape());
      SourceAssessment a;
      a.source_type = r.value.at("source_type").get<std::string>();
      if (text::trim(a.source_type).empty()) a.source_type = "unknown";
      a.notes = r.value.value("notes", std::string());
      auto level = r.value.at("reliability").get<std::string>();
      if (auto rel = parse_reliability(level)) {
        a.reliability = *rel;
      } else {
        a.reliability = Reliability::kMedium;
        a.notes = "unrecognized reliability '" + level + "'; " + a.notes;
      }
      return a;
    } catch (const ParseExhausted&) {
      return {"unknown", Reliability::kMedium, "scrutiny unparseable"};
    }
  }

  Gateway& gateway_;
  SingleFlight<std::string, SourceAssessment> cache_;
};

// ---------------------------------------------------------------------------
// Fact checking

inline constexpr std::size_t kDefaultPageCharBudget = 40000;

struct FactCheckOptions {
  bool minimal = false;  // drop the audit principles and the context fragment
  std::size_t page_char_budget = kDefaultPageCharBudget;
};

inline const ResponseShape& fact_check_response_shape() {
  static const ResponseShape shape{{"has_meaningful_content", ValueKind::kBoolean},
                                   {"supports_claims", ValueKind::kBoolean},
                                   {"extracted_date", ValueKind::kText, true},
                                   {"notes", ValueKind::kText}};
  return shape;
}

inline std::string fact_check_prompt(const DataPoint& dp, const SchemaSpec& schema, const PageContent& page,
                                     std::string_view hint, const std::string& fragment, const FactCheckOptions& opts,
                                     bool* truncated = nullptr) {
  std::string markdown = text::truncate_head_biased(page.markdown, opts.page_char_budget, truncated);
  return text::render(prompts::kFactCheck, {{"record", describe_record(dp, schema)},
                                            {"hint", std::string(hint)},
                                            {"context", opts.minimal ? std::string() : fragment},
                                            {"audit", opts.minimal ? std::string() : std::string(prompts::kCriticalSemanticAudit)},
                                            {"url", page.final_url},
                                            {"page", markdown},
                                            {"shape", describe_shape(fact_check_response_shape())}});
}

inline FactCheckReport parse_fact_check(const json& v) {
  FactCheckReport r;
  r.has_meaningful_content = v.at("has_meaningful_content").get<bool>();
  r.supports_claims = v.at("supports_claims").get<bool>();
  if (auto d = v.find("extracted_date"); d != v.end() && d->is_string())
    r.extracted_date = detail::try_normalize_date(d->get<std::string>());
  r.notes = v.at("notes").get<std::string>();
  if (text::trim(r.notes).empty()) r.notes = "no explanation given";
  return r;
}

struct FactCheckOutcome {
  FactCheckReport report;
  bool page_truncated = false;
  CallUsage usage;
};

/// One FACT_CHECK call. Unparseable responses fail closed.
inline FactCheckOutcome fact_check(const DataPoint& dp, const SchemaSpec& schema, const PageContent& page,
                                   std::string_view hint, const std::string& fragment, Gateway& gateway,
                                   const FactCheckOptions& opts = {}) {
  FactCheckOutcome out;
  std::string prompt = fact_check_prompt(dp, schema, page, hint, fragment, opts, &out.page_truncated);
  try {
    auto r = gateway.complete_structured(AgentKind::kFactCheck, dp.row_id, prompt, fact_check_response_shape());
    out.report = parse_fact_check(r.value);
    out.usage = r.usage;
  } catch (const ParseExhausted&) {
    out.report = {false, false, std::nullopt, "unparseable"};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Arbiter

/// Pure rule engine: reject on missing content, unsupported claims, or a
/// LOW / VERY_LOW source; reasons accumulate; otherwise accept.
inline Verdict arbitrate(const FactCheckReport& fc, const SourceAssessment& src) {
  Verdict v;
  if (!fc.has_meaningful_content) v.reasons.push_back(RejectReason::kNoMeaningfulContent);
  if (!fc.supports_claims) v.reasons.push_back(RejectReason::kClaimsUnsupported);
  if (src.reliability == Reliability::kLow || src.reliability == Reliability::kVeryLow)
    v.reasons.push_back(RejectReason::kUnreliableSource);
  v.decision = v.reasons.empty() ? Decision::kAccept : Decision::kReject;
  v.notes = fc.notes;
  if (!src.notes.empty() || !src.source_type.empty())
    v.notes += (v.notes.empty() ? "" : " | ") + std::string("source: ") + src.source_type + " (" +
               std::string(to_string(src.reliability)) + ")";
  return v;
}

inline Verdict fetch_failed_verdict(const PageContent& page, const std::string& rationale) {
  Verdict v;
  v.decision = Decision::kReject;
  v.reasons = {RejectReason::kFetchFailed};
  v.notes = "page unusable (" + (page.http_status ? "HTTP " + std::to_string(page.http_status) : std::string("no response")) +
            "): " + rationale;
  return v;
}

inline Verdict not_relevant_verdict(const RelevancyVerdict& r) {
  return {Decision::kReject, {RejectReason::kNotRelevant}, r.reason};
}

}  // namespace webvet
