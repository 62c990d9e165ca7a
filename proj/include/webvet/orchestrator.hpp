#pragma once

// Drives data points through the committee (or a baseline), emits the status
// event stream and assembles the run report.

#include <algorithm>
#include <atomic>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "webvet/config.hpp"
#include "webvet/context.hpp"
#include "webvet/dataset.hpp"
#include "webvet/events.hpp"
#include "webvet/finalization.hpp"
#include "webvet/gateway.hpp"
#include "webvet/remediation.hpp"
#include "webvet/retrieval.hpp"
#include "webvet/rules.hpp"
#include "webvet/search.hpp"
#include "webvet/validators.hpp"

namespace webvet {

/// Per-run service instances. Nothing here is shared between runs.
struct Services {
  std::shared_ptr<Gateway> gateway;
  std::shared_ptr<PageFetcher> fetcher;
  std::shared_ptr<SearchAdapter> search;  // null: lookups fail
  PricingTable pricing;
};

struct RowOutcome {
  std::string row_id;
  RowStatus status = RowStatus::kProcessing;
  std::vector<std::string> reasons;
  std::string notes;
  bool processing_failure = false;
  std::optional<DataPoint> record;  // staged for finalization
  std::chrono::system_clock::time_point first_event{};
  std::chrono::system_clock::time_point terminal_event{};
};

struct RunTotals {
  std::int64_t time_total_ms = 0;
  double latency_mean_ms = 0;
  Decimal cost;
  std::set<std::string> unpriced_models;
  std::size_t model_calls = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::size_t pages_fetched = 0;
  std::size_t network_requests = 0;
  std::size_t processing_failures = 0;
  std::map<std::string, std::size_t> status_counts;
};

struct RunReport {
  RunConfig config;
  SchemaSpec schema;
  std::vector<std::string> passthrough_columns;
  std::optional<OperationalContext> context;
  std::vector<RowOutcome> outcomes;  // input rows in order, then discovered rows
  std::vector<DataPoint> final_records;
  std::vector<DroppedRecord> dropped;
  std::vector<IntegrityFinding> findings;
  std::vector<std::string> warnings;
  std::vector<LedgerEntry> ledger;
  std::vector<RowEvent> events;
  std::vector<FetchRecord> fetches;
  RunTotals totals;

  std::string output_csv() const { return format_records_csv(final_records, schema, passthrough_columns); }
};

namespace detail {

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? std::string(sep) : "") + parts[i];
  return out;
}

inline std::vector<std::string> reason_names(const std::vector<RejectReason>& reasons) {
  std::vector<std::string> out;
  for (auto r : reasons) out.emplace_back(to_string(r));
  return out;
}

inline std::string describe_page(const PageContent& page) {
  if (page.http_status == 0) return "fetch failed: " + (page.error.empty() ? std::string("no response") : page.error);
  std::string s = "HTTP " + std::to_string(page.http_status) + " " + page.final_url;
  if (page.truncated) s += " (body truncated)";
  if (page.markdown.empty()) s += " (no content)";
  return s;
}

}  // namespace detail

/// One run of the pipeline over a dataset. Construct, call run(), discard.
class Pipeline {
 public:
  Pipeline(const Dataset& dataset, const RunConfig& config, Services services, EventLog& events)
      : ds_(dataset), cfg_(config), sv_(checked(std::move(services))), events_(events) {
    for (std::size_t i = 0; i < ds_.rows.size(); ++i) {
      const auto& url = ds_.rows[i].source_url;
      if (!url_order_.count(url)) {
        url_order_[url] = url_order_.size();
        first_row_for_url_[url] = ds_.rows[i].row_id;
      }
      auto parsed = parse_url(url);
      scrutiny_url_.emplace(parsed ? registrable_domain(parsed->host) : url, url);
    }
  }

  RunReport run() {
    auto started = std::chrono::steady_clock::now();
    RunReport report;
    report.config = cfg_;
    report.schema = ds_.schema;
    report.passthrough_columns = ds_.passthrough_columns;
    outcomes_.assign(ds_.rows.size(), RowOutcome{});

    if (!ds_.rows.empty()) {
      if (cfg_.mode == RunMode::kCommittee) {
        prepare_context();
        report.context = ctx_;
      } else if (cfg_.mode == RunMode::kRules) {
        rulepack_ = cfg_.rulepack.empty() ? default_rulepack(ds_.schema) : load_rulepack(cfg_.rulepack, ds_.schema);
      }
      run_workers();
    }

    std::vector<DataPoint> staged;
    for (auto& o : outcomes_) report.outcomes.push_back(o);
    for (auto& [order, list] : discovered_)
      for (auto& o : list) report.outcomes.push_back(o);
    for (const auto& o : report.outcomes)
      if (o.record) staged.push_back(*o.record);

    auto deduped = dedup(staged, ds_.schema);
    bool plausibility = cfg_.mode == RunMode::kCommittee && cfg_.toggles.integrity;
    auto integrity = integrity_check(deduped.kept, ds_.schema, plausibility ? &ctx_ : nullptr,
                                     plausibility ? sv_.gateway.get() : nullptr);
    report.final_records = std::move(integrity.accepted);
    report.dropped = std::move(deduped.dropped);
    for (auto& d : integrity.dropped) report.dropped.push_back(std::move(d));
    report.findings = std::move(integrity.findings);
    report.warnings = std::move(warnings_);
    for (auto& w : integrity.warnings) report.warnings.push_back(std::move(w));

    report.ledger = sv_.gateway ? sv_.gateway->ledger()->snapshot() : std::vector<LedgerEntry>{};
    report.events = events_.snapshot();
    auto& t = report.totals;
    t.time_total_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    std::vector<CallUsage> usages;
    for (const auto& e : report.ledger) {
      usages.push_back(e.usage);
      t.prompt_tokens += e.usage.prompt_tokens;
      t.completion_tokens += e.usage.completion_tokens;
    }
    t.model_calls = report.ledger.size();
    auto cost = estimate_cost(usages, sv_.pricing);
    t.cost = cost.total;
    t.unpriced_models = cost.unknown_models;
    if (sv_.fetcher) {
      report.fetches = sv_.fetcher->records();
      t.pages_fetched = report.fetches.size();
      t.network_requests = sv_.fetcher->network_requests();
    }
    double latency_sum = 0;
    for (const auto& o : report.outcomes) {
      latency_sum += static_cast<double>(
          std::chrono::duration_cast<std::chrono::milliseconds>(o.terminal_event - o.first_event).count());
      t.processing_failures += o.processing_failure;
      ++t.status_counts[std::string(to_string(o.status))];
    }
    if (!report.outcomes.empty()) t.latency_mean_ms = latency_sum / static_cast<double>(report.outcomes.size());
    return report;
  }

 private:
  static Services checked(Services s) {
    if (!s.gateway) throw Error("pipeline requires a model gateway");
    if (!s.fetcher) throw Error("pipeline requires a page fetcher");
    return s;
  }

  // -------------------------------------------------------------------------
  // Setup

  void prepare_context() {
    if (cfg_.toggles.context) {
      ctx_ = build_context(ds_.rows, ds_.schema, cfg_.seed, *sv_.gateway, cfg_.context_samples ? kContextSampleSize : 0);
    } else {
      ctx_.dataset_description = ds_.schema.dataset_description;
      ctx_.field_order = ds_.schema.field_names();
      ctx_.rng_seed = cfg_.seed;
    }
    RenderOptions opts{cfg_.toggles.context_examples};
    frag_relevancy_ = render_context(ctx_, AgentKind::kRelevancy, opts);
    if (!cfg_.toggles.context) {
      frag_fact_ = frag_remediation_ = frag_discovery_ = frag_relevancy_;
    } else {
      frag_fact_ = render_context(ctx_, AgentKind::kFactCheck, opts);
      frag_remediation_ = render_context(ctx_, AgentKind::kRemediationAnalyst, opts);
      frag_discovery_ = render_context(ctx_, AgentKind::kDiscovery, opts);
    }
  }

  void run_workers() {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < ds_.rows.size(); i = next++) {
        switch (cfg_.mode) {
          case RunMode::kCommittee: process_committee(i); break;
          case RunMode::kMonolith: process_monolith(i); break;
          case RunMode::kRules: process_rules(i); break;
        }
      }
    };
    std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, cfg_.parallelism)), ds_.rows.size());
    std::vector<std::jthread> threads;
    for (std::size_t k = 0; k < n; ++k) threads.emplace_back(worker);
  }

  // -------------------------------------------------------------------------
  // Events

  void emit(RowOutcome& o, std::string_view stage, RowStatus status, std::optional<std::string> reason = std::nullopt,
            std::optional<CallUsage> usage = std::nullopt) {
    RowEvent e{0, o.row_id, std::string(stage), status, std::move(reason), std::chrono::system_clock::now(), std::move(usage)};
    if (o.first_event == std::chrono::system_clock::time_point{}) o.first_event = e.timestamp;
    if (is_terminal(status)) o.terminal_event = e.timestamp;
    events_.append(std::move(e));
  }

  std::optional<CallUsage> usage_of(AgentKind kind, const std::string& key) const {
    auto u = sv_.gateway->ledger()->sum(kind, key);
    if (u.model_id.empty()) return std::nullopt;
    return u;
  }

  void reject(RowOutcome& o, std::string_view stage, std::vector<std::string> reasons, std::string notes) {
    o.status = RowStatus::kReject;
    o.reasons = std::move(reasons);
    o.notes = std::move(notes);
    o.record.reset();
    std::string reason = detail::join(o.reasons, ",");
    if (!o.notes.empty()) reason += (reason.empty() ? "" : ": ") + o.notes;
    emit(o, stage, RowStatus::kReject, reason);
  }

  void processing_failure(RowOutcome& o, const std::exception& e) {
    o.processing_failure = true;
    reject(o, stage::kIntake, {"PROCESSING_FAILURE"}, std::string("processing failure: ") + e.what());
  }

  /// Formatter then terminal event. Uncoercible values reject the row.
  void finish_accepted(RowOutcome& o, DataPoint record, RowStatus terminal, bool format) {
    if (format) {
      try {
        record = coerce_record(record, ds_.schema);
      } catch (const UncoercibleValue& e) {
        reject(o, stage::kFormatter, {"UNCOERCIBLE_VALUE"}, e.what());
        return;
      }
    }
    o.status = terminal;
    o.record = std::move(record);
    emit(o, format ? stage::kFormatter : stage::kArbiter, terminal);
  }

  // -------------------------------------------------------------------------
  // Committee

  LayoutResult layout_for(const PageContent& page) {
    if (!page.usable()) return classify_layout(page, *sv_.gateway);  // ERROR_PAGE without a call
    if (!cfg_.toggles.layout) return {LayoutClass::kOther, "layout classification disabled"};
    return layout_cache_.get(page.url, [&] { return classify_layout(page, *sv_.gateway); });
  }

  SourceAssessment scrutiny_for(const std::string& url) {
    if (!cfg_.toggles.source_scrutiny) return {"not assessed", Reliability::kMedium, ""};
    // The assessment is shared per domain; always describe it by the same URL.
    auto parsed = parse_url(url);
    auto it = scrutiny_url_.find(parsed ? registrable_domain(parsed->host) : url);
    return scrutinizer_.scrutinize(it == scrutiny_url_.end() ? url : it->second);
  }

  FactCheckReport check_facts(const DataPoint& dp, const PageContent& page, const LayoutResult& layout, RowOutcome& o) {
    if (!cfg_.toggles.fact_check) return {true, true, std::nullopt, "fact check disabled"};
    FactCheckOptions opts;
    opts.minimal = cfg_.minimal_fact_check;
    auto fc = fact_check(dp, ds_.schema, page, analysis_hint(layout.layout), frag_fact_, *sv_.gateway, opts);
    std::string note = std::string(fc.report.has_meaningful_content ? "content" : "no content") + ", " +
                       (fc.report.supports_claims ? "supported" : "unsupported");
    if (fc.page_truncated) note += ", page truncated";
    emit(o, to_string(AgentKind::kFactCheck), RowStatus::kProcessing, note, usage_of(AgentKind::kFactCheck, dp.row_id));
    return fc.report;
  }

  void process_committee(std::size_t index) {
    const DataPoint& dp = ds_.rows[index];
    RowOutcome& o = outcomes_[index];
    o.row_id = dp.row_id;
    emit(o, stage::kIntake, RowStatus::kProcessing);
    try {
      if (cfg_.toggles.relevancy) {
        auto rv = assess_relevancy(dp, ds_.schema, frag_relevancy_, *sv_.gateway);
        if (!rv.is_relevant) {
          auto v = not_relevant_verdict(rv);
          reject(o, to_string(AgentKind::kRelevancy), detail::reason_names(v.reasons), v.notes);
          return;
        }
        emit(o, to_string(AgentKind::kRelevancy), RowStatus::kProcessing, "relevant",
             usage_of(AgentKind::kRelevancy, dp.row_id));
      }

      auto scrutiny = std::async(std::launch::async, [&] { return scrutiny_for(dp.source_url); });
      PageContent page = sv_.fetcher->fetch(dp.source_url);
      LayoutResult layout = layout_for(page);
      SourceAssessment src = scrutiny.get();
      emit(o, stage::kRetrieval, RowStatus::kProcessing, detail::describe_page(page));
      if (cfg_.toggles.layout)
        emit(o, to_string(AgentKind::kLayout), RowStatus::kProcessing, std::string(to_string(layout.layout)));
      if (cfg_.toggles.source_scrutiny)
        emit(o, to_string(AgentKind::kSourceScrutiny), RowStatus::kProcessing,
             std::string(to_string(src.reliability)) + " (" + src.source_type + ")");

      Verdict verdict = page.usable() ? arbitrate(check_facts(dp, page, layout, o), src)
                                      : fetch_failed_verdict(page, layout.rationale);
      emit(o, stage::kArbiter, RowStatus::kProcessing,
           verdict.accepted() ? std::string("ACCEPT") : "REJECT " + describe_reasons(verdict.reasons));

      if (cfg_.toggles.discovery && page.usable() && layout.layout != LayoutClass::kErrorPage)
        discover_on(page, layout, src);

      if (verdict.accepted()) {
        finish_accepted(o, dp, RowStatus::kAccept, cfg_.toggles.formatter);
      } else if (cfg_.toggles.remediation && page.usable()) {
        remediate(o, dp, verdict, page);
      } else {
        reject(o, stage::kArbiter, detail::reason_names(verdict.reasons), verdict.notes);
      }
    } catch (const std::exception& e) {
      processing_failure(o, e);
    }
  }

  void remediate(RowOutcome& o, const DataPoint& dp, const Verdict& verdict, const PageContent& page) {
    auto reasons = detail::reason_names(verdict.reasons);
    RemediationPlan plan;
    try {
      plan = plan_remediation(dp, verdict, page, ds_.schema, frag_remediation_, *sv_.gateway);
    } catch (const PlanRejected& e) {
      reject(o, to_string(AgentKind::kRemediationAnalyst), reasons, std::string("not remediable: ") + e.what());
      return;
    } catch (const ParseExhausted& e) {
      reject(o, to_string(AgentKind::kRemediationAnalyst), reasons, std::string("not remediable: ") + e.what());
      return;
    }
    emit(o, to_string(AgentKind::kRemediationAnalyst), RowStatus::kProcessing, std::string(to_string(plan.strategy)),
         usage_of(AgentKind::kRemediationAnalyst, dp.row_id));

    std::vector<FactLookupResult> lookups;
    try {
      for (const auto& spec : plan.lookups) {
        if (!sv_.search) throw LookupFailed("no search adapter configured");
        auto r = lookup_fact(spec, *sv_.search, *sv_.fetcher, *sv_.gateway);
        emit(o, stage::kLookup, RowStatus::kProcessing, r.operand + " = " + r.value.to_plain() + " from " + r.source_url);
        lookups.push_back(std::move(r));
      }
    } catch (const LookupFailed& e) {
      reject(o, stage::kLookup, reasons, std::string("lookup failed: ") + e.what());
      return;
    }

    DataPoint corrected;
    try {
      corrected = apply_plan(dp, plan, lookups, ds_.schema);
    } catch (const ApplyFailed& e) {
      reject(o, stage::kApply, reasons, std::string("correction failed: ") + e.what());
      return;
    }
    std::vector<std::string> changes;
    for (const auto& f : plan.target_fields) changes.push_back(f + ": " + dp.value(f) + " -> " + corrected.value(f));
    emit(o, stage::kApply, RowStatus::kProcessing, detail::join(changes, "; "));

    auto audit = audit_remediation(dp, corrected, plan, lookups, page, ds_.schema, *sv_.gateway);
    emit(o, to_string(AgentKind::kRemediationAudit), RowStatus::kProcessing, audit.approved ? "approved" : "not approved",
         usage_of(AgentKind::kRemediationAudit, dp.row_id));
    if (!audit.approved) {
      reject(o, to_string(AgentKind::kRemediationAudit), reasons, "audit: " + audit.notes);
      return;
    }
    finish_accepted(o, std::move(corrected), RowStatus::kRemediated, cfg_.toggles.formatter);
  }

  void discover_on(const PageContent& page, const LayoutResult& layout, const SourceAssessment& src) {
    if (discoverer_.attempted(page.url)) return;
    auto it = first_row_for_url_.find(page.url);
    if (it == first_row_for_url_.end()) return;
    bool owner = false;
    {
      std::lock_guard lock(mu_);
      owner = discovery_claimed_.insert(page.url).second;
    }
    if (!owner) return;
    auto found = discoverer_.discover(page, ds_.schema, frag_discovery_, ds_.rows, it->second);
    std::vector<RowOutcome> results;
    for (const auto& candidate : found.records) {
      RowOutcome o;
      o.row_id = candidate.row_id;
      emit(o, to_string(AgentKind::kDiscovery), RowStatus::kProcessing, "found on " + page.url);
      try {
        Verdict v = arbitrate(check_facts(candidate, page, layout, o), src);
        emit(o, stage::kArbiter, RowStatus::kProcessing,
             v.accepted() ? std::string("ACCEPT") : "REJECT " + describe_reasons(v.reasons));
        if (v.accepted()) finish_accepted(o, candidate, RowStatus::kDiscovered, cfg_.toggles.formatter);
        else reject(o, stage::kArbiter, detail::reason_names(v.reasons), v.notes);
      } catch (const std::exception& e) {
        processing_failure(o, e);
      }
      results.push_back(std::move(o));
    }
    std::lock_guard lock(mu_);
    for (const auto& d : found.dropped) warnings_.push_back("discovery on " + page.url + ": " + d);
    discovered_[url_order_.at(page.url)] = std::move(results);
  }

  // -------------------------------------------------------------------------
  // Baselines

  static const ResponseShape& monolith_shape() {
    static const ResponseShape shape{
        {"verdict", ValueKind::kText}, {"corrected", ValueKind::kObject, true}, {"notes", ValueKind::kText, true}};
    return shape;
  }

  void process_monolith(std::size_t index) {
    const DataPoint& dp = ds_.rows[index];
    RowOutcome& o = outcomes_[index];
    o.row_id = dp.row_id;
    emit(o, stage::kIntake, RowStatus::kProcessing);
    try {
      PageContent page = sv_.fetcher->fetch(dp.source_url);
      emit(o, stage::kRetrieval, RowStatus::kProcessing, detail::describe_page(page));
      std::string body = page.usable() ? text::truncate_head_biased(page.markdown, kDefaultPageCharBudget)
                                       : "(the page could not be retrieved: " + detail::describe_page(page) + ")";
      std::string prompt = text::render(prompts::kMonolith, {{"description", ds_.schema.dataset_description},
                                                             {"schema", describe_schema(ds_.schema)},
                                                             {"record", describe_record(dp, ds_.schema)},
                                                             {"url", page.final_url},
                                                             {"page", body},
                                                             {"shape", describe_shape(monolith_shape())}});
      json r;
      try {
        r = sv_.gateway->complete_structured(AgentKind::kMonolith, dp.row_id, prompt, monolith_shape()).value;
      } catch (const ParseExhausted& e) {
        reject(o, to_string(AgentKind::kMonolith), {"UNPARSEABLE"}, e.what());
        return;
      }
      std::string verdict = text::upper(text::trim(r.at("verdict").get<std::string>()));
      std::string notes = r.value("notes", std::string());
      emit(o, to_string(AgentKind::kMonolith), RowStatus::kProcessing, verdict, usage_of(AgentKind::kMonolith, dp.row_id));
      if (verdict != "ACCEPT") {
        reject(o, to_string(AgentKind::kMonolith), {"MONOLITH_REJECT"}, notes);
        return;
      }
      DataPoint record = dp;
      bool changed = false;
      if (auto c = r.find("corrected"); c != r.end()) {
        for (const auto& [field, value] : c->items()) {
          if (!ds_.schema.find(field)) continue;
          std::string v = detail::json_scalar_text(value);
          if (v != record.value(field)) {
            record.values[field] = v;
            changed = true;
          }
        }
      }
      if (changed) record.origin = Origin::kRemediated;
      finish_accepted(o, std::move(record), changed ? RowStatus::kRemediated : RowStatus::kAccept, true);
    } catch (const std::exception& e) {
      processing_failure(o, e);
    }
  }

  void process_rules(std::size_t index) {
    const DataPoint& dp = ds_.rows[index];
    RowOutcome& o = outcomes_[index];
    o.row_id = dp.row_id;
    emit(o, stage::kIntake, RowStatus::kProcessing);
    auto r = apply_rules(dp, ds_.schema, rulepack_);
    if (!r.failures.empty()) {
      reject(o, stage::kRules, {"RULE_VIOLATION"}, detail::join(r.failures, "; "));
      return;
    }
    o.status = RowStatus::kAccept;
    o.record = std::move(r.record);
    emit(o, stage::kRules, RowStatus::kAccept);
  }

  const Dataset& ds_;
  const RunConfig& cfg_;
  Services sv_;
  EventLog& events_;

  OperationalContext ctx_;
  std::string frag_relevancy_, frag_fact_, frag_remediation_, frag_discovery_;
  Rulepack rulepack_;

  SourceScrutinizer scrutinizer_{*sv_.gateway};
  Discoverer discoverer_{*sv_.gateway};
  SingleFlight<std::string, LayoutResult> layout_cache_;

  std::map<std::string, std::size_t> url_order_;
  std::map<std::string, std::string> scrutiny_url_;  // registrable domain -> first input URL
  std::map<std::string, std::string> first_row_for_url_;

  std::vector<RowOutcome> outcomes_;
  std::mutex mu_;
  std::set<std::string> discovery_claimed_;
  std::map<std::size_t, std::vector<RowOutcome>> discovered_;
  std::vector<std::string> warnings_;
};

/// Runs `dataset` under `config`. Closes `events` when done, also on failure.
inline RunReport run_pipeline(const Dataset& dataset, const RunConfig& config, Services services, EventLog& events) {
  struct Close {
    EventLog& log;
    ~Close() { log.close(); }
  } close{events};
  return Pipeline(dataset, config, std::move(services), events).run();
}

// ---------------------------------------------------------------------------
// Report serialization

inline std::string format_cost(const Decimal& cost) { return cost.to_fixed(4); }

inline json to_json(const RunTotals& t) {
  return {{"time_total_ms", t.time_total_ms},
          {"latency_mean_ms", Decimal::parse(std::to_string(t.latency_mean_ms)).value_or(Decimal()).to_fixed(1)},
          {"cost", format_cost(t.cost)},
          {"cost_exact", t.cost.to_plain(12)},
          {"unpriced_models", t.unpriced_models},
          {"model_calls", t.model_calls},
          {"prompt_tokens", t.prompt_tokens},
          {"completion_tokens", t.completion_tokens},
          {"pages_fetched", t.pages_fetched},
          {"network_requests", t.network_requests},
          {"processing_failures", t.processing_failures},
          {"status_counts", t.status_counts}};
}

inline json to_json(const RowOutcome& o) {
  json j{{"row_id", o.row_id}, {"status", to_string(o.status)}, {"reasons", o.reasons}, {"notes", o.notes}};
  if (o.processing_failure) j["processing_failure"] = true;
  return j;
}

inline json to_json(const DroppedRecord& d) {
  return {{"row_id", d.record.row_id}, {"reason", to_string(d.reason)}, {"detail", d.detail}};
}

inline json to_json(const IntegrityFinding& f) {
  return {{"row_id", f.row_id}, {"rule", to_string(f.rule)}, {"field", f.field}, {"explanation", f.explanation}};
}

/// Timing-free, order-normalized view of a run: two runs with the same inputs
/// under a scripted provider produce identical transcripts.
inline json canonical_transcript(const RunReport& r) {
  json j;
  j["outcomes"] = json::array();
  for (const auto& o : r.outcomes) j["outcomes"].push_back(to_json(o));
  j["output_csv"] = r.output_csv();
  j["cost"] = r.totals.cost.to_plain(12);
  std::vector<std::string> ledger;
  for (const auto& e : r.ledger) ledger.push_back(to_json(e, false).dump());
  std::sort(ledger.begin(), ledger.end());
  j["ledger"] = ledger;
  std::map<std::string, json> per_row;
  for (const auto& e : r.events) {
    auto& list = per_row[e.row_id];
    if (list.is_null()) list = json::array();
    list.push_back(to_json(e, false));
  }
  j["events"] = per_row;
  std::vector<std::string> dropped;
  for (const auto& d : r.dropped) dropped.push_back(to_json(d).dump());
  j["dropped"] = dropped;
  return j;
}

inline json to_json(const RunReport& r) {
  json j;
  j["config"] = to_json(r.config);
  j["schema"] = json::parse(to_json(r.schema).dump());
  j["totals"] = to_json(r.totals);
  j["final_record_count"] = r.final_records.size();
  j["outcomes"] = json::array();
  for (const auto& o : r.outcomes) j["outcomes"].push_back(to_json(o));
  j["dropped"] = json::array();
  for (const auto& d : r.dropped) j["dropped"].push_back(to_json(d));
  j["findings"] = json::array();
  for (const auto& f : r.findings) j["findings"].push_back(to_json(f));
  j["warnings"] = r.warnings;
  j["transcript"] = canonical_transcript(r);
  return j;
}

}  // namespace webvet
