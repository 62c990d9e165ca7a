#pragma once

// One entry point for a complete run, shared by the CLI and the HTTP service:
// load the dataset, build per-run services from the config, run, and write the
// run directory.

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "webvet/net.hpp"
#include "webvet/orchestrator.hpp"

namespace webvet {

/// Rates in USD per 1,000 tokens.
inline PricingTable default_pricing() {
  PricingTable t;
  t.set("gpt-4o-mini", {*Decimal::parse("0.00015"), *Decimal::parse("0.0006")});
  t.set("gpt-4o", {*Decimal::parse("0.0025"), *Decimal::parse("0.01")});
  t.set("gpt-4.1-mini", {*Decimal::parse("0.0004"), *Decimal::parse("0.0016")});
  t.set("gpt-4.1", {*Decimal::parse("0.002"), *Decimal::parse("0.008")});
  return t;
}

/// Values that must never reach disk: a credential supplied for one run.
struct RunSecrets {
  std::string provider_credential;
};

inline std::shared_ptr<Provider> make_provider(const ProviderSettings& p,
                                               const std::map<std::string, std::string>& host_overrides = {},
                                               const RunSecrets& secrets = {}) {
  if (p.kind == "scripted") {
    if (p.script.empty())  // every call fails; enough for rules mode
      return std::make_shared<ScriptedProvider>(std::map<std::string, std::vector<std::string>>{}, std::nullopt,
                                                p.model.empty() ? "scripted" : p.model);
    return ScriptedProvider::load(p.script, p.model.empty() ? "scripted" : p.model);
  }
  OpenAiOptions o;
  if (!p.endpoint.empty()) o.endpoint = p.endpoint;
  if (!p.model.empty()) o.model = p.model;
  o.credential_env = p.credential_env;
  o.credential = secrets.provider_credential;
  o.host_overrides = host_overrides;
  return std::make_shared<OpenAiProvider>(o);
}

/// Fresh services for one run. Page snapshots go to `run_dir/pages` when a
/// run directory is given.
inline Services make_services(const RunConfig& c, const std::filesystem::path& run_dir = {}, const RunSecrets& secrets = {}) {
  Services s;
  auto provider = make_provider(c.provider, c.host_overrides, secrets);
  s.gateway = std::make_shared<Gateway>(provider, GatewayOptions{2, c.max_in_flight});
  std::shared_ptr<Transport> transport;
  if (!c.replay.empty()) transport = std::make_shared<ReplayTransport>(c.replay);
  else {
    HttpTransportOptions h;
    h.host_overrides = c.host_overrides;
    transport = std::make_shared<HttpTransport>(h);
  }
  std::shared_ptr<SnapshotStore> snapshots;
  if (!run_dir.empty() && c.replay.empty()) snapshots = std::make_shared<SnapshotStore>(run_dir / "pages");
  s.fetcher = std::make_shared<PageFetcher>(transport, FetchOptions{std::chrono::milliseconds(c.politeness_ms)}, snapshots);
  if (c.search.kind == "fixture") s.search = FixtureSearch::load(c.search.source);
  else if (c.search.kind == "http") s.search = std::make_shared<HttpSearch>(c.search.source, c.search.credential_env, c.host_overrides);
  s.pricing = c.pricing.empty() ? default_pricing() : PricingTable::load(c.pricing);
  return s;
}

inline DatasetOptions dataset_options(const RunConfig& c) {
  return {c.schema, c.description, c.url_column, c.id_column};
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << content;
}

}  // namespace detail

/// config.json, events.jsonl, usage.jsonl, context.json, dropped.jsonl,
/// output.csv and report.json. The config echo never holds a credential.
inline void write_run_directory(const std::filesystem::path& dir, const RunReport& r) {
  std::filesystem::create_directories(dir);
  detail::write_file(dir / "config.json", to_json(r.config).dump(2) + "\n");
  std::string events;
  for (const auto& e : r.events) events += to_json(e).dump() + "\n";
  detail::write_file(dir / "events.jsonl", events);
  std::string usage;
  for (const auto& e : r.ledger) usage += to_json(e).dump() + "\n";
  detail::write_file(dir / "usage.jsonl", usage);
  if (r.context) detail::write_file(dir / "context.json", to_json(*r.context).dump(2) + "\n");
  std::string dropped;
  for (const auto& d : r.dropped) dropped += to_json(d).dump() + "\n";
  detail::write_file(dir / "dropped.jsonl", dropped);
  detail::write_file(dir / "output.csv", r.output_csv());
  detail::write_file(dir / "report.json", to_json(r).dump(2) + "\n");
}

/// Full run from CSV text. Dataset problems throw before any model call. The
/// event log is closed on return or failure.
inline RunReport execute_run(const RunConfig& config, std::string_view csv_text, const std::filesystem::path& run_dir,
                             EventLog& events, const RunSecrets& secrets = {}) {
  struct Close {
    EventLog& log;
    ~Close() { log.close(); }
  } close{events};
  Dataset ds = load_dataset(csv_text, dataset_options(config));
  Services services = make_services(config, run_dir, secrets);
  RunReport report = run_pipeline(ds, config, std::move(services), events);
  if (!run_dir.empty()) write_run_directory(run_dir, report);
  return report;
}

}  // namespace webvet
