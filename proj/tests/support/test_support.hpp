#pragma once

// Shared helpers: a localhost web server that serves the fixture site by Host
// header, and builders for the scripted end-to-end configuration.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "webvet/runner.hpp"

#ifndef WEBVET_FIXTURE_DIR
#error "WEBVET_FIXTURE_DIR must be defined"
#endif

namespace webvet::testing {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(WEBVET_FIXTURE_DIR) / rel; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Serves `<root>/<host>/<path>.html`; "/" maps to index.html. Records every
/// request as "host/path".
class SiteServer {
 public:
  explicit SiteServer(std::filesystem::path root) : root_(std::move(root)) {
    server_.Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
      std::string host = req.get_header_value("Host");
      if (auto colon = host.find(':'); colon != std::string::npos) host.resize(colon);
      {
        std::lock_guard lock(mu_);
        requests_.push_back(host + req.path);
      }
      std::string path = req.path == "/" ? "/index" : req.path;
      auto file = root_ / host / (path.substr(1) + ".html");
      if (path.find("..") != std::string::npos || !std::filesystem::exists(file)) {
        res.status = 404;
        res.set_content("<html><body><h1>Not found</h1></body></html>", "text/html");
        return;
      }
      res.set_content(slurp(file), "text/html; charset=utf-8");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("fixture server cannot bind");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~SiteServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }

  /// Points every fixture host at this server.
  std::map<std::string, std::string> overrides() const {
    std::map<std::string, std::string> out;
    for (const auto& entry : std::filesystem::directory_iterator(root_))
      if (entry.is_directory()) out[entry.path().filename().string()] = "127.0.0.1:" + std::to_string(port_);
    return out;
  }

  std::vector<std::string> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

  void clear() {
    std::lock_guard lock(mu_);
    requests_.clear();
  }

 private:
  std::filesystem::path root_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mu_;
  std::vector<std::string> requests_;
};

inline constexpr const char* kE2eSchema = "event_type, country, location, date:date, affected:int";
inline constexpr const char* kE2eDescription =
    "Natural disasters (floods, earthquakes, landslides, storms) in Haiti and Cameroon during 2023, with the place, "
    "the date of occurrence and the number of people affected.";

/// Config for the scripted end-to-end fixture served by `site`.
inline RunConfig e2e_config(const SiteServer& site, int parallelism = 4) {
  RunConfig c;
  c.label = "full";
  c.schema = kE2eSchema;
  c.description = kE2eDescription;
  c.parallelism = parallelism;
  c.politeness_ms = 0;
  c.provider.kind = "scripted";
  c.provider.script = fixture("e2e/provider.json").string();
  c.search = {"fixture", fixture("e2e/search.json").string(), {}};
  c.pricing = fixture("e2e/pricing.json").string();
  c.host_overrides = site.overrides();
  return c;
}

inline RunReport run_e2e(const RunConfig& c, const std::filesystem::path& run_dir = {}) {
  EventLog events;
  return execute_run(c, slurp(fixture("e2e/dataset.csv")), run_dir, events);
}

inline const RowOutcome* outcome(const RunReport& r, const std::string& id) {
  for (const auto& o : r.outcomes)
    if (o.row_id == id) return &o;
  return nullptr;
}

inline std::size_t calls_of(const RunReport& r, AgentKind kind) {
  std::size_t n = 0;
  for (const auto& e : r.ledger) n += e.kind == kind;
  return n;
}

inline bool fetched(const RunReport& r, const std::string& url) {
  for (const auto& f : r.fetches)
    if (f.url == url) return true;
  return false;
}

}  // namespace webvet::testing
