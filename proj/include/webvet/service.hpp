#pragma once

// HTTP front end: create runs from an uploaded CSV plus a config document,
// follow their event streams, fetch results and metrics.
//
//   POST   /runs                multipart: "csv" file, "config" JSON
//   GET    /runs                list of run handles
//   GET    /runs/:id            one handle
//   GET    /runs/:id/events     NDJSON, full replay then live until the run ends
//   GET    /runs/:id/result     output CSV (409 until DONE)
//   GET    /runs/:id/metrics    report document (409 until DONE)
//   DELETE /runs/:id            removes a finished run and its directory
//
// A provider key may be sent per run in the X-Provider-Key header. It lives
// in memory for the duration of the run only.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include <httplib.h>

#include "webvet/runner.hpp"

namespace webvet {

enum class RunState { kPending, kRunning, kDone, kFailed };

inline std::string_view to_string(RunState s) {
  switch (s) {
    case RunState::kPending: return "PENDING";
    case RunState::kRunning: return "RUNNING";
    case RunState::kDone: return "DONE";
    case RunState::kFailed: return "FAILED";
  }
  return "FAILED";
}

inline constexpr std::size_t kDefaultUploadCap = 20u * 1024u * 1024u;
inline constexpr const char* kCredentialHeader = "X-Provider-Key";

struct ServiceOptions {
  std::filesystem::path root = "runs";
  std::size_t max_upload_bytes = kDefaultUploadCap;
  RunConfig defaults;  // config documents are applied on top of this
  int http_threads = 32;
};

class RunService {
 public:
  explicit RunService(ServiceOptions options) : opts_(std::move(options)) {
    std::filesystem::create_directories(opts_.root);
    std::random_device rd;
    prefix_ = std::to_string(std::chrono::duration_cast<std::chrono::seconds>(
                                 std::chrono::system_clock::now().time_since_epoch()).count()) +
              "-" + std::to_string(rd() % 100000);
    routes();
  }

  ~RunService() {
    stop();
    std::map<std::string, std::shared_ptr<Run>> runs;
    {
      std::lock_guard lock(mu_);
      runs = runs_;
    }
    for (auto& [id, r] : runs)
      if (r->worker.joinable()) r->worker.join();
  }

  RunService(const RunService&) = delete;
  RunService& operator=(const RunService&) = delete;

  httplib::Server& server() { return server_; }

  /// Binds to an ephemeral port; returns it (or -1).
  int bind_any(const std::string& host = "127.0.0.1") { return server_.bind_to_any_port(host); }
  bool bind(const std::string& host, int port) { return server_.bind_to_port(host, port); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }

  /// Blocks until every started run has finished.
  void wait_idle() {
    std::map<std::string, std::shared_ptr<Run>> runs;
    {
      std::lock_guard lock(mu_);
      runs = runs_;
    }
    for (auto& [id, r] : runs) {
      std::unique_lock lock(r->mu);
      r->cv.wait(lock, [&] { return r->state == RunState::kDone || r->state == RunState::kFailed; });
    }
  }

 private:
  struct Run {
    std::string id;
    std::string created_at;
    RunConfig config;
    std::filesystem::path dir;
    EventLog events;
    std::mutex mu;
    std::condition_variable cv;
    RunState state = RunState::kPending;
    std::string error;
    std::optional<RunReport> report;
    std::thread worker;
  };

  static void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
  }

  static void send_error(httplib::Response& res, int status, const std::string& message, json extra = json::object()) {
    extra["error"] = message;
    send_json(res, status, extra);
  }

  json handle(Run& r) {
    std::lock_guard lock(r.mu);
    json j{{"run_id", r.id}, {"state", to_string(r.state)}, {"created_at", r.created_at}, {"config", to_json(r.config)}};
    if (!r.error.empty()) j["error"] = r.error;
    if (r.report) j["totals"] = to_json(r.report->totals);
    return j;
  }

  std::shared_ptr<Run> find(const httplib::Request& req, httplib::Response& res) {
    std::string id = req.path_params.count("id") ? req.path_params.at("id") : std::string();
    std::lock_guard lock(mu_);
    auto it = runs_.find(id);
    if (it == runs_.end()) {
      send_error(res, 404, "run '" + id + "' not found");
      return nullptr;
    }
    return it->second;
  }

  std::string next_id() { return "run-" + prefix_ + "-" + std::to_string(++counter_); }

  void routes() {
    server_.new_task_queue = [n = opts_.http_threads] { return new httplib::ThreadPool(static_cast<std::size_t>(n)); };
    server_.set_payload_max_length(opts_.max_upload_bytes + 64 * 1024);

    server_.Post("/runs", [this](const httplib::Request& req, httplib::Response& res) { create(req, res); });

    server_.Get("/runs", [this](const httplib::Request&, httplib::Response& res) {
      std::map<std::string, std::shared_ptr<Run>> runs;
      {
        std::lock_guard lock(mu_);
        runs = runs_;
      }
      json list = json::array();
      for (auto& [id, r] : runs) list.push_back(handle(*r));
      send_json(res, 200, list);
    });

    server_.Get("/runs/:id", [this](const httplib::Request& req, httplib::Response& res) {
      if (auto r = find(req, res)) send_json(res, 200, handle(*r));
    });

    server_.Get("/runs/:id/events", [this](const httplib::Request& req, httplib::Response& res) {
      auto r = find(req, res);
      if (!r) return;
      res.set_chunked_content_provider("application/x-ndjson", [r, next = std::size_t{0}](std::size_t, httplib::DataSink& sink) mutable {
        bool done = false;
        auto batch = r->events.wait_from(next, std::chrono::milliseconds(250), &done);
        std::string chunk;
        for (const auto& e : batch) chunk += to_json(e).dump() + "\n";
        next += batch.size();
        if (!chunk.empty() && !sink.write(chunk.data(), chunk.size())) return false;
        if (done) sink.done();
        return true;
      });
    });

    server_.Get("/runs/:id/result", [this](const httplib::Request& req, httplib::Response& res) {
      auto r = find(req, res);
      if (!r) return;
      std::lock_guard lock(r->mu);
      if (r->state != RunState::kDone) return send_not_done(res, r->state);
      res.set_content(r->report->output_csv(), "text/csv");
    });

    server_.Get("/runs/:id/metrics", [this](const httplib::Request& req, httplib::Response& res) {
      auto r = find(req, res);
      if (!r) return;
      std::lock_guard lock(r->mu);
      if (r->state != RunState::kDone) return send_not_done(res, r->state);
      send_json(res, 200, to_json(*r->report));
    });

    server_.Delete("/runs/:id", [this](const httplib::Request& req, httplib::Response& res) {
      auto r = find(req, res);
      if (!r) return;
      {
        std::lock_guard lock(r->mu);
        if (r->state != RunState::kDone && r->state != RunState::kFailed) return send_not_done(res, r->state);
      }
      if (r->worker.joinable()) r->worker.join();
      {
        std::lock_guard lock(mu_);
        runs_.erase(r->id);
      }
      std::error_code ec;
      std::filesystem::remove_all(r->dir, ec);
      send_json(res, 200, {{"run_id", r->id}, {"deleted", true}});
    });
  }

  static void send_not_done(httplib::Response& res, RunState s) {
    send_error(res, 409, "run is " + std::string(to_string(s)), {{"state", to_string(s)}});
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    if (!req.has_file("csv")) return send_error(res, 400, "multipart field 'csv' is required");
    std::string csv_text = req.get_file_value("csv").content;
    if (csv_text.size() > opts_.max_upload_bytes)
      return send_error(res, 413, "upload exceeds " + std::to_string(opts_.max_upload_bytes) + " bytes");

    RunConfig config = opts_.defaults;
    json diagnostics = json::array();
    if (req.has_file("config")) {
      json doc = json::parse(req.get_file_value("config").content, nullptr, false);
      if (doc.is_discarded()) {
        diagnostics.push_back({{"field", "config"}, {"message", "not valid JSON"}});
      } else {
        try {
          config = config_from_json(doc, config);
        } catch (const Error& e) {
          diagnostics.push_back({{"field", "config"}, {"message", e.what()}});
        }
      }
    }
    if (diagnostics.empty()) {
      try {
        load_dataset(csv_text, dataset_options(config));
      } catch (const SchemaError& e) {
        diagnostics.push_back({{"field", "schema"}, {"message", e.what()}});
      } catch (const DatasetError& e) {
        diagnostics.push_back({{"field", "csv"}, {"message", e.what()}});
      }
    }
    if (!diagnostics.empty()) return send_error(res, 422, "invalid run request", {{"diagnostics", diagnostics}});

    RunSecrets secrets;
    if (req.has_header(kCredentialHeader)) secrets.provider_credential = req.get_header_value(kCredentialHeader);

    auto run = std::make_shared<Run>();
    run->config = config;
    run->created_at = format_timestamp(std::chrono::system_clock::now());
    {
      std::lock_guard lock(mu_);
      run->id = next_id();
      run->dir = opts_.root / run->id;
      runs_[run->id] = run;
    }
    std::filesystem::create_directories(run->dir);
    detail::write_file(run->dir / "input.csv", csv_text);
    json body = handle(*run);
    run->worker = std::thread([run, csv = std::move(csv_text), secrets = std::move(secrets)]() mutable {
      {
        std::lock_guard lock(run->mu);
        run->state = RunState::kRunning;
      }
      try {
        RunReport report = execute_run(run->config, csv, run->dir, run->events, secrets);
        std::lock_guard lock(run->mu);
        run->report = std::move(report);
        run->state = RunState::kDone;
      } catch (const std::exception& e) {
        run->events.close();
        std::lock_guard lock(run->mu);
        run->error = e.what();
        run->state = RunState::kFailed;
      }
      secrets.provider_credential.assign(secrets.provider_credential.size(), '\0');
      run->cv.notify_all();
    });
    send_json(res, 202, body);
  }

  ServiceOptions opts_;
  httplib::Server server_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Run>> runs_;
  std::atomic<std::uint64_t> counter_{0};
  std::string prefix_;
};

}  // namespace webvet
