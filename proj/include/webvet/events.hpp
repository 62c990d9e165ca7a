#pragma once

// Per-row status events and the append-only, multi-consumer event log.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "webvet/gateway.hpp"

namespace webvet {

enum class RowStatus { kProcessing, kAccept, kReject, kRemediated, kDiscovered };

inline std::string_view to_string(RowStatus s) {
  switch (s) {
    case RowStatus::kProcessing: return "PROCESSING";
    case RowStatus::kAccept: return "ACCEPT";
    case RowStatus::kReject: return "REJECT";
    case RowStatus::kRemediated: return "REMEDIATED";
    case RowStatus::kDiscovered: return "DISCOVERED";
  }
  return "PROCESSING";
}

inline bool is_terminal(RowStatus s) { return s != RowStatus::kProcessing; }

/// Stage vocabulary: the agents plus the deterministic steps around them.
namespace stage {
inline constexpr std::string_view kIntake = "INTAKE";
inline constexpr std::string_view kRetrieval = "RETRIEVAL";
inline constexpr std::string_view kArbiter = "ARBITER";
inline constexpr std::string_view kFormatter = "FORMATTER";
inline constexpr std::string_view kLookup = "FACT_LOOKUP";
inline constexpr std::string_view kApply = "APPLY";
inline constexpr std::string_view kRules = "RULES";
}  // namespace stage

struct RowEvent {
  std::uint64_t seq = 0;  // assigned by the log
  std::string row_id;
  std::string stage;
  RowStatus status = RowStatus::kProcessing;
  std::optional<std::string> reason;
  std::chrono::system_clock::time_point timestamp;
  std::optional<CallUsage> usage_delta;
};

inline std::string format_timestamp(std::chrono::system_clock::time_point tp) {
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(tp.time_since_epoch()).count();
  std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms % 1000));
  return out;
}

inline json to_json(const CallUsage& u) {
  return {{"prompt_tokens", u.prompt_tokens},
          {"completion_tokens", u.completion_tokens},
          {"wall_time_ms", u.wall_time.count()},
          {"model_id", u.model_id}};
}

inline json to_json(const RowEvent& e, bool with_timing = true) {
  json j{{"row_id", e.row_id}, {"stage", e.stage}, {"status", to_string(e.status)}};
  if (with_timing) {
    j["seq"] = e.seq;
    j["timestamp"] = format_timestamp(e.timestamp);
  }
  if (e.reason) j["reason"] = *e.reason;
  if (e.usage_delta) {
    json u = to_json(*e.usage_delta);
    if (!with_timing) u.erase("wall_time_ms");
    j["usage_delta"] = u;
  }
  return j;
}

/// Thread-safe append-only sequence. Readers either snapshot or block for
/// events past an index; every reader sees the same order.
class EventLog {
 public:
  void append(RowEvent e) {
    std::lock_guard order(sink_mu_);  // sink sees events in seq order
    {
      std::lock_guard lock(mu_);
      e.seq = events_.size();
      if (e.timestamp == std::chrono::system_clock::time_point{}) e.timestamp = std::chrono::system_clock::now();
      events_.push_back(e);
    }
    cv_.notify_all();
    if (sink_) sink_(e);
  }

  /// Marks the stream finished; blocked readers wake and see end-of-stream.
  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }

  std::vector<RowEvent> snapshot() const {
    std::lock_guard lock(mu_);
    return events_;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return events_.size();
  }

  /// Events from index `from` on, waiting up to `timeout` for at least one.
  /// An empty result with `*done` set means the stream has ended.
  std::vector<RowEvent> wait_from(std::size_t from, std::chrono::milliseconds timeout, bool* done) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return events_.size() > from || closed_; });
    std::vector<RowEvent> out;
    if (from < events_.size()) out.assign(events_.begin() + static_cast<std::ptrdiff_t>(from), events_.end());
    if (done) *done = closed_ && from + out.size() >= events_.size();
    return out;
  }

  /// Called synchronously after each append (e.g. for the CLI status log).
  void set_sink(std::function<void(const RowEvent&)> sink) {
    std::lock_guard lock(sink_mu_);
    sink_ = std::move(sink);
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<RowEvent> events_;
  bool closed_ = false;
  std::mutex sink_mu_;
  std::function<void(const RowEvent&)> sink_;
};

}  // namespace webvet
