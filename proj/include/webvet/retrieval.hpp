#pragma once

// Content retrieval: fetch a source page once per run, convert it to
// markdown, classify its layout and pick the reading hint for fact-checking.

#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "webvet/gateway.hpp"
#include "webvet/html_markdown.hpp"
#include "webvet/prompts.hpp"
#include "webvet/single_flight.hpp"
#include "webvet/text.hpp"
#include "webvet/url.hpp"

namespace webvet {

inline constexpr int kMaxRedirects = 5;
inline constexpr std::size_t kMaxBodyBytes = 2 * 1024 * 1024;

struct PageContent {
  std::string url;
  std::string final_url;
  int http_status = 0;  // 0 for transport failure
  std::string markdown;  // empty when the fetch failed or the body was not HTML
  std::chrono::system_clock::time_point fetched_at{};
  bool truncated = false;
  std::string error;

  bool usable() const { return http_status > 0 && http_status < 400 && !markdown.empty(); }
};

/// One HTTP exchange, no redirect following.
struct HttpResult {
  int status = 0;
  std::string content_type;
  std::string body;
  std::string location;   // redirect target, when 3xx
  std::string final_url;  // set by transports that resolve redirects themselves (replay)
  bool truncated = false;
  std::string error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResult get(const Url& url) = 0;
  /// False when responses come from local snapshots.
  virtual bool uses_network() const { return true; }
};

/// Enforces a minimum interval between requests to the same host, globally
/// across all workers sharing the limiter.
class HostRateLimiter {
 public:
  explicit HostRateLimiter(std::chrono::milliseconds interval) : interval_(interval) {}

  void acquire(const std::string& host) {
    if (interval_.count() <= 0) return;
    std::chrono::steady_clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      auto now = std::chrono::steady_clock::now();
      auto& next = next_[host];
      slot = std::max(now, next);
      next = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  std::chrono::milliseconds interval_;
  std::mutex mu_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_;
};

struct FetchRecord {
  std::string url;
  std::string final_url;
  int http_status = 0;
  int requests = 0;  // network requests including redirect hops
};

/// Writes raw HTML and converted markdown per URL into a run directory, and
/// replays them later without touching the network.
class SnapshotStore {
 public:
  explicit SnapshotStore(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void save(const std::string& url, const std::string& final_url, const HttpResult& r, const std::string& markdown) {
    std::string stem = text::digest(url);
    {
      std::ofstream(dir_ / (stem + ".html"), std::ios::binary) << r.body;
      std::ofstream(dir_ / (stem + ".md"), std::ios::binary) << markdown;
    }
    json entry{{"url", url},
               {"final_url", final_url},
               {"status", r.status},
               {"content_type", r.content_type},
               {"truncated", r.truncated},
               {"file", stem + ".html"}};
    std::lock_guard lock(mu_);
    std::ofstream(dir_ / "index.jsonl", std::ios::app) << entry.dump() << "\n";
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex mu_;
};

/// Serves pages recorded by SnapshotStore. Unknown URLs are transport failures.
class ReplayTransport : public Transport {
 public:
  bool uses_network() const override { return false; }

  explicit ReplayTransport(const std::filesystem::path& dir) {
    std::ifstream in(dir / "index.jsonl");
    if (!in) throw Error("no snapshot index in " + dir.string());
    std::string line;
    while (std::getline(in, line)) {
      if (text::trim(line).empty()) continue;
      auto j = json::parse(line);
      HttpResult r;
      r.status = j.at("status").get<int>();
      r.content_type = j.value("content_type", "");
      r.final_url = j.value("final_url", "");
      r.truncated = j.value("truncated", false);
      std::ifstream body(dir / j.at("file").get<std::string>(), std::ios::binary);
      r.body.assign(std::istreambuf_iterator<char>(body), std::istreambuf_iterator<char>());
      pages_[j.at("url").get<std::string>()] = std::move(r);
    }
  }

  HttpResult get(const Url& url) override {
    auto it = pages_.find(url.str());
    if (it == pages_.end()) {
      HttpResult r;
      r.error = "not in snapshot";
      return r;
    }
    return it->second;
  }

 private:
  std::map<std::string, HttpResult> pages_;
};

struct FetchOptions {
  std::chrono::milliseconds politeness{1000};
};

/// fetch_page with a run-scoped cache: concurrent and repeated requests for
/// one URL share a single fetch. Failures are encoded in PageContent.
class PageFetcher {
 public:
  PageFetcher(std::shared_ptr<Transport> transport, FetchOptions options = {},
              std::shared_ptr<SnapshotStore> snapshots = nullptr)
      : transport_(std::move(transport)), limiter_(options.politeness), snapshots_(std::move(snapshots)) {}

  PageContent fetch(const std::string& url) {
    return cache_.get(url, [&] { return fetch_uncached(url); });
  }

  std::vector<FetchRecord> records() const {
    std::lock_guard lock(mu_);
    return records_;
  }

  std::size_t network_requests() const {
    if (!transport_->uses_network()) return 0;
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& r : records_) n += static_cast<std::size_t>(r.requests);
    return n;
  }

 private:
  PageContent fetch_uncached(const std::string& url) {
    PageContent page;
    page.url = url;
    page.final_url = url;
    FetchRecord record{url, url, 0, 0};
    auto parsed = parse_url(url);
    if (!parsed) {
      page.error = "invalid URL";
      log(record);
      return page;
    }
    Url current = *parsed;
    HttpResult result;
    for (int hop = 0;; ++hop) {
      limiter_.acquire(current.host);
      result = transport_->get(current);
      ++record.requests;
      if (!result.final_url.empty()) {
        if (auto f = parse_url(result.final_url)) current = *f;
      }
      bool redirect = result.status >= 300 && result.status < 400 && !result.location.empty();
      if (!redirect) break;
      auto next = resolve_url(current, result.location);
      if (!next || hop + 1 > kMaxRedirects) {
        result.error = next ? "too many redirects" : "bad redirect location";
        break;
      }
      current = *next;
    }
    page.final_url = current.str();
    page.http_status = result.status;
    page.error = result.error;
    page.truncated = result.truncated;
    page.fetched_at = std::chrono::system_clock::now();
    bool html = text::contains(text::lower(result.content_type), "html") ||
                (result.content_type.empty() && text::contains(text::lower(result.body.substr(0, 512)), "<html"));
    if (result.status >= 200 && result.status < 400 && html && !result.body.empty())
      page.markdown = html_to_markdown(result.body);
    record.final_url = page.final_url;
    record.http_status = page.http_status;
    if (snapshots_ && result.status != 0) snapshots_->save(url, page.final_url, result, page.markdown);
    log(record);
    return page;
  }

  void log(const FetchRecord& r) {
    std::lock_guard lock(mu_);
    records_.push_back(r);
  }

  std::shared_ptr<Transport> transport_;
  HostRateLimiter limiter_;
  std::shared_ptr<SnapshotStore> snapshots_;
  SingleFlight<std::string, PageContent> cache_;
  mutable std::mutex mu_;
  std::vector<FetchRecord> records_;
};

// ---------------------------------------------------------------------------
// Layout

enum class LayoutClass { kArticle, kDirectoryListing, kSearchResults, kHomepage, kErrorPage, kOther };

inline constexpr std::array<LayoutClass, 6> kAllLayoutClasses{LayoutClass::kArticle,    LayoutClass::kDirectoryListing,
                                                              LayoutClass::kSearchResults, LayoutClass::kHomepage,
                                                              LayoutClass::kErrorPage,  LayoutClass::kOther};

inline std::string_view to_string(LayoutClass c) {
  switch (c) {
    case LayoutClass::kArticle: return "ARTICLE";
    case LayoutClass::kDirectoryListing: return "DIRECTORY_LISTING";
    case LayoutClass::kSearchResults: return "SEARCH_RESULTS";
    case LayoutClass::kHomepage: return "HOMEPAGE";
    case LayoutClass::kErrorPage: return "ERROR_PAGE";
    case LayoutClass::kOther: return "OTHER";
  }
  return "OTHER";
}

inline std::optional<LayoutClass> parse_layout_class(std::string_view s) {
  std::string u = text::upper(text::trim(s));
  for (char& c : u)
    if (c == ' ' || c == '-') c = '_';
  for (auto c : kAllLayoutClasses)
    if (to_string(c) == u) return c;
  return std::nullopt;
}

struct LayoutResult {
  LayoutClass layout = LayoutClass::kOther;
  std::string rationale;
};

inline constexpr std::size_t kLayoutMarkdownBudget = 6000;

inline const ResponseShape& layout_response_shape() {
  static const ResponseShape shape{{"layout", ValueKind::kText}, {"rationale", ValueKind::kText, true}};
  return shape;
}

/// Unfetchable pages are ERROR_PAGE without a model call; everything else gets
/// one LAYOUT call constrained to the six labels (unknown labels map to OTHER).
inline LayoutResult classify_layout(const PageContent& page, Gateway& gateway) {
  if (page.http_status >= 400 || page.http_status == 0 || page.markdown.empty())
    return {LayoutClass::kErrorPage, page.http_status == 0 ? "fetch failed: " + page.error
                                                            : "HTTP " + std::to_string(page.http_status) + " or empty body"};
  std::string prompt = text::render(prompts::kLayout, {{"url", page.final_url},
                                                       {"markdown", text::truncate_head_biased(page.markdown, kLayoutMarkdownBudget)},
                                                       {"shape", describe_shape(layout_response_shape())}});
  try {
    auto r = gateway.complete_structured(AgentKind::kLayout, page.final_url, prompt, layout_response_shape());
    auto label = r.value.at("layout").get<std::string>();
    auto rationale = r.value.value("rationale", std::string());
    if (auto c = parse_layout_class(label)) return {*c, rationale};
    return {LayoutClass::kOther, "unrecognized label '" + label + "'"};
  } catch (const ParseExhausted&) {
    return {LayoutClass::kOther, "unparseable classification"};
  }
}

/// Fixed reading instruction per layout class.
inline std::string_view analysis_hint(LayoutClass layout) {
  switch (layout) {
    case LayoutClass::kArticle:
      return "This page is an article. Read the prose closely and locate the passage that describes the data point; "
             "the relevant facts may be spread across several paragraphs.";
    case LayoutClass::kDirectoryListing:
      return "This page is a directory listing. Do not dismiss the page as purely navigational: treat the text within "
             "list items and table rows as potential data points and check whether one of them matches the data point.";
    case LayoutClass::kSearchResults:
      return "This page is a list of search results. Result titles and snippets are summaries of other pages; accept "
             "only facts stated explicitly in a snippet and do not infer from titles alone.";
    case LayoutClass::kHomepage:
      return "This page is a site homepage made mostly of navigation and teasers. Support only counts if a teaser "
             "explicitly states the facts of the data point.";
    case LayoutClass::kErrorPage:
      return "This page is an error page and has no usable content.";
    case LayoutClass::kOther:
      return "The page structure is unclassified. Read all of the text and judge it on its content.";
  }
  return "";
}

}  // namespace webvet
