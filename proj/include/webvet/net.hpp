#pragma once

// Network-facing adapters built on cpp-httplib: page transport, an
// OpenAI-compatible chat-completions provider, and a generic web search.

#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>

#include "webvet/gateway.hpp"
#include "webvet/retrieval.hpp"
#include "webvet/search.hpp"
#include "webvet/url.hpp"

namespace webvet {

struct HttpTransportOptions {
  std::string user_agent = "webvet/1.0 (+data validation; single-page fetch)";
  std::chrono::seconds timeout{30};
  std::size_t max_body_bytes = kMaxBodyBytes;
  // host -> "ip:port"; connects there while sending the original Host header.
  std::map<std::string, std::string> host_overrides;
};

namespace detail {

inline std::unique_ptr<httplib::Client> make_client(const Url& url, const std::map<std::string, std::string>& overrides,
                                                    std::chrono::seconds timeout) {
  std::string target = url.origin();
  if (auto it = overrides.find(url.host); it != overrides.end()) target = url.scheme + "://" + it->second;
  auto cli = std::make_unique<httplib::Client>(target);
  cli->set_connection_timeout(timeout);
  cli->set_read_timeout(timeout);
  cli->set_write_timeout(timeout);
  cli->set_follow_location(false);
  return cli;
}

}  // namespace detail

class HttpTransport : public Transport {
 public:
  explicit HttpTransport(HttpTransportOptions options = {}) : options_(std::move(options)) {}

  HttpResult get(const Url& url) override {
    HttpResult out;
    auto cli = detail::make_client(url, options_.host_overrides, options_.timeout);
    httplib::Headers headers{{"User-Agent", options_.user_agent}, {"Accept", "text/html,application/xhtml+xml;q=0.9,*/*;q=0.5"}};
    if (options_.host_overrides.count(url.host)) headers.emplace("Host", url.host);
    auto res = cli->Get(
        url.target, headers,
        [&](const httplib::Response& r) {
          out.status = r.status;
          out.content_type = r.get_header_value("Content-Type");
          out.location = r.get_header_value("Location");
          return true;
        },
        [&](const char* data, std::size_t len) {
          if (out.body.size() + len > options_.max_body_bytes) {
            out.body.append(data, options_.max_body_bytes - out.body.size());
            out.truncated = true;
            return false;
          }
          out.body.append(data, len);
          return true;
        });
    if (!res && !out.truncated) {
      out.error = httplib::to_string(res.error());
      out.status = 0;
      out.body.clear();
    }
    return out;
  }

 private:
  HttpTransportOptions options_;
};

struct OpenAiOptions {
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  std::string credential_env = "OPENAI_API_KEY";
  std::string credential;  // per-run key held in memory; overrides the environment
  std::chrono::seconds timeout{60};
  std::map<std::string, std::string> host_overrides;
};

/// Chat-completions provider. The credential comes from the per-run key or
/// the environment at call time and is never written anywhere.
class OpenAiProvider : public Provider {
 public:
  explicit OpenAiProvider(OpenAiOptions options) : options_(std::move(options)) {
    auto u = parse_url(options_.endpoint);
    if (!u) throw Error("invalid provider endpoint " + options_.endpoint);
    base_ = *u;
    if (base_.target.size() > 1 && base_.target.back() == '/') base_.target.pop_back();
  }

  ProviderResponse complete(const ProviderRequest& request) override {
    const char* key = options_.credential.empty() ? std::getenv(options_.credential_env.c_str()) : options_.credential.c_str();
    auto cli = detail::make_client(base_, options_.host_overrides, options_.timeout);
    httplib::Headers headers;
    if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
    if (options_.host_overrides.count(base_.host)) headers.emplace("Host", base_.host);
    json body{{"model", options_.model},
              {"temperature", 0},
              {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})}};
    std::string path = (base_.target == "/" ? std::string() : base_.target) + "/chat/completions";
    auto res = cli->Post(path, headers, body.dump(), "application/json");
    if (!res) throw ProviderError("provider unreachable: " + httplib::to_string(res.error()));
    if (res->status == 401 || res->status == 403) throw ProviderError("provider rejected credentials (HTTP " + std::to_string(res->status) + ")");
    if (res->status >= 400) throw ProviderError("provider returned HTTP " + std::to_string(res->status));
    auto j = json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw ProviderError("provider returned a non-JSON body");
    ProviderResponse out;
    try {
      out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      throw ProviderError("provider response has no message content");
    }
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
      out.prompt_tokens = u->value("prompt_tokens", 0);
      out.completion_tokens = u->value("completion_tokens", 0);
    } else {
      out.prompt_tokens = approx_tokens(request.prompt);
      out.completion_tokens = approx_tokens(out.text);
    }
    out.model_id = j.value("model", options_.model);
    if (out.model_id != options_.model) out.model_id = options_.model;  // price by configured id
    return out;
  }

  std::string model_id() const override { return options_.model; }

 private:
  OpenAiOptions options_;
  Url base_;
};

/// Generic web search endpoint. `url_template` contains `{query}`; the JSON
/// response may be an array or have a "results"/"items"/"organic" array whose
/// elements are URL strings or objects with "url" or "link".
class HttpSearch : public SearchAdapter {
 public:
  HttpSearch(std::string url_template, std::string credential_env = {}, std::map<std::string, std::string> host_overrides = {})
      : template_(std::move(url_template)), credential_env_(std::move(credential_env)), overrides_(std::move(host_overrides)) {}

  std::vector<std::string> search(const std::string& query) override {
    std::string url = text::replace_all(template_, "{query}", httplib::detail::encode_query_param(query));
    auto u = parse_url(url);
    if (!u) throw LookupFailed("invalid search URL " + url);
    auto cli = detail::make_client(*u, overrides_, std::chrono::seconds(30));
    httplib::Headers headers;
    if (!credential_env_.empty())
      if (const char* key = std::getenv(credential_env_.c_str()); key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
    if (overrides_.count(u->host)) headers.emplace("Host", u->host);
    auto res = cli->Get(u->target, headers);
    if (!res || res->status >= 400) throw LookupFailed("search request failed for '" + query + "'");
    auto j = json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw LookupFailed("search returned a non-JSON body");
    const json* list = &j;
    for (const char* k : {"results", "items", "organic"})
      if (j.is_object() && j.contains(k)) list = &j[k];
    std::vector<std::string> out;
    if (!list->is_array()) return out;
    for (const auto& e : *list) {
      if (e.is_string()) out.push_back(e.get<std::string>());
      else if (e.is_object() && e.contains("url")) out.push_back(e["url"].get<std::string>());
      else if (e.is_object() && e.contains("link")) out.push_back(e["link"].get<std::string>());
    }
    return out;
  }

 private:
  std::string template_;
  std::string credential_env_;
  std::map<std::string, std::string> overrides_;
};

}  // namespace webvet
