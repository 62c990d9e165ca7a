#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "webvet/errors.hpp"
#include "webvet/structured.hpp"

namespace webvet {

/// Query text in, ranked result URLs out.
class SearchAdapter {
 public:
  virtual ~SearchAdapter() = default;
  virtual std::vector<std::string> search(const std::string& query) = 0;
};

/// File-backed search: `{"query text": ["url1", "url2"], "*": [...]}`.
class FixtureSearch : public SearchAdapter {
 public:
  explicit FixtureSearch(std::map<std::string, std::vector<std::string>> results) : results_(std::move(results)) {}

  static std::shared_ptr<FixtureSearch> from_json(const json& j) {
    std::map<std::string, std::vector<std::string>> results;
    for (const auto& [query, urls] : j.items()) results[query] = urls.get<std::vector<std::string>>();
    return std::make_shared<FixtureSearch>(std::move(results));
  }

  static std::shared_ptr<FixtureSearch> load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open search fixture " + path);
    return from_json(json::parse(in));
  }

  std::vector<std::string> search(const std::string& query) override {
    std::lock_guard lock(mu_);
    queries_.push_back(query);
    if (auto it = results_.find(query); it != results_.end()) return it->second;
    if (auto it = results_.find("*"); it != results_.end()) return it->second;
    return {};
  }

  std::vector<std::string> queries() const {
    std::lock_guard lock(mu_);
    return queries_;
  }

 private:
  std::map<std::string, std::vector<std::string>> results_;
  mutable std::mutex mu_;
  std::vector<std::string> queries_;
};

}  // namespace webvet
