#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace webvet {

struct Url {
  std::string scheme;  // lowercase, "http" or "https"
  std::string host;    // lowercase
  int port = 0;        // explicit or scheme default
  std::string target;  // path + query, always starting with '/'

  std::string origin() const {
    bool default_port = (scheme == "http" && port == 80) || (scheme == "https" && port == 443);
    return scheme + "://" + host + (default_port ? "" : ":" + std::to_string(port));
  }
  std::string str() const { return origin() + target; }
};

inline std::optional<Url> parse_url(std::string_view text) {
  auto sep = text.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  Url u;
  for (char c : text.substr(0, sep)) u.scheme += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (u.scheme != "http" && u.scheme != "https") return std::nullopt;
  auto rest = text.substr(sep + 3);
  auto slash = rest.find_first_of("/?#");
  auto authority = rest.substr(0, slash);
  if (authority.find('@') != std::string_view::npos) return std::nullopt;
  auto colon = authority.rfind(':');
  std::string_view host = authority;
  u.port = u.scheme == "https" ? 443 : 80;
  if (colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    auto port = authority.substr(colon + 1);
    if (port.empty() || port.size() > 5 || !std::all_of(port.begin(), port.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      return std::nullopt;
    u.port = std::stoi(std::string(port));
    if (u.port == 0 || u.port > 65535) return std::nullopt;
  }
  if (host.empty()) return std::nullopt;
  for (char c : host) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_')) return std::nullopt;
    u.host += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (u.host.front() == '.' || u.host.back() == '.') return std::nullopt;
  std::string target = slash == std::string_view::npos ? std::string("/") : std::string(rest.substr(slash));
  if (auto hash = target.find('#'); hash != std::string::npos) target.erase(hash);
  if (target.empty() || target.front() != '/') target.insert(0, "/");
  u.target = std::move(target);
  return u;
}

inline bool is_absolute_url(std::string_view text) { return parse_url(text).has_value(); }

/// Resolves a redirect Location against the URL that produced it.
inline std::optional<Url> resolve_url(const Url& base, std::string_view ref) {
  if (ref.find("://") != std::string_view::npos) return parse_url(ref);
  if (ref.substr(0, 2) == "//") return parse_url(base.scheme + ":" + std::string(ref));
  Url out = base;
  if (!ref.empty() && ref.front() == '/') {
    out.target = std::string(ref);
  } else {
    auto dir = base.target.substr(0, base.target.rfind('/') + 1);
    out.target = dir + std::string(ref);
  }
  return out;
}

/// Approximate registrable domain: the last two labels, or three when the
/// second-level label is a common public suffix under a country code
/// ("bbc.co.uk"). IP literals are returned unchanged.
inline std::string registrable_domain(std::string_view host) {
  std::vector<std::string> labels;
  std::string cur;
  for (char c : host) {
    if (c == '.') {
      labels.push_back(cur);
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  labels.push_back(cur);
  bool numeric = std::all_of(host.begin(), host.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.'; });
  if (numeric || labels.size() <= 2) return std::string(host);
  std::size_t keep = 2;
  static const std::vector<std::string> kSecondLevel{"co", "com", "gov", "ac", "org", "net", "edu", "gouv", "gob"};
  const auto& second = labels[labels.size() - 2];
  if (labels.back().size() == 2 && std::find(kSecondLevel.begin(), kSecondLevel.end(), second) != kSecondLevel.end())
    keep = 3;
  keep = std::min(keep, labels.size());
  std::string out;
  for (std::size_t i = labels.size() - keep; i < labels.size(); ++i) {
    if (!out.empty()) out += '.';
    out += labels[i];
  }
  return out;
}

}  // namespace webvet
