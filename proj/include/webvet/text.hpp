#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace webvet::text {

inline std::string lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string upper(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool contains(std::string_view hay, std::string_view needle) { return hay.find(needle) != std::string_view::npos; }

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  if (from.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

// 64-bit FNV-1a; stable across platforms, used for file names and transcript digests.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline std::string digest(std::string_view s) { return hex64(fnv1a64(s)); }

/// Substitutes `{{name}}` placeholders. Unknown placeholders are left as-is.
inline std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    auto open = tmpl.find("{{", i);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    out.append(tmpl.substr(i, open - i));
    std::string name(tmpl.substr(open + 2, close - open - 2));
    if (auto it = vars.find(name); it != vars.end()) {
      out += it->second;
    } else {
      out.append(tmpl.substr(open, close + 2 - open));
    }
    i = close + 2;
  }
  return out;
}

/// Keeps the first 80% of the budget from the head and the rest from the tail.
inline std::string truncate_head_biased(std::string_view s, std::size_t budget, bool* truncated = nullptr) {
  if (s.size() <= budget) {
    if (truncated) *truncated = false;
    return std::string(s);
  }
  if (truncated) *truncated = true;
  static constexpr std::string_view kMarker = "\n\n[... content truncated ...]\n\n";
  if (budget <= kMarker.size()) return std::string(s.substr(0, budget));
  std::size_t room = budget - kMarker.size();
  std::size_t head = room * 4 / 5;
  std::size_t tail = room - head;
  return std::string(s.substr(0, head)) + std::string(kMarker) + std::string(s.substr(s.size() - tail));
}

}  // namespace webvet::text
