#pragma once

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webvet/errors.hpp"

namespace webvet {

enum class DatePrecision { kYear = 0, kMonth = 1, kDay = 2 };

inline std::string_view to_string(DatePrecision p) {
  switch (p) {
    case DatePrecision::kDay: return "DAY";
    case DatePrecision::kMonth: return "MONTH";
    case DatePrecision::kYear: return "YEAR";
  }
  return "YEAR";
}

/// A date at its native granularity: "YYYY-MM-DD", "YYYY-MM" or "YYYY".
struct DateValue {
  std::string canonical;
  DatePrecision precision = DatePrecision::kYear;

  friend bool operator==(const DateValue&, const DateValue&) = default;
};

namespace detail {

inline bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

inline int days_in_month(int y, int m) {
  static constexpr std::array<int, 12> kDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[static_cast<std::size_t>(m - 1)];
}

inline std::string pad(int v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

inline int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

// English month names and their common abbreviations; 0 when not a month.
inline int month_from_name(std::string_view word) {
  std::string w;
  for (char c : word) {
    if (c == '.') continue;
    w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  static constexpr std::array<std::string_view, 12> kFull{
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  for (std::size_t i = 0; i < kFull.size(); ++i) {
    if (w == kFull[i]) return static_cast<int>(i) + 1;
    if (w.size() == 3 && kFull[i].substr(0, 3) == w) return static_cast<int>(i) + 1;
  }
  if (w == "sept") return 9;
  return 0;
}

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::optional<DateValue> make_date(int y, int m, int d) {
  if (m < 1 || m > 12) return std::nullopt;
  if (d < 1 || d > days_in_month(y, m)) return std::nullopt;
  return DateValue{pad(y, 4) + "-" + pad(m, 2) + "-" + pad(d, 2), DatePrecision::kDay};
}

inline std::optional<DateValue> make_month(int y, int m) {
  if (m < 1 || m > 12) return std::nullopt;
  return DateValue{pad(y, 4) + "-" + pad(m, 2), DatePrecision::kMonth};
}

inline bool is_year(std::string_view s) { return s.size() == 4 && all_digits(s); }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::optional<DateValue> try_normalize_date(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.empty()) return std::nullopt;

  // ISO forms.
  if (is_year(s)) return DateValue{std::string(s), DatePrecision::kYear};
  if (s.size() == 7 && s[4] == '-' && is_year(s.substr(0, 4)) && all_digits(s.substr(5, 2)))
    return make_month(to_int(s.substr(0, 4)), to_int(s.substr(5, 2)));
  if (s.size() == 10 && s[4] == '-' && s[7] == '-' && is_year(s.substr(0, 4)) && all_digits(s.substr(5, 2)) &&
      all_digits(s.substr(8, 2)))
    return make_date(to_int(s.substr(0, 4)), to_int(s.substr(5, 2)), to_int(s.substr(8, 2)));

  // MM/DD/YYYY, month first. Two valid readings that differ are ambiguous.
  if (auto first = s.find('/'); first != std::string_view::npos) {
    auto second = s.find('/', first + 1);
    if (second == std::string_view::npos) return std::nullopt;
    auto mm = s.substr(0, first);
    auto dd = s.substr(first + 1, second - first - 1);
    auto yyyy = s.substr(second + 1);
    if (!all_digits(mm) || !all_digits(dd) || mm.size() > 2 || dd.size() > 2 || !is_year(yyyy)) return std::nullopt;
    int m = to_int(mm), d = to_int(dd);
    if (m <= 12 && d <= 12 && m != d) return std::nullopt;
    return make_date(to_int(yyyy), m, d);
  }

  auto words = split_words(s);
  if (words.size() == 2) {
    // Month YYYY
    int m = month_from_name(words[0]);
    if (m != 0 && is_year(words[1])) return make_month(to_int(words[1]), m);
    return std::nullopt;
  }
  if (words.size() == 3) {
    // Month D, YYYY
    if (int m = month_from_name(words[0]); m != 0 && all_digits(words[1]) && words[1].size() <= 2 && is_year(words[2]))
      return make_date(to_int(words[2]), m, to_int(words[1]));
    // D Month YYYY
    if (int m = month_from_name(words[1]); m != 0 && all_digits(words[0]) && words[0].size() <= 2 && is_year(words[2]))
      return make_date(to_int(words[2]), m, to_int(words[0]));
  }
  return std::nullopt;
}

}  // namespace detail

/// Normalizes the accepted date spellings to a canonical ISO value at the
/// precision the input carries. Throws UnparseableDate for anything else.
inline DateValue normalize_date(std::string_view raw) {
  if (auto v = detail::try_normalize_date(raw)) return *v;
  throw UnparseableDate(std::string(raw));
}

inline bool is_canonical_date(std::string_view s) {
  auto v = detail::try_normalize_date(s);
  return v && v->canonical == s;
}

/// Drops components finer than `p` ("2021-08-14" at MONTH is "2021-08").
inline std::string truncate_date(const DateValue& d, DatePrecision p) {
  if (p >= d.precision) return d.canonical;
  return p == DatePrecision::kYear ? d.canonical.substr(0, 4) : d.canonical.substr(0, 7);
}

}  // namespace webvet
