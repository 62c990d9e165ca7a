#pragma once

// Deterministic HTML to markdown conversion. Keeps headings, paragraphs,
// lists, tables and link text; drops scripts, styles and document head.

#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "webvet/text.hpp"

namespace webvet {

namespace detail {

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x110000) {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Named references seen in practice; &nbsp; becomes a plain space.
inline const std::map<std::string, std::string>& named_entities() {
  static const std::map<std::string, std::string> table{
      {"nbsp", " "},
      {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"ndash", "\xE2\x80\x93"},
      {"mdash", "\xE2\x80\x94"}, {"hellip", "\xE2\x80\xA6"}, {"lsquo", "\xE2\x80\x98"}, {"rsquo", "\xE2\x80\x99"},
      {"ldquo", "\xE2\x80\x9C"}, {"rdquo", "\xE2\x80\x9D"}, {"laquo", "\xC2\xAB"}, {"raquo", "\xC2\xBB"},
      {"bull", "\xE2\x80\xA2"}, {"middot", "\xC2\xB7"}, {"deg", "\xC2\xB0"}, {"times", "\xC3\x97"},
      {"divide", "\xC3\xB7"}, {"euro", "\xE2\x82\xAC"}, {"pound", "\xC2\xA3"}, {"yen", "\xC2\xA5"},
      {"cent", "\xC2\xA2"}, {"copy", "\xC2\xA9"}, {"reg", "\xC2\xAE"}, {"trade", "\xE2\x84\xA2"},
      {"sect", "\xC2\xA7"}, {"para", "\xC2\xB6"}, {"plusmn", "\xC2\xB1"}, {"frac12", "\xC2\xBD"},
      {"frac14", "\xC2\xBC"}, {"frac34", "\xC2\xBE"}, {"sup2", "\xC2\xB2"}, {"sup3", "\xC2\xB3"},
      {"iexcl", "\xC2\xA1"}, {"iquest", "\xC2\xBF"}, {"Agrave", "\xC3\x80"},
      {"Aacute", "\xC3\x81"}, {"Acirc", "\xC3\x82"}, {"Atilde", "\xC3\x83"}, {"Auml", "\xC3\x84"},
      {"Aring", "\xC3\x85"}, {"AElig", "\xC3\x86"}, {"Ccedil", "\xC3\x87"}, {"Egrave", "\xC3\x88"},
      {"Eacute", "\xC3\x89"}, {"Ecirc", "\xC3\x8A"}, {"Euml", "\xC3\x8B"}, {"Igrave", "\xC3\x8C"},
      {"Iacute", "\xC3\x8D"}, {"Icirc", "\xC3\x8E"}, {"Iuml", "\xC3\x8F"}, {"ETH", "\xC3\x90"},
      {"Ntilde", "\xC3\x91"}, {"Ograve", "\xC3\x92"}, {"Oacute", "\xC3\x93"}, {"Ocirc", "\xC3\x94"},
      {"Otilde", "\xC3\x95"}, {"Ouml", "\xC3\x96"}, {"Oslash", "\xC3\x98"}, {"Ugrave", "\xC3\x99"},
      {"Uacute", "\xC3\x9A"}, {"Ucirc", "\xC3\x9B"}, {"Uuml", "\xC3\x9C"}, {"Yacute", "\xC3\x9D"},
      {"THORN", "\xC3\x9E"}, {"szlig", "\xC3\x9F"}, {"agrave", "\xC3\xA0"}, {"aacute", "\xC3\xA1"},
      {"acirc", "\xC3\xA2"}, {"atilde", "\xC3\xA3"}, {"auml", "\xC3\xA4"}, {"aring", "\xC3\xA5"},
      {"aelig", "\xC3\xA6"}, {"ccedil", "\xC3\xA7"}, {"egrave", "\xC3\xA8"}, {"eacute", "\xC3\xA9"},
      {"ecirc", "\xC3\xAA"}, {"euml", "\xC3\xAB"}, {"igrave", "\xC3\xAC"}, {"iacute", "\xC3\xAD"},
      {"icirc", "\xC3\xAE"}, {"iuml", "\xC3\xAF"}, {"eth", "\xC3\xB0"}, {"ntilde", "\xC3\xB1"},
      {"ograve", "\xC3\xB2"}, {"oacute", "\xC3\xB3"}, {"ocirc", "\xC3\xB4"}, {"otilde", "\xC3\xB5"},
      {"ouml", "\xC3\xB6"}, {"oslash", "\xC3\xB8"}, {"ugrave", "\xC3\xB9"}, {"uacute", "\xC3\xBA"},
      {"ucirc", "\xC3\xBB"}, {"uuml", "\xC3\xBC"}, {"yacute", "\xC3\xBD"}, {"thorn", "\xC3\xBE"},
      {"yuml", "\xC3\xBF"}};
  return table;
}

inline std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += '&';
      continue;
    }
    auto name = s.substr(i + 1, semi - i - 1);
    if (!name.empty() && name[0] == '#') {
      std::uint32_t cp = 0;
      bool ok = name.size() > 1;
      bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
      for (std::size_t k = hex ? 2 : 1; k < name.size() && ok; ++k) {
        char c = name[k];
        if (hex && std::isxdigit(static_cast<unsigned char>(c))) {
          cp = cp * 16 + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : (std::tolower(c) - 'a' + 10));
        } else if (!hex && std::isdigit(static_cast<unsigned char>(c))) {
          cp = cp * 10 + static_cast<std::uint32_t>(c - '0');
        } else {
          ok = false;
        }
        if (cp > 0x10FFFF) ok = false;
      }
      if (ok && !(hex && name.size() == 2)) {
        append_utf8(out, cp == 0xA0 ? ' ' : cp);
        i = semi;
        continue;
      }
    } else if (auto it = named_entities().find(std::string(name)); it != named_entities().end()) {
      out += it->second;
      i = semi;
      continue;
    }
    out += '&';
  }
  return out;
}

class MarkdownWriter {
 public:
  std::string finish() {
    flush_cells();
    std::string s = out_;
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
    return s.empty() ? s : s + "\n";
  }

  void text(std::string_view raw) {
    std::string decoded = decode_entities(raw);
    std::string& sink = in_cell_ ? cell_ : out_;
    for (char c : decoded) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        pending_space_ = true;
        continue;
      }
      if (pending_space_ && !sink.empty() && sink.back() != '\n' && sink.back() != ' ') sink += ' ';
      pending_space_ = false;
      if (!in_cell_ && at_line_start()) out_ += prefix_;
      prefix_.clear();
      sink += c;
    }
  }

  void ensure_newlines(int n) {
    pending_space_ = false;
    if (in_cell_) {
      if (!cell_.empty() && cell_.back() != ' ') cell_ += ' ';
      return;
    }
    prefix_.clear();
    if (out_.empty()) return;
    while (!out_.empty() && out_.back() == ' ') out_.pop_back();
    int have = 0;
    for (auto it = out_.rbegin(); it != out_.rend() && *it == '\n'; ++it) ++have;
    for (; have < n; ++have) out_ += '\n';
  }

  // Prefix written before the next text on a fresh line ("## ", "- ").
  void line_prefix(std::string p) {
    ensure_newlines(1);
    prefix_ = std::move(p);
  }

  void begin_table() {
    ensure_newlines(2);
    rows_.clear();
  }
  void begin_row() {
    flush_cells();
    rows_.emplace_back();
  }
  void begin_cell() {
    flush_cells();
    if (rows_.empty()) rows_.emplace_back();
    in_cell_ = true;
    cell_.clear();
  }
  void end_cell() { flush_cells(); }
  void end_table() {
    flush_cells();
    std::size_t width = 0;
    for (const auto& r : rows_) width = std::max(width, r.size());
    bool first = true;
    for (const auto& r : rows_) {
      if (r.empty()) continue;
      out_ += '|';
      for (std::size_t i = 0; i < width; ++i) out_ += " " + (i < r.size() ? r[i] : std::string()) + " |";
      out_ += '\n';
      if (first) {
        out_ += '|';
        for (std::size_t i = 0; i < width; ++i) out_ += " --- |";
        out_ += '\n';
        first = false;
      }
    }
    rows_.clear();
    ensure_newlines(2);
  }
  bool in_table() const { return table_depth > 0; }

  int table_depth = 0;

 private:
  bool at_line_start() const { return out_.empty() || out_.back() == '\n'; }

  void flush_cells() {
    if (!in_cell_) return;
    std::string c{text::trim(cell_)};
    c = text::replace_all(std::move(c), "|", "\\|");
    rows_.back().push_back(std::move(c));
    cell_.clear();
    in_cell_ = false;
  }

  std::string out_;
  std::string prefix_;
  bool pending_space_ = false;
  bool in_cell_ = false;
  std::string cell_;
  std::vector<std::vector<std::string>> rows_;
};

inline bool is_block_tag(std::string_view t) {
  static constexpr std::string_view kBlocks[] = {"p",      "div",    "section", "article", "header", "footer",
                                                 "main",   "nav",    "aside",   "blockquote", "figure", "form",
                                                 "pre",    "address", "dl",     "dt",      "dd",     "body",
                                                 "figcaption", "caption", "html"};
  for (auto b : kBlocks)
    if (t == b) return true;
  return false;
}

}  // namespace detail

inline std::string html_to_markdown(std::string_view html) {
  detail::MarkdownWriter w;
  struct ListState {
    bool ordered;
    int counter;
  };
  std::vector<ListState> lists;
  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] != '<') {
      auto next = html.find('<', i);
      if (next == std::string_view::npos) next = html.size();
      w.text(html.substr(i, next - i));
      i = next;
      continue;
    }
    if (html.substr(i, 4) == "<!--") {
      auto end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
      auto end = html.find('>', i);
      i = end == std::string_view::npos ? html.size() : end + 1;
      continue;
    }
    // Tag: find the closing '>' outside quoted attribute values.
    std::size_t j = i + 1;
    char quote = 0;
    for (; j < html.size(); ++j) {
      char c = html[j];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '>') {
        break;
      }
    }
    std::string_view inner = html.substr(i + 1, j - i - 1);
    i = j < html.size() ? j + 1 : html.size();
    bool closing = !inner.empty() && inner.front() == '/';
    if (closing) inner.remove_prefix(1);
    std::size_t name_end = 0;
    while (name_end < inner.size() && (std::isalnum(static_cast<unsigned char>(inner[name_end])))) ++name_end;
    std::string tag = text::lower(inner.substr(0, name_end));
    if (tag.empty()) {
      w.text("<");
      continue;
    }

    if (!closing && (tag == "script" || tag == "style" || tag == "noscript" || tag == "template" || tag == "svg" ||
                     tag == "head" || tag == "iframe")) {
      std::string close = "</" + tag;
      std::size_t pos = i;
      while (true) {
        pos = html.find('<', pos);
        if (pos == std::string_view::npos) break;
        if (text::lower(html.substr(pos, close.size())) == close) break;
        ++pos;
      }
      if (pos == std::string_view::npos) {
        i = html.size();
      } else {
        auto end = html.find('>', pos);
        i = end == std::string_view::npos ? html.size() : end + 1;
      }
      continue;
    }

    if (tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6') {
      if (closing) {
        w.ensure_newlines(2);
      } else {
        w.ensure_newlines(2);
        w.line_prefix(std::string(static_cast<std::size_t>(tag[1] - '0'), '#') + " ");
      }
    } else if (tag == "ul" || tag == "ol") {
      if (closing) {
        if (!lists.empty()) lists.pop_back();
        w.ensure_newlines(lists.empty() ? 2 : 1);
      } else {
        w.ensure_newlines(lists.empty() ? 2 : 1);
        lists.push_back({tag == "ol", 0});
      }
    } else if (tag == "li") {
      if (closing) {
        w.ensure_newlines(1);
      } else {
        std::string indent(lists.empty() ? 0 : (lists.size() - 1) * 2, ' ');
        std::string marker = "- ";
        if (!lists.empty() && lists.back().ordered) marker = std::to_string(++lists.back().counter) + ". ";
        w.line_prefix(indent + marker);
      }
    } else if (tag == "table") {
      if (closing) {
        if (w.table_depth > 0 && --w.table_depth == 0) w.end_table();
      } else if (w.table_depth++ == 0) {
        w.begin_table();
      }
    } else if (tag == "tr" && w.in_table()) {
      if (!closing) w.begin_row();
    } else if ((tag == "td" || tag == "th") && w.in_table()) {
      if (closing) w.end_cell();
      else w.begin_cell();
    } else if (tag == "br") {
      w.ensure_newlines(1);
    } else if (tag == "hr") {
      w.ensure_newlines(2);
      w.text("---");
      w.ensure_newlines(2);
    } else if (detail::is_block_tag(tag)) {
      w.ensure_newlines(2);
    }
  }
  return w.finish();
}

}  // namespace webvet
