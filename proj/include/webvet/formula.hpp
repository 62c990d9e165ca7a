#pragma once

// Arithmetic-only formula language for CALCULATION remediation plans:
// numeric literals, named operands, + - * /, unary minus and parentheses.

#include <cctype>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "webvet/decimal.hpp"
#include "webvet/errors.hpp"

namespace webvet {

namespace detail {

class FormulaParser {
 public:
  FormulaParser(std::string_view src, const std::map<std::string, Decimal>* env, std::set<std::string>* names)
      : src_(src), env_(env), names_(names) {}

  Decimal parse() {
    Decimal v = expression();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return v;
  }

 private:
  Decimal expression() {
    Decimal v = term();
    for (;;) {
      skip_ws();
      if (eat('+')) v = v + term();
      else if (eat('-')) v = v - term();
      else return v;
    }
  }

  Decimal term() {
    Decimal v = factor();
    for (;;) {
      skip_ws();
      if (eat('*')) v = v * factor();
      else if (eat('/')) {
        Decimal d = factor();
        if (env_ && d.sign() == 0) throw FormulaError("division by zero");
        v = env_ ? v / d : v;
      } else return v;
    }
  }

  Decimal factor() {
    skip_ws();
    if (eat('-')) return Decimal(0) - factor();
    if (eat('+')) return factor();
    if (eat('(')) {
      if (++depth_ > 64) fail("nesting too deep");
      Decimal v = expression();
      skip_ws();
      if (!eat(')')) fail("missing ')'");
      --depth_;
      return v;
    }
    if (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) return number();
    if (pos_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) return operand();
    fail(pos_ < src_.size() ? "unexpected '" + std::string(1, src_[pos_]) + "'" : "unexpected end of formula");
  }

  Decimal number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    auto text = src_.substr(start, pos_ - start);
    if (pos_ < src_.size() && src_[pos_] == '%') {
      ++pos_;
      auto v = Decimal::parse(text);
      if (!v) fail("bad number '" + std::string(text) + "'");
      return *v / Decimal(100);
    }
    auto v = Decimal::parse(text);
    if (!v) fail("bad number '" + std::string(text) + "'");
    return *v;
  }

  Decimal operand() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    if (names_) names_->insert(name);
    if (!env_) return Decimal(1);
    auto it = env_->find(name);
    if (it == env_->end()) throw FormulaError("unknown operand '" + name + "'");
    return it->second;
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormulaError(msg + " at offset " + std::to_string(pos_) + " in '" + std::string(src_) + "'");
  }

  std::string_view src_;
  const std::map<std::string, Decimal>* env_;
  std::set<std::string>* names_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace detail

/// Evaluates `formula` exactly. Throws FormulaError on syntax errors, unknown
/// operands and division by zero.
inline Decimal evaluate_formula(std::string_view formula, const std::map<std::string, Decimal>& operands) {
  return detail::FormulaParser(formula, &operands, nullptr).parse();
}

/// Names referenced by `formula`; also a syntax check.
inline std::set<std::string> formula_operands(std::string_view formula) {
  std::set<std::string> names;
  detail::FormulaParser(formula, nullptr, &names).parse();
  return names;
}

}  // namespace webvet
