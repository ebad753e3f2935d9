#pragma once

// Recursive-descent parser for the specification text grammar:
//
//   expr    := and ('|' and)*
//   and     := until ('&' until)*
//   until   := unary ('U' '[' int ',' int ']' unary)*
//   unary   := '!' unary | ('G' | 'F') '[' int ',' int ']' unary | primary
//   primary := 'true' | '(' expr ')' | VAR ('<=' | '>=') NUMBER
//   VAR     := I | E | S | R | D
//
// Binary operators associate to the left.

#include "mtlseir/errors.hpp"
#include "mtlseir/formula.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>

namespace mtlseir {

namespace detail {

class FormulaParser {
public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  Formula parse() {
    Formula f = parse_or();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const { throw ParseError(msg, at); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool accept(std::string_view tok) {
    skip_space();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' but reached end of input");
    if (text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  // Identifier = maximal run of letters/digits/underscores starting with a letter.
  std::string_view peek_word() {
    skip_space();
    std::size_t end = pos_;
    if (end < text_.size() && std::isalpha(static_cast<unsigned char>(text_[end]))) {
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
        ++end;
    }
    return text_.substr(pos_, end - pos_);
  }

  std::size_t parse_index() {
    skip_space();
    const std::size_t start = pos_;
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc() || ptr == text_.data() + pos_) fail("expected non-negative integer day bound", start);
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }

  TimeBound parse_bound() {
    skip_space();
    const std::size_t start = pos_;
    expect('[');
    const std::size_t a = parse_index();
    expect(',');
    const std::size_t b = parse_index();
    expect(']');
    if (a > b)
      throw BoundError("invalid time bound [" + std::to_string(a) + "," + std::to_string(b) +
                           "]: lower exceeds upper",
                       start);
    return {a, b};
  }

  double parse_number() {
    skip_space();
    const std::size_t start = pos_;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    if (first != last && *first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) fail("expected numeric threshold", start);
    if (!std::isfinite(v)) fail("threshold must be finite", start);
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return v;
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (peek('|')) {
      ++pos_;
      f = Formula::disjunction(std::move(f), parse_and());
    }
    return f;
  }

  Formula parse_and() {
    Formula f = parse_until();
    while (peek('&')) {
      ++pos_;
      f = Formula::conjunction(std::move(f), parse_until());
    }
    return f;
  }

  Formula parse_until() {
    Formula f = parse_unary();
    while (peek_word() == "U") {
      ++pos_;
      const TimeBound b = parse_bound();
      f = Formula::until(std::move(f), parse_unary(), b);
    }
    return f;
  }

  Formula parse_unary() {
    if (peek('!')) {
      ++pos_;
      return Formula::negation(parse_unary());
    }
    const auto w = peek_word();
    if (w == "G" || w == "F") {
      ++pos_;
      const TimeBound b = parse_bound();
      Formula body = parse_unary();
      return w == "G" ? Formula::always(std::move(body), b) : Formula::eventually(std::move(body), b);
    }
    return parse_primary();
  }

  Formula parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (text_[pos_] == '(') {
      ++pos_;
      Formula f = parse_or();
      expect(')');
      return f;
    }
    const std::size_t start = pos_;
    const auto w = peek_word();
    if (w.empty()) fail("expected formula");
    if (w == "true") {
      pos_ += w.size();
      return Formula::truth();
    }
    const auto c = compartment_from_name(w);
    if (!c) fail("unknown variable '" + std::string(w) + "'", start);
    pos_ += w.size();
    Relation rel{};
    if (accept("<=")) rel = Relation::LE;
    else if (accept(">=")) rel = Relation::GE;
    else fail("expected '<=' or '>='");
    return Formula::atom(*c, rel, parse_number());
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

} // namespace detail

inline Formula parse(std::string_view text) { return detail::FormulaParser(text).parse(); }

} // namespace mtlseir
