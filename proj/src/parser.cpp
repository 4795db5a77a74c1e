// Recursive-descent parser for the formula grammar.
//
//   formula  := or
//   or       := and ('or' and)*
//   and      := binary ('and' binary)*
//   binary   := unary (('U' | 'R') interval unary)*
//   unary    := 'not' unary | ('G' | 'F') interval unary | primary
//   primary  := '(' formula ')' | region | linear cmp linear [cmp linear]
//   interval := '[' int ',' int ']'
//   linear   := term (('+' | '-') term)*
//   term     := ('+' | '-')* (number ['*' var] | var)
//
// Comments run from '#' to end of line.

#include <cmath>
#include <regex>

#include "stlsmooth/formula.hpp"
#include "stlsmooth/text.hpp"

namespace stlsmooth {
namespace {

enum class Tok { LParen, RParen, LBracket, RBracket, Comma, Ident, Number, Plus, Minus, Star, Cmp, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    std::size_t start = i;
    switch (c) {
      case '(': out.push_back({Tok::LParen, "(", i++}); continue;
      case ')': out.push_back({Tok::RParen, ")", i++}); continue;
      case '[': out.push_back({Tok::LBracket, "[", i++}); continue;
      case ']': out.push_back({Tok::RBracket, "]", i++}); continue;
      case ',': out.push_back({Tok::Comma, ",", i++}); continue;
      case '+': out.push_back({Tok::Plus, "+", i++}); continue;
      case '-': out.push_back({Tok::Minus, "-", i++}); continue;
      case '*': out.push_back({Tok::Star, "*", i++}); continue;
      case '>':
      case '<': {
        std::string op(1, c);
        ++i;
        if (i < s.size() && s[i] == '=') op += s[i++];
        out.push_back({Tok::Cmp, op, start});
        continue;
      }
      default: break;
    }
    if (is_digit(c) || (c == '.' && i + 1 < s.size() && is_digit(s[i + 1]))) {
      while (i < s.size() && (is_digit(s[i]) || s[i] == '.')) ++i;
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && is_digit(s[j])) {
          i = j;
          while (i < s.size() && is_digit(s[i])) ++i;
        }
      }
      out.push_back({Tok::Number, std::string(s.substr(start, i - start)), start});
      continue;
    }
    if (is_ident_start(c)) {
      while (i < s.size() && is_ident(s[i])) ++i;
      out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), start});
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", i);
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

bool is_keyword(const std::string& s) {
  return s == "G" || s == "F" || s == "U" || s == "R" || s == "not" || s == "and" || s == "or";
}

/// Affine expression sum_j coeff_j y_j + constant.
struct Affine {
  std::vector<double> coeff;
  double constant = 0.0;
};

class Parser {
 public:
  Parser(std::string_view text, const RegionTable& regions, std::size_t p)
      : tokens_(tokenize(text)), regions_(regions), p_(p) {}

  Formula parse_all() {
    auto phi = parse_or();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return phi;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }
  bool at_ident(const char* word) const { return peek().kind == Tok::Ident && peek().text == word; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().pos); }
  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what);
    ++pos_;
  }

  Formula parse_or() {
    std::vector<Formula> parts{parse_and()};
    while (at_ident("or")) {
      ++pos_;
      parts.push_back(parse_and());
    }
    return Formula::disj(std::move(parts));
  }

  Formula parse_and() {
    std::vector<Formula> parts{parse_binary()};
    while (at_ident("and")) {
      ++pos_;
      parts.push_back(parse_binary());
    }
    return Formula::conj(std::move(parts));
  }

  Formula parse_binary() {
    auto lhs = parse_unary();
    while (at_ident("U") || at_ident("R")) {
      bool until = next().text == "U";
      auto iv = parse_interval();
      auto rhs = parse_unary();
      lhs = until ? Formula::until(iv, lhs, rhs) : Formula::release(iv, lhs, rhs);
    }
    return lhs;
  }

  Formula parse_unary() {
    if (at_ident("not")) {
      ++pos_;
      if (peek().kind == Tok::Ident && !is_keyword(peek().text) && !is_signal_var(peek().text) &&
          peek(1).kind != Tok::Cmp) {
        const auto& tok = next();
        return region_complement(tok.text, lookup_region(tok), p_);
      }
      return Formula::negate(parse_unary());
    }
    if (at_ident("G") || at_ident("F")) {
      bool always = next().text == "G";
      auto iv = parse_interval();
      auto body = parse_unary();
      return always ? Formula::always(iv, body) : Formula::eventually(iv, body);
    }
    return parse_primary();
  }

  Formula parse_primary() {
    const auto& tok = peek();
    if (tok.kind == Tok::LParen) {
      ++pos_;
      auto inner = parse_or();
      expect(Tok::RParen, "')'");
      return inner;
    }
    if (tok.kind == Tok::Ident && !is_keyword(tok.text) && !is_signal_var(tok.text)) {
      ++pos_;
      return region_formula(tok.text, lookup_region(tok), p_);
    }
    if (tok.kind == Tok::Ident && is_keyword(tok.text)) fail("unexpected keyword '" + tok.text + "'");
    if (tok.kind == Tok::Number || tok.kind == Tok::Plus || tok.kind == Tok::Minus ||
        tok.kind == Tok::Ident) {
      return parse_predicate();
    }
    if (tok.kind == Tok::End) fail("unexpected end of input");
    fail("unexpected '" + tok.text + "'");
  }

  const Box& lookup_region(const Token& tok) const {
    auto it = regions_.find(tok.text);
    if (it == regions_.end()) throw ParseError("unknown region '" + tok.text + "'", tok.pos);
    return it->second;
  }

  static bool is_signal_var(const std::string& s) {
    static const std::regex var(R"(y[0-9]+)");
    return std::regex_match(s, var);
  }

  Interval parse_interval() {
    expect(Tok::LBracket, "'[' opening an interval");
    auto lo = parse_bound();
    expect(Tok::Comma, "',' in interval");
    auto hi = parse_bound();
    std::size_t close = peek().pos;
    expect(Tok::RBracket, "']' closing an interval");
    if (lo > hi) throw ParseError("reversed interval [" + std::to_string(lo) + "," + std::to_string(hi) + "]", close);
    return Interval(lo, hi);
  }

  std::size_t parse_bound() {
    if (peek().kind == Tok::Minus) fail("negative interval bound");
    if (peek().kind != Tok::Number) fail("expected an integer interval bound");
    const auto& tok = next();
    auto v = parse_double(tok.text);
    if (!v || *v != std::floor(*v) || tok.text.find_first_of(".eE") != std::string::npos) {
      throw ParseError("interval bound '" + tok.text + "' is not an integer timestep", tok.pos);
    }
    return static_cast<std::size_t>(*v);
  }

  std::size_t var_index(const Token& tok) const {
    auto idx = std::stoull(tok.text.substr(1));
    if (idx >= p_) {
      throw ParseError("dimension index " + std::to_string(idx) + " out of range for p=" + std::to_string(p_), tok.pos);
    }
    return static_cast<std::size_t>(idx);
  }

  void parse_term(Affine& acc, double sign) {
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      if (next().kind == Tok::Minus) sign = -sign;
    }
    const auto& tok = peek();
    if (tok.kind == Tok::Number) {
      ++pos_;
      auto v = parse_double(tok.text);
      if (!v) throw ParseError("bad number '" + tok.text + "'", tok.pos);
      if (peek().kind == Tok::Star) {
        ++pos_;
        const auto& var = peek();
        if (var.kind != Tok::Ident || !is_signal_var(var.text)) fail("expected a signal variable after '*'");
        ++pos_;
        acc.coeff[var_index(var)] += sign * *v;
      } else {
        acc.constant += sign * *v;
      }
      return;
    }
    if (tok.kind == Tok::Ident && is_signal_var(tok.text)) {
      ++pos_;
      acc.coeff[var_index(tok)] += sign;
      return;
    }
    fail("expected a number or signal variable");
  }

  Affine parse_linear() {
    Affine acc{std::vector<double>(p_, 0.0), 0.0};
    parse_term(acc, 1.0);
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      double sign = next().kind == Tok::Minus ? -1.0 : 1.0;
      parse_term(acc, sign);
    }
    return acc;
  }

  // (lhs cmp rhs) as an upper-minus-lower predicate.
  static Formula make_predicate(const Affine& lhs, const Affine& rhs, bool lhs_is_greater) {
    const Affine& hi = lhs_is_greater ? lhs : rhs;
    const Affine& lo = lhs_is_greater ? rhs : lhs;
    std::vector<double> coeff(hi.coeff.size());
    for (std::size_t j = 0; j < coeff.size(); ++j) coeff[j] = hi.coeff[j] - lo.coeff[j];
    return Formula::pred(Predicate(std::move(coeff), lo.constant - hi.constant));
  }

  Formula parse_predicate() {
    auto lhs = parse_linear();
    if (peek().kind != Tok::Cmp) fail("expected a comparison operator");
    bool greater = next().text[0] == '>';
    auto rhs = parse_linear();
    auto first = make_predicate(lhs, rhs, greater);
    if (peek().kind != Tok::Cmp) return first;
    bool greater2 = peek().text[0] == '>';
    if (greater2 != greater) fail("mixed comparison directions in a chained predicate");
    ++pos_;
    auto third = parse_linear();
    return Formula::conj({first, make_predicate(rhs, third, greater)});
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const RegionTable& regions_;
  std::size_t p_;
};

}  // namespace

Formula parse(std::string_view text, const RegionTable& regions, std::size_t p) {
  if (p == 0) throw std::invalid_argument("signal dimension must be positive");
  return Parser(text, regions, p).parse_all();
}

}  // namespace stlsmooth
