#pragma once

#include <cctype>
#include <cstdlib>
#include <string>
#include <string_view>

#include "gmtlab/error.hpp"
#include "gmtlab/polynomial.hpp"

namespace gmtlab {

namespace detail {

// expr   := term (('+'|'-') term)*
// term   := unary (('*')? unary)*      juxtaposition multiplies: "3xy"
// unary  := ('-'|'+') unary | power
// power  := atom ('^' integer)?
// atom   := number | variable | '(' expr ')'
class PolynomialParser {
 public:
  PolynomialParser(std::string_view src, int dim) : src_(src), dim_(dim) {}

  Polynomial parse() {
    Polynomial p = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidInput("polynomial parse error at offset " + std::to_string(pos_) + ": " + what +
                       " in \"" + std::string(src_) + "\"");
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  static int var_index(char c) {
    switch (c) {
      case 'x': return 0;
      case 'y': return 1;
      case 'z': return 2;
      case 'w': return 3;
      default: return -1;
    }
  }

  bool starts_atom(char c) const {
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '(' || var_index(c) >= 0;
  }

  Polynomial expr() {
    Polynomial p = term();
    for (;;) {
      const char c = peek();
      if (c == '+') {
        ++pos_;
        p += term();
      } else if (c == '-') {
        ++pos_;
        p -= term();
      } else {
        return p;
      }
    }
  }

  Polynomial term() {
    Polynomial p = unary();
    for (;;) {
      const char c = peek();
      if (c == '*') {
        ++pos_;
        p = p * unary();
      } else if (starts_atom(c)) {
        p = p * power();
      } else {
        return p;
      }
    }
  }

  Polynomial unary() {
    const char c = peek();
    if (c == '-') {
      ++pos_;
      return -unary();
    }
    if (c == '+') {
      ++pos_;
      return unary();
    }
    return power();
  }

  Polynomial power() {
    Polynomial base = atom();
    if (peek() == '^') {
      ++pos_;
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (start == pos_) fail("expected a nonnegative integer exponent");
      const int e = std::stoi(std::string(src_.substr(start, pos_ - start)));
      if (e > 64) fail("exponent too large");
      return base.power(e);
    }
    return base;
  }

  Polynomial atom() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      Polynomial p = expr();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return p;
    }
    if (const int v = var_index(c); v >= 0) {
      if (v >= dim_) fail(std::string("variable '") + c + "' exceeds dimension " + std::to_string(dim_));
      ++pos_;
      return Polynomial::variable(dim_, v);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos_;
      auto digits = [&] {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      };
      digits();
      if (pos_ < src_.size() && src_[pos_] == '.') {
        ++pos_;
        digits();
      }
      if (pos_ + 1 < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t q = pos_ + 1;
        if (src_[q] == '+' || src_[q] == '-') ++q;
        if (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) {
          pos_ = q;
          digits();
        }
      }
      const std::string text(src_.substr(start, pos_ - start));
      if (text == ".") fail("malformed number");
      return Polynomial::constant(dim_, std::stod(text));
    }
    fail("expected a number, variable or '('");
  }

  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Smallest dimension (at least 2) that covers every variable named in `src`.
inline int infer_dimension(std::string_view src) {
  int dim = 2;
  for (char c : src) {
    if (c == 'z') dim = std::max(dim, 3);
    if (c == 'w') dim = std::max(dim, 4);
  }
  return dim;
}

/// Parses infix polynomials over x, y, z, w such as "x*y + x^3 - 3*x*y^2".
/// dim <= 0 infers the dimension from the variables used.
inline Polynomial parse_polynomial(std::string_view src, int dim = 0) {
  if (dim <= 0) dim = infer_dimension(src);
  return detail::PolynomialParser(src, dim).parse();
}

}  // namespace gmtlab
