#pragma once

// Minimal expression parser for initial conditions g(x).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func    := cos | sin | exp

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>

#include "hcpinn/errors.hpp"

namespace hcpinn {

class Expression {
 public:
  static Expression parse(std::string_view text) {
    Parser p{text, 0};
    auto root = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("unexpected trailing input");
    return Expression(std::string(text), std::move(root));
  }

  double operator()(double x) const { return eval_(x); }
  const std::string& text() const { return text_; }

 private:
  using Fn = std::function<double(double)>;

  Expression(std::string text, Fn eval) : text_(std::move(text)), eval_(std::move(eval)) {}

  struct Parser {
    std::string_view s;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& msg) const {
      throw ConfigError("expression '" + std::string(s) + "': " + msg + " at offset " + std::to_string(pos));
    }
    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    Fn expr() {
      Fn lhs = term();
      for (;;) {
        if (eat('+')) {
          lhs = [a = lhs, b = term()](double x) { return a(x) + b(x); };
        } else if (eat('-')) {
          lhs = [a = lhs, b = term()](double x) { return a(x) - b(x); };
        } else {
          return lhs;
        }
      }
    }
    Fn term() {
      Fn lhs = unary();
      for (;;) {
        if (eat('*')) {
          lhs = [a = lhs, b = unary()](double x) { return a(x) * b(x); };
        } else if (eat('/')) {
          lhs = [a = lhs, b = unary()](double x) { return a(x) / b(x); };
        } else {
          return lhs;
        }
      }
    }
    Fn unary() {
      if (eat('-')) return [a = unary()](double x) { return -a(x); };
      return power();
    }
    Fn power() {
      Fn base = primary();
      if (eat('^')) {
        Fn e = unary();
        return [base, e](double x) { return std::pow(base(x), e(x)); };
      }
      return base;
    }
    Fn primary() {
      skip();
      if (pos >= s.size()) fail("unexpected end of input");
      if (eat('(')) {
        Fn inner = expr();
        if (!eat(')')) fail("expected ')'");
        return inner;
      }
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const std::string rest(s.substr(pos));
        char* end = nullptr;
        const double v = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str()) fail("bad number");
        pos += static_cast<std::size_t>(end - rest.c_str());
        return [v](double) { return v; };
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
        const std::string_view name = s.substr(start, pos - start);
        if (name == "x") return [](double x) { return x; };
        if (name == "pi") return [](double) { return std::numbers::pi; };
        double (*fn)(double) = nullptr;
        if (name == "cos") fn = [](double v) { return std::cos(v); };
        if (name == "sin") fn = [](double v) { return std::sin(v); };
        if (name == "exp") fn = [](double v) { return std::exp(v); };
        if (!fn) fail("unknown identifier '" + std::string(name) + "'");
        if (!eat('(')) fail("expected '(' after function name");
        Fn arg = expr();
        if (!eat(')')) fail("expected ')'");
        return [fn, arg](double x) { return fn(arg(x)); };
      }
      fail(std::string("unexpected character '") + c + "'");
    }
  };

  std::string text_;
  Fn eval_;
};

}  // namespace hcpinn
