#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "revip/special.hpp"

namespace revip {

/// Real expression in the variables x and u, compiled to a closure.
///
/// Grammar: sums and differences of products and quotients of powers (`^`,
/// right associative) of unary-signed atoms. Atoms are numbers, `x`, `u`,
/// `pi`, parenthesized expressions and calls to exp, log, sqrt, abs, sin,
/// cos, tanh, Phi, Phiinv (one argument) or min, max, pow (two arguments).
class Expr {
 public:
  using Fn = std::function<double(double, double)>;

  static Expr parse(const std::string& text) {
    Parser p{text, 0};
    Fn fn = p.sum();
    p.skip();
    if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
    return Expr(text, std::move(fn));
  }

  double operator()(double x, double u) const { return fn_(x, u); }
  [[nodiscard]] const std::string& text() const { return text_; }

 private:
  Expr(std::string text, Fn fn) : text_(std::move(text)), fn_(std::move(fn)) {}

  struct Parser {
    const std::string& s;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& msg) const {
      throw std::invalid_argument("expression '" + s + "' at column " + std::to_string(pos + 1) + ": " + msg);
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

    Fn sum() {
      Fn lhs = product();
      for (;;) {
        if (eat('+')) {
          lhs = [a = lhs, b = product()](double x, double u) { return a(x, u) + b(x, u); };
        } else if (eat('-')) {
          lhs = [a = lhs, b = product()](double x, double u) { return a(x, u) - b(x, u); };
        } else {
          return lhs;
        }
      }
    }

    Fn product() {
      Fn lhs = unary();
      for (;;) {
        if (eat('*')) {
          lhs = [a = lhs, b = unary()](double x, double u) { return a(x, u) * b(x, u); };
        } else if (eat('/')) {
          lhs = [a = lhs, b = unary()](double x, double u) { return a(x, u) / b(x, u); };
        } else {
          return lhs;
        }
      }
    }

    Fn unary() {
      if (eat('-')) return [a = unary()](double x, double u) { return -a(x, u); };
      if (eat('+')) return unary();
      return power();
    }

    Fn power() {
      Fn base = atom();
      if (eat('^')) return [a = base, b = unary()](double x, double u) { return std::pow(a(x, u), b(x, u)); };
      return base;
    }

    Fn atom() {
      skip();
      if (pos >= s.size()) fail("unexpected end of input");
      if (eat('(')) {
        Fn inner = sum();
        if (!eat(')')) fail("expected ')'");
        return inner;
      }
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
          fail("bad number");
        }
        pos += used;
        return [v](double, double) { return v; };
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        const std::string name = s.substr(start, pos - start);
        if (name == "x") return [](double x, double) { return x; };
        if (name == "u") return [](double, double u) { return u; };
        if (name == "pi") return [](double, double) { return 3.14159265358979323846; };
        return call(name);
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }

    Fn call(const std::string& name) {
      static const std::map<std::string, double (*)(double)> unary_fns{
          {"exp", [](double v) { return std::exp(v); }},
          {"log", [](double v) { return std::log(v); }},
          {"sqrt", [](double v) { return std::sqrt(v); }},
          {"abs", [](double v) { return std::abs(v); }},
          {"sin", [](double v) { return std::sin(v); }},
          {"cos", [](double v) { return std::cos(v); }},
          {"tanh", [](double v) { return std::tanh(v); }},
          {"Phi", [](double v) { return normal_cdf(v); }},
          {"Phiinv", [](double v) { return normal_quantile(v); }},
      };
      static const std::map<std::string, double (*)(double, double)> binary_fns{
          {"min", [](double a, double b) { return std::min(a, b); }},
          {"max", [](double a, double b) { return std::max(a, b); }},
          {"pow", [](double a, double b) { return std::pow(a, b); }},
      };
      if (!eat('(')) fail("unknown name '" + name + "'");
      Fn first = sum();
      if (auto it = unary_fns.find(name); it != unary_fns.end()) {
        if (!eat(')')) fail("expected ')' after argument of " + name);
        return [f = it->second, a = first](double x, double u) { return f(a(x, u)); };
      }
      if (auto it = binary_fns.find(name); it != binary_fns.end()) {
        if (!eat(',')) fail(name + " takes two arguments");
        Fn second = sum();
        if (!eat(')')) fail("expected ')' after arguments of " + name);
        return [f = it->second, a = first, b = second](double x, double u) { return f(a(x, u), b(x, u)); };
      }
      fail("unknown function '" + name + "'");
    }
  };

  std::string text_;
  Fn fn_;
};

}  // namespace revip
