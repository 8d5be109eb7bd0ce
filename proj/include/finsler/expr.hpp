#pragma once

// Expression mini-language used for metric components, 1-forms, profiles and
// free Lagrangians. Trees are immutable; evaluation is generic over the scalar
// ring (plain doubles or jets) through ScalarOps<T>.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>

#include "finsler/error.hpp"

namespace finsler {

enum class Function { sqrt, exp, log, sin, cos, abs };

std::string_view function_name(Function f);

class Expr {
 public:
  enum class Kind { number, symbol, negate, add, subtract, multiply, divide, power, call };

  Expr();  // the literal 0

  static Expr number(double value);
  static Expr symbol(std::string name);
  static Expr negate(Expr operand);
  static Expr binary(Kind kind, Expr lhs, Expr rhs);
  static Expr call(Function f, Expr argument);

  Kind kind() const;
  double number_value() const;
  const std::string& symbol_name() const;
  Function function() const;
  // Operand of negate/call, left operand of binary nodes.
  const Expr& lhs() const;
  const Expr& rhs() const;

  std::string to_string() const;
  std::set<std::string> symbols() const;
  bool references(std::string_view name) const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

// Precedence: power > unary minus > product > sum. `^` is right associative.
Expr parse(std::string_view source);

template <class T>
using Bindings = std::map<std::string, T, std::less<>>;

template <class T>
struct ScalarOps;

template <>
struct ScalarOps<double> {
  static bool is_constant(double) { return true; }
  static double value(double x) { return x; }
  static double divide(double a, double b) {
    if (b == 0.0) throw DomainError("division by zero");
    return a / b;
  }
  static double sqrt(double x) {
    if (x < 0.0) throw DomainError("sqrt of negative value");
    return std::sqrt(x);
  }
  static double exp(double x) { return std::exp(x); }
  static double log(double x) {
    if (x <= 0.0) throw DomainError("log of non-positive value");
    return std::log(x);
  }
  static double sin(double x) { return std::sin(x); }
  static double cos(double x) { return std::cos(x); }
  static double abs(double x) { return std::abs(x); }
};

namespace detail {

template <class T>
T integer_power(const T& base, long exponent) {
  if (exponent < 0) return ScalarOps<T>::divide(T(1.0), integer_power(base, -exponent));
  T result(1.0);
  T factor = base;
  while (exponent > 0) {
    if (exponent & 1) result = result * factor;
    exponent >>= 1;
    if (exponent > 0) factor = factor * factor;
  }
  return result;
}

template <class T>
T power(const T& base, const T& exponent) {
  using Ops = ScalarOps<T>;
  if (Ops::is_constant(exponent)) {
    const double e = Ops::value(exponent);
    if (e == std::round(e) && std::abs(e) <= 1024.0) return integer_power(base, static_cast<long>(e));
  }
  return Ops::exp(exponent * Ops::log(base));
}

}  // namespace detail

template <class T>
T evaluate(const Expr& e, const Bindings<T>& b) {
  using Ops = ScalarOps<T>;
  switch (e.kind()) {
    case Expr::Kind::number:
      return T(e.number_value());
    case Expr::Kind::symbol: {
      auto it = b.find(e.symbol_name());
      if (it == b.end()) throw EvalError("unbound symbol '" + e.symbol_name() + "'");
      return it->second;
    }
    case Expr::Kind::negate:
      return -evaluate(e.lhs(), b);
    case Expr::Kind::add:
      return evaluate(e.lhs(), b) + evaluate(e.rhs(), b);
    case Expr::Kind::subtract:
      return evaluate(e.lhs(), b) - evaluate(e.rhs(), b);
    case Expr::Kind::multiply:
      return evaluate(e.lhs(), b) * evaluate(e.rhs(), b);
    case Expr::Kind::divide:
      return Ops::divide(evaluate(e.lhs(), b), evaluate(e.rhs(), b));
    case Expr::Kind::power:
      return detail::power(evaluate(e.lhs(), b), evaluate(e.rhs(), b));
    case Expr::Kind::call: {
      T x = evaluate(e.lhs(), b);
      switch (e.function()) {
        case Function::sqrt: return Ops::sqrt(x);
        case Function::exp: return Ops::exp(x);
        case Function::log: return Ops::log(x);
        case Function::sin: return Ops::sin(x);
        case Function::cos: return Ops::cos(x);
        case Function::abs: return Ops::abs(x);
      }
    }
  }
  throw EvalError("corrupt expression node");
}

}  // namespace finsler
