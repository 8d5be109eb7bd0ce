#include "finsler/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

namespace finsler {

struct Expr::Node {
  Kind kind = Kind::number;
  double number = 0.0;
  std::string name;
  Function function = Function::sqrt;
  Expr lhs_child{nullptr};
  Expr rhs_child{nullptr};
};

namespace {

constexpr std::pair<std::string_view, Function> kFunctions[] = {
    {"sqrt", Function::sqrt}, {"exp", Function::exp}, {"log", Function::log},
    {"sin", Function::sin},   {"cos", Function::cos}, {"abs", Function::abs},
};

// Binding strength used by the printer; mirrors the parser's grammar levels.
int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::add:
    case Expr::Kind::subtract:
      return 1;
    case Expr::Kind::multiply:
    case Expr::Kind::divide:
      return 2;
    case Expr::Kind::negate:
      return 3;
    case Expr::Kind::power:
      return 4;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (v < 0.0 || (v == 0.0 && std::signbit(v))) return "(" + s + ")";
  return s;
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(e, out);
  if (wrap) out += ')';
}

void print(const Expr& e, std::string& out) {
  const int p = precedence(e.kind());
  switch (e.kind()) {
    case Expr::Kind::number:
      out += format_number(e.number_value());
      return;
    case Expr::Kind::symbol:
      out += e.symbol_name();
      return;
    case Expr::Kind::negate:
      out += '-';
      print_wrapped(e.lhs(), precedence(e.lhs().kind()) < 3, out);
      return;
    case Expr::Kind::add:
    case Expr::Kind::subtract:
    case Expr::Kind::multiply:
    case Expr::Kind::divide: {
      print_wrapped(e.lhs(), precedence(e.lhs().kind()) < p, out);
      switch (e.kind()) {
        case Expr::Kind::add: out += " + "; break;
        case Expr::Kind::subtract: out += " - "; break;
        case Expr::Kind::multiply: out += '*'; break;
        default: out += '/'; break;
      }
      print_wrapped(e.rhs(), precedence(e.rhs().kind()) <= p, out);
      return;
    }
    case Expr::Kind::power:
      print_wrapped(e.lhs(), precedence(e.lhs().kind()) < 5, out);
      out += '^';
      print_wrapped(e.rhs(), precedence(e.rhs().kind()) < 3, out);
      return;
    case Expr::Kind::call:
      out += function_name(e.function());
      out += '(';
      print(e.lhs(), out);
      out += ')';
      return;
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse_all() {
    skip_ws();
    if (pos_ == src_.size()) fail("empty expression");
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) fail(std::string("unexpected '") + src_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { fail_at(what, pos_); }

  [[noreturn]] void fail_at(const std::string& what, std::size_t at) const {
    int line = 1;
    int column = 1;
    for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("syntax error at offset " + std::to_string(at) + ": " + what, at, line, column);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr e = parse_product();
    for (;;) {
      if (accept('+')) {
        e = Expr::binary(Expr::Kind::add, e, parse_product());
      } else if (accept('-')) {
        e = Expr::binary(Expr::Kind::subtract, e, parse_product());
      } else {
        return e;
      }
    }
  }

  Expr parse_product() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) {
        e = Expr::binary(Expr::Kind::multiply, e, parse_unary());
      } else if (accept('/')) {
        e = Expr::binary(Expr::Kind::divide, e, parse_unary());
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) {
      // Fold into the literal so that printed negative numbers read back as
      // the same tree.
      Expr operand = parse_unary();
      if (operand.kind() == Expr::Kind::number) return Expr::number(-operand.number_value());
      return Expr::negate(std::move(operand));
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) return Expr::binary(Expr::Kind::power, base, parse_unary());
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ == src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      std::string name(src_.substr(start, pos_ - start));
      skip_ws();
      if (pos_ < src_.size() && src_[pos_] == '(') {
        ++pos_;
        for (const auto& [fname, f] : kFunctions) {
          if (fname == name) {
            Expr arg = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return Expr::call(f, arg);
          }
        }
        fail_at("unknown function '" + name + "'", start);
      }
      return Expr::symbol(std::move(name));
    }
    fail(std::string("unexpected '") + c + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) fail_at("malformed number", start);
    return Expr::number(value);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

void collect_symbols(const Expr& e, std::set<std::string>& out) {
  switch (e.kind()) {
    case Expr::Kind::number:
      return;
    case Expr::Kind::symbol:
      out.insert(e.symbol_name());
      return;
    case Expr::Kind::negate:
    case Expr::Kind::call:
      collect_symbols(e.lhs(), out);
      return;
    default:
      collect_symbols(e.lhs(), out);
      collect_symbols(e.rhs(), out);
  }
}

}  // namespace

std::string_view function_name(Function f) {
  for (const auto& [name, fn] : kFunctions)
    if (fn == f) return name;
  return "?";
}

Expr::Expr() : Expr(number(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::number(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::number;
  n->number = value;
  return Expr(std::move(n));
}

Expr Expr::symbol(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::symbol;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::negate;
  n->lhs_child = std::move(operand);
  return Expr(std::move(n));
}

Expr Expr::binary(Kind kind, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs_child = std::move(lhs);
  n->rhs_child = std::move(rhs);
  return Expr(std::move(n));
}

Expr Expr::call(Function f, Expr argument) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::call;
  n->function = f;
  n->lhs_child = std::move(argument);
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::number_value() const { return node_->number; }
const std::string& Expr::symbol_name() const { return node_->name; }
Function Expr::function() const { return node_->function; }
const Expr& Expr::lhs() const { return node_->lhs_child; }
const Expr& Expr::rhs() const { return node_->rhs_child; }

std::string Expr::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

std::set<std::string> Expr::symbols() const {
  std::set<std::string> out;
  collect_symbols(*this, out);
  return out;
}

bool Expr::references(std::string_view name) const {
  const auto s = symbols();
  return s.find(std::string(name)) != s.end();
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Expr::Kind::number:
      return a.number_value() == b.number_value();
    case Expr::Kind::symbol:
      return a.symbol_name() == b.symbol_name();
    case Expr::Kind::negate:
      return a.lhs() == b.lhs();
    case Expr::Kind::call:
      return a.function() == b.function() && a.lhs() == b.lhs();
    default:
      return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Expr::Kind::add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Expr::Kind::subtract, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Expr::Kind::multiply, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Expr::Kind::divide, a, b); }
Expr operator-(const Expr& a) { return Expr::negate(a); }

Expr parse(std::string_view source) { return Parser(source).parse_all(); }

}  // namespace finsler
