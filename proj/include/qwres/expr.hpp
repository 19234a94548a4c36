#pragma once

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qwres/error.hpp"

namespace qwres {

/// Expression tree for coin entries:
///   literals, i, pi, eps, + - * /, ^ with an integer literal exponent,
///   unary minus, sqrt/exp/cos/sin.
struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

enum class ExprKind { Number, ImagUnit, Pi, Eps, Neg, Add, Sub, Mul, Div, Pow, Sqrt, Exp, Cos, Sin };

struct ExprNode {
  ExprKind kind = ExprKind::Number;
  double number = 0.0;  // Number
  long exponent = 0;    // Pow
  Expr lhs;             // unary operand, function argument, or left operand
  Expr rhs;
};

namespace expr {

inline Expr number(double v) { return std::make_shared<ExprNode>(ExprNode{ExprKind::Number, v, 0, {}, {}}); }
inline Expr leaf(ExprKind k) { return std::make_shared<ExprNode>(ExprNode{k, 0.0, 0, {}, {}}); }
inline Expr unary(ExprKind k, Expr a) {
  return std::make_shared<ExprNode>(ExprNode{k, 0.0, 0, std::move(a), {}});
}
inline Expr binary(ExprKind k, Expr a, Expr b) {
  return std::make_shared<ExprNode>(ExprNode{k, 0.0, 0, std::move(a), std::move(b)});
}
inline Expr power(Expr base, long n) {
  return std::make_shared<ExprNode>(ExprNode{ExprKind::Pow, 0.0, n, std::move(base), {}});
}

inline bool is_function(ExprKind k) {
  return k == ExprKind::Sqrt || k == ExprKind::Exp || k == ExprKind::Cos || k == ExprKind::Sin;
}

inline bool is_binary(ExprKind k) {
  return k == ExprKind::Add || k == ExprKind::Sub || k == ExprKind::Mul || k == ExprKind::Div;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Expr parse() {
    skip();
    if (pos_ >= s_.size()) error("empty expression");
    Expr e = parse_sum();
    skip();
    if (pos_ < s_.size()) error(std::string("unexpected '") + s_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void error(const std::string& msg) const {
    fail(ErrorCode::SyntaxError, "at position " + std::to_string(pos_) + ": " + msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr e = parse_product();
    for (;;) {
      if (accept('+')) {
        e = binary(ExprKind::Add, e, parse_product());
      } else if (accept('-')) {
        e = binary(ExprKind::Sub, e, parse_product());
      } else {
        return e;
      }
    }
  }

  Expr parse_product() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) {
        e = binary(ExprKind::Mul, e, parse_unary());
      } else if (accept('/')) {
        e = binary(ExprKind::Div, e, parse_unary());
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return unary(ExprKind::Neg, parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (!accept('^')) return base;
    skip();
    bool negative = false;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
      negative = s_[pos_] == '-';
      ++pos_;
      skip();
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) error("exponent must be an integer literal");
    if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E')) {
      error("exponent must be an integer literal");
    }
    if (pos_ - start > 9) error("exponent too large");
    long n = std::stol(std::string(s_.substr(start, pos_ - start)));
    skip();
    if (pos_ < s_.size() && s_[pos_] == '^') error("chained exponents need parentheses");
    return power(base, negative ? -n : n);
  }

  Expr parse_primary() {
    skip();
    if (pos_ >= s_.size()) error("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!accept(')')) error("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string_view id = s_.substr(start, pos_ - start);
      if (id == "i") return leaf(ExprKind::ImagUnit);
      if (id == "pi") return leaf(ExprKind::Pi);
      if (id == "eps") return leaf(ExprKind::Eps);
      ExprKind fk;
      if (id == "sqrt") {
        fk = ExprKind::Sqrt;
      } else if (id == "exp") {
        fk = ExprKind::Exp;
      } else if (id == "cos") {
        fk = ExprKind::Cos;
      } else if (id == "sin") {
        fk = ExprKind::Sin;
      } else {
        pos_ = start;
        error("unknown identifier '" + std::string(id) + "'");
      }
      if (!accept('(')) error("expected '(' after function name");
      Expr arg = parse_sum();
      if (!accept(')')) error("expected ')'");
      return unary(fk, arg);
    }
    error(std::string("unexpected '") + c + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    bool digits = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
      digits = true;
    }
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
        digits = true;
      }
    }
    if (!digits) error("malformed number");
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    return number(std::stod(std::string(s_.substr(start, pos_ - start))));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

/// Value during evaluation: either finite, or a signed real infinity produced
/// by dividing a nonzero real by an exact zero (only exp(-inf) = 0 absorbs it).
struct Value {
  std::complex<double> v;
  int inf = 0;
};

[[noreturn]] inline void eval_error(const std::string& msg) { fail(ErrorCode::EvalError, msg); }

inline int real_sign(std::complex<double> x) {
  if (x.imag() != 0.0 || x.real() == 0.0 || !std::isfinite(x.real())) return 0;
  return x.real() > 0 ? 1 : -1;
}

inline Value eval_node(const ExprNode& n, double eps);

inline Value finite_arg(const ExprNode& n, double eps) {
  Value a = eval_node(n, eps);
  if (a.inf != 0) eval_error("division by zero");
  return a;
}

inline Value eval_node(const ExprNode& n, double eps) {
  switch (n.kind) {
    case ExprKind::Number: return {n.number};
    case ExprKind::ImagUnit: return {{0.0, 1.0}};
    case ExprKind::Pi: return {3.14159265358979323846};
    case ExprKind::Eps: return {eps};
    case ExprKind::Neg: {
      Value a = eval_node(*n.lhs, eps);
      return {-a.v, -a.inf};
    }
    case ExprKind::Add:
    case ExprKind::Sub: {
      Value a = eval_node(*n.lhs, eps);
      Value b = eval_node(*n.rhs, eps);
      if (n.kind == ExprKind::Sub) b = {-b.v, -b.inf};
      if (a.inf == 0 && b.inf == 0) return {a.v + b.v};
      if (a.inf != 0 && b.inf != 0 && a.inf != b.inf) eval_error("indeterminate inf - inf");
      return {0.0, a.inf != 0 ? a.inf : b.inf};
    }
    case ExprKind::Mul: {
      Value a = eval_node(*n.lhs, eps);
      Value b = eval_node(*n.rhs, eps);
      if (a.inf == 0 && b.inf == 0) return {a.v * b.v};
      if (a.inf != 0 && b.inf != 0) return {0.0, a.inf * b.inf};
      const Value& fin = a.inf == 0 ? a : b;
      const int s = real_sign(fin.v);
      if (s == 0) eval_error("division by zero");
      return {0.0, s * (a.inf != 0 ? a.inf : b.inf)};
    }
    case ExprKind::Div: {
      Value a = eval_node(*n.lhs, eps);
      Value b = eval_node(*n.rhs, eps);
      if (b.inf != 0) {
        if (a.inf != 0) eval_error("indeterminate inf / inf");
        return {0.0};
      }
      if (b.v == std::complex<double>(0.0)) {
        const int s = a.inf != 0 ? a.inf : real_sign(a.v);
        if (s == 0) eval_error("division by zero");
        return {0.0, s};
      }
      if (a.inf != 0) {
        const int s = real_sign(b.v);
        if (s == 0) eval_error("division by zero");
        return {0.0, a.inf * s};
      }
      return {a.v / b.v};
    }
    case ExprKind::Pow: {
      Value a = eval_node(*n.lhs, eps);
      if (a.inf != 0) {
        if (n.exponent == 0) eval_error("indeterminate inf^0");
        if (n.exponent < 0) return {0.0};
        return {0.0, (n.exponent % 2 == 0) ? 1 : a.inf};
      }
      if (n.exponent < 0 && a.v == std::complex<double>(0.0)) {
        // 0^-k behaves like 1/0^k
        return {0.0, 1};
      }
      std::complex<double> r(1.0), b = a.v;
      long k = n.exponent < 0 ? -n.exponent : n.exponent;
      while (k > 0) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
      }
      return {n.exponent < 0 ? 1.0 / r : r};
    }
    case ExprKind::Exp: {
      Value a = eval_node(*n.lhs, eps);
      if (a.inf < 0) return {0.0};
      if (a.inf > 0) eval_error("exp of +infinity");
      return {std::exp(a.v)};
    }
    case ExprKind::Sqrt: return {std::sqrt(finite_arg(*n.lhs, eps).v)};
    case ExprKind::Cos: return {std::cos(finite_arg(*n.lhs, eps).v)};
    case ExprKind::Sin: return {std::sin(finite_arg(*n.lhs, eps).v)};
  }
  eval_error("unknown node");
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void print_to(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case ExprKind::Number: out += format_number(n.number); return;
    case ExprKind::ImagUnit: out += "i"; return;
    case ExprKind::Pi: out += "pi"; return;
    case ExprKind::Eps: out += "eps"; return;
    case ExprKind::Neg:
      out += "(-";
      print_to(*n.lhs, out);
      out += ")";
      return;
    case ExprKind::Pow:
      out += "(";
      print_to(*n.lhs, out);
      out += "^" + std::to_string(n.exponent) + ")";
      return;
    case ExprKind::Sqrt:
    case ExprKind::Exp:
    case ExprKind::Cos:
    case ExprKind::Sin: {
      static constexpr const char* names[] = {"sqrt", "exp", "cos", "sin"};
      out += names[static_cast<int>(n.kind) - static_cast<int>(ExprKind::Sqrt)];
      out += "(";
      print_to(*n.lhs, out);
      out += ")";
      return;
    }
    default: {
      static constexpr char ops[] = {'+', '-', '*', '/'};
      out += "(";
      print_to(*n.lhs, out);
      out += ops[static_cast<int>(n.kind) - static_cast<int>(ExprKind::Add)];
      print_to(*n.rhs, out);
      out += ")";
      return;
    }
  }
}

}  // namespace expr

inline Expr parse_expr(std::string_view text) { return expr::Parser(text).parse(); }

/// Evaluates at eps >= 0. exp(c/eps) with c < 0 tends to 0 at eps = 0; every
/// other division by zero is an EvalError.
inline std::complex<double> eval_expr(const Expr& e, double eps) {
  expr::Value v = expr::eval_node(*e, eps);
  if (v.inf != 0) expr::eval_error("division by zero");
  if (!std::isfinite(v.v.real()) || !std::isfinite(v.v.imag())) expr::eval_error("non-finite value");
  return v.v;
}

/// Fully parenthesized text that parses back to the same tree.
inline std::string print_expr(const Expr& e) {
  std::string out;
  expr::print_to(*e, out);
  return out;
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::Number: return a->number == b->number;
    case ExprKind::Pow: return a->exponent == b->exponent && structurally_equal(a->lhs, b->lhs);
    default: return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
  }
}

}  // namespace qwres
