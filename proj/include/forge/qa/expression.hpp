#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace forge::qa {

// Small canonical infix expression grammar for symbolic answers:
// +, -, *, /, ^, sqrt, sin, cos, tan, ln, exp, abs, pi, numbers, symbols.
class Expr {
 public:
  using Ptr = std::shared_ptr<const Expr>;

  enum class Kind { kNumber, kSymbol, kUnary, kBinary, kCall };

  static Ptr number(double v);
  static Ptr symbol(std::string name);
  static Ptr neg(Ptr a);
  static Ptr binary(char op, Ptr a, Ptr b);  // + - * / ^
  static Ptr call(std::string fn, Ptr a);

  static Ptr add(Ptr a, Ptr b) { return binary('+', a, b); }
  static Ptr sub(Ptr a, Ptr b) { return binary('-', a, b); }
  static Ptr mul(Ptr a, Ptr b) { return binary('*', a, b); }
  static Ptr div(Ptr a, Ptr b) { return binary('/', a, b); }
  static Ptr pow(Ptr a, Ptr b) { return binary('^', a, b); }
  static Ptr sqrt(Ptr a) { return call("sqrt", a); }

  Kind kind() const { return kind_; }
  double value() const { return value_; }
  const std::string& name() const { return name_; }
  char op() const { return op_; }
  const Ptr& lhs() const { return lhs_; }
  const Ptr& rhs() const { return rhs_; }

  // Evaluates with the given symbol bindings; throws Error on unbound
  // symbols.
  double eval(const std::map<std::string, double>& symbols) const;

  // Free symbols in the expression.
  std::vector<std::string> symbols() const;

  // Canonical infix rendering with minimal parentheses.
  std::string str() const;

 private:
  Kind kind_ = Kind::kNumber;
  double value_ = 0;
  std::string name_;
  char op_ = 0;
  Ptr lhs_, rhs_;
};

// Parses the canonical infix grammar back into an Expr tree. Throws
// ParseError on malformed input.
Expr::Ptr parse_expression(const std::string& text);

}  // namespace forge::qa
