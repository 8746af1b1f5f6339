#include "forge/qa/expression.hpp"

#include "forge/common.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace forge::qa {

namespace {

int precedence(char op) {
  switch (op) {
    case '+':
    case '-':
      return 1;
    case '*':
    case '/':
      return 2;
    case '^':
      return 3;
    default:
      return 0;
  }
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

Expr::Ptr Expr::number(double v) {
  auto e = std::make_shared<Expr>();
  e->kind_ = Kind::kNumber;
  e->value_ = v;
  return e;
}

Expr::Ptr Expr::symbol(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind_ = Kind::kSymbol;
  e->name_ = std::move(name);
  return e;
}

Expr::Ptr Expr::neg(Ptr a) {
  auto e = std::make_shared<Expr>();
  e->kind_ = Kind::kUnary;
  e->op_ = '-';
  e->lhs_ = std::move(a);
  return e;
}

Expr::Ptr Expr::binary(char op, Ptr a, Ptr b) {
  auto e = std::make_shared<Expr>();
  e->kind_ = Kind::kBinary;
  e->op_ = op;
  e->lhs_ = std::move(a);
  e->rhs_ = std::move(b);
  return e;
}

Expr::Ptr Expr::call(std::string fn, Ptr a) {
  auto e = std::make_shared<Expr>();
  e->kind_ = Kind::kCall;
  e->name_ = std::move(fn);
  e->lhs_ = std::move(a);
  return e;
}

double Expr::eval(const std::map<std::string, double>& symbols) const {
  switch (kind_) {
    case Kind::kNumber:
      return value_;
    case Kind::kSymbol: {
      if (name_ == "pi") return std::numbers::pi;
      auto it = symbols.find(name_);
      if (it == symbols.end()) throw Error("unbound symbol '" + name_ + "'");
      return it->second;
    }
    case Kind::kUnary:
      return -lhs_->eval(symbols);
    case Kind::kBinary: {
      double a = lhs_->eval(symbols);
      double b = rhs_->eval(symbols);
      switch (op_) {
        case '+':
          return a + b;
        case '-':
          return a - b;
        case '*':
          return a * b;
        case '/':
          return a / b;
        case '^':
          return std::pow(a, b);
      }
      throw Error("bad operator");
    }
    case Kind::kCall: {
      double a = lhs_->eval(symbols);
      if (name_ == "sqrt") return std::sqrt(a);
      if (name_ == "sin") return std::sin(a);
      if (name_ == "cos") return std::cos(a);
      if (name_ == "tan") return std::tan(a);
      if (name_ == "ln") return std::log(a);
      if (name_ == "exp") return std::exp(a);
      if (name_ == "abs") return std::abs(a);
      throw Error("unknown function '" + name_ + "'");
    }
  }
  throw Error("bad expression node");
}

std::vector<std::string> Expr::symbols() const {
  std::set<std::string> seen;
  std::vector<std::string> out;
  std::vector<const Expr*> stack{this};
  while (!stack.empty()) {
    const Expr* e = stack.back();
    stack.pop_back();
    if (e->kind_ == Kind::kSymbol && e->name_ != "pi" &&
        seen.insert(e->name_).second) {
      out.push_back(e->name_);
    }
    if (e->lhs_) stack.push_back(e->lhs_.get());
    if (e->rhs_) stack.push_back(e->rhs_.get());
  }
  return out;
}

std::string Expr::str() const {
  switch (kind_) {
    case Kind::kNumber:
      return format_number(value_);
    case Kind::kSymbol:
      return name_;
    case Kind::kUnary: {
      std::string inner = lhs_->str();
      if (lhs_->kind_ == Kind::kBinary) inner = "(" + inner + ")";
      return "-" + inner;
    }
    case Kind::kBinary: {
      auto wrap = [&](const Ptr& side, bool right) {
        std::string s = side->str();
        bool need = false;
        if (side->kind_ == Kind::kBinary) {
          int p = precedence(side->op_), pp = precedence(op_);
          need = p < pp ||
                 (p == pp && right && (op_ == '-' || op_ == '/' || op_ == '^'));
        } else if (side->kind_ == Kind::kUnary) {
          need = true;
        }
        return need ? "(" + s + ")" : s;
      };
      std::string op(1, op_);
      return wrap(lhs_, false) + " " + op + " " + wrap(rhs_, true);
    }
    case Kind::kCall:
      return name_ + "(" + lhs_->str() + ")";
  }
  return "";
}

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  Expr::Ptr parse() {
    auto e = expr(0);
    skip_ws();
    if (pos_ != s_.size()) {
      throw ParseError("trailing characters in expression at offset " +
                       std::to_string(pos_));
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  Expr::Ptr expr(int min_prec) {
    Expr::Ptr lhs = unary();
    for (;;) {
      char op = peek();
      int p = precedence(op);
      if (p == 0 || p < min_prec) return lhs;
      ++pos_;
      // ^ is right-associative
      Expr::Ptr rhs = expr(op == '^' ? p : p + 1);
      lhs = Expr::binary(op, lhs, rhs);
    }
  }

  Expr::Ptr unary() {
    if (peek() == '-') {
      ++pos_;
      return Expr::neg(unary());
    }
    if (peek() == '+') {
      ++pos_;
      return unary();
    }
    return atom();
  }

  Expr::Ptr atom() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      auto e = expr(0);
      if (peek() != ')') throw ParseError("expected ')' in expression");
      ++pos_;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = pos_;
      while (end < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[end])) ||
              s_[end] == '.' || s_[end] == 'e' || s_[end] == 'E' ||
              ((s_[end] == '+' || s_[end] == '-') && end > pos_ &&
               (s_[end - 1] == 'e' || s_[end - 1] == 'E')))) {
        ++end;
      }
      double v = std::stod(s_.substr(pos_, end - pos_));
      pos_ = end;
      return Expr::number(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[end])) ||
              s_[end] == '_')) {
        ++end;
      }
      std::string name = s_.substr(pos_, end - pos_);
      pos_ = end;
      if (peek() == '(') {
        ++pos_;
        auto arg = expr(0);
        if (peek() != ')') throw ParseError("expected ')' after " + name);
        ++pos_;
        return Expr::call(name, arg);
      }
      return Expr::symbol(name);
    }
    throw ParseError("unexpected character '" + std::string(1, c) +
                     "' in expression");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr::Ptr parse_expression(const std::string& text) {
  return Parser(text).parse();
}

}  // namespace forge::qa
