#include "shellcond/profile.h"

#include "shellcond/errors.h"

#include <cctype>
#include <cmath>
#include <sstream>

namespace shellcond {

double Expr::eval(double x) const {
  switch (kind_) {
    case Kind::Const: return value_;
    case Kind::Var: return x;
    case Kind::Add: return a_->eval(x) + b_->eval(x);
    case Kind::Sub: return a_->eval(x) - b_->eval(x);
    case Kind::Mul: return a_->eval(x) * b_->eval(x);
    case Kind::Div: return a_->eval(x) / b_->eval(x);
    case Kind::Neg: return -a_->eval(x);
    case Kind::Cos: return std::cos(a_->eval(x));
    case Kind::Sin: return std::sin(a_->eval(x));
    case Kind::Pow: return std::pow(a_->eval(x), exponent_);
  }
  return 0;
}

Expr::Ptr Expr::constant(double v) { return Ptr(new Expr(Kind::Const, v, 0, nullptr, nullptr)); }
Expr::Ptr Expr::var() { return Ptr(new Expr(Kind::Var, 0, 0, nullptr, nullptr)); }

namespace {
bool isConst(const Expr::Ptr& e, double v) {
  return e->kind() == Expr::Kind::Const && e->value() == v;
}
bool bothConst(const Expr::Ptr& a, const Expr::Ptr& b) {
  return a->kind() == Expr::Kind::Const && b->kind() == Expr::Kind::Const;
}
}  // namespace

Expr::Ptr Expr::add(Ptr a, Ptr b) {
  if (bothConst(a, b)) return constant(a->value() + b->value());
  if (isConst(a, 0)) return b;
  if (isConst(b, 0)) return a;
  return Ptr(new Expr(Kind::Add, 0, 0, std::move(a), std::move(b)));
}
Expr::Ptr Expr::sub(Ptr a, Ptr b) {
  if (bothConst(a, b)) return constant(a->value() - b->value());
  if (isConst(b, 0)) return a;
  if (isConst(a, 0)) return neg(std::move(b));
  return Ptr(new Expr(Kind::Sub, 0, 0, std::move(a), std::move(b)));
}
Expr::Ptr Expr::mul(Ptr a, Ptr b) {
  if (bothConst(a, b)) return constant(a->value() * b->value());
  if (isConst(a, 0) || isConst(b, 0)) return constant(0);
  if (isConst(a, 1)) return b;
  if (isConst(b, 1)) return a;
  return Ptr(new Expr(Kind::Mul, 0, 0, std::move(a), std::move(b)));
}
Expr::Ptr Expr::div(Ptr a, Ptr b) {
  if (isConst(b, 0)) throw ParseError("division by constant zero");
  if (bothConst(a, b)) return constant(a->value() / b->value());
  if (isConst(a, 0)) return constant(0);
  if (isConst(b, 1)) return a;
  return Ptr(new Expr(Kind::Div, 0, 0, std::move(a), std::move(b)));
}
Expr::Ptr Expr::neg(Ptr a) {
  if (a->kind() == Kind::Const) return constant(-a->value());
  if (a->kind() == Kind::Neg) return a->a_;
  return Ptr(new Expr(Kind::Neg, 0, 0, std::move(a), nullptr));
}
Expr::Ptr Expr::cos(Ptr a) { return Ptr(new Expr(Kind::Cos, 0, 0, std::move(a), nullptr)); }
Expr::Ptr Expr::sin(Ptr a) { return Ptr(new Expr(Kind::Sin, 0, 0, std::move(a), nullptr)); }
Expr::Ptr Expr::pow(Ptr a, int n) {
  if (n == 0) return constant(1);
  if (n == 1) return a;
  if (a->kind() == Kind::Const) return constant(std::pow(a->value(), n));
  return Ptr(new Expr(Kind::Pow, 0, n, std::move(a), nullptr));
}

Expr::Ptr Expr::derivative() const {
  switch (kind_) {
    case Kind::Const: return constant(0);
    case Kind::Var: return constant(1);
    case Kind::Add: return add(a_->derivative(), b_->derivative());
    case Kind::Sub: return sub(a_->derivative(), b_->derivative());
    case Kind::Mul:
      return add(mul(a_->derivative(), b_), mul(a_, b_->derivative()));
    case Kind::Div:
      return div(sub(mul(a_->derivative(), b_), mul(a_, b_->derivative())), pow(b_, 2));
    case Kind::Neg: return neg(a_->derivative());
    case Kind::Cos: return neg(mul(sin(a_), a_->derivative()));
    case Kind::Sin: return mul(cos(a_), a_->derivative());
    case Kind::Pow:
      return mul(mul(constant(exponent_), pow(a_, exponent_ - 1)), a_->derivative());
  }
  return constant(0);
}

std::string Expr::str() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Const: os << value_; break;
    case Kind::Var: os << "x"; break;
    case Kind::Add: os << "(" << a_->str() << "+" << b_->str() << ")"; break;
    case Kind::Sub: os << "(" << a_->str() << "-" << b_->str() << ")"; break;
    case Kind::Mul: os << "(" << a_->str() << "*" << b_->str() << ")"; break;
    case Kind::Div: os << "(" << a_->str() << "/" << b_->str() << ")"; break;
    case Kind::Neg: os << "(-" << a_->str() << ")"; break;
    case Kind::Cos: os << "cos(" << a_->str() << ")"; break;
    case Kind::Sin: os << "sin(" << a_->str() << ")"; break;
    case Kind::Pow: os << "(" << a_->str() << "^" << exponent_ << ")"; break;
  }
  return os.str();
}

namespace {

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  Expr::Ptr run() {
    auto e = expr();
    skipSpace();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression error at position " + std::to_string(pos_) + ": " + msg);
  }
  void skipSpace() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skipSpace();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skipSpace();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  Expr::Ptr expr() {
    auto e = term();
    for (;;) {
      if (eat('+')) e = Expr::add(e, term());
      else if (eat('-')) e = Expr::sub(e, term());
      else return e;
    }
  }
  Expr::Ptr term() {
    auto e = factor();
    for (;;) {
      if (eat('*')) e = Expr::mul(e, factor());
      else if (eat('/')) e = Expr::div(e, factor());
      else return e;
    }
  }
  Expr::Ptr factor() {
    if (eat('-')) return Expr::neg(factor());
    if (eat('+')) return factor();
    auto base = atom();
    if (eat('^')) {
      bool negExp = eat('-');
      skipSpace();
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ == start) fail("expected integer exponent after '^'");
      int n = std::stoi(s_.substr(start, pos_ - start));
      if (negExp) return Expr::div(Expr::constant(1), Expr::pow(base, n));
      return Expr::pow(base, n);
    }
    return base;
  }
  Expr::Ptr atom() {
    skipSpace();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t consumed = 0;
      double v = std::stod(s_.substr(pos_), &consumed);
      pos_ += consumed;
      return Expr::constant(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string name = s_.substr(start, pos_ - start);
      if (name == "x") return Expr::var();
      if (name == "pi") return Expr::constant(M_PI);
      if (name == "cos" || name == "sin") {
        if (!eat('(')) fail("expected '(' after " + name);
        auto arg = expr();
        if (!eat(')')) fail("missing ')' after " + name + " argument");
        return name == "cos" ? Expr::cos(arg) : Expr::sin(arg);
      }
      fail("unknown identifier '" + name + "'");
    }
    if (eat('(')) {
      auto e = expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& s_;
  size_t pos_ = 0;
};

}  // namespace

Expr::Ptr parse_expression(const std::string& text) { return Parser(text).run(); }

RevolutionProfile::RevolutionProfile(std::string text, Expr::Ptr r)
    : text_(std::move(text)), r_(std::move(r)) {
  dr_ = r_->derivative();
  ddr_ = dr_->derivative();
  const int samples = 4096;
  for (int i = 0; i <= samples; ++i) {
    double x = -1.0 + 2.0 * i / samples;
    double v = r_->eval(x);
    if (!(v > 0) || !std::isfinite(v))
      throw InputError("profile must be strictly positive on [-1,1]; R(" + std::to_string(x) +
                       ") = " + std::to_string(v));
  }
  double scale = std::max(1.0, std::abs(r_->eval(1.0)));
  if (std::abs(r_->eval(-1.0) - r_->eval(1.0)) > 1e-12 * scale)
    throw InputError("profile is not periodic: R(-1) != R(1)");
  if (std::abs(dr_->eval(-1.0) - dr_->eval(1.0)) > 1e-12 * std::max(1.0, std::abs(dr_->eval(1.0))))
    throw InputError("profile is not periodic: R'(-1) != R'(1)");
}

RevolutionProfile RevolutionProfile::fromExpression(const std::string& text) {
  return RevolutionProfile(text, parse_expression(text));
}

RevolutionProfile RevolutionProfile::constant(double r) {
  std::ostringstream os;
  os.precision(17);
  os << r;
  return RevolutionProfile(os.str(), Expr::constant(r));
}

}  // namespace shellcond
