#pragma once

#include <memory>
#include <string>

namespace shellcond {

// Immutable closed-form expression in one variable x: constants, x, pi,
// + - * /, unary minus, cos, sin, and integer powers via ^. Supports exact
// symbolic differentiation (the revolution oracles need R' and R'').
class Expr {
 public:
  using Ptr = std::shared_ptr<const Expr>;
  enum class Kind { Const, Var, Add, Sub, Mul, Div, Neg, Cos, Sin, Pow };

  double eval(double x) const;
  Ptr derivative() const;
  std::string str() const;

  // Smart constructors with light simplification (constant folding,
  // 0/1 identities) so derivative trees stay small.
  static Ptr constant(double v);
  static Ptr var();
  static Ptr add(Ptr a, Ptr b);
  static Ptr sub(Ptr a, Ptr b);
  static Ptr mul(Ptr a, Ptr b);
  static Ptr div(Ptr a, Ptr b);
  static Ptr neg(Ptr a);
  static Ptr cos(Ptr a);
  static Ptr sin(Ptr a);
  static Ptr pow(Ptr a, int n);

  Kind kind() const { return kind_; }
  double value() const { return value_; }

 private:
  Expr(Kind k, double v, int n, Ptr a, Ptr b)
      : kind_(k), value_(v), exponent_(n), a_(std::move(a)), b_(std::move(b)) {}
  Kind kind_;
  double value_ = 0;  // Const payload
  int exponent_ = 0;  // Pow payload
  Ptr a_, b_;
};

// Recursive-descent parser for the grammar above; throws ParseError with a
// position diagnostic on malformed input.
Expr::Ptr parse_expression(const std::string& text);

// Radius profile R(x) of a surface of revolution about the x-axis, with
// symbolic first and second derivatives. Valid profiles are strictly positive
// on [-1,1] and periodic: R(-1)=R(1) and R'(-1)=R'(1) to 1e-12.
class RevolutionProfile {
 public:
  static RevolutionProfile fromExpression(const std::string& text);
  static RevolutionProfile constant(double r);

  double R(double x) const { return r_->eval(x); }
  double dR(double x) const { return dr_->eval(x); }
  double ddR(double x) const { return ddr_->eval(x); }
  const std::string& expression() const { return text_; }

 private:
  RevolutionProfile(std::string text, Expr::Ptr r);
  std::string text_;
  Expr::Ptr r_, dr_, ddr_;
};

}  // namespace shellcond
