#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "cflow/errors.hpp"

namespace cflow {

enum class ExprKind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp };

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable scalar expression over variables x1..xm.
///
/// Supports +, -, *, /, integer powers, sin, cos and exp, which is enough for
/// every input this toolkit consumes while keeping exact differentiation
/// trivial. The factory functions fold constants and apply 0/1 identities;
/// no other rewriting happens, so a tree evaluates exactly as built.
class Expr {
 public:
  ExprKind kind() const { return kind_; }
  double constant_value() const { return value_; }
  /// 0-based variable index.
  int variable_index() const { return var_; }
  int exponent() const { return expo_; }
  const ExprPtr& lhs() const { return a_; }
  const ExprPtr& rhs() const { return b_; }

  /// Evaluates at x (size >= number of variables used). Throws EvalError on
  /// division by zero or a non-finite intermediate.
  double eval(std::span<const double> x) const;

  bool uses_variable(int var) const;
  /// True when the tree contains no variables; optionally yields the value.
  bool is_constant(double* value = nullptr) const;
  /// 1 + highest variable index used, 0 for constant expressions.
  int variable_count() const;
  std::string str() const;

  static ExprPtr constant(double v);
  static ExprPtr variable(int index);
  static ExprPtr add(ExprPtr a, ExprPtr b);
  static ExprPtr sub(ExprPtr a, ExprPtr b);
  static ExprPtr mul(ExprPtr a, ExprPtr b);
  static ExprPtr div(ExprPtr a, ExprPtr b);
  static ExprPtr pow_int(ExprPtr a, int n);
  static ExprPtr neg(ExprPtr a);
  static ExprPtr sin_fn(ExprPtr a);
  static ExprPtr cos_fn(ExprPtr a);
  static ExprPtr exp_fn(ExprPtr a);

 private:
  Expr(ExprKind k, double v, int var, int expo, ExprPtr a, ExprPtr b)
      : kind_(k), value_(v), var_(var), expo_(expo), a_(std::move(a)), b_(std::move(b)) {}
  static ExprPtr make(ExprKind k, double v, int var, int expo, ExprPtr a, ExprPtr b);

  ExprKind kind_;
  double value_ = 0.0;
  int var_ = -1;
  int expo_ = 0;
  ExprPtr a_, b_;
};

/// Parses an expression in x1..xdim. Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := unary (('*'|'/') unary)*
///   unary  := ('-'|'+') unary | postfix
///   postfix:= atom ('^' ['-'] INT)?
///   atom   := NUMBER | 'x'INT | ('sin'|'cos'|'exp') '(' expr ')' | '(' expr ')'
ExprPtr parse_scalar(std::string_view text, int dim);

/// Exact symbolic partial derivative with respect to x_{var+1} (0-based var).
ExprPtr differentiate(const ExprPtr& e, int var);

}  // namespace cflow
