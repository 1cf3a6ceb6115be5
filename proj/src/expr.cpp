#include "cflow/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace cflow {

namespace {
double ipow(double base, int n) {
  if (n < 0) {
    if (base == 0.0) throw EvalError("zero raised to a negative power");
    return 1.0 / ipow(base, -n);
  }
  double r = 1.0, b = base;
  for (int e = n; e > 0; e >>= 1) {
    if (e & 1) r *= b;
    b *= b;
  }
  return r;
}
}  // namespace

ExprPtr Expr::make(ExprKind k, double v, int var, int expo, ExprPtr a, ExprPtr b) {
  return ExprPtr(new Expr(k, v, var, expo, std::move(a), std::move(b)));
}

ExprPtr Expr::constant(double v) { return make(ExprKind::Constant, v, -1, 0, nullptr, nullptr); }

ExprPtr Expr::variable(int index) {
  if (index < 0) throw DimensionError("negative variable index");
  return make(ExprKind::Variable, 0.0, index, 0, nullptr, nullptr);
}

ExprPtr Expr::add(ExprPtr a, ExprPtr b) {
  double ca, cb;
  if (a->is_constant(&ca) && b->is_constant(&cb)) return constant(ca + cb);
  if (a->is_constant(&ca) && ca == 0.0) return b;
  if (b->is_constant(&cb) && cb == 0.0) return a;
  return make(ExprKind::Add, 0, -1, 0, std::move(a), std::move(b));
}

ExprPtr Expr::sub(ExprPtr a, ExprPtr b) {
  double ca, cb;
  if (a->is_constant(&ca) && b->is_constant(&cb)) return constant(ca - cb);
  if (b->is_constant(&cb) && cb == 0.0) return a;
  if (a->is_constant(&ca) && ca == 0.0) return neg(std::move(b));
  return make(ExprKind::Sub, 0, -1, 0, std::move(a), std::move(b));
}

ExprPtr Expr::mul(ExprPtr a, ExprPtr b) {
  double ca, cb;
  if (a->is_constant(&ca) && b->is_constant(&cb)) return constant(ca * cb);
  if (a->is_constant(&ca)) {
    if (ca == 0.0) return constant(0.0);
    if (ca == 1.0) return b;
  }
  if (b->is_constant(&cb)) {
    if (cb == 0.0) return constant(0.0);
    if (cb == 1.0) return a;
  }
  return make(ExprKind::Mul, 0, -1, 0, std::move(a), std::move(b));
}

ExprPtr Expr::div(ExprPtr a, ExprPtr b) {
  double ca, cb;
  if (b->is_constant(&cb) && cb != 0.0) {
    if (a->is_constant(&ca)) return constant(ca / cb);
    if (cb == 1.0) return a;
  }
  if (a->is_constant(&ca) && ca == 0.0) return constant(0.0);
  return make(ExprKind::Div, 0, -1, 0, std::move(a), std::move(b));
}

ExprPtr Expr::pow_int(ExprPtr a, int n) {
  if (n == 0) return constant(1.0);
  if (n == 1) return a;
  double ca;
  if (a->is_constant(&ca) && !(ca == 0.0 && n < 0)) return constant(ipow(ca, n));
  return make(ExprKind::Pow, 0, -1, n, std::move(a), nullptr);
}

ExprPtr Expr::neg(ExprPtr a) {
  double ca;
  if (a->is_constant(&ca)) return constant(-ca);
  if (a->kind() == ExprKind::Neg) return a->lhs();
  return make(ExprKind::Neg, 0, -1, 0, std::move(a), nullptr);
}

ExprPtr Expr::sin_fn(ExprPtr a) {
  double ca;
  if (a->is_constant(&ca)) return constant(std::sin(ca));
  return make(ExprKind::Sin, 0, -1, 0, std::move(a), nullptr);
}

ExprPtr Expr::cos_fn(ExprPtr a) {
  double ca;
  if (a->is_constant(&ca)) return constant(std::cos(ca));
  return make(ExprKind::Cos, 0, -1, 0, std::move(a), nullptr);
}

ExprPtr Expr::exp_fn(ExprPtr a) {
  double ca;
  if (a->is_constant(&ca)) return constant(std::exp(ca));
  return make(ExprKind::Exp, 0, -1, 0, std::move(a), nullptr);
}

double Expr::eval(std::span<const double> x) const {
  switch (kind_) {
    case ExprKind::Constant: return value_;
    case ExprKind::Variable:
      if (var_ >= static_cast<int>(x.size()))
        throw DimensionError("point has too few coordinates for x" + std::to_string(var_ + 1));
      return x[static_cast<std::size_t>(var_)];
    case ExprKind::Add: return a_->eval(x) + b_->eval(x);
    case ExprKind::Sub: return a_->eval(x) - b_->eval(x);
    case ExprKind::Mul: return a_->eval(x) * b_->eval(x);
    case ExprKind::Div: {
      const double den = b_->eval(x);
      if (den == 0.0) throw EvalError("division by zero");
      return a_->eval(x) / den;
    }
    case ExprKind::Pow: return ipow(a_->eval(x), expo_);
    case ExprKind::Neg: return -a_->eval(x);
    case ExprKind::Sin: return std::sin(a_->eval(x));
    case ExprKind::Cos: return std::cos(a_->eval(x));
    case ExprKind::Exp: {
      const double v = std::exp(a_->eval(x));
      if (!std::isfinite(v)) throw EvalError("exp overflow");
      return v;
    }
  }
  throw EvalError("corrupt expression node");
}

bool Expr::uses_variable(int var) const {
  switch (kind_) {
    case ExprKind::Constant: return false;
    case ExprKind::Variable: return var_ == var;
    default:
      if (a_ && a_->uses_variable(var)) return true;
      return b_ && b_->uses_variable(var);
  }
}

bool Expr::is_constant(double* value) const {
  if (kind_ != ExprKind::Constant) return false;
  if (value) *value = value_;
  return true;
}

int Expr::variable_count() const {
  switch (kind_) {
    case ExprKind::Constant: return 0;
    case ExprKind::Variable: return var_ + 1;
    default: {
      int n = a_ ? a_->variable_count() : 0;
      if (b_) n = std::max(n, b_->variable_count());
      return n;
    }
  }
}

namespace {
int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;
  }
}

std::string wrap(const Expr& e, int min_prec) {
  std::string s = e.str();
  if (precedence(e.kind()) < min_prec) return "(" + s + ")";
  return s;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string Expr::str() const {
  switch (kind_) {
    case ExprKind::Constant: return format_double(value_);
    case ExprKind::Variable: return "x" + std::to_string(var_ + 1);
    case ExprKind::Add: return wrap(*a_, 1) + " + " + wrap(*b_, 2);
    case ExprKind::Sub: return wrap(*a_, 1) + " - " + wrap(*b_, 2);
    case ExprKind::Mul: return wrap(*a_, 2) + "*" + wrap(*b_, 3);
    case ExprKind::Div: return wrap(*a_, 2) + "/" + wrap(*b_, 3);
    case ExprKind::Pow: return wrap(*a_, 5) + "^" + std::to_string(expo_);
    case ExprKind::Neg: return "-" + wrap(*a_, 3);
    case ExprKind::Sin: return "sin(" + a_->str() + ")";
    case ExprKind::Cos: return "cos(" + a_->str() + ")";
    case ExprKind::Exp: return "exp(" + a_->str() + ")";
  }
  return "?";
}

ExprPtr differentiate(const ExprPtr& e, int var) {
  switch (e->kind()) {
    case ExprKind::Constant: return Expr::constant(0.0);
    case ExprKind::Variable:
      return Expr::constant(e->variable_index() == var ? 1.0 : 0.0);
    case ExprKind::Add:
      return Expr::add(differentiate(e->lhs(), var), differentiate(e->rhs(), var));
    case ExprKind::Sub:
      return Expr::sub(differentiate(e->lhs(), var), differentiate(e->rhs(), var));
    case ExprKind::Mul:
      return Expr::add(Expr::mul(differentiate(e->lhs(), var), e->rhs()),
                       Expr::mul(e->lhs(), differentiate(e->rhs(), var)));
    case ExprKind::Div:
      return Expr::div(Expr::sub(Expr::mul(differentiate(e->lhs(), var), e->rhs()),
                                 Expr::mul(e->lhs(), differentiate(e->rhs(), var))),
                       Expr::pow_int(e->rhs(), 2));
    case ExprKind::Pow:
      return Expr::mul(
          Expr::mul(Expr::constant(e->exponent()), Expr::pow_int(e->lhs(), e->exponent() - 1)),
          differentiate(e->lhs(), var));
    case ExprKind::Neg: return Expr::neg(differentiate(e->lhs(), var));
    case ExprKind::Sin:
      return Expr::mul(Expr::cos_fn(e->lhs()), differentiate(e->lhs(), var));
    case ExprKind::Cos:
      return Expr::neg(Expr::mul(Expr::sin_fn(e->lhs()), differentiate(e->lhs(), var)));
    case ExprKind::Exp:
      return Expr::mul(Expr::exp_fn(e->lhs()), differentiate(e->lhs(), var));
  }
  throw EvalError("corrupt expression node");
}

namespace {
struct ScalarParser {
  std::string_view s;
  int dim;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }

  ExprPtr parse_expr() {
    ExprPtr e = parse_term();
    for (;;) {
      char c = peek();
      if (c == '+') {
        ++pos;
        e = Expr::add(e, parse_term());
      } else if (c == '-') {
        ++pos;
        e = Expr::sub(e, parse_term());
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_unary();
    for (;;) {
      char c = peek();
      if (c == '*') {
        ++pos;
        e = Expr::mul(e, parse_unary());
      } else if (c == '/') {
        ++pos;
        e = Expr::div(e, parse_unary());
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_unary() {
    char c = peek();
    if (c == '-') {
      ++pos;
      return Expr::neg(parse_unary());
    }
    if (c == '+') {
      ++pos;
      return parse_unary();
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_atom();
    if (peek() == '^') {
      ++pos;
      e = Expr::pow_int(e, parse_int_literal());
    }
    return e;
  }

  int parse_int_literal() {
    skip_ws();
    bool negative = false;
    bool parens = consume('(');
    if (peek() == '-') {
      negative = true;
      ++pos;
    }
    skip_ws();
    std::size_t start = pos;
    long v = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      v = v * 10 + (s[pos] - '0');
      if (v > 64) throw SyntaxError("exponent out of range", start);
      ++pos;
    }
    if (pos == start) throw SyntaxError("expected an integer exponent", pos);
    if (parens && !consume(')')) throw SyntaxError("expected ')'", pos);
    return negative ? -static_cast<int>(v) : static_cast<int>(v);
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (pos >= s.size()) throw SyntaxError("unexpected end of expression", pos);
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos;
      ExprPtr e = parse_expr();
      if (!consume(')')) throw SyntaxError("expected ')'", pos);
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    throw SyntaxError(std::string("unexpected character '") + c + "'", pos);
  }

  ExprPtr parse_number() {
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      std::size_t frac = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos == frac) throw SyntaxError("expected digits after '.'", pos);
    }
    if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
      std::size_t save = pos;
      ++pos;
      if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
      if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      } else {
        pos = save;  // 'e' begins an identifier, not an exponent
      }
    }
    const std::string text(s.substr(start, pos - start));
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) throw SyntaxError("bad number literal", start);
    return Expr::constant(v);
  }

  ExprPtr parse_ident() {
    std::size_t start = pos;
    while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
    const std::string_view name = s.substr(start, pos - start);
    if (name == "x") {
      std::size_t digits = pos;
      long v = 0;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        v = v * 10 + (s[pos] - '0');
        if (v > 1'000) throw SyntaxError("variable index out of range", digits);
        ++pos;
      }
      if (pos == digits) throw SyntaxError("expected an index after 'x'", pos);
      if (v < 1 || v > dim)
        throw SyntaxError("variable x" + std::to_string(v) + " outside x1..x" +
                              std::to_string(dim),
                          start);
      return Expr::variable(static_cast<int>(v - 1));
    }
    auto func_arg = [&]() {
      if (!consume('(')) throw SyntaxError("expected '(' after function name", pos);
      ExprPtr e = parse_expr();
      if (!consume(')')) throw SyntaxError("expected ')'", pos);
      return e;
    };
    if (name == "sin") return Expr::sin_fn(func_arg());
    if (name == "cos") return Expr::cos_fn(func_arg());
    if (name == "exp") return Expr::exp_fn(func_arg());
    throw SyntaxError("unknown identifier '" + std::string(name) + "'", start);
  }
};
}  // namespace

ExprPtr parse_scalar(std::string_view text, int dim) {
  if (dim < 1) throw DimensionError("expression dimension must be >= 1");
  ScalarParser p{text, dim};
  ExprPtr e = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) throw SyntaxError("trailing input after expression", p.pos);
  return e;
}

}  // namespace cflow
