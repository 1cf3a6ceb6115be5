#include "cflow/field.hpp"

#include <cmath>

namespace cflow {

Box Box::cube(int dim, double lo, double hi) {
  if (dim < 1) throw DimensionError("box dimension must be >= 1");
  if (!(lo < hi)) throw DimensionError("box needs lo < hi");
  Box b;
  b.lo = Vec::Constant(dim, lo);
  b.hi = Vec::Constant(dim, hi);
  return b;
}

bool Box::contains(const Vec& x, double slack) const {
  if (x.size() != lo.size()) throw DimensionError("point dimension does not match box");
  for (int i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lo[i] - slack && x[i] <= hi[i] + slack)) return false;
  }
  return true;
}

Box Box::shrunk(double factor) const {
  Box b = *this;
  const Vec center = 0.5 * (lo + hi);
  b.lo = center + factor * (lo - center);
  b.hi = center + factor * (hi - center);
  return b;
}

Vec VectorField::eval(const Vec& p) const {
  if (!domain.contains(p, 1e-12)) throw DomainError("point outside field domain");
  return eval_unchecked(p);
}

Vec VectorField::eval_unchecked(const Vec& p) const {
  if (p.size() != dim) throw DimensionError("point dimension does not match field");
  Vec out(dim);
  const std::span<const double> xs(p.data(), static_cast<std::size_t>(p.size()));
  for (int i = 0; i < dim; ++i) {
    out[i] = components[static_cast<std::size_t>(i)]->eval(xs);
    if (!std::isfinite(out[i])) throw EvalError("non-finite field value");
  }
  return out;
}

Mat VectorField::jacobian(const Vec& p) const {
  Mat j(dim, dim);
  const std::span<const double> xs(p.data(), static_cast<std::size_t>(p.size()));
  for (int i = 0; i < dim; ++i) {
    for (int c = 0; c < dim; ++c) {
      j(i, c) = differentiate(components[static_cast<std::size_t>(i)], c)->eval(xs);
    }
  }
  return j;
}

bool VectorField::is_zero() const {
  for (const auto& c : components) {
    double v;
    if (!c->is_constant(&v) || v != 0.0) return false;
  }
  return true;
}

VectorField parse_field(std::string_view text, int dim, std::optional<Box> domain) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const char c = i < text.size() ? text[i] : '\0';
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if ((i == text.size() || ((c == ',' || c == ';') && depth == 0))) {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  if (static_cast<int>(parts.size()) != dim)
    throw DimensionError("field has " + std::to_string(parts.size()) + " components, expected " +
                         std::to_string(dim));

  VectorField f;
  f.dim = dim;
  f.domain = domain.value_or(Box::cube(dim, -10.0, 10.0));
  if (f.domain.dim() != dim) throw DimensionError("domain box dimension does not match field");
  f.components.reserve(parts.size());
  for (auto part : parts) f.components.push_back(parse_scalar(part, dim));
  return f;
}

VectorField negate_field(const VectorField& x) {
  VectorField out = x;
  for (auto& c : out.components) c = Expr::neg(c);
  return out;
}

VectorField lie_bracket_exact(const VectorField& x, const VectorField& y) {
  if (x.dim != y.dim) throw DimensionError("bracket of fields of different dimensions");
  VectorField out;
  out.dim = x.dim;
  out.domain = x.domain;
  out.components.reserve(static_cast<std::size_t>(x.dim));
  for (int i = 0; i < x.dim; ++i) {
    ExprPtr acc = Expr::constant(0.0);
    const auto yi = y.components[static_cast<std::size_t>(i)];
    const auto xi = x.components[static_cast<std::size_t>(i)];
    for (int j = 0; j < x.dim; ++j) {
      acc = Expr::add(acc, Expr::mul(x.components[static_cast<std::size_t>(j)],
                                     differentiate(yi, j)));
      acc = Expr::sub(acc, Expr::mul(y.components[static_cast<std::size_t>(j)],
                                     differentiate(xi, j)));
    }
    out.components.push_back(acc);
  }
  return out;
}

VectorField bracket_word_exact(const BracketExpr& b, const std::vector<VectorField>& fields) {
  for (const auto& f : fields) {
    if (f.dim != fields.front().dim)
      throw DimensionError("bracket word over fields of different dimensions");
  }
  return eval_bracket(b, fields, [](const VectorField& u, const VectorField& v) {
    return lie_bracket_exact(u, v);
  });
}

AffineForm classify_affine(const VectorField& x) {
  AffineForm form;
  form.linear = Mat::Zero(x.dim, x.dim);
  form.offset = Vec::Zero(x.dim);
  bool all_const_components = true;
  for (int i = 0; i < x.dim; ++i) {
    const auto& comp = x.components[static_cast<std::size_t>(i)];
    for (int j = 0; j < x.dim; ++j) {
      double slope;
      if (!differentiate(comp, j)->is_constant(&slope)) return form;  // not affine
      form.linear(i, j) = slope;
      if (slope != 0.0) all_const_components = false;
    }
  }
  const Vec origin = Vec::Zero(x.dim);
  const std::span<const double> xs(origin.data(), static_cast<std::size_t>(origin.size()));
  try {
    for (int i = 0; i < x.dim; ++i) {
      form.offset[i] = x.components[static_cast<std::size_t>(i)]->eval(xs);
    }
  } catch (const Error&) {
    return form;  // value undefined at the origin: treat as a general field
  }
  form.affine = true;
  form.constant = all_const_components;
  return form;
}

}  // namespace cflow
