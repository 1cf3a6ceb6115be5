#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>
#include <vector>

#include "cflow/bracket.hpp"
#include "cflow/expr.hpp"

namespace cflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Axis-aligned open box; the domain of fields, sections and local maps.
struct Box {
  Vec lo, hi;

  static Box cube(int dim, double lo, double hi);
  int dim() const { return static_cast<int>(lo.size()); }
  /// True when x lies inside, allowing `slack` beyond each face.
  bool contains(const Vec& x, double slack = 0.0) const;
  /// Box scaled about its center by `factor` (0 < factor <= 1).
  Box shrunk(double factor) const;
};

/// Smooth vector field on a box, one expression per component.
struct VectorField {
  int dim = 0;
  std::vector<ExprPtr> components;
  Box domain;

  /// Component values at p. Throws DomainError outside the box and EvalError
  /// on poles or non-finite values.
  Vec eval(const Vec& p) const;
  /// Same without the domain check; integrators track containment themselves.
  Vec eval_unchecked(const Vec& p) const;
  /// Exact Jacobian entries d X^i / d x_j.
  Mat jacobian(const Vec& p) const;
  bool is_zero() const;
};

/// Parses a comma- or semicolon-separated component list, e.g. "-x2, x1".
/// The component count must equal dim (DimensionError otherwise).
VectorField parse_field(std::string_view text, int dim, std::optional<Box> domain = {});

inline Vec eval_field(const VectorField& x, const Vec& p) { return x.eval(p); }

VectorField negate_field(const VectorField& x);

/// Exact bracket [X,Y]^i = sum_j (X^j dY^i/dx_j - Y^j dX^i/dx_j), the sign
/// convention under which [X,Y]f = X(Yf) - Y(Xf).
VectorField lie_bracket_exact(const VectorField& x, const VectorField& y);

/// Folds a bracket word over fields with lie_bracket_exact.
VectorField bracket_word_exact(const BracketExpr& b, const std::vector<VectorField>& fields);

/// Result of testing whether a field is x |-> A x + b. Constant fields have
/// A = 0; `affine` is false when any second partial is symbolically nonzero.
struct AffineForm {
  bool affine = false;
  bool constant = false;
  Mat linear;
  Vec offset;
};

/// Symbolic affine classification: every first partial must fold to a
/// constant. Fields that fail are treated as general smooth fields.
AffineForm classify_affine(const VectorField& x);

}  // namespace cflow
