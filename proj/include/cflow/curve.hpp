#pragma once

#include <functional>
#include <optional>

#include "cflow/bracket.hpp"
#include "cflow/field.hpp"
#include "cflow/ode.hpp"

namespace cflow {

using CurveMap = std::function<Vec(double, const Vec&)>;
using CurveJac = std::function<Mat(double, const Vec&)>;

/// A curve of local diffeomorphisms: for each t near 0, x |-> forward(t, x),
/// with forward(0, x) = x.
///
/// `inverse` and `jacobian` are optional recipes; when absent, eval_inverse
/// falls back to damped Newton and eval_jacobian to central differences
/// (step 1e-6 per coordinate). `declared_order`/`declared_field` carry the
/// construction-time knowledge that the first non-vanishing t-derivative at
/// order k is k! X; verification never assumes them, it checks against them.
struct LocalCurve {
  int dim = 0;
  CurveMap forward;
  CurveMap inverse;
  CurveJac jacobian;
  std::optional<int> declared_order;
  std::optional<VectorField> declared_field;
  bool closed_form = false;

  Vec eval(double t, const Vec& x) const;
  Vec eval_inverse(double t, const Vec& x) const;
  Mat eval_jacobian(double t, const Vec& x) const;
};

LocalCurve identity_curve(int dim);

/// Curve from a bare map; inversion and Jacobians use the numeric fallbacks.
LocalCurve raw_curve(int dim, CurveMap forward);

/// The flow t |-> Fl^X_t. Constant fields translate, affine fields act by the
/// (augmented) matrix exponential; everything else integrates numerically.
/// Pass allow_closed_form = false to force the integrator.
LocalCurve flow_curve(const VectorField& x, const IntegratorOpts& opts = {},
                      bool allow_closed_form = true);

/// Convenience one-shot flow evaluation with the same dispatch rules.
Vec flow(const VectorField& x, double t, const Vec& p, const IntegratorOpts& opts = {},
         bool allow_closed_form = true);

/// t |-> c(t^power). Multiplies the declared order by `power`.
LocalCurve reparam_curve(const LocalCurve& c, int power);

/// Pointwise inverse curve t |-> c_t^-1. Flips the declared field's sign.
LocalCurve invert_curve(const LocalCurve& c);

/// (a o b)(t, x) = a(t, b(t, x)).
LocalCurve compose_curves(const LocalCurve& a, const LocalCurve& b);

/// b_t^-1 o a_t^-1 o b_t o a_t. When both operands declare (order, field),
/// the result declares (sum of orders, bracket of fields).
LocalCurve commutator_curve(const LocalCurve& a, const LocalCurve& b);

/// Folds a bracket word over curves with commutator_curve.
LocalCurve bracket_curve(const BracketExpr& b, const std::vector<LocalCurve>& curves);

/// Velocity field of the curve at x: d/ds c(s, y)|_{s=t} with y = c_t^-1(x),
/// by a 5-point 4th-order stencil with step dt.
Vec curve_velocity(const LocalCurve& c, double t, const Vec& x, double dt = 5e-3);

/// Restriction t |-> c(t, x) as a plain curve for derivative estimation.
std::function<Vec(double)> point_curve(const LocalCurve& c, const Vec& x);

}  // namespace cflow
