#pragma once

#include <functional>
#include <optional>
#include <string_view>

#include "cflow/curve.hpp"
#include "cflow/diff.hpp"
#include "cflow/field.hpp"

namespace cflow {

/// Tensor valence: p contravariant slots, q covariant slots.
struct TensorType {
  int p = 0;
  int q = 0;
  int rank() const { return p + q; }
};

/// Smooth (p,q)-tensor section with symbolic components.
///
/// Components are flattened row-major over the multi-index
/// (i_1..i_p, j_1..j_q), contravariant slots first, each 0-based internally.
struct TensorSection {
  TensorType type;
  int dim = 0;
  std::vector<ExprPtr> components;
  Box domain;

  int fiber_dim() const;
  /// Component values at x (DomainError outside, EvalError on poles).
  Vec eval(const Vec& x) const;
};

/// Parses "type=(p,q); name_i_j = expr; ...". Scalars use a bare name:
/// "type=(0,0); f = x1*x2". Indices are 1-based, contravariant first;
/// omitted components are zero.
TensorSection parse_section(std::string_view text, int dim, std::optional<Box> domain = {});

/// A local diffeomorphism given as evaluation recipes. `jacobian` may be
/// empty; central differences (step 1e-6) are used in that case.
struct Diffeo {
  std::function<Vec(const Vec&)> forward;
  std::function<Vec(const Vec&)> inverse;
  std::function<Mat(const Vec&)> jacobian;
};

using SectionEval = std::function<Vec(const Vec&)>;

/// Applies the (p,q) transformation law at one point: given J = D(phi)(x) and
/// the fiber of s at phi(x), returns the fiber of (phi^* s) at x. Upper slots
/// contract with J^-1, lower slots with J.
Vec pullback_fiber(TensorType type, int dim, const Mat& j, const Vec& fiber_at_image);

/// (phi^* s)(x) as an evaluator; phi given as a Diffeo.
SectionEval pullback_section(const Diffeo& phi, const TensorSection& s);

/// Pullback of an arbitrary section evaluator (used to chain pullbacks).
SectionEval pullback_eval(const Diffeo& phi, TensorType type, int dim, const SectionEval& s);

/// Exact Lie derivative: scalars X(f); vector fields [X,Y]; one-forms
/// X^j d_j a_i + a_j d_i X^j; general (p,q) by the Leibniz rule over slots.
TensorSection lie_derivative_exact(const VectorField& x, const TensorSection& s);

/// d/dt at 0 of t |-> ((Fl^X_t)^* s)(x), estimated numerically.
Vec lie_derivative_flow(const VectorField& x, const TensorSection& s, const Vec& p,
                        const DiffOpts& diff_opts = {}, const IntegratorOpts& ode_opts = {});

/// t |-> ((c_t)^* s)(x) as a curve of fiber values.
std::function<Vec(double)> pullback_curve_section(const LocalCurve& c, const TensorSection& s,
                                                  const Vec& x);

/// (t_0,..,t_{n-1}) |-> ((c_0(t_0) o ... o c_{n-1}(t_{n-1}))^* s)(x) with
/// chain-rule Jacobians; the independent parameters feed mixed partials.
std::function<Vec(const std::vector<double>&)> pullback_multi_curve_section(
    const std::vector<LocalCurve>& curves, const TensorSection& s, const Vec& x);

}  // namespace cflow
