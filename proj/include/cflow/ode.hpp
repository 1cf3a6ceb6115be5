#pragma once

#include "cflow/field.hpp"

namespace cflow {

/// Controls for numeric flow evaluation.
struct IntegratorOpts {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  /// Flows are only evaluated for |t| <= t_max.
  double t_max = 2.0;
  int max_steps = 200000;
};

/// Integrates dy/dt = X(y) from y(0) = x0 to y(t) with an adaptive
/// Dormand-Prince 5(4) scheme. Throws EscapeError when the trajectory leaves
/// X.domain, ToleranceError when step control collapses, and DomainError for
/// |t| beyond opts.t_max.
Vec integrate_flow(const VectorField& x, double t, const Vec& x0, const IntegratorOpts& opts);

}  // namespace cflow
