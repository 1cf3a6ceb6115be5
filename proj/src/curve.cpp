#include "cflow/curve.hpp"

#include <cmath>

#include "cflow/matgroup.hpp"

namespace cflow {

namespace {
constexpr double kNewtonTol = 1e-13;
constexpr int kNewtonMaxIter = 50;
constexpr double kFdJacobianStep = 1e-6;

double ipow_double(double base, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= base;
  return r;
}

Mat fd_jacobian(const CurveMap& forward, double t, const Vec& x) {
  const auto n = x.size();
  Mat j(n, n);
  Vec xp = x, xm = x;
  for (Eigen::Index c = 0; c < n; ++c) {
    xp[c] = x[c] + kFdJacobianStep;
    xm[c] = x[c] - kFdJacobianStep;
    j.col(c) = (forward(t, xp) - forward(t, xm)) / (2 * kFdJacobianStep);
    xp[c] = x[c];
    xm[c] = x[c];
  }
  return j;
}

Vec newton_inverse(const LocalCurve& c, double t, const Vec& x) {
  Vec y = x;  // c is near the identity for the t of interest
  double rn = (c.forward(t, y) - x).cwiseAbs().maxCoeff();
  const double goal = kNewtonTol * (1.0 + x.cwiseAbs().maxCoeff());
  for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
    if (rn <= goal) return y;
    const Vec r = c.forward(t, y) - x;
    const Mat j = c.eval_jacobian(t, y);
    Eigen::PartialPivLU<Mat> lu(j);
    if (std::abs(lu.determinant()) < 1e-300)
      throw InverseError("singular Jacobian while inverting a local map");
    const Vec step = lu.solve(r);
    if (!step.allFinite()) throw InverseError("non-finite Newton step");

    double lambda = 1.0;
    bool accepted = false;
    for (int trial = 0; trial < 8; ++trial) {
      const Vec yn = y - lambda * step;
      const double rn2 = (c.forward(t, yn) - x).cwiseAbs().maxCoeff();
      if (rn2 < rn) {
        y = yn;
        rn = rn2;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) throw InverseError("damped Newton stalled while inverting a local map");
  }
  throw InverseError("local map inversion did not converge in 50 iterations");
}
}  // namespace

Vec LocalCurve::eval(double t, const Vec& x) const {
  if (x.size() != dim) throw DimensionError("point dimension does not match curve");
  return forward(t, x);
}

Vec LocalCurve::eval_inverse(double t, const Vec& x) const {
  if (x.size() != dim) throw DimensionError("point dimension does not match curve");
  if (inverse) return inverse(t, x);
  return newton_inverse(*this, t, x);
}

Mat LocalCurve::eval_jacobian(double t, const Vec& x) const {
  if (jacobian) return jacobian(t, x);
  return fd_jacobian(forward, t, x);
}

LocalCurve identity_curve(int dim) {
  LocalCurve c;
  c.dim = dim;
  c.forward = [](double, const Vec& x) { return x; };
  c.inverse = c.forward;
  c.jacobian = [dim](double, const Vec&) { return Mat::Identity(dim, dim); };
  c.closed_form = true;
  return c;
}

LocalCurve raw_curve(int dim, CurveMap forward) {
  LocalCurve c;
  c.dim = dim;
  c.forward = std::move(forward);
  return c;
}

LocalCurve flow_curve(const VectorField& x, const IntegratorOpts& opts, bool allow_closed_form) {
  LocalCurve c;
  c.dim = x.dim;
  c.declared_order = 1;
  c.declared_field = x;

  const AffineForm form = allow_closed_form ? classify_affine(x) : AffineForm{};
  const Box box = x.domain;

  if (form.affine && form.constant) {
    const Vec b = form.offset;
    c.forward = [b, box](double t, const Vec& p) {
      Vec y = p + t * b;
      if (!box.contains(y, 1e-9)) throw EscapeError("translation left the domain box");
      return y;
    };
    c.inverse = [b, box](double t, const Vec& p) {
      Vec y = p - t * b;
      if (!box.contains(y, 1e-9)) throw EscapeError("translation left the domain box");
      return y;
    };
    const int n = x.dim;
    c.jacobian = [n](double, const Vec&) { return Mat::Identity(n, n); };
    c.closed_form = true;
    return c;
  }

  if (form.affine) {
    // Augment to pick up the inhomogeneous part: exp t [[A, b], [0, 0]] is
    // [[E(t), g(t)], [0, 1]] with y(t) = E(t) x + g(t).
    const int n = x.dim;
    Mat aug = Mat::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = form.linear;
    aug.topRightCorner(n, 1) = form.offset;
    auto apply = [aug, box, n](double t, const Vec& p) {
      const Mat e = mat_exp(aug, t);
      Vec y = e.topLeftCorner(n, n) * p + e.topRightCorner(n, 1);
      if (!box.contains(y, 1e-9)) throw EscapeError("affine flow left the domain box");
      return y;
    };
    c.forward = apply;
    c.inverse = [apply](double t, const Vec& p) { return apply(-t, p); };
    c.jacobian = [aug, n](double t, const Vec&) {
      return Mat(mat_exp(aug, t).topLeftCorner(n, n));
    };
    c.closed_form = true;
    return c;
  }

  c.forward = [x, opts](double t, const Vec& p) { return integrate_flow(x, t, p, opts); };
  c.inverse = [x, opts](double t, const Vec& p) { return integrate_flow(x, -t, p, opts); };
  c.closed_form = false;
  return c;
}

Vec flow(const VectorField& x, double t, const Vec& p, const IntegratorOpts& opts,
         bool allow_closed_form) {
  return flow_curve(x, opts, allow_closed_form).eval(t, p);
}

LocalCurve reparam_curve(const LocalCurve& c, int power) {
  if (power < 1) throw DomainError("reparametrization power must be >= 1");
  LocalCurve out;
  out.dim = c.dim;
  out.closed_form = c.closed_form;
  out.forward = [f = c.forward, power](double t, const Vec& p) {
    return f(ipow_double(t, power), p);
  };
  if (c.inverse) {
    out.inverse = [f = c.inverse, power](double t, const Vec& p) {
      return f(ipow_double(t, power), p);
    };
  }
  if (c.jacobian) {
    out.jacobian = [f = c.jacobian, power](double t, const Vec& p) {
      return f(ipow_double(t, power), p);
    };
  }
  if (c.declared_order) out.declared_order = *c.declared_order * power;
  out.declared_field = c.declared_field;
  return out;
}

LocalCurve invert_curve(const LocalCurve& c) {
  LocalCurve out;
  out.dim = c.dim;
  out.closed_form = c.closed_form;
  if (c.inverse) {
    out.forward = c.inverse;
  } else {
    out.forward = [c](double t, const Vec& p) { return newton_inverse(c, t, p); };
  }
  out.inverse = c.forward;
  if (c.jacobian) {
    // D(c_t^-1)(x) = [Dc_t(c_t^-1 x)]^-1.
    out.jacobian = [base = c, fwd = out.forward](double t, const Vec& p) {
      const Vec y = fwd(t, p);
      Eigen::PartialPivLU<Mat> lu(base.jacobian(t, y));
      if (std::abs(lu.determinant()) < 1e-300)
        throw SingularError("singular Jacobian of an inverted map");
      return Mat(lu.solve(Mat::Identity(base.dim, base.dim)));
    };
  }
  out.declared_order = c.declared_order;
  if (c.declared_field) out.declared_field = negate_field(*c.declared_field);
  return out;
}

LocalCurve compose_curves(const LocalCurve& a, const LocalCurve& b) {
  if (a.dim != b.dim) throw DimensionError("composing curves of different dimensions");
  LocalCurve out;
  out.dim = a.dim;
  out.closed_form = a.closed_form && b.closed_form;
  out.forward = [fa = a.forward, fb = b.forward](double t, const Vec& p) {
    return fa(t, fb(t, p));
  };
  if (a.inverse && b.inverse) {
    out.inverse = [ia = a.inverse, ib = b.inverse](double t, const Vec& p) {
      return ib(t, ia(t, p));
    };
  }
  if (a.jacobian && b.jacobian) {
    out.jacobian = [ja = a.jacobian, jb = b.jacobian, fb = b.forward](double t, const Vec& p) {
      return Mat(ja(t, fb(t, p)) * jb(t, p));
    };
  }
  return out;
}

LocalCurve commutator_curve(const LocalCurve& a, const LocalCurve& b) {
  LocalCurve out =
      compose_curves(invert_curve(b), compose_curves(invert_curve(a), compose_curves(b, a)));
  if (a.declared_order && b.declared_order) out.declared_order = *a.declared_order + *b.declared_order;
  if (a.declared_field && b.declared_field)
    out.declared_field = lie_bracket_exact(*a.declared_field, *b.declared_field);
  return out;
}

LocalCurve bracket_curve(const BracketExpr& b, const std::vector<LocalCurve>& curves) {
  for (const auto& c : curves) {
    if (c.dim != curves.front().dim)
      throw DimensionError("bracket word over curves of different dimensions");
  }
  return eval_bracket(b, curves, [](const LocalCurve& u, const LocalCurve& v) {
    return commutator_curve(u, v);
  });
}

Vec curve_velocity(const LocalCurve& c, double t, const Vec& x, double dt) {
  const Vec y = c.eval_inverse(t, x);
  const Vec f1 = c.forward(t - 2 * dt, y);
  const Vec f2 = c.forward(t - dt, y);
  const Vec f3 = c.forward(t + dt, y);
  const Vec f4 = c.forward(t + 2 * dt, y);
  return (f1 - 8.0 * f2 + 8.0 * f3 - f4) / (12.0 * dt);
}

std::function<Vec(double)> point_curve(const LocalCurve& c, const Vec& x) {
  return [c, x](double t) { return c.eval(t, x); };
}

}  // namespace cflow
