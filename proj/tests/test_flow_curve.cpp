#include <doctest.h>

#include <cmath>
#include <vector>

#include "cflow/curve.hpp"
#include "cflow/errors.hpp"
#include "cflow/field.hpp"
#include "cflow/matgroup.hpp"
#include "cflow/ode.hpp"

using namespace cflow;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

}  // namespace

TEST_CASE("constant fields flow by exact translation") {
  const auto x = parse_field("1, -2", 2);
  const LocalCurve c = flow_curve(x);
  CHECK(c.closed_form);
  const Vec y = c.eval(0.25, v2(0.5, 0.5));
  CHECK(y[0] == 0.75);           // exact, no integrator noise
  CHECK(y[1] == 0.0);
  CHECK(c.eval_inverse(0.25, y).isApprox(v2(0.5, 0.5), 1e-15));
  CHECK(c.eval_jacobian(0.25, y).isIdentity(1e-15));
  REQUIRE(c.declared_order.has_value());
  CHECK(*c.declared_order == 1);
}

TEST_CASE("linear field flows agree with the matrix exponential") {
  const auto rot = parse_field("-x2, x1", 2);
  const LocalCurve c = flow_curve(rot);
  CHECK(c.closed_form);
  Mat a(2, 2);
  a << 0, -1, 1, 0;
  for (double t : {0.1, 0.5, -0.7}) {
    const Mat e = mat_exp(a, t);
    const Vec x0 = v2(0.3, -0.9);
    CHECK((c.eval(t, x0) - e * x0).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((c.eval_jacobian(t, x0) - e).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("closed-form and numeric flows agree on an affine field") {
  const auto x = parse_field("0.3*x2 + 0.5, -0.2*x1", 2);
  const LocalCurve closed = flow_curve(x);
  const LocalCurve numeric = flow_curve(x, IntegratorOpts{}, false);
  CHECK(closed.closed_form);
  CHECK_FALSE(numeric.closed_form);
  const Vec x0 = v2(0.4, -0.1);
  for (double t : {0.05, 0.3, -0.45}) {
    CHECK((closed.eval(t, x0) - numeric.eval(t, x0)).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("numeric flow of a nonlinear field matches its closed solution") {
  // y' = y^2 has flow x / (1 - t x).
  const auto x = parse_field("x1^2", 1);
  const LocalCurve c = flow_curve(x);
  CHECK_FALSE(c.closed_form);
  const double x0 = 0.8;
  for (double t : {0.2, 0.5, -0.4}) {
    const double want = x0 / (1 - t * x0);
    CHECK(c.eval(t, v1(x0))[0] == doctest::Approx(want).epsilon(1e-10));
    // Newton inversion recovers the start point
    CHECK(c.eval_inverse(t, v1(want))[0] == doctest::Approx(x0).epsilon(1e-9));
  }
}

TEST_CASE("flows escape the domain loudly") {
  Box small = Box::cube(1, -2.0, 2.0);
  const auto x = parse_field("x1^2", 1, small);
  CHECK_THROWS_AS(flow(x, 0.45, v1(1.5)), EscapeError);   // 1.5/(1-0.675) > 2
  CHECK_THROWS_AS(flow(x, 3.0, v1(0.1)), DomainError);    // beyond t_max
  CHECK_THROWS_AS(flow(x, 0.1, v1(5.0)), DomainError);    // starts outside
}

TEST_CASE("worked example: commutator of the two basic flows is (x, y + t^2)") {
  const auto x = parse_field("1, 0", 2);   // d/dx
  const auto y = parse_field("0, x1", 2);  // x d/dy
  const LocalCurve comm = commutator_curve(flow_curve(x), flow_curve(y));
  REQUIRE(comm.declared_order.has_value());
  CHECK(*comm.declared_order == 2);
  for (double t : {0.0, 0.1, 0.35, -0.2}) {
    const Vec p = v2(0.7, -0.3);
    const Vec got = comm.eval(t, p);
    CHECK(got[0] == doctest::Approx(0.7).epsilon(1e-13));
    CHECK(got[1] == doctest::Approx(-0.3 + t * t).epsilon(1e-13));
  }
  // declared field is the exact bracket (0, 1)
  REQUIRE(comm.declared_field.has_value());
  const Vec br = comm.declared_field->eval(v2(0.7, -0.3));
  CHECK(br[0] == 0.0);
  CHECK(br[1] == 1.0);
}

TEST_CASE("reparam_curve multiplies the declared order") {
  const auto x = parse_field("1, 0", 2);
  const LocalCurve c = reparam_curve(flow_curve(x), 3);
  CHECK(*c.declared_order == 3);
  const Vec got = c.eval(0.2, v2(0.0, 0.0));
  CHECK(got[0] == doctest::Approx(0.008).epsilon(1e-14));
}

TEST_CASE("invert_curve undoes the curve pointwise and flips the field") {
  const auto y = parse_field("0, x1", 2);
  const LocalCurve c = flow_curve(y);
  const LocalCurve ci = invert_curve(c);
  const Vec p = v2(0.5, 0.25);
  const Vec fwd = c.eval(0.3, p);
  CHECK(ci.eval(0.3, fwd).isApprox(p, 1e-13));
  const Vec f = ci.declared_field->eval(p);
  CHECK(f[1] == doctest::Approx(-0.5));
}

TEST_CASE("compose_curves is composition at matched parameter") {
  const auto a = flow_curve(parse_field("1", 1));     // translation
  const auto b = flow_curve(parse_field("x1", 1));    // scaling flow e^t x
  const LocalCurve ab = compose_curves(a, b);
  const double t = 0.4;
  const double want = std::exp(t) * 0.5 + t;  // a after b
  CHECK(ab.eval(t, v1(0.5))[0] == doctest::Approx(want).epsilon(1e-12));
  CHECK(ab.eval_inverse(t, v1(want))[0] == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(ab.eval_jacobian(t, v1(0.5))(0, 0) == doctest::Approx(std::exp(t)).epsilon(1e-12));
}

TEST_CASE("curve_velocity reproduces the generating field along a flow") {
  const auto rot = parse_field("-x2, x1", 2);
  const LocalCurve c = flow_curve(rot);
  const Vec p = v2(0.6, -0.2);
  for (double t : {0.0, 0.25}) {
    const Vec w = curve_velocity(c, t, p);
    const Vec want = rot.eval(p);  // autonomous flow: velocity field is X itself
    CHECK((w - want).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("integrate_flow respects tolerances on a stiff-ish example") {
  const auto x = parse_field("-10*x1", 1);
  const Vec got = integrate_flow(x, 0.5, v1(1.0), IntegratorOpts{});
  CHECK(got[0] == doctest::Approx(std::exp(-5.0)).epsilon(1e-8));
}

TEST_CASE("lie_bracket_exact matches the worked example and antisymmetry") {
  const auto x = parse_field("1, 0", 2);
  const auto y = parse_field("0, x1", 2);
  const auto br = lie_bracket_exact(x, y);
  const Vec at = br.eval(v2(0.3, 0.9));
  CHECK(at[0] == 0.0);
  CHECK(at[1] == 1.0);
  const auto neg = lie_bracket_exact(y, x);
  const Vec at2 = neg.eval(v2(0.3, 0.9));
  CHECK(at2[1] == -1.0);

  // Jacobi identity spot check on polynomial fields
  const auto a = parse_field("x2, x1*x1", 2);
  const auto b = parse_field("x1, -x2", 2);
  const auto c = parse_field("x1*x2, x1", 2);
  const auto jac = [&](const VectorField& p, const VectorField& q, const VectorField& r) {
    return lie_bracket_exact(p, lie_bracket_exact(q, r));
  };
  const Vec pt = v2(0.4, -0.7);
  const Vec total = jac(a, b, c).eval(pt) + jac(b, c, a).eval(pt) + jac(c, a, b).eval(pt);
  CHECK(total.cwiseAbs().maxCoeff() < 1e-12);
}
