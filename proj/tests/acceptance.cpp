// Acceptance gate: one line per criterion, [PASS]/[FAIL], fixed tolerances.
// Exit code 0 only when every criterion passes.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cflow/bracket.hpp"
#include "cflow/campaign.hpp"
#include "cflow/curve.hpp"
#include "cflow/diff.hpp"
#include "cflow/errors.hpp"
#include "cflow/expr.hpp"
#include "cflow/field.hpp"
#include "cflow/matgroup.hpp"
#include "cflow/rational.hpp"
#include "cflow/report_io.hpp"
#include "cflow/rng.hpp"
#include "cflow/tensor.hpp"

using namespace cflow;

namespace {

int g_failures = 0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

void criterion(int idx, const std::string& name,
               const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  std::printf("[%s] %2d %-34s %s\n", ok ? "PASS" : "FAIL", idx, name.c_str(), detail.c_str());
  if (!ok) ++g_failures;
}

Vec vmake(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double norm_inf(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

std::vector<Vec> sample_points(int n, int dim, std::uint64_t seed, double half = 0.9) {
  SampleRng rng(seed);
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) {
    Vec x(dim);
    for (int d = 0; d < dim; ++d) x[d] = rng.uniform(-half, half);
    pts.push_back(x);
  }
  return pts;
}

VectorField field_from_matrix(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  VectorField f;
  f.dim = n;
  f.domain = Box::cube(n, -10.0, 10.0);
  for (int i = 0; i < n; ++i) {
    ExprPtr e = Expr::constant(0.0);
    for (int j = 0; j < n; ++j)
      e = Expr::add(e, Expr::mul(Expr::constant(a(i, j)), Expr::variable(j)));
    f.components.push_back(e);
  }
  return f;
}

// --- 1: worked-example exactness -----------------------------------------

bool c01(std::string& detail) {
  const auto x = parse_field("1, 0", 2);
  const auto y = parse_field("0, x1", 2);
  const LocalCurve comm = commutator_curve(flow_curve(x), flow_curve(y));
  const Vec oracle = vmake({0.0, 1.0});
  double curve_err = 0.0, order1 = 0.0, resid2 = 0.0;
  for (const Vec& p : sample_points(10, 2, 101)) {
    for (double t : {0.12, 0.3}) {
      const Vec got = comm.eval(t, p);
      curve_err = std::max(curve_err, std::abs(got[0] - p[0]));
      curve_err = std::max(curve_err, std::abs(got[1] - (p[1] + t * t)));
    }
    const auto fn = point_curve(comm, p);
    order1 = std::max(order1, norm_inf(kth_derivative(fn, 1, DiffOpts{}).value));
    const Vec half_d2 = kth_derivative(fn, 2, DiffOpts{}).value / 2.0;
    resid2 = std::max(resid2, norm_inf(half_d2 - oracle));
  }
  const Vec br = lie_bracket_exact(x, y).eval(vmake({0.4, -0.2}));
  detail = "curve err " + fmt(curve_err) + ", order-1 " + fmt(order1) + ", (1/2!)d2 resid " +
           fmt(resid2);
  return curve_err < 1e-12 && order1 < 1e-10 && resid2 < 1e-8 && br[0] == 0.0 && br[1] == 1.0;
}

// --- 2: statement theorem1 at k = 3 -------------------------------------------------

bool c02(std::string& detail) {
  CampaignConfig cfg;
  cfg.statement = "theorem1";
  cfg.dim = 3;
  cfg.bracket = "[[1,2],3]";
  cfg.fields = {"1, 0, 0", "0, x1, 0", "0, 0, x2"};
  cfg.points = 5;
  cfg.seed = 7;

  cfg.closed_form = "off";
  const Report numeric = run_campaign(cfg);
  cfg.closed_form = "auto";
  const Report closed = run_campaign(cfg);

  double van = 0.0, res_num = 0.0, res_cl = 0.0;
  for (const auto& r : numeric.records) {
    if (r.verdict == "skipped") return false;
    van = std::max({van, r.orders[0].residual, r.orders[1].residual});
    res_num = std::max(res_num, r.orders[2].residual);
  }
  for (const auto& r : closed.records) {
    if (r.verdict == "skipped") return false;
    res_cl = std::max(res_cl, r.orders[2].residual);
  }
  detail = "vanish " + fmt(van) + ", resid numeric " + fmt(res_num) + ", closed " + fmt(res_cl);
  return numeric.verdict == "pass" && closed.verdict == "pass" && van < 1e-5 &&
         res_num < 1e-4 && res_cl < 1e-6;
}

// --- 3: statement lemma6 over section types and orders ------------------------------

bool c03(std::string& detail) {
  const auto x = parse_field("0.2*x2 + 0.4, -0.3*x1", 2);
  const std::vector<std::string> sections{
      "type=(0,0); f = x1*x2 + x2",
      "type=(1,0); v_1 = x2; v_2 = x1*x1",
      "type=(0,1); w_1 = sin(x1); w_2 = x2"};
  double worst_vanish = 0.0, worst_resid = 0.0;
  for (const auto& stext : sections) {
    const auto s = parse_section(stext, 2);
    const auto ls = lie_derivative_exact(x, s);
    for (int k = 1; k <= 3; ++k) {
      const LocalCurve c = reparam_curve(flow_curve(x), k);
      for (const Vec& p : sample_points(3, 2, 300 + k)) {
        const auto fn = pullback_curve_section(c, s, p);
        for (int ell = 1; ell < k; ++ell) {
          DiffOpts o;
          o.h0 = default_h0(ell);
          worst_vanish = std::max(worst_vanish, norm_inf(kth_derivative(fn, ell, o).value));
        }
        DiffOpts ok;
        ok.h0 = default_h0(k);
        const Vec dk = kth_derivative(fn, k, ok).value;
        double kf = 1.0;
        for (int q = 2; q <= k; ++q) kf *= q;
        worst_resid = std::max(worst_resid, norm_inf(dk / kf - ls.eval(p)));
      }
    }
  }
  detail = "vanish " + fmt(worst_vanish) + ", resid " + fmt(worst_resid);
  return worst_vanish < 1e-5 && worst_resid < 1e-5;
}

// --- 4: statement lemma8 inverse-curve leading derivative ---------------------------

bool c04(std::string& detail) {
  const auto x = parse_field("0.3*x2 + 0.5, -0.2*x1", 2);
  double worst = 0.0, worst_vanish = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const LocalCurve c = reparam_curve(flow_curve(x), k);
    const LocalCurve ci = invert_curve(c);
    DiffOpts o;
    o.h0 = default_h0(k);
    for (const Vec& p : sample_points(3, 2, 400 + k)) {
      const auto fwd = point_curve(c, p);
      const auto inv = point_curve(ci, p);
      for (int ell = 1; ell < k; ++ell) {
        DiffOpts oe;
        oe.h0 = default_h0(ell);
        worst_vanish = std::max(worst_vanish, norm_inf(kth_derivative(inv, ell, oe).value));
      }
      const Vec df = kth_derivative(fwd, k, o).value;
      const Vec di = kth_derivative(inv, k, o).value;
      worst = std::max(worst, norm_inf(di + df));
    }
  }
  detail = "resid " + fmt(worst) + ", vanish " + fmt(worst_vanish);
  return worst < 1e-6 && worst_vanish < 1e-5;
}

// --- 5: statement lemma9 with mixed orders m=1, n=2 ----------------------------------

bool c05(std::string& detail) {
  const auto x = parse_field("1, 0", 2);
  const auto y = parse_field("0, x1", 2);
  const auto s = parse_section("type=(0,0); f = x2^2 + x1*x2", 2);
  const auto lxy = lie_derivative_exact(lie_bracket_exact(x, y), s);
  const LocalCurve comm =
      commutator_curve(reparam_curve(flow_curve(x), 1), reparam_curve(flow_curve(y), 2));
  double worst_vanish = 0.0, worst = 0.0;
  for (const Vec& p : sample_points(4, 2, 500)) {
    const auto fn = pullback_curve_section(comm, s, p);
    for (int ell = 1; ell <= 2; ++ell) {
      DiffOpts o;
      o.h0 = default_h0(ell);
      worst_vanish = std::max(worst_vanish, norm_inf(kth_derivative(fn, ell, o).value));
    }
    DiffOpts o3;
    o3.h0 = default_h0(3);
    const Vec d3 = kth_derivative(fn, 3, o3).value;
    worst = std::max(worst, norm_inf(d3 / 6.0 - lxy.eval(p)));
  }
  detail = "vanish " + fmt(worst_vanish) + ", resid " + fmt(worst);
  return worst_vanish < 1e-5 && worst < 1e-4;
}

// --- 6: statement lemma7 binomial pullback identity ----------------------------------

bool c06(std::string& detail) {
  const auto x = parse_field("-x2, x1", 2);
  const auto y = parse_field("0.3*x1, 0.2*x2", 2);
  const auto s = parse_section("type=(0,0); f = x1*x2 + x1", 2);
  const LocalCurve a = flow_curve(x);
  const LocalCurve b = flow_curve(y);
  const LocalCurve comp = compose_curves(a, b);
  double worst = 0.0;
  for (const Vec& p : sample_points(3, 2, 600)) {
    const auto diag = pullback_curve_section(comp, s, p);
    const auto g = pullback_multi_curve_section({a, b}, s, p);
    for (int k = 1; k <= 3; ++k) {
      DiffOpts o;
      o.h0 = default_h0(k);
      const Vec lhs = kth_derivative(diag, k, o).value;
      Vec rhs = Vec::Zero(1);
      double ckj = 1.0;
      for (int j = 0; j <= k; ++j) {
        rhs += ckj * mixed_partial(g, {k - j, j}, o);
        ckj = ckj * (k - j) / (j + 1);
      }
      worst = std::max(worst, norm_inf(lhs - rhs));
    }
  }
  detail = "max |lhs - rhs| " + fmt(worst);
  return worst < 1e-5;
}

// --- 7: statement prop11 velocity formula -------------------------------------

bool c07(std::string& detail) {
  const auto x = parse_field("0.4*x2 + 1, 0.3*x1", 2);
  double worst = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const LocalCurve c = reparam_curve(flow_curve(x), k);
    double kf = 1.0;
    for (int q = 2; q <= k; ++q) kf *= q;
    DiffOpts o;
    o.h0 = default_h0(std::max(k - 1, 1));
    for (const Vec& p : sample_points(3, 2, 700 + k)) {
      const auto w = [&c, &p](double t) { return curve_velocity(c, t, p); };
      const Vec est = kth_derivative(w, k - 1, o).value;
      worst = std::max(worst, norm_inf(est - kf * x.eval(p)));
    }
  }
  detail = "max |d^{k-1} w - k! X| " + fmt(worst);
  return worst < 1e-5;
}

// --- 8: statement cor12 on so(3) and the nilpotent preset ----------------------

bool c08(std::string& detail) {
  const auto so3 = algebra_preset("so3");
  const auto b2 = parse_bracket("[1,2]");
  const std::vector<Mat> gens{so3.basis[0], so3.basis[1]};

  const TrotterReport first = verify_trotter_first(b2, gens, DiffOpts{});
  const double raw_first = (first.estimate - 2.0 * first.oracle).cwiseAbs().maxCoeff();
  const TrotterReport second = verify_trotter_second(b2, gens, DiffOpts{});
  const double raw_second = (second.estimate - 2.0 * second.oracle).cwiseAbs().maxCoeff();

  const auto b3 = parse_bracket("[[1,2],3]");
  const TrotterReport so3_b3 = verify_trotter_first(b3, so3.basis, DiffOpts{});
  const auto heis = algebra_preset("heis3");
  const TrotterReport heis_b3 = verify_trotter_first(b3, heis.basis, DiffOpts{});

  detail = "raw first " + fmt(raw_first) + ", raw second " + fmt(raw_second);
  return first.passed && raw_first < 1e-9 && second.passed && raw_second < 1e-8 &&
         so3_b3.passed && heis_b3.passed && heis_b3.oracle.cwiseAbs().maxCoeff() == 0.0;
}

// --- 9: chart independence in polar coordinates -----------------------------

bool c09(std::string& detail) {
  const auto x = parse_field("1, 0", 2);
  const auto y = parse_field("0, x1", 2);
  const LocalCurve comm = commutator_curve(flow_curve(x), flow_curve(y));
  ChartMap polar;
  polar.map = [](const Vec& q) {
    Vec out(2);
    out << std::hypot(q[0], q[1]), std::atan2(q[1], q[0]);
    return out;
  };
  polar.jacobian = [](const Vec& q) {
    const double r2 = q[0] * q[0] + q[1] * q[1];
    const double r = std::sqrt(r2);
    Mat j(2, 2);
    j << q[0] / r, q[1] / r, -q[1] / r2, q[0] / r2;
    return j;
  };
  double worst = 0.0;
  bool all_passed = true;
  for (const Vec& p : {vmake({0.7, 0.4}), vmake({-0.5, 0.6}), vmake({0.45, -0.55})}) {
    const auto rep = chart_independence_check(point_curve(comm, p), polar, 2, DiffOpts{});
    all_passed = all_passed && rep.passed;
    worst = std::max(worst, rep.residual);
  }
  detail = "max chart resid " + fmt(worst);
  return all_passed && worst < 1e-6;
}

// --- 10: flows of linear fields vs the matrix exponential -------------------

bool c10(std::string& detail) {
  const auto so3 = algebra_preset("so3");
  Mat a = so3.basis[0] + 0.4 * so3.basis[1] - 0.2 * so3.basis[2];
  const VectorField xa = field_from_matrix(a);
  const LocalCurve closed = flow_curve(xa);
  const LocalCurve numeric = flow_curve(xa, IntegratorOpts{}, false);
  double flow_err = 0.0;
  for (double t : {0.2, 0.65}) {
    const Mat e = mat_exp(a, t);
    for (const Vec& p : sample_points(3, 3, 1000)) {
      flow_err = std::max(flow_err, norm_inf(closed.eval(t, p) - e * p));
      flow_err = std::max(flow_err, norm_inf(numeric.eval(t, p) - e * p));
    }
  }

  // Bracket word on fields vs the group-side derivative, sign (-1)^(k-1).
  double bridge2 = 0.0, bridge3 = 0.0;
  {
    const std::vector<Mat> gens{so3.basis[0], so3.basis[1]};
    const auto b = parse_bracket("[1,2]");
    const TrotterReport tr = verify_trotter_first(b, gens, DiffOpts{});
    const Mat g = tr.estimate / 2.0;  // group-route bracket matrix
    std::vector<LocalCurve> curves{flow_curve(field_from_matrix(gens[0])),
                                   flow_curve(field_from_matrix(gens[1]))};
    const LocalCurve bc = bracket_curve(b, curves);
    for (const Vec& p : sample_points(3, 3, 1100)) {
      const Vec est = kth_derivative(point_curve(bc, p), 2, DiffOpts{}).value / 2.0;
      bridge2 = std::max(bridge2, norm_inf(est - (-1.0) * (g * p)));  // k=2: sign -1
    }
  }
  {
    const auto sl2 = algebra_preset("sl2");
    const auto b = parse_bracket("[[1,2],3]");
    const TrotterReport tr = verify_trotter_first(b, sl2.basis, DiffOpts{});
    const Mat g = tr.estimate / 6.0;
    std::vector<LocalCurve> curves;
    for (const Mat& m : sl2.basis) curves.push_back(flow_curve(field_from_matrix(m)));
    const LocalCurve bc = bracket_curve(b, curves);
    for (const Vec& p : sample_points(3, 2, 1200)) {
      const Vec est = kth_derivative(point_curve(bc, p), 3, DiffOpts{}).value / 6.0;
      bridge3 = std::max(bridge3, norm_inf(est - g * p));  // k=3: sign +1
    }
  }
  detail = "flow vs exp " + fmt(flow_err) + ", bridge k=2 " + fmt(bridge2) + ", k=3 " +
           fmt(bridge3);
  return flow_err < 1e-12 && bridge2 < 1e-7 && bridge3 < 1e-7;
}

// --- 11: infrastructure properties ------------------------------------------

BracketExpr build_tree(SampleRng& rng, const std::vector<int>& slots, std::size_t lo,
                       std::size_t hi) {
  if (lo == hi) return BracketExpr::leaf(slots[lo]);
  const std::size_t cut = lo + rng.index(hi - lo);
  return BracketExpr::node(build_tree(rng, slots, lo, cut),
                           build_tree(rng, slots, cut + 1, hi));
}

bool c11(std::string& detail) {
  // (a) 1000 parser round-trips on random bracket words
  SampleRng rng(2601);
  for (int i = 0; i < 1000; ++i) {
    const int k = 1 + static_cast<int>(rng.index(8));
    std::vector<int> slots(static_cast<std::size_t>(k));
    for (int q = 0; q < k; ++q) slots[static_cast<std::size_t>(q)] = q + 1;
    for (std::size_t q = slots.size(); q > 1; --q) std::swap(slots[q - 1], slots[rng.index(q)]);
    const BracketExpr b = build_tree(rng, slots, 0, slots.size() - 1);
    if (!(parse_bracket(format_bracket(b)) == b)) {
      detail = "round-trip failed on " + format_bracket(b);
      return false;
    }
  }

  // (b) frozen order-4 stencil tables, exact rational comparison
  using R = Rational;
  const bool stencils_ok =
      stencil_coefficients(1, 4) ==
          std::vector<R>{R(1, 12), R(-2, 3), R(0), R(2, 3), R(-1, 12)} &&
      stencil_coefficients(2, 4) ==
          std::vector<R>{R(-1, 12), R(4, 3), R(-5, 2), R(4, 3), R(-1, 12)} &&
      stencil_coefficients(3, 4) ==
          std::vector<R>{R(1, 8), R(-1), R(13, 8), R(0), R(-13, 8), R(1), R(-1, 8)} &&
      stencil_coefficients(4, 4) ==
          std::vector<R>{R(-1, 6), R(2), R(-13, 2), R(28, 3), R(-13, 2), R(2), R(-1, 6)};
  if (!stencils_ok) {
    detail = "stencil tables differ";
    return false;
  }

  // (c) byte-identical reports for a fixed seed, serial or parallel
  CampaignConfig cfg;
  cfg.statement = "theorem1";
  cfg.dim = 2;
  cfg.bracket = "[1,2]";
  cfg.fields = {"1, 0", "0, x1"};
  cfg.points = 6;
  cfg.seed = 20260825;
  const std::string csv1 = report_to_csv(run_campaign(cfg));
  const std::string csv2 = report_to_csv(run_campaign(cfg));
  cfg.parallel = false;
  const std::string csv3 = report_to_csv(run_campaign(cfg));
  if (csv1 != csv2 || csv1 != csv3) {
    detail = "reports differ between runs";
    return false;
  }
  detail = "1000 round-trips, exact stencils, identical reports";
  return true;
}

}  // namespace

int main() {
  std::printf("acceptance checks\n-----------------\n");
  criterion(1, "worked-example exactness", c01);
  criterion(2, "theorem1 at k=3", c02);
  criterion(3, "lemma6 tensor pullback orders", c03);
  criterion(4, "lemma8 inverse-curve derivative", c04);
  criterion(5, "lemma9 mixed orders", c05);
  criterion(6, "lemma7 binomial identity", c06);
  criterion(7, "prop11 velocity formula", c07);
  criterion(8, "cor12 matrix groups", c08);
  criterion(9, "chart independence (polar)", c09);
  criterion(10, "linear flow / matrix bridge", c10);
  criterion(11, "infrastructure properties", c11);
  std::printf("-----------------\n%s (%d failure%s)\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
              g_failures, g_failures == 1 ? "" : "s");
  return g_failures == 0 ? 0 : 1;
}
