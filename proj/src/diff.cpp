#include "cflow/diff.hpp"

#include <cmath>
#include <limits>

namespace cflow {

namespace {
constexpr int kMaxOrder = 5;

Rational ipow_rat(std::int64_t base, int e) {
  Rational r(1);
  for (int i = 0; i < e; ++i) r = r * Rational(base);
  return r;
}

std::int64_t factorial(int k) {
  std::int64_t f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

/// Exact Gaussian elimination with partial (first nonzero) pivoting.
std::vector<Rational> solve_rational(std::vector<std::vector<Rational>> m,
                                     std::vector<Rational> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && m[pivot][col].is_zero()) ++pivot;
    if (pivot == n) throw SingularError("singular moment system");
    std::swap(m[pivot], m[col]);
    std::swap(rhs[pivot], rhs[col]);
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || m[row][col].is_zero()) continue;
      const Rational f = m[row][col] / m[col][col];
      for (std::size_t c = col; c < n; ++c) m[row][c] = m[row][c] - f * m[col][c];
      rhs[row] = rhs[row] - f * rhs[col];
    }
  }
  std::vector<Rational> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rhs[i] / m[i][i];
  return out;
}

struct Stencil {
  int radius = 0;
  std::vector<double> coeffs;  // index j + radius
  /// Exponent of the leading error term: D(h) = f^(k) + O(h^error_order).
  int error_order = 0;
};

Stencil make_stencil(int k, int accuracy) {
  const int r = stencil_radius(k, accuracy);
  const auto rats = stencil_coefficients(k, accuracy);
  Stencil s;
  s.radius = r;
  s.coeffs.reserve(rats.size());
  for (const auto& c : rats) s.coeffs.push_back(c.to_double());

  // First moment beyond k with nonzero weight fixes the error exponent.
  s.error_order = accuracy;
  for (int p = k + 1; p <= 2 * r + 6; ++p) {
    Rational moment(0);
    for (int j = -r; j <= r; ++j) {
      moment = moment + rats[static_cast<std::size_t>(j + r)] * ipow_rat(j, p);
    }
    if (!moment.is_zero()) {
      s.error_order = p - k;
      break;
    }
  }
  return s;
}

struct TableauPick {
  Vec value;
  double error = std::numeric_limits<double>::infinity();
  int levels = 1;
  int level_index = 0;
  bool diverged = false;
  double first_diff = 0.0;
};

/// Richardson tableau over step-halved base estimates with leading error
/// exponent `base_order` (subsequent terms rise by 2). Picks the diagonal
/// entry before the rounding floor: the one with the smallest successive
/// difference.
TableauPick richardson_pick(const std::vector<Vec>& base, int base_order) {
  const std::size_t levels = base.size();
  std::vector<std::vector<Vec>> t(levels);
  std::vector<Vec> diag(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    t[l].resize(l + 1);
    t[l][0] = base[l];
    for (std::size_t m = 1; m <= l; ++m) {
      const double denom = std::pow(2.0, base_order + 2.0 * (static_cast<double>(m) - 1)) - 1.0;
      t[l][m] = t[l][m - 1] + (t[l][m - 1] - t[l - 1][m - 1]) / denom;
    }
    diag[l] = t[l][l];
  }

  TableauPick pick;
  if (levels == 1) {
    pick.value = diag[0];
    return pick;
  }
  std::vector<double> diffs(levels, 0.0);
  for (std::size_t l = 1; l < levels; ++l) {
    diffs[l] = (diag[l] - diag[l - 1]).cwiseAbs().maxCoeff();
  }
  std::size_t best = 1;
  for (std::size_t l = 2; l < levels; ++l) {
    if (diffs[l] < diffs[best]) best = l;
  }
  pick.value = diag[best];
  pick.error = diffs[best];
  pick.levels = static_cast<int>(best + 1);
  pick.level_index = static_cast<int>(best);
  pick.first_diff = diffs[1];
  bool increasing = levels >= 3;
  for (std::size_t l = 2; l < levels && increasing; ++l) {
    increasing = diffs[l] > diffs[l - 1];
  }
  pick.diverged = increasing;
  return pick;
}
}  // namespace

double default_h0(int k) {
  if (k <= 2) return 0.05;
  if (k <= 4) return 0.15;
  return 0.25;
}

int stencil_radius(int k, int accuracy) {
  if (k < 1) throw UnsupportedOrderError("stencil order must be >= 1");
  if (accuracy < 2 || accuracy % 2 != 0)
    throw UnsupportedOrderError("stencil accuracy must be a positive even number");
  return (k + 1) / 2 + accuracy / 2 - 1;
}

std::vector<Rational> stencil_coefficients(int k, int accuracy) {
  const int r = stencil_radius(k, accuracy);
  const std::size_t n = static_cast<std::size_t>(2 * r + 1);
  std::vector<std::vector<Rational>> moments(n, std::vector<Rational>(n));
  std::vector<Rational> rhs(n, Rational(0));
  for (std::size_t p = 0; p < n; ++p) {
    for (int j = -r; j <= r; ++j) {
      moments[p][static_cast<std::size_t>(j + r)] = ipow_rat(j, static_cast<int>(p));
    }
  }
  rhs[static_cast<std::size_t>(k)] = Rational(factorial(k));
  return solve_rational(std::move(moments), std::move(rhs));
}

DerivEstimate kth_derivative(const std::function<Vec(double)>& f, int k, const DiffOpts& opts) {
  if (k < 0 || k > kMaxOrder)
    throw UnsupportedOrderError("derivative order " + std::to_string(k) +
                                " outside the supported range 0..5");
  if (opts.levels < 1) throw ConfigError("levels must be >= 1");

  DerivEstimate est;
  est.order = k;
  if (k == 0) {
    est.value = f(0.0);
    est.step = 0.0;
    est.error_estimate = 0.0;
    return est;
  }

  const Stencil stencil = make_stencil(k, opts.stencil_order);
  const double h0 = opts.h0 > 0 ? opts.h0 : default_h0(k);
  const int r = stencil.radius;

  std::optional<Vec> center;  // f(0) reused across levels
  std::vector<Vec> base;
  base.reserve(static_cast<std::size_t>(opts.levels));
  for (int level = 0; level < opts.levels; ++level) {
    const double h = h0 / std::pow(2.0, level);
    Vec acc;
    for (int j = -r; j <= r; ++j) {
      const double c = stencil.coeffs[static_cast<std::size_t>(j + r)];
      if (c == 0.0) continue;
      Vec fj;
      if (j == 0) {
        if (!center) center = f(0.0);
        fj = *center;
      } else {
        fj = f(j * h);
      }
      if (acc.size() == 0) {
        acc = c * fj;
      } else {
        acc += c * fj;
      }
    }
    base.push_back(acc / std::pow(h, k));
  }

  const TableauPick pick = richardson_pick(base, stencil.error_order);
  if (!pick.value.allFinite()) throw EvalError("non-finite derivative estimate");
  const double scale = std::max(1.0, base[0].cwiseAbs().maxCoeff());
  if (pick.diverged && pick.first_diff > 1e-12 * scale && pick.error > 1e2 * pick.first_diff)
    throw NoiseError("extrapolation diverged: estimates are noise-dominated");

  est.value = pick.value;
  est.step = h0 / std::pow(2.0, pick.level_index);
  est.richardson_levels = pick.levels;
  est.error_estimate = pick.error;
  return est;
}

LeadingResult leading_derivative(const std::function<Vec(double)>& f, int max_order,
                                 const DiffOpts& opts) {
  if (max_order < 1 || max_order > kMaxOrder)
    throw UnsupportedOrderError("leading-derivative scan limited to orders 1..5");
  LeadingResult res;
  for (int k = 1; k <= max_order; ++k) {
    DerivEstimate est = kth_derivative(f, k, opts);
    const double norm = est.value.cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, norm);
    if (norm > opts.vanish_tol * scale) {
      res.order = k;
      res.estimate = std::move(est);
      return res;
    }
    res.below.emplace_back(k, norm);
  }
  return res;
}

ChartCheckReport chart_independence_check(const std::function<Vec(double)>& curve_in_a,
                                          const ChartMap& to_b, int k, const DiffOpts& opts) {
  ChartCheckReport rep;
  for (int low = 1; low < k; ++low) {
    const DerivEstimate e = kth_derivative(curve_in_a, low, opts);
    if (e.value.cwiseAbs().maxCoeff() > opts.vanish_tol) {
      rep.passed = false;
      return rep;  // premise violated: lower orders do not vanish
    }
  }
  rep.in_a = kth_derivative(curve_in_a, k, opts);
  const Vec x0 = curve_in_a(0.0);
  const Mat j = to_b.jacobian(x0);
  auto curve_in_b = [&](double t) { return to_b.map(curve_in_a(t)); };
  rep.in_b = kth_derivative(curve_in_b, k, opts);

  rep.residual = (j * rep.in_a.value - rep.in_b.value).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, rep.in_b.value.cwiseAbs().maxCoeff());
  rep.passed = rep.residual <= opts.match_tol * scale;
  rep.precision_warning = rep.in_a.error_estimate > opts.match_tol / 10 &&
                          rep.in_b.error_estimate > opts.match_tol / 10;
  return rep;
}

Vec mixed_partial(const std::function<Vec(const std::vector<double>&)>& g,
                  const std::vector<int>& orders, const DiffOpts& opts) {
  const std::size_t axes = orders.size();
  if (axes == 0) throw ConfigError("mixed_partial needs at least one axis");

  struct Axis {
    std::vector<double> coeffs{1.0};
    int radius = 0;
    double h = 1.0;
    int order = 0;
  };
  std::vector<Axis> ax(axes);
  int base_order = 0;
  for (std::size_t d = 0; d < axes; ++d) {
    const int k = orders[d];
    if (k < 0 || k > kMaxOrder)
      throw UnsupportedOrderError("mixed partial order outside the supported range 0..5");
    ax[d].order = k;
    if (k == 0) continue;
    const Stencil s = make_stencil(k, opts.stencil_order);
    ax[d].coeffs = s.coeffs;
    ax[d].radius = s.radius;
    ax[d].h = opts.h0 > 0 ? opts.h0 : default_h0(k);
    base_order = base_order == 0 ? s.error_order : std::min(base_order, s.error_order);
  }

  std::vector<double> point(axes, 0.0);
  if (base_order == 0) return g(point);  // all orders zero

  const int levels = std::max(2, opts.levels);
  std::vector<Vec> base;
  base.reserve(static_cast<std::size_t>(levels));
  for (int level = 0; level < levels; ++level) {
    const double shrink = std::pow(2.0, level);
    Vec acc;
    double hpow = 1.0;
    for (std::size_t d = 0; d < axes; ++d) {
      for (int i = 0; i < ax[d].order; ++i) hpow *= ax[d].h / shrink;
    }
    std::vector<int> node(axes, 0);
    std::function<void(std::size_t, double)> walk = [&](std::size_t d, double weight) {
      if (d == axes) {
        for (std::size_t i = 0; i < axes; ++i) {
          point[i] = node[i] * (ax[i].h / shrink);
        }
        const Vec v = weight * g(point);
        if (acc.size() == 0) {
          acc = v;
        } else {
          acc += v;
        }
        return;
      }
      for (int j = -ax[d].radius; j <= ax[d].radius; ++j) {
        const double c = ax[d].coeffs[static_cast<std::size_t>(j + ax[d].radius)];
        if (c == 0.0) continue;
        node[d] = j;
        walk(d + 1, weight * c);
      }
      node[d] = 0;
    };
    walk(0, 1.0);
    base.push_back(acc / hpow);
  }

  const TableauPick pick = richardson_pick(base, base_order);
  if (!pick.value.allFinite()) throw EvalError("non-finite mixed-partial estimate");
  return pick.value;
}

}  // namespace cflow
