#include "cflow/ode.hpp"

#include <algorithm>
#include <cmath>

namespace cflow {

namespace {
// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Weights of (5th order) - (4th order), used for the embedded error estimate.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace

Vec integrate_flow(const VectorField& x, double t_target, const Vec& x0,
                   const IntegratorOpts& opts) {
  if (std::abs(t_target) > opts.t_max)
    throw DomainError("flow time beyond the configured horizon");
  if (!x.domain.contains(x0, 1e-12)) throw DomainError("initial point outside field domain");
  if (t_target == 0.0) return x0;

  const double dir = t_target > 0 ? 1.0 : -1.0;
  Vec y = x0;
  double t = 0.0;
  Vec k1 = x.eval_unchecked(y);
  double h = dir * std::min(1e-2 * (1.0 + std::abs(t_target)), std::abs(t_target));

  for (int step = 0; step < opts.max_steps; ++step) {
    bool final_step = false;
    if ((t + h - t_target) * dir >= 0.0) {
      h = t_target - t;
      final_step = true;
    }

    const Vec k2 = x.eval_unchecked(y + h * (a21 * k1));
    const Vec k3 = x.eval_unchecked(y + h * (a31 * k1 + a32 * k2));
    const Vec k4 = x.eval_unchecked(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = x.eval_unchecked(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 =
        x.eval_unchecked(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec k7 = x.eval_unchecked(y5);

    const Vec err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      const double scale = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      const double r = err_vec[i] / scale;
      err += r * r;
    }
    err = std::sqrt(err / static_cast<double>(y.size()));

    if (err <= 1.0) {
      t += h;
      y = y5;
      k1 = k7;  // first-same-as-last
      if (!x.domain.contains(y, 1e-9)) throw EscapeError("trajectory left the domain box");
      if (final_step) return y;
    }

    const double factor =
        std::clamp(0.9 * std::pow(std::max(err, 1e-300), -0.2), 0.2, 5.0);
    h *= factor;
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
      throw ToleranceError("step size underflow in flow integration");
  }
  throw ToleranceError("flow integration exceeded the step budget");
}

}  // namespace cflow
