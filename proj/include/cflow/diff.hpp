#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "cflow/field.hpp"
#include "cflow/rational.hpp"

namespace cflow {

/// Controls for derivative estimation.
///
/// h0 == 0 selects the per-order default base step (default_h0); match_tol is
/// the comparison tolerance used by checks built on these estimates.
struct DiffOpts {
  double h0 = 0.0;
  int levels = 4;
  int stencil_order = 4;
  double vanish_tol = 1e-5;
  double match_tol = 1e-4;
};

/// Base step used when DiffOpts.h0 is 0: wide enough that the h^-k
/// amplification of rounding stays below the truncation error.
double default_h0(int k);

/// One extrapolated derivative estimate.
struct DerivEstimate {
  int order = 0;
  Vec value;
  /// Base step of the finest level entering the reported value.
  double step = 0.0;
  /// Number of extrapolation levels behind the reported value.
  int richardson_levels = 1;
  /// Max-norm difference between the last two extrapolation diagonals.
  double error_estimate = 0.0;
};

/// Central difference weights for the k-th derivative at accuracy order
/// `accuracy` (even), on integer nodes -r..r. Solved exactly from the moment
/// system sum_j c_j j^p = k! [p == k], p = 0..2r.
std::vector<Rational> stencil_coefficients(int k, int accuracy);
int stencil_radius(int k, int accuracy);

/// d^k/dt^k f(0) by a central stencil plus Richardson extrapolation over
/// step-halved levels; the reported level is the one with the smallest
/// successive-diagonal difference. k = 0 returns f(0). Supported orders are
/// k <= 5 (UnsupportedOrderError above). Node failures propagate the
/// underlying error; a diverging tableau throws NoiseError.
DerivEstimate kth_derivative(const std::function<Vec(double)>& f, int k, const DiffOpts& opts);

struct LeadingResult {
  /// Smallest order with norm above vanish_tol, empty when all orders vanish.
  std::optional<int> order;
  std::optional<DerivEstimate> estimate;
  /// (order, norm) for the orders that vanished below the threshold.
  std::vector<std::pair<int, double>> below;
};

/// Scans orders 1..max_order for the first non-vanishing derivative.
LeadingResult leading_derivative(const std::function<Vec(double)>& f, int max_order,
                                 const DiffOpts& opts);

/// A change of coordinates with its Jacobian.
struct ChartMap {
  std::function<Vec(const Vec&)> map;
  std::function<Mat(const Vec&)> jacobian;
};

struct ChartCheckReport {
  bool passed = false;
  /// Max-norm of J * (estimate in A) - (estimate in B).
  double residual = 0.0;
  /// Both estimates carried error above match_tol/10; the verdict is tight.
  bool precision_warning = false;
  DerivEstimate in_a, in_b;
};

/// Verifies that the k-th derivative at 0 of a curve whose lower orders
/// vanish transforms linearly under the chart map.
ChartCheckReport chart_independence_check(const std::function<Vec(double)>& curve_in_a,
                                          const ChartMap& to_b, int k, const DiffOpts& opts);

/// Mixed partial d^{orders[0]}_{t_0} ... d^{orders[n-1]}_{t_{n-1}} g(0,..,0)
/// over a tensor-product central stencil with joint Richardson extrapolation.
/// Axis steps default per order; opts.h0 > 0 overrides all of them.
Vec mixed_partial(const std::function<Vec(const std::vector<double>&)>& g,
                  const std::vector<int>& orders, const DiffOpts& opts);

}  // namespace cflow
