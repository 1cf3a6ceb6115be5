#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cflow/bracket.hpp"
#include "cflow/diff.hpp"
#include "cflow/field.hpp"

namespace cflow {

/// exp(t A) by scaling-and-squaring with a degree-13 Pade approximant.
/// Throws OverflowError on non-finite input or output.
Mat mat_exp(const Mat& a, double t = 1.0);

/// Invertible square matrix. Construction enforces |det| > 1e-12.
struct GroupElement {
  Mat m;
};

GroupElement group_element(const Mat& m);
GroupElement group_inverse(const GroupElement& g);
GroupElement group_mul(const GroupElement& g, const GroupElement& h);

/// g h g^-1 h^-1, inverses via LU solves.
GroupElement group_commutator(const GroupElement& g, const GroupElement& h);

/// Folds a bracket word over group elements with group_commutator.
GroupElement group_bracket_word(const BracketExpr& b, const std::vector<GroupElement>& gens);

inline Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

/// Folds a bracket word over matrices with the algebra commutator.
Mat bracket_word_matrix(const BracketExpr& b, const std::vector<Mat>& gens);

/// Named basis of an n x n matrix Lie algebra.
struct MatAlgebra {
  int n = 0;
  std::vector<std::string> names;
  std::vector<Mat> basis;
};

/// Built-in bases: "so3" (rotations), "sl2" (traceless 2x2),
/// "heis3" (strictly upper triangular 3x3).
MatAlgebra algebra_preset(const std::string& name);

/// Parses the algebra file format:
///   n <size>
///   element <name>
///   <n*n numbers, row major, whitespace separated>
///   element <name> ...
/// '#' starts a comment. Throws SyntaxError / IoError.
MatAlgebra parse_algebra_text(const std::string& text);
MatAlgebra load_algebra_file(const std::string& path);
/// Resolves a preset name or a file path to an algebra.
MatAlgebra resolve_algebra(const std::string& spec);

struct ClosureCheck {
  bool closed = false;
  /// Largest residual of any pairwise commutator against the basis span.
  double max_residual = 0.0;
};

/// Verifies every [E_i, E_j] lies in the span of the basis (within tol).
ClosureCheck check_closure(const MatAlgebra& alg, double tol = 1e-10);

/// Outcome of a high-order derivative check on a matrix group word.
struct TrotterReport {
  bool passed = false;
  int order = 0;
  /// (order, max-entry norm) for each order that must vanish.
  std::vector<std::pair<int, double>> below_orders;
  /// Max-entry norm of estimate/k! - oracle.
  double residual = 0.0;
  double error_estimate = 0.0;
  Mat estimate;  ///< raw k-th (resp. (k-1)-th) derivative matrix
  Mat oracle;    ///< bracket word over the generators
};

/// Checks d^k/dt^k at 0 of the group bracket word of exp(t X_i) against
/// k! times the algebra bracket word. Orders below k must vanish.
TrotterReport verify_trotter_first(const BracketExpr& b, const std::vector<Mat>& gens,
                                   const DiffOpts& opts = {});

/// Same identity through the logarithmic derivative: with g(t) the group
/// bracket word, w(t) = g(t)^-1 g'(t) has vanishing derivatives below k-1
/// and d^{k-1}/dt^{k-1} w(0) = k! times the algebra bracket word. g' is a
/// 4th-order central difference with step `inner_dt`.
TrotterReport verify_trotter_second(const BracketExpr& b, const std::vector<Mat>& gens,
                                    const DiffOpts& opts = {}, double inner_dt = 5e-3);

}  // namespace cflow
