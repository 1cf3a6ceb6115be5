#include "cflow/matgroup.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cflow {

namespace {
constexpr double kPade13Theta = 5.371920351148152;
constexpr double kPadeB[14] = {64764752532480000.0,
                               32382376266240000.0,
                               7771770303897600.0,
                               1187353796428800.0,
                               129060195264000.0,
                               10559470521600.0,
                               670442572800.0,
                               33522128640.0,
                               1323241920.0,
                               40840800.0,
                               960960.0,
                               16380.0,
                               182.0,
                               1.0};

Mat flatten_guard(const Mat& m, const char* what) {
  if (!m.allFinite()) throw OverflowError(std::string("non-finite matrix in ") + what);
  return m;
}

std::int64_t factorial_int(int k) {
  std::int64_t f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}
}  // namespace

Mat mat_exp(const Mat& a0, double t) {
  if (a0.rows() != a0.cols()) throw DimensionError("mat_exp needs a square matrix");
  Mat a = t * a0;
  flatten_guard(a, "mat_exp input");
  const auto n = a.rows();
  const Mat id = Mat::Identity(n, n);

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kPade13Theta) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kPade13Theta)));
    a /= std::pow(2.0, squarings);
  }

  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a2 * a4;
  const Mat u = a * (a6 * (kPadeB[13] * a6 + kPadeB[11] * a4 + kPadeB[9] * a2) +
                     kPadeB[7] * a6 + kPadeB[5] * a4 + kPadeB[3] * a2 + kPadeB[1] * id);
  const Mat v = a6 * (kPadeB[12] * a6 + kPadeB[10] * a4 + kPadeB[8] * a2) + kPadeB[6] * a6 +
                kPadeB[4] * a4 + kPadeB[2] * a2 + kPadeB[0] * id;

  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return flatten_guard(r, "mat_exp result");
}

GroupElement group_element(const Mat& m) {
  if (m.rows() != m.cols()) throw DimensionError("group elements are square matrices");
  flatten_guard(m, "group element");
  const double det = m.partialPivLu().determinant();
  if (std::abs(det) <= 1e-12) throw SingularError("matrix is singular to working precision");
  return GroupElement{m};
}

GroupElement group_inverse(const GroupElement& g) {
  const auto n = g.m.rows();
  Eigen::PartialPivLU<Mat> lu(g.m);
  if (std::abs(lu.determinant()) <= 1e-12)
    throw SingularError("matrix is singular to working precision");
  return GroupElement{lu.solve(Mat::Identity(n, n))};
}

GroupElement group_mul(const GroupElement& g, const GroupElement& h) {
  if (g.m.rows() != h.m.rows()) throw DimensionError("group elements of different sizes");
  return GroupElement{g.m * h.m};
}

GroupElement group_commutator(const GroupElement& g, const GroupElement& h) {
  return group_mul(group_mul(g, h), group_mul(group_inverse(g), group_inverse(h)));
}

GroupElement group_bracket_word(const BracketExpr& b, const std::vector<GroupElement>& gens) {
  return eval_bracket(b, gens, [](const GroupElement& g, const GroupElement& h) {
    return group_commutator(g, h);
  });
}

Mat bracket_word_matrix(const BracketExpr& b, const std::vector<Mat>& gens) {
  return eval_bracket(b, gens, [](const Mat& x, const Mat& y) { return commutator(x, y); });
}

MatAlgebra algebra_preset(const std::string& name) {
  MatAlgebra alg;
  if (name == "so3") {
    alg.n = 3;
    alg.names = {"E1", "E2", "E3"};
    Mat e1 = Mat::Zero(3, 3), e2 = Mat::Zero(3, 3), e3 = Mat::Zero(3, 3);
    e1(1, 2) = -1; e1(2, 1) = 1;
    e2(0, 2) = 1;  e2(2, 0) = -1;
    e3(0, 1) = -1; e3(1, 0) = 1;
    alg.basis = {e1, e2, e3};
    return alg;
  }
  if (name == "sl2") {
    alg.n = 2;
    alg.names = {"H", "E", "F"};
    Mat h = Mat::Zero(2, 2), e = Mat::Zero(2, 2), f = Mat::Zero(2, 2);
    h(0, 0) = 1; h(1, 1) = -1;
    e(0, 1) = 1;
    f(1, 0) = 1;
    alg.basis = {h, e, f};
    return alg;
  }
  if (name == "heis3") {
    alg.n = 3;
    alg.names = {"P", "Q", "Z"};
    Mat p = Mat::Zero(3, 3), q = Mat::Zero(3, 3), z = Mat::Zero(3, 3);
    p(0, 1) = 1;
    q(1, 2) = 1;
    z(0, 2) = 1;
    alg.basis = {p, q, z};
    return alg;
  }
  throw ConfigError("unknown algebra preset '" + name + "' (so3, sl2, heis3)");
}

MatAlgebra parse_algebra_text(const std::string& text) {
  std::istringstream in(text);
  std::string token;
  MatAlgebra alg;
  auto next = [&](std::string& out) -> bool {
    while (in >> out) {
      if (out[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return true;
    }
    return false;
  };

  if (!next(token) || token != "n")
    throw SyntaxError("algebra file must start with 'n <size>'", 0);
  if (!(in >> alg.n) || alg.n < 1) throw SyntaxError("bad algebra dimension", 0);

  while (next(token)) {
    if (token != "element") throw SyntaxError("expected 'element <name>'", 0);
    std::string name;
    if (!(in >> name)) throw SyntaxError("element needs a name", 0);
    Mat m(alg.n, alg.n);
    for (int i = 0; i < alg.n; ++i) {
      for (int j = 0; j < alg.n; ++j) {
        std::string cell;
        if (!next(cell)) throw SyntaxError("element '" + name + "' is missing entries", 0);
        try {
          m(i, j) = std::stod(cell);
        } catch (const std::exception&) {
          throw SyntaxError("bad number '" + cell + "' in element '" + name + "'", 0);
        }
      }
    }
    alg.names.push_back(name);
    alg.basis.push_back(m);
  }
  if (alg.basis.empty()) throw SyntaxError("algebra file declares no elements", 0);
  return alg;
}

MatAlgebra load_algebra_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open algebra file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_algebra_text(buf.str());
}

MatAlgebra resolve_algebra(const std::string& spec) {
  if (spec == "so3" || spec == "sl2" || spec == "heis3") return algebra_preset(spec);
  return load_algebra_file(spec);
}

ClosureCheck check_closure(const MatAlgebra& alg, double tol) {
  const int n2 = alg.n * alg.n;
  const int d = static_cast<int>(alg.basis.size());
  Mat span(n2, d);
  for (int c = 0; c < d; ++c) {
    span.col(c) = Eigen::Map<const Vec>(alg.basis[static_cast<std::size_t>(c)].data(), n2);
  }
  const auto qr = span.colPivHouseholderQr();

  ClosureCheck check;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const Mat c = commutator(alg.basis[static_cast<std::size_t>(i)],
                               alg.basis[static_cast<std::size_t>(j)]);
      const Vec target = Eigen::Map<const Vec>(c.data(), n2);
      const Vec coeffs = qr.solve(target);
      const double residual = (span * coeffs - target).cwiseAbs().maxCoeff();
      check.max_residual = std::max(check.max_residual, residual);
    }
  }
  check.closed = check.max_residual <= tol;
  return check;
}

namespace {
std::function<Vec(double)> word_curve(const BracketExpr& b, const std::vector<Mat>& gens) {
  return [b, gens](double t) {
    std::vector<GroupElement> el;
    el.reserve(gens.size());
    for (const auto& g : gens) el.push_back(group_element(mat_exp(g, t)));
    const Mat w = group_bracket_word(b, el).m;
    return Vec(Eigen::Map<const Vec>(w.data(), w.size()));
  };
}

Mat unflatten(const Vec& v, Eigen::Index n) { return Eigen::Map<const Mat>(v.data(), n, n); }

double word_scale(const Mat& oracle) { return std::max(1.0, oracle.cwiseAbs().maxCoeff()); }
}  // namespace

TrotterReport verify_trotter_first(const BracketExpr& b, const std::vector<Mat>& gens,
                                   const DiffOpts& opts) {
  const int k = b.length();
  const auto n = gens.empty() ? 0 : gens.front().rows();
  TrotterReport rep;
  rep.order = k;
  rep.oracle = bracket_word_matrix(b, gens);
  const auto curve = word_curve(b, gens);

  bool vanish_ok = true;
  for (int l = 1; l < k; ++l) {
    const DerivEstimate est = kth_derivative(curve, l, opts);
    const double norm = est.value.cwiseAbs().maxCoeff();
    rep.below_orders.emplace_back(l, norm);
    vanish_ok = vanish_ok && norm <= opts.vanish_tol;
  }

  const DerivEstimate est = kth_derivative(curve, k, opts);
  rep.estimate = unflatten(est.value, n);
  rep.error_estimate = est.error_estimate;
  const double kfact = static_cast<double>(factorial_int(k));
  rep.residual = (rep.estimate / kfact - rep.oracle).cwiseAbs().maxCoeff();
  rep.passed = vanish_ok && rep.residual <= opts.match_tol * word_scale(rep.oracle);
  return rep;
}

TrotterReport verify_trotter_second(const BracketExpr& b, const std::vector<Mat>& gens,
                                    const DiffOpts& opts, double inner_dt) {
  const int k = b.length();
  const auto n = gens.empty() ? 0 : gens.front().rows();
  TrotterReport rep;
  rep.order = k;
  rep.oracle = bracket_word_matrix(b, gens);
  const auto curve = word_curve(b, gens);

  // w(t) = g(t)^-1 g'(t), with g' a 4th-order central difference.
  const auto log_derivative = [&, inner_dt](double t) {
    const Vec gm2 = curve(t - 2 * inner_dt);
    const Vec gm1 = curve(t - inner_dt);
    const Vec gp1 = curve(t + inner_dt);
    const Vec gp2 = curve(t + 2 * inner_dt);
    const Vec dg = (gm2 - 8.0 * gm1 + 8.0 * gp1 - gp2) / (12.0 * inner_dt);
    const Mat g = unflatten(curve(t), n);
    const Mat w = g.partialPivLu().solve(unflatten(dg, n));
    return Vec(Eigen::Map<const Vec>(w.data(), w.size()));
  };

  bool vanish_ok = true;
  for (int l = 0; l < k - 1; ++l) {
    const DerivEstimate est = kth_derivative(log_derivative, l, opts);
    const double norm = est.value.cwiseAbs().maxCoeff();
    rep.below_orders.emplace_back(l, norm);
    vanish_ok = vanish_ok && norm <= opts.vanish_tol;
  }

  const DerivEstimate est = kth_derivative(log_derivative, k - 1, opts);
  rep.estimate = unflatten(est.value, n);
  rep.error_estimate = est.error_estimate;
  const double kfact = static_cast<double>(factorial_int(k));
  rep.residual = (rep.estimate / kfact - rep.oracle).cwiseAbs().maxCoeff();
  rep.passed = vanish_ok && rep.residual <= opts.match_tol * word_scale(rep.oracle);
  return rep;
}

}  // namespace cflow
