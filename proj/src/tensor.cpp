#include "cflow/tensor.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace cflow {

namespace {
int ipow_int(int base, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

/// Steps a base-m odometer; returns false after the last combination.
bool advance(std::vector<int>& idx, int m) {
  for (std::size_t d = idx.size(); d-- > 0;) {
    if (++idx[d] < m) return true;
    idx[d] = 0;
  }
  return false;
}

std::size_t flatten(const std::vector<int>& idx, int m) {
  std::size_t out = 0;
  for (int v : idx) out = out * static_cast<std::size_t>(m) + static_cast<std::size_t>(v);
  return out;
}
}  // namespace

int TensorSection::fiber_dim() const { return ipow_int(dim, type.rank()); }

Vec TensorSection::eval(const Vec& x) const {
  if (x.size() != dim) throw DimensionError("point dimension does not match section");
  if (!domain.contains(x, 1e-12)) throw DomainError("point outside section domain");
  const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  Vec out(static_cast<Eigen::Index>(components.size()));
  for (std::size_t i = 0; i < components.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = components[i]->eval(xs);
    if (!std::isfinite(out[static_cast<Eigen::Index>(i)]))
      throw EvalError("non-finite section value");
  }
  return out;
}

namespace {
struct Clause {
  std::string_view text;
  std::size_t offset;
};

std::vector<Clause> split_clauses(std::string_view text) {
  std::vector<Clause> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const char c = i < text.size() ? text[i] : '\0';
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (i == text.size() || (c == ';' && depth == 0)) {
      parts.push_back({text.substr(start, i - start), start});
      start = i + 1;
    }
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}
}  // namespace

TensorSection parse_section(std::string_view text, int dim, std::optional<Box> domain) {
  const auto clauses = split_clauses(text);
  if (clauses.empty()) throw SyntaxError("empty section description", 0);

  TensorSection s;
  s.dim = dim;
  s.domain = domain.value_or(Box::cube(dim, -10.0, 10.0));
  if (s.domain.dim() != dim) throw DimensionError("domain box dimension does not match section");

  // First clause: type=(p,q)
  {
    std::string head;
    for (char c : clauses.front().text) {
      if (!std::isspace(static_cast<unsigned char>(c))) head.push_back(c);
    }
    int p = -1, q = -1;
    if (std::sscanf(head.c_str(), "type=(%d,%d)", &p, &q) != 2 || p < 0 || q < 0)
      throw SyntaxError("section must start with 'type=(p,q)'", clauses.front().offset);
    if (p + q > 4) throw DimensionError("tensor rank above 4 is not supported");
    s.type = {p, q};
  }

  s.components.assign(static_cast<std::size_t>(s.fiber_dim()), Expr::constant(0.0));
  const int rank = s.type.rank();

  for (std::size_t ci = 1; ci < clauses.size(); ++ci) {
    const std::string_view clause = trim(clauses[ci].text);
    if (clause.empty()) continue;
    const std::size_t eq = clause.find('=');
    if (eq == std::string_view::npos)
      throw SyntaxError("expected 'name = expression'", clauses[ci].offset);
    const std::string_view name = trim(clause.substr(0, eq));
    const std::string_view expr_text = clause.substr(eq + 1);

    // Component name: identifier optionally followed by rank _i suffixes.
    std::size_t pos = 0;
    while (pos < name.size() && (std::isalpha(static_cast<unsigned char>(name[pos])))) ++pos;
    if (pos == 0) throw SyntaxError("component name must start with a letter", clauses[ci].offset);
    std::vector<int> idx;
    while (pos < name.size()) {
      if (name[pos] != '_')
        throw SyntaxError("expected '_' before a component index", clauses[ci].offset);
      ++pos;
      int v = 0;
      std::size_t digits = 0;
      while (pos < name.size() && std::isdigit(static_cast<unsigned char>(name[pos]))) {
        v = v * 10 + (name[pos] - '0');
        ++pos;
        ++digits;
      }
      if (digits == 0) throw SyntaxError("expected a component index", clauses[ci].offset);
      if (v < 1 || v > dim)
        throw DimensionError("component index " + std::to_string(v) + " outside 1.." +
                             std::to_string(dim));
      idx.push_back(v - 1);
    }
    if (static_cast<int>(idx.size()) != rank)
      throw DimensionError("component '" + std::string(name) + "' needs " +
                           std::to_string(rank) + " indices");
    s.components[flatten(idx, dim)] = parse_scalar(expr_text, dim);
  }
  return s;
}

Vec pullback_fiber(TensorType type, int dim, const Mat& j, const Vec& fiber_at_image) {
  const int rank = type.rank();
  if (rank == 0) return fiber_at_image;

  Mat a;  // inverse Jacobian, only needed for contravariant slots
  if (type.p > 0) {
    Eigen::PartialPivLU<Mat> lu(j);
    if (std::abs(lu.determinant()) <= 1e-300)
      throw SingularError("singular Jacobian in a pullback");
    a = lu.solve(Mat::Identity(dim, dim));
  }

  Vec out = Vec::Zero(fiber_at_image.size());
  std::vector<int> target(static_cast<std::size_t>(rank), 0);
  do {
    std::vector<int> source(static_cast<std::size_t>(rank), 0);
    double acc = 0.0;
    do {
      double w = 1.0;
      for (int r = 0; r < type.p; ++r) {
        w *= a(target[static_cast<std::size_t>(r)], source[static_cast<std::size_t>(r)]);
      }
      for (int r = 0; r < type.q; ++r) {
        // Lower slots transform with J itself: (phi^* s)_b = J^d_b s_d.
        w *= j(source[static_cast<std::size_t>(type.p + r)],
               target[static_cast<std::size_t>(type.p + r)]);
      }
      acc += w * fiber_at_image[static_cast<Eigen::Index>(flatten(source, dim))];
    } while (advance(source, dim));
    out[static_cast<Eigen::Index>(flatten(target, dim))] = acc;
  } while (advance(target, dim));
  return out;
}

SectionEval pullback_eval(const Diffeo& phi, TensorType type, int dim, const SectionEval& s) {
  auto jac = phi.jacobian;
  if (!jac) {
    jac = [fwd = phi.forward, dim](const Vec& x) {
      constexpr double h = 1e-6;
      Mat j(dim, dim);
      Vec xp = x, xm = x;
      for (int c = 0; c < dim; ++c) {
        xp[c] = x[c] + h;
        xm[c] = x[c] - h;
        j.col(c) = (fwd(xp) - fwd(xm)) / (2 * h);
        xp[c] = x[c];
        xm[c] = x[c];
      }
      return j;
    };
  }
  return [phi_fwd = phi.forward, jac, type, dim, s](const Vec& x) {
    return pullback_fiber(type, dim, jac(x), s(phi_fwd(x)));
  };
}

SectionEval pullback_section(const Diffeo& phi, const TensorSection& s) {
  return pullback_eval(phi, s.type, s.dim, [s](const Vec& y) { return s.eval(y); });
}

TensorSection lie_derivative_exact(const VectorField& x, const TensorSection& s) {
  if (x.dim != s.dim) throw DimensionError("field and section dimensions differ");
  TensorSection out;
  out.type = s.type;
  out.dim = s.dim;
  out.domain = s.domain;
  out.components.resize(s.components.size());

  const int m = s.dim;
  const int rank = s.type.rank();
  std::vector<int> idx(static_cast<std::size_t>(rank), 0);
  do {
    const std::size_t flat = flatten(idx, m);
    // Transport term: X^j d_j s[idx].
    ExprPtr acc = Expr::constant(0.0);
    for (int j = 0; j < m; ++j) {
      acc = Expr::add(acc, Expr::mul(x.components[static_cast<std::size_t>(j)],
                                     differentiate(s.components[flat], j)));
    }
    // Upper slots: - (d_j X^{a_r}) s[a_r -> j].
    for (int r = 0; r < s.type.p; ++r) {
      const int a_r = idx[static_cast<std::size_t>(r)];
      for (int j = 0; j < m; ++j) {
        std::vector<int> swapped = idx;
        swapped[static_cast<std::size_t>(r)] = j;
        acc = Expr::sub(
            acc, Expr::mul(differentiate(x.components[static_cast<std::size_t>(a_r)], j),
                           s.components[flatten(swapped, m)]));
      }
    }
    // Lower slots: + (d_{b_r} X^j) s[b_r -> j].
    for (int r = 0; r < s.type.q; ++r) {
      const int b_r = idx[static_cast<std::size_t>(s.type.p + r)];
      for (int j = 0; j < m; ++j) {
        std::vector<int> swapped = idx;
        swapped[static_cast<std::size_t>(s.type.p + r)] = j;
        acc = Expr::add(
            acc, Expr::mul(differentiate(x.components[static_cast<std::size_t>(j)], b_r),
                           s.components[flatten(swapped, m)]));
      }
    }
    out.components[flat] = acc;
  } while (advance(idx, m));
  return out;
}

Vec lie_derivative_flow(const VectorField& x, const TensorSection& s, const Vec& p,
                        const DiffOpts& diff_opts, const IntegratorOpts& ode_opts) {
  const LocalCurve fl = flow_curve(x, ode_opts);
  return kth_derivative(pullback_curve_section(fl, s, p), 1, diff_opts).value;
}

std::function<Vec(double)> pullback_curve_section(const LocalCurve& c, const TensorSection& s,
                                                  const Vec& x) {
  if (c.dim != s.dim) throw DimensionError("curve and section dimensions differ");
  return [c, s, x](double t) {
    const Vec y = c.eval(t, x);
    const Mat j = c.eval_jacobian(t, x);
    return pullback_fiber(s.type, s.dim, j, s.eval(y));
  };
}

std::function<Vec(const std::vector<double>&)> pullback_multi_curve_section(
    const std::vector<LocalCurve>& curves, const TensorSection& s, const Vec& x) {
  if (curves.empty()) throw ArityError("need at least one curve");
  for (const auto& c : curves) {
    if (c.dim != s.dim) throw DimensionError("curve and section dimensions differ");
  }
  return [curves, s, x](const std::vector<double>& ts) {
    if (ts.size() != curves.size())
      throw ArityError("parameter count does not match curve count");
    Vec y = x;
    Mat j = Mat::Identity(s.dim, s.dim);
    for (std::size_t i = curves.size(); i-- > 0;) {
      j = curves[i].eval_jacobian(ts[i], y) * j;
      y = curves[i].eval(ts[i], y);
    }
    return pullback_fiber(s.type, s.dim, j, s.eval(y));
  };
}

}  // namespace cflow
