#include <doctest.h>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "cflow/errors.hpp"
#include "cflow/expr.hpp"
#include "cflow/rng.hpp"

using namespace cflow;

namespace {

double at(const ExprPtr& e, std::initializer_list<double> pt) {
  const std::vector<double> x(pt);
  return e->eval(x);
}

}  // namespace

TEST_CASE("scalar parser evaluates arithmetic, powers, and functions") {
  CHECK(at(parse_scalar("2 + 3*4", 1), {0.0}) == doctest::Approx(14.0));
  CHECK(at(parse_scalar("(2 + 3)*4", 1), {0.0}) == doctest::Approx(20.0));
  CHECK(at(parse_scalar("x1*x2 + sin(x3)", 3), {2.0, 3.0, 0.5}) ==
        doctest::Approx(6.0 + std::sin(0.5)));
  CHECK(at(parse_scalar("x1^3", 1), {-2.0}) == doctest::Approx(-8.0));
  CHECK(at(parse_scalar("x1^-2", 1), {2.0}) == doctest::Approx(0.25));
  CHECK(at(parse_scalar("-x1^2", 1), {3.0}) == doctest::Approx(-9.0));
  CHECK(at(parse_scalar("exp(-x1)", 1), {1.0}) == doctest::Approx(std::exp(-1.0)));
  CHECK(at(parse_scalar("1.5e-2*x1", 1), {2.0}) == doctest::Approx(0.03));
  CHECK(at(parse_scalar("cos(0)", 1), {0.0}) == doctest::Approx(1.0));
}

TEST_CASE("scalar parser rejects malformed text and unknown variables") {
  CHECK_THROWS_AS(parse_scalar("", 2), SyntaxError);
  CHECK_THROWS_AS(parse_scalar("x1 +", 2), SyntaxError);
  CHECK_THROWS_AS(parse_scalar("sin x1", 2), SyntaxError);
  CHECK_THROWS_AS(parse_scalar("x1*(x2", 2), SyntaxError);
  CHECK_THROWS_AS(parse_scalar("x3", 2), Error);       // past the dimension
  CHECK_THROWS_AS(parse_scalar("x0", 2), Error);       // indices are 1-based
  CHECK_THROWS_AS(parse_scalar("x1^x2", 2), SyntaxError);  // exponents are integers
  CHECK_THROWS_AS(parse_scalar("y1", 2), SyntaxError);
}

TEST_CASE("evaluation reports poles and overflow") {
  const auto inv = parse_scalar("1/x1", 1);
  CHECK(at(inv, {4.0}) == doctest::Approx(0.25));
  CHECK_THROWS_AS(at(inv, {0.0}), EvalError);
  CHECK_THROWS_AS(at(parse_scalar("exp(x1)", 1), {1000.0}), EvalError);
  CHECK_THROWS_AS(at(parse_scalar("x1^-1", 1), {0.0}), EvalError);
}

TEST_CASE("constant folding collapses closed subtrees") {
  double v = 0.0;
  CHECK(parse_scalar("2*3 + 4", 1)->is_constant(&v));
  CHECK(v == doctest::Approx(10.0));
  CHECK(parse_scalar("0*x1", 1)->is_constant(&v));
  CHECK(v == 0.0);
  CHECK_FALSE(parse_scalar("x1 + 0", 1)->is_constant());
  CHECK(parse_scalar("x1 + 0", 1)->str() == "x1");
  CHECK(parse_scalar("1*x1", 1)->str() == "x1");
}

TEST_CASE("differentiate implements the product, quotient, and chain rules") {
  const auto d = [](const std::string& text, int dim, int var) {
    return differentiate(parse_scalar(text, dim), var);
  };
  // d/dx1 sin(x1*x1) = 2 x1 cos(x1^2)
  CHECK(at(d("sin(x1*x1)", 1, 0), {0.7}) ==
        doctest::Approx(2 * 0.7 * std::cos(0.49)).epsilon(1e-12));
  // d/dx2 (x1/x2) = -x1/x2^2
  CHECK(at(d("x1/x2", 2, 1), {3.0, 2.0}) == doctest::Approx(-0.75));
  // d/dx1 x1^4 = 4 x1^3
  CHECK(at(d("x1^4", 1, 0), {1.5}) == doctest::Approx(4 * std::pow(1.5, 3)));
  // d/dx1 exp(2*x1) = 2 exp(2 x1)
  CHECK(at(d("exp(2*x1)", 1, 0), {0.3}) == doctest::Approx(2 * std::exp(0.6)));
  // derivative in an unused variable is zero
  double v = 1.0;
  CHECK(d("sin(x1)", 2, 1)->is_constant(&v));
  CHECK(v == 0.0);
}

TEST_CASE("str round-trips through the parser") {
  SampleRng rng(11);
  const std::vector<std::string> seeds{
      "x1*x2 + sin(x3)",     "exp(-x1^2)*cos(x2)", "(x1 + 2)/(x3 - 5)",
      "x2^3 - 0.5*x1*x3",    "-sin(cos(x1))",      "1.25e-1 + x1*(x2 + x3)^2",
      "x1/(1 + x2^2) - exp(x3)"};
  for (const auto& text : seeds) {
    const auto e = parse_scalar(text, 3);
    const auto back = parse_scalar(e->str(), 3);
    for (int i = 0; i < 25; ++i) {
      const std::vector<double> x{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
      REQUIRE(e->eval(x) == doctest::Approx(back->eval(x)).epsilon(1e-14));
    }
    // derivatives of the round-trip agree too
    for (int var = 0; var < 3; ++var) {
      const auto de = differentiate(e, var);
      const auto db = differentiate(back, var);
      const std::vector<double> x{0.3, -0.4, 0.5};
      REQUIRE(de->eval(x) == doctest::Approx(db->eval(x)).epsilon(1e-14));
    }
  }
}

TEST_CASE("uses_variable and variable_count see through the tree") {
  const auto e = parse_scalar("x1 + sin(x3)", 3);
  CHECK(e->uses_variable(0));
  CHECK_FALSE(e->uses_variable(1));
  CHECK(e->uses_variable(2));
  CHECK(e->variable_count() == 3);
}
