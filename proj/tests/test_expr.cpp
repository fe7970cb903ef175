#include "doctest.h"

#include <cmath>

#include "bhv/expr.hpp"
#include "bhv/oracle.hpp"
#include "support.hpp"

using namespace bhv;
using testgen::eval_at;

namespace {
const CoordinateSystem kAmbient4 = CoordinateSystem::ambient(4);
}

TEST_CASE("parser handles the factor grammar") {
  const Expression power =
      parse_expression("(A*(x1+x2+x3+x4)+B*z+C)^t", kAmbient4);
  CHECK(power.format(kAmbient4) == "(A*(x1+x2+x3+x4)+B*z+C)^t");

  const Expression inv = parse_expression("1/(A*z+B)", kAmbient4);
  CHECK(inv.format(kAmbient4) == "1/(A*z+B)");

  CHECK_THROWS_AS(parse_expression("x1 +", kAmbient4), ParseError);
  try {
    parse_expression("x1 +", kAmbient4);
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }

  CHECK_THROWS_AS(parse_expression("foo(x1)", kAmbient4), ParseError);
  CHECK_THROWS_AS(parse_expression("", kAmbient4), ParseError);
  CHECK_THROWS_AS(parse_expression("x1 x2", kAmbient4), ParseError);
}

TEST_CASE("precedence and associativity") {
  const CoordinateSystem cs = CoordinateSystem::ambient(2);
  // ^ binds tightest and right-associates
  CHECK(eval_at(parse_expression("2^3^2", cs), Eigen::VectorXd::Zero(3)) ==
        doctest::Approx(512.0));
  // unary minus below ^
  CHECK(eval_at(parse_expression("-2^2", cs), Eigen::VectorXd::Zero(3)) ==
        doctest::Approx(-4.0));
  CHECK(eval_at(parse_expression("2^-2", cs), Eigen::VectorXd::Zero(3)) ==
        doctest::Approx(0.25));
  CHECK(eval_at(parse_expression("2+3*4", cs), Eigen::VectorXd::Zero(3)) ==
        doctest::Approx(14.0));
  CHECK(eval_at(parse_expression("2-3-4", cs), Eigen::VectorXd::Zero(3)) ==
        doctest::Approx(-5.0));
  CHECK(eval_at(parse_expression("12/3/2", cs), Eigen::VectorXd::Zero(3)) ==
        doctest::Approx(2.0));
}

TEST_CASE("evaluation") {
  const Expression f = parse_expression("(x1+2*z+3)^(-1)", kAmbient4);
  Eigen::VectorXd p(5);
  p << 1, 0, 0, 0, 1;
  CHECK(eval_at(f, p) == doctest::Approx(1.0 / 6.0));

  const Expression lnz = parse_expression("ln(z)", kAmbient4);
  Eigen::VectorXd q(5);
  q << 0, 0, 0, 0, -1;
  CHECK_THROWS_AS(eval_at(lnz, q), DomainError);

  const CoordinateSystem cs1 = CoordinateSystem::ambient(1);
  const Expression lin = parse_expression("A*z+B", cs1);
  Eigen::VectorXd r(2);
  r << 0, 0;
  CHECK(lin.evaluate(std::span<const double>(r.data(), 2),
                     ParameterBinding{{"A", 1.0}, {"B", 2.0}}) ==
        doctest::Approx(2.0));

  SUBCASE("domain errors") {
    Eigen::VectorXd zero5 = Eigen::VectorXd::Zero(5);
    CHECK_THROWS_AS(eval_at(parse_expression("1/x1", kAmbient4), zero5),
                    DomainError);
    CHECK_THROWS_AS(eval_at(parse_expression("x1^(-2)", kAmbient4), zero5),
                    DomainError);
    Eigen::VectorXd neg(5);
    neg << -1, 0, 0, 0, 0;
    CHECK_THROWS_AS(eval_at(parse_expression("x1^0.5", kAmbient4), neg),
                    DomainError);
    CHECK_THROWS_AS(eval_at(parse_expression("sqrt(x1)", kAmbient4), neg),
                    DomainError);
    // integer powers of negative bases are fine
    CHECK(eval_at(parse_expression("x1^3", kAmbient4), neg) ==
          doctest::Approx(-1.0));
  }

  SUBCASE("unbound parameter") {
    CHECK_THROWS_AS(eval_at(parse_expression("A*x1", kAmbient4),
                            Eigen::VectorXd::Ones(5)),
                    InvalidInput);
  }
}

TEST_CASE("differentiation") {
  const Expression sq = parse_expression("x1^2", kAmbient4);
  CHECK(sq.differentiate(0).format(kAmbient4) == "2*x1");

  const Expression pw = parse_expression("(A*z+B)^t", kAmbient4);
  const Expression dz = pw.differentiate(4);
  CHECK(dz.format(kAmbient4) == "t*(A*z+B)^(t-1)*A");
  // numeric agreement with the closed form
  const ParameterBinding params{{"A", 1.5}, {"B", 0.5}, {"t", 0.7}};
  Eigen::VectorXd p(5);
  p << 0, 0, 0, 0, 2.0;
  const double expected = 0.7 * 1.5 * std::pow(1.5 * 2.0 + 0.5, -0.3);
  CHECK(dz.evaluate(std::span<const double>(p.data(), 5), params) ==
        doctest::Approx(expected));

  const Expression inv = parse_expression("1/(A*z+B)", kAmbient4);
  const Expression dx2 = inv.differentiate(1);
  CHECK(dx2.is_number());
  CHECK(dx2.number_value() == 0.0);

  SUBCASE("independence of unused coordinates") {
    CHECK(parse_expression("sin(x1)*exp(x2)", kAmbient4)
              .differentiate(3)
              .is_number());
  }
}

TEST_CASE("derivatives match finite differences to third order") {
  std::mt19937_64 rng(20240817);
  const FDScheme scheme;
  int checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 2 + (trial % 3);
    const Expression e = testgen::random_smooth_expression(rng, n);
    const Eigen::VectorXd p = testgen::random_point(rng, n);
    const ScalarField field = [&](const Eigen::VectorXd& q) {
      return eval_at(e, q);
    };
    std::uniform_int_distribution<int> coord(0, n - 1);
    for (int order = 1; order <= 3; ++order) {
      std::vector<int> idx;
      for (int k = 0; k < order; ++k) idx.push_back(coord(rng));
      Expression d = e;
      for (int c : idx) d = d.differentiate(c);
      double sym, fd;
      try {
        sym = eval_at(d, p);
        fd = fd_partial(field, p, idx, scheme);
      } catch (const DomainError&) {
        continue;  // stencil fell off the expression's domain
      }
      const double tol = (order == 3 ? 1e-5 : 1e-6) * (1.0 + std::abs(sym));
      CHECK(std::abs(sym - fd) <= tol);
      ++checked;
    }
  }
  CHECK(checked > 250);
}

TEST_CASE("structural derivative rules") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Expression a = testgen::random_tree(rng, 3, 3);
    const Expression b = testgen::random_tree(rng, 3, 3);
    const int v = trial % 3;
    const Expression sum = Expression::binary(BinaryOp::Add, a, b);
    CHECK(sum.differentiate(v).equals(
        Expression::add(a.differentiate(v), b.differentiate(v))));
    const Expression prod = Expression::binary(BinaryOp::Mul, a, b);
    CHECK(prod.differentiate(v).equals(
        Expression::add(Expression::mul(a.differentiate(v), b),
                        Expression::mul(a, b.differentiate(v)))));
    // scalar multiples pass through
    const Expression scaled =
        Expression::binary(BinaryOp::Mul, Expression::number(3.5), a);
    CHECK(scaled.differentiate(v).equals(
        Expression::mul(Expression::number(3.5), a.differentiate(v))));
  }
}

TEST_CASE("simplify") {
  const Expression e1 = parse_expression("(x1*1)+0", kAmbient4);
  CHECK(e1.simplify().format(kAmbient4) == "x1");
  const Expression e2 = parse_expression("2*3", kAmbient4);
  CHECK(e2.simplify().number_value() == 6.0);
  const Expression e3 = parse_expression("x1^1", kAmbient4);
  CHECK(e3.simplify().format(kAmbient4) == "x1");
  CHECK(parse_expression("x1^0", kAmbient4).simplify().number_value() == 1.0);
  CHECK(parse_expression("-(-x1)", kAmbient4).simplify().format(kAmbient4) ==
        "x1");
  CHECK(parse_expression("0/x1", kAmbient4).simplify().number_value() == 0.0);
  // division by a literal zero is preserved, not folded
  CHECK(!parse_expression("1/0", kAmbient4).simplify().is_number());
}

TEST_CASE("simplify preserves value on random expressions") {
  std::mt19937_64 rng(99);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + (trial % 3);
    const Expression e = testgen::random_smooth_expression(rng, n);
    const Eigen::VectorXd p = testgen::random_point(rng, n);
    double before, after;
    try {
      before = eval_at(e, p);
      after = eval_at(e.simplify(), p);
    } catch (const DomainError&) {
      continue;
    }
    CHECK(std::abs(before - after) <= 1e-12 * (1.0 + std::abs(before)));
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("format uses minimal parentheses") {
  CHECK(parse_expression("-(x1)", kAmbient4).format(kAmbient4) == "-x1");
  CHECK(parse_expression("x1+x2*z", kAmbient4).format(kAmbient4) == "x1+x2*z");
  CHECK(parse_expression("(x1+x2)*z", kAmbient4).format(kAmbient4) ==
        "(x1+x2)*z");
  CHECK(parse_expression("x1-(x2-z)", kAmbient4).format(kAmbient4) ==
        "x1-(x2-z)");
  CHECK(parse_expression("(x1^2)^3", kAmbient4).format(kAmbient4) ==
        "(x1^2)^3");
  CHECK(parse_expression("x1^2^3", kAmbient4).format(kAmbient4) == "x1^2^3");
}

TEST_CASE("parse(format(e)) reproduces the tree exactly") {
  std::mt19937_64 rng(123456);
  const CoordinateSystem cs = CoordinateSystem::ambient(3);
  for (int trial = 0; trial < 600; ++trial) {
    const Expression e = testgen::random_tree(rng, 4, 1 + trial % 5);
    const std::string text = e.format(cs);
    CAPTURE(text);
    const Expression back = parse_expression(text, cs);
    CHECK(back.equals(e));
    // and formatting is a fixed point
    CHECK(back.format(cs) == text);
  }
}

TEST_CASE("coordinate systems") {
  const CoordinateSystem cs = CoordinateSystem::ambient(3);
  CHECK(cs.size() == 4);
  CHECK(cs.name(0) == "x1");
  CHECK(cs.name(3) == "z");
  CHECK(cs.index_of("z") == 3);
  CHECK(!cs.index_of("w").has_value());
  const CoordinateSystem chart = CoordinateSystem::chart(2);
  CHECK(chart.size() == 2);
  CHECK(chart.name(1) == "u2");
  CHECK_THROWS_AS(CoordinateSystem({"a", "a"}), InvalidInput);
}

TEST_CASE("substitution composes expressions") {
  const Expression f = parse_expression("x1^2+z", kAmbient4);
  // restrict to the curve x = (u, 0, 0, 0, 3u)
  std::vector<Expression> repl(5, Expression::number(0.0));
  repl[0] = Expression::coordinate(0);
  repl[4] = 3.0 * Expression::coordinate(0);
  const Expression g = f.substitute_coordinates(repl);
  Eigen::VectorXd u(1);
  u << 2.0;
  CHECK(eval_at(g, u) == doctest::Approx(10.0));
}
