#pragma once

// Shared generators for randomized tests: arbitrary grammar trees for the
// parser round-trip, and smooth positive conformal factors whose third
// derivatives exist on the sampled boxes.

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "bhv/expr.hpp"

namespace testgen {

using bhv::BinaryOp;
using bhv::Expression;
using bhv::UnaryFunc;

inline double pick_number(std::mt19937_64& rng) {
  static const double pool[] = {0.0,  1.0,   -1.0,  2.0,  -3.0, 0.5,
                                1.25, -0.75, 100.0, 1e-3, 3.25, 7.0};
  std::uniform_int_distribution<int> d(0, 11);
  return pool[d(rng)];
}

// Arbitrary tree over the full grammar; only structural use (format/parse).
inline Expression random_tree(std::mt19937_64& rng, int coords, int depth) {
  std::uniform_int_distribution<int> leaf(0, 2);
  std::uniform_int_distribution<int> kind(0, 6);
  std::uniform_int_distribution<int> coord(0, coords - 1);
  std::uniform_int_distribution<int> param(0, 3);
  std::uniform_int_distribution<int> func(0, 4);
  static const char* params[] = {"A", "B", "C", "t"};
  if (depth <= 0) {
    switch (leaf(rng)) {
      case 0: return Expression::number(pick_number(rng));
      case 1: return Expression::coordinate(coord(rng));
      default: return Expression::parameter(params[param(rng)]);
    }
  }
  switch (kind(rng)) {
    case 0:
      return Expression::binary(BinaryOp::Add, random_tree(rng, coords, depth - 1),
                                random_tree(rng, coords, depth - 1));
    case 1:
      return Expression::binary(BinaryOp::Sub, random_tree(rng, coords, depth - 1),
                                random_tree(rng, coords, depth - 1));
    case 2:
      return Expression::binary(BinaryOp::Mul, random_tree(rng, coords, depth - 1),
                                random_tree(rng, coords, depth - 1));
    case 3:
      return Expression::binary(BinaryOp::Div, random_tree(rng, coords, depth - 1),
                                random_tree(rng, coords, depth - 1));
    case 4:
      return Expression::binary(BinaryOp::Pow, random_tree(rng, coords, depth - 1),
                                random_tree(rng, coords, depth - 1));
    case 5:
      return Expression::negate(random_tree(rng, coords, depth - 1));
    default:
      return Expression::call(static_cast<UnaryFunc>(func(rng)),
                              random_tree(rng, coords, depth - 1));
  }
}

inline Expression affine(std::mt19937_64& rng, int n, double lo, double hi,
                         double constant_lo, double constant_hi) {
  std::uniform_real_distribution<double> coef(lo, hi);
  std::uniform_real_distribution<double> cons(constant_lo, constant_hi);
  Expression e = Expression::number(cons(rng));
  for (int i = 0; i < n; ++i)
    e = e + Expression::number(coef(rng)) * Expression::coordinate(i);
  return e;
}

// Positive on [0, 1]^n (with room for finite-difference stencils) and three
// times differentiable there.
inline Expression random_positive_factor(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> kind(0, 5);
  std::uniform_real_distribution<double> expo(-2.0, 2.0);
  const auto power_unit = [&] {
    double t = expo(rng);
    if (std::abs(t) < 0.15) t = t < 0 ? -0.4 : 0.4;
    return Expression::pow(affine(rng, n, 0.2, 1.0, 1.5, 3.0),
                           Expression::number(t));
  };
  const auto exp_unit = [&] {
    return Expression::apply(UnaryFunc::Exp, affine(rng, n, -0.3, 0.3, -0.5, 0.5));
  };
  const auto quad_unit = [&] {
    std::uniform_real_distribution<double> w(0.1, 0.5), a(0.0, 1.0),
        c(0.5, 2.0);
    Expression e = Expression::number(c(rng));
    for (int i = 0; i < n; ++i) {
      const Expression d = Expression::coordinate(i) - Expression::number(a(rng));
      e = e + Expression::number(w(rng)) * d * d;
    }
    return e;
  };
  switch (kind(rng)) {
    case 0: return power_unit();
    case 1: return exp_unit();
    case 2: return quad_unit();
    case 3: return power_unit() * exp_unit();
    case 4: return power_unit() + quad_unit();
    default: return 1.0 / quad_unit();
  }
}

// Smooth on [0, 1]^n; may change sign (for derivative checks only).
inline Expression random_smooth_expression(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> kind(0, 3);
  switch (kind(rng)) {
    case 0: return random_positive_factor(rng, n);
    case 1:
      return Expression::apply(UnaryFunc::Sin, affine(rng, n, -1.0, 1.0, -1.0, 1.0)) +
             random_positive_factor(rng, n);
    case 2:
      return Expression::apply(UnaryFunc::Ln, random_positive_factor(rng, n) + 0.5);
    default:
      return Expression::apply(UnaryFunc::Cos, affine(rng, n, -1.0, 1.0, 0.0, 1.0)) *
             random_positive_factor(rng, n);
  }
}

inline Eigen::VectorXd random_point(std::mt19937_64& rng, int n, double lo = 0.1,
                                    double hi = 0.9) {
  std::uniform_real_distribution<double> d(lo, hi);
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = d(rng);
  return p;
}

inline double eval_at(const Expression& e, const Eigen::VectorXd& p,
                      const bhv::ParameterBinding& params = {}) {
  return e.evaluate(std::span<const double>(p.data(), p.size()), params);
}

}  // namespace testgen
