#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "bhv/biharmonic.hpp"
#include "bhv/geometry.hpp"

namespace bhv {

// f = (A (x1+x2+x3+x4) + B z + C)^t on R^5, hyperplane z = c, m = 4.
struct PowerAffine {
  double a = 1.0, b = 2.0, c = 3.0, t = -1.0;
};

// f = 1 / (A z + B), any surface dimension.
struct InverseLinear {
  double a = 1.0, b = 2.0;
};

// f = (A x1 + B)^(-1/2) (C z + D)^(-1) on x1 > 0, z > 0, m = 4.
struct ProductExample {
  double a = 1.0, b = 2.0, c = 3.0, d = 4.0;
};

// f = 1 / (A z + B) over the slanted hyperplane z = sum a_i x_i + c.
struct SlantedInverse {
  double a = 1.0, b = 2.0;
  Eigen::VectorXd slope;
};

struct CustomFamily {
  Expression factor;
  ParameterBinding params;
};

using SolutionFamily = std::variant<PowerAffine, InverseLinear, ProductExample,
                                    SlantedInverse, CustomFamily>;

std::string family_name(const SolutionFamily& fam);

// Real roots of (4A^2 + B^2) t^2 + (2A^2 + B^2) t - 2A^2 = 0, ascending:
// always {-1, 2A^2 / (4A^2 + B^2)}. Requires (A, B) != (0, 0).
std::array<double, 2> solve_power_exponent_quadratic(double a, double b);

// The factor expression with the family's parameters substituted as literals.
ConformalFactor make_family_factor(const SolutionFamily& fam, int surface_dim);

struct FamilyReport {
  std::string family;
  std::string factor_text;
  int surface_dim = 0;
  double hyperplane_offset = 0.0;  // taken as the z-midpoint of the box
  std::string residual_equation;
  double max_relative_residual = 0.0;
  double max_scale = 0.0;
  bool residual_zero = false;
  Classification classification;
  std::optional<CurvatureReport> curvature;     // PowerAffine with 0 < t < 1
  std::optional<double> ode_p_residual;         // ProductExample factor checks
  std::optional<double> ode_q_residual;
  std::optional<double> alternate_reading_residual;  // four-factor product
  int sample_count = 0;
  std::uint64_t seed = 0;
};

// Runs the family's residual evaluator and classification over seeded
// samples; for the one-parameter power family inside (0, 1) it also scans the
// sectional curvature.
FamilyReport verify_family(const SolutionFamily& fam, int surface_dim,
                           const DomainBox& box, int samples, std::uint64_t seed,
                           const Tolerances& tol = {});

}  // namespace bhv
