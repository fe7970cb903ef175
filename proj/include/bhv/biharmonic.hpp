#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bhv/geometry.hpp"
#include "bhv/hypersurface.hpp"

namespace bhv {

struct Tolerances {
  double abs = 1e-12;            // noise floor for residual zero tests
  double rel = 1e-9;             // symbolic evaluation paths
  double rel_numeric = 1e-6;     // anything involving finite differences
  double mean_curvature = 1e-9;  // |H| below this counts as minimal
  double mean_curvature_numeric = 1e-6;
};

// Left-hand side of one biharmonicity equation at one point. The normal
// component is normalized by the sign of the mean curvature there, so the
// report does not depend on the choice of unit normal. `scale` is the largest
// magnitude among the individual summed terms and anchors relative zero
// tests.
struct BiharmonicResidual {
  Eigen::VectorXd point;               // ambient
  double normal = 0.0;
  Eigen::VectorXd tangential;          // components in the tangent frame
  Eigen::VectorXd tangential_ambient;  // the same vector embedded in R^n
  double scale = 0.0;
  std::string equation;

  double magnitude() const;
  double relative() const;  // magnitude / scale (0 when scale is 0)
  bool passes(const Tolerances& tol, bool numeric_path = false) const;
};

// Equation of a codimension-one immersion with ambient Ricci data:
//   Lap H - H |A|^2 + H Ric(xi, xi)              (normal)
//   2 A(grad H) + (m/2) grad H^2 - 2 H Ric(xi)^T (tangential)
// Derivatives of the H field are taken in the hypersurface's Euclidean
// induced metric; ric must carry both contractions, the tangential one in
// chart-coordinate components.
BiharmonicResidual residual_generic(const ChartField& mean_curvature_field,
                                    const ShapeData& shape, const RicciData& ric,
                                    const SurfaceGeometry& geom,
                                    const Eigen::VectorXd& u,
                                    const ParameterBinding& extra);

// Specialization to the conformally flat ambient metric f^-2 delta, with the
// hypersurface's barred data derived from Euclidean data through the
// conformal transformation laws. Fully symbolic in the chart.
class ConformalResidual {
 public:
  ConformalResidual(const ConformalFactor& cf, const Hypersurface& hs);
  BiharmonicResidual at(const Eigen::VectorXd& u) const;
  const SurfaceGeometry& geometry() const { return geom_; }

 private:
  const ConformalFactor& cf_;
  SurfaceGeometry geom_;
  Expression f_chart_, h_bar_, lap_h_bar_, inner_f_h_;
  std::vector<Expression> dh_bar_;
};

// Equation of a Euclidean-minimal base hypersurface in the metric f^-2 delta:
//   f Lap(f xi f) - m <grad f, grad(f xi f)> - f^2 (xi f) |A|^2
//     - 2m (xi f)^3 + m f (xi f) Hess(f)(xi, xi)                  (normal)
//   2 f A(grad(xi f)) - 2(m-1)(xi f) A(grad f) + (4-m)(xi f) grad(xi f)
// All hypersurface quantities Euclidean; needs third derivatives of f.
class MinimalBaseResidual {
 public:
  MinimalBaseResidual(const ConformalFactor& cf, const Hypersurface& hs);
  // Rejects points where the base is not Euclidean-minimal.
  BiharmonicResidual at(const Eigen::VectorXd& u) const;
  const SurfaceGeometry& geometry() const { return geom_; }

 private:
  const ConformalFactor& cf_;
  SurfaceGeometry geom_;
  Expression f_chart_, xi_f_, product_, lap_product_, inner_;
  std::vector<Expression> grad_xi_f_, grad_f_;
};

// Axis-aligned hyperplane {z = c} in R^5 (m = 4):
//   sum_i [f^2 f_iiz - 2 f f_i f_iz + f f_z f_ii - 4 f_z f_i^2]
//     + 4 f_z (f f_zz - 2 f_z^2) = 0,
// with the tangential factors (m-4) f_z f_zi reported alongside (identically
// zero at m = 4).
BiharmonicResidual residual_axis_hyperplane_m4(const ConformalFactor& cf,
                                               double offset,
                                               const Eigen::VectorXd& point);

// Additively separable factor f = p(x) + q(z) on a CMC hyperplane:
//   (p sum p_ii - m sum p_i^2) + m (q q_zz - 2 q_z^2)
//     + (m p q_zz + q sum p_ii) = 0.
BiharmonicResidual residual_separable_cmc(const Expression& p_field,
                                          const Expression& q_field,
                                          const CoordinateSystem& coords,
                                          const ParameterBinding& params,
                                          const Eigen::VectorXd& point);

// Slanted hyperplane z = sum a_i x_i + c with f = f(z):
//   s f^2 f''' + (4 - s) f f' f'' - 4 (2 + s) (f')^3 = 0,  s = sum a_i^2.
BiharmonicResidual residual_slanted_fz(const Expression& f_of_z,
                                       const CoordinateSystem& coords,
                                       const ParameterBinding& params,
                                       const Eigen::VectorXd& slope,
                                       const Eigen::VectorXd& point);

// Constant-mean-curvature conditions in the conformal metric:
//   |A|^2 = Ric(xi, xi)    and    grad(xi sigma) - (xi sigma) grad sigma
//                                   + A(grad sigma) = 0,
// with the xi(sigma) = 0 specialization evaluated when applicable.
struct CmcResult {
  BiharmonicResidual residual;
  bool special_applicable = false;  // xi(sigma) ~ 0
  double special_normal = 0.0;
  Eigen::VectorXd special_tangential;
};

class CmcResidual {
 public:
  CmcResidual(const ConformalFactor& cf, const Hypersurface& hs);
  CmcResult at(const Eigen::VectorXd& u, const Tolerances& tol = {}) const;

 private:
  const ConformalFactor& cf_;
  SurfaceGeometry geom_;
  Expression f_chart_, h_bar_;
};

// Totally umbilical hypersurface in the conformal metric:
//   Lap H - m H^3 + H Ric(xi, xi) = 0
//   (2+m)/2 grad H^2 - 2(m-1) H [grad(xi s) - (xi s) grad s + H grad s] = 0,
// and for H = xi(sigma) the tangential equation collapses to
// (m-4) grad H^2 = 0; the (m-4) factor is reported separately.
struct UmbilicalResult {
  BiharmonicResidual residual;
  bool reduced_applicable = false;  // H ~ xi(sigma)
  double dimension_factor = 0.0;    // m - 4
  Eigen::VectorXd reduced_tangential;
};

class UmbilicalResidual {
 public:
  UmbilicalResidual(const ConformalFactor& cf, ChartField mean_curvature_field,
                    const Hypersurface& hs);
  UmbilicalResult at(const Eigen::VectorXd& u, const Tolerances& tol = {}) const;

 private:
  const ConformalFactor& cf_;
  SurfaceGeometry geom_;
  Expression f_chart_, h_field_, lap_h_, inner_f_h_;
};

enum class Verdict { Minimal, ProperBiharmonic, NotBiharmonic, Indeterminate };

const char* verdict_name(Verdict v);

struct Classification {
  Verdict verdict = Verdict::Indeterminate;
  double max_abs_mean_curvature = 0.0;  // conformal metric
  double max_relative_residual = 0.0;
  int sample_count = 0;
  int informative_count = 0;  // samples with residual scale above noise floor
  std::uint64_t seed = 0;
  std::string equation;  // residual path used
};

// Samples the hypersurface inside the box, evaluates the appropriate
// residual (the minimal-base equation when the Euclidean base is minimal,
// the conformal equation otherwise), and applies the threshold rules. Each
// verdict is per-sample evidence, never an extrapolation.
Classification classify(const ConformalFactor& cf, const Hypersurface& hs,
                        const DomainBox& box, int samples, std::uint64_t seed,
                        const Tolerances& tol = {});

// Trichotomy report for the hyperplane z = c. Cases may hold simultaneously.
struct HyperplaneCaseReport {
  bool minimal_case = false;        // f_z identically 0 at samples
  bool axis_equation_case = false;  // m = 4 and the axis equation vanishes
  bool separable_cmc_case = false;  // f = p + q, CMC != 0, separable equation
  bool axis_applicable = false;     // m == 4
  bool biharmonic = false;
  double max_abs_fz = 0.0;
  double max_rel_axis_residual = 0.0;
  double max_abs_fzi = 0.0;
  double max_rel_separable_residual = 0.0;
  bool separable = false;
  double mean_curvature = 0.0;  // conformal H on the plane (first sample)
  int sample_count = 0;
  std::uint64_t seed = 0;
};

HyperplaneCaseReport hyperplane_case_analysis(const ConformalFactor& cf, int m,
                                              double offset, const DomainBox& box,
                                              int samples, std::uint64_t seed,
                                              const Tolerances& tol = {});

// Deterministic chart points of hs inside the box (per-index streams;
// rejection on the singular margin). Hyperplanes draw ambient points and
// project; patches draw from their parameter box.
std::vector<Eigen::VectorXd> sample_chart_points(const ConformalFactor& cf,
                                                 const SurfaceGeometry& geom,
                                                 const DomainBox& box, int samples,
                                                 std::uint64_t seed);

}  // namespace bhv
