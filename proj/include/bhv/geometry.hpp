#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "bhv/expr.hpp"

namespace bhv {

struct ShapeData;  // hypersurface.hpp

// Axis-aligned sampling region. Points where the conformal factor is
// undefined or |f| <= margin are treated as singular and rejected.
struct DomainBox {
  Eigen::VectorXd lower, upper;
  double margin = 0.0;  // <= 0 selects the default, 1e-3 * diagonal

  int dim() const { return static_cast<int>(lower.size()); }
  double diagonal() const { return (upper - lower).norm(); }
  double effective_margin() const {
    return margin > 0.0 ? margin : 1e-3 * diagonal();
  }
  void validate() const;
};

// Positive scalar field f defining the ambient metric f^-2 delta, together
// with sigma = ln f and symbolic partials of both (f to third order, sigma to
// second) cached at construction.
class ConformalFactor {
 public:
  ConformalFactor(Expression f, CoordinateSystem coords, ParameterBinding params);

  int ambient_dim() const { return coords_.size(); }
  const CoordinateSystem& coords() const { return coords_; }
  const Expression& factor() const { return f_; }
  const Expression& log_factor() const { return sigma_; }
  const ParameterBinding& params() const { return params_; }

  const Expression& partial(int i) const;
  const Expression& partial2(int i, int j) const;
  const Expression& partial3(int i, int j, int k) const;
  const Expression& sigma_partial(int i) const;
  const Expression& sigma_partial2(int i, int j) const;

  // f(p); throws DomainError unless f(p) > 0.
  double value(const Eigen::VectorXd& p) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& p) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& p) const;
  double third(int i, int j, int k, const Eigen::VectorXd& p) const;
  double sigma_value(const Eigen::VectorXd& p) const;
  Eigen::VectorXd sigma_gradient(const Eigen::VectorXd& p) const;
  Eigen::MatrixXd sigma_hessian(const Eigen::VectorXd& p) const;

  double eval(const Expression& e, const Eigen::VectorXd& p) const;

 private:
  int pair_index(int i, int j) const;
  int triple_index(int i, int j, int k) const;

  Expression f_, sigma_;
  CoordinateSystem coords_;
  ParameterBinding params_;
  std::vector<Expression> df_, d2f_, d3f_, dsigma_, d2sigma_;
};

// Tangent 2-plane at a point, spanned by X = sum a_i e_i, Y = sum b_i e_i in
// the orthonormal frame e_i = f d/dx_i of the metric f^-2 delta.
struct PlaneSection {
  Eigen::VectorXd point;
  Eigen::VectorXd a, b;
  void validate() const;  // unit, orthogonal to 1e-12
};

struct ChristoffelTensor {
  int n = 0;
  std::vector<double> v;  // k*n*n + i*n + j

  explicit ChristoffelTensor(int dim) : n(dim), v(dim * dim * dim, 0.0) {}
  double at(int k, int i, int j) const { return v[(k * n + i) * n + j]; }
  double& at(int k, int i, int j) { return v[(k * n + i) * n + j]; }
};

struct RicciData {
  Eigen::MatrixXd coords;  // coordinate components, symmetric
  std::optional<double> normal_normal;
  std::optional<Eigen::VectorXd> tangential;
};

// Gamma^k_ij = delta_ik psi_j + delta_jk psi_i - delta_ij psi_k with
// psi = -ln f.
ChristoffelTensor christoffel_conformal(const ConformalFactor& cf,
                                        const Eigen::VectorXd& p);

// Ric_jk = (n-2)[Hess(sigma)_jk - sigma_j sigma_k]
//          + G_jk [Lap(sigma) + (n-2)|grad sigma|^2],
// Hessian/Laplacian/gradient taken in the metric G = f^-2 delta.
RicciData ricci_coordinates(const ConformalFactor& cf, const Eigen::VectorXd& p);

// Ric(xi, xi) for the G-unit normal f * xi_euclid.
double ricci_normal_normal(const ConformalFactor& cf,
                           const Eigen::VectorXd& xi_euclid,
                           const Eigen::VectorXd& p);

// Tangential projection of Ric(xi), components in the G-orthonormal frame
// obtained by rescaling the shape data's Euclidean-orthonormal frame.
Eigen::VectorXd ricci_tangential(const ConformalFactor& cf,
                                 const ShapeData& shape);

// K(P) = sum (a_i a_j + b_i b_j) f f_ij - sum f_i^2.
double sectional_curvature(const ConformalFactor& cf, const PlaneSection& plane);

struct CurvatureOffender {
  Eigen::VectorXd point, a, b;
  double k = 0.0;
};

struct CurvatureReport {
  int samples = 0;
  std::uint64_t seed = 0;
  double min_k = 0.0, max_k = 0.0, mean_k = 0.0;
  int nonnegative_count = 0;
  std::vector<CurvatureOffender> worst;  // largest K first, at most 5
};

// Seeded scan: for each sample index, draw a point in the box (rejecting the
// singular margin), two directions Gram-Schmidt-orthonormalized in the
// conformal frame, and evaluate K. Per-index random streams make the result
// independent of evaluation order.
CurvatureReport scan_sectional_curvature(const ConformalFactor& cf,
                                         const DomainBox& box, int samples,
                                         std::uint64_t seed);

}  // namespace bhv
