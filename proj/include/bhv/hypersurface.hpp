#pragma once

#include <Eigen/Dense>
#include <memory>
#include <variant>
#include <vector>

#include "bhv/expr.hpp"
#include "bhv/geometry.hpp"

namespace bhv {

// {x : normal . x = offset} with a fixed orthonormal chart
// X(u) = offset * normal + sum_i u_i tau_i, oriented so det[tau; normal] > 0.
struct AffineHyperplane {
  Eigen::VectorXd normal;        // Euclidean unit
  double offset = 0.0;
  Eigen::MatrixXd tangent_basis; // m x n rows, orthonormal
};

// Codimension-one patch X: R^m -> R^n given by n chart expressions.
struct ParametrizedPatch {
  std::vector<Expression> maps;  // over chart coordinates u1..um
  int chart_dim = 0;
  DomainBox parameter_box;
  ParameterBinding params;
};

class Hypersurface {
 public:
  static Hypersurface hyperplane(Eigen::VectorXd normal, double offset);
  static Hypersurface patch(std::vector<Expression> maps, int chart_dim,
                            DomainBox parameter_box,
                            ParameterBinding params = {});

  bool is_hyperplane() const { return std::holds_alternative<AffineHyperplane>(data_); }
  const AffineHyperplane& plane() const { return std::get<AffineHyperplane>(data_); }
  const ParametrizedPatch& patch_data() const { return std::get<ParametrizedPatch>(data_); }

  int surface_dim() const;  // m
  int ambient_dim() const;  // n = m + 1

 private:
  explicit Hypersurface(AffineHyperplane plane) : data_(std::move(plane)) {}
  explicit Hypersurface(ParametrizedPatch patch) : data_(std::move(patch)) {}
  std::variant<AffineHyperplane, ParametrizedPatch> data_;
};

struct FirstFundamental {
  Eigen::MatrixXd metric;   // g_ij = dX_i . dX_j
  Eigen::MatrixXd inverse;
  double det = 0.0;
};

// Pointwise extrinsic data of a hypersurface in the Euclidean metric.
struct ShapeData {
  Eigen::VectorXd chart_point;    // u
  Eigen::VectorXd ambient_point;  // X(u)
  Eigen::VectorXd normal;         // xi, Euclidean unit, det[tangents; xi] > 0
  Eigen::MatrixXd tangents;       // m x n rows d_i X (chart basis)
  Eigen::MatrixXd frame;          // m x n rows, Euclidean-orthonormal
  Eigen::MatrixXd frame_coeffs;   // R with frame = R * tangents
  FirstFundamental first;
  Eigen::MatrixXd second;         // b_ij = (d_i d_j X) . xi
  Eigen::MatrixXd shape;          // A = g^-1 b (chart basis)
  Eigen::MatrixXd shape_frame;    // R b R^T: the operator in the frame
  double mean_curvature = 0.0;    // H = tr(A)/m
  double shape_norm2 = 0.0;       // |A|^2 = tr(A A)
};

// Wrappers naming the coordinate system a scalar lives in.
struct AmbientField { Expression e; };
struct ChartField { Expression e; };

// Symbolic chart calculus for one hypersurface: the chart map, first and
// second fundamental forms, unit normal, shape operator, Laplace-Beltrami and
// tangential gradients, all as expression trees over the chart coordinates.
// Hyperplanes use their orthonormal affine chart (identity metric);
// parametrized patches are supported for chart dimension <= 3, where the
// metric inverse has a closed form.
class SurfaceGeometry {
 public:
  explicit SurfaceGeometry(const Hypersurface& hs);

  int chart_dim() const { return m_; }
  int ambient_dim() const { return n_; }
  const Hypersurface& hypersurface() const { return hs_; }
  const ParameterBinding& params() const { return params_; }

  const std::vector<Expression>& chart_map() const { return map_; }
  Expression restrict_field(const Expression& ambient) const;
  const Expression& metric(int i, int j) const { return g_.at(idx(i, j)); }
  const Expression& metric_inverse(int i, int j) const { return g_inv_.at(idx(i, j)); }
  const Expression& metric_det() const { return g_det_; }
  const Expression& normal_component(int a) const { return normal_.at(a); }
  const Expression& mean_curvature_expr() const { return mean_curvature_; }
  const Expression& shape_norm2_expr() const { return shape_norm2_; }
  const Expression& shape_entry(int i, int j) const { return shape_.at(i * m_ + j); }

  // Laplace-Beltrami of a chart scalar: g^{ij} (d_i d_j s - Gamma^k_ij d_k s).
  Expression laplace_beltrami_expr(const Expression& chart_scalar) const;
  // <grad s, grad t>_g = g^{ij} d_i s d_j t.
  Expression gradient_inner_expr(const Expression& s, const Expression& t) const;
  // Chart-coordinate components of grad_g s.
  std::vector<Expression> gradient_components_expr(const Expression& s) const;
  // Normal derivative of the ambient field f: sum_a N_a (d_a f composed with X).
  Expression normal_derivative_expr(const ConformalFactor& cf) const;

  double eval(const Expression& chart_expr, const Eigen::VectorXd& u,
              const ParameterBinding& extra) const;
  Eigen::VectorXd embed(const Eigen::VectorXd& u) const;
  ShapeData shape_at(const Eigen::VectorXd& u) const;

 private:
  int idx(int i, int j) const { return i <= j ? i * m_ - i * (i - 1) / 2 + (j - i)
                                              : idx(j, i); }
  Hypersurface hs_;
  ParameterBinding params_;
  int m_ = 0, n_ = 0;
  std::vector<Expression> map_;          // X_a
  std::vector<Expression> jac_;          // d_i X_a at i*n + a
  std::vector<Expression> hess_map_;     // d_i d_j X_a, packed
  std::vector<Expression> g_, g_inv_;    // packed symmetric
  Expression g_det_;
  std::vector<Expression> gamma_;        // Gamma^k_ij at (k*m + i)*m + j
  std::vector<Expression> normal_;       // N_a
  std::vector<Expression> second_;       // b_ij packed symmetric
  std::vector<Expression> shape_;        // A^i_j dense m*m
  Expression mean_curvature_, shape_norm2_;
};

// -- Pointwise operations ---------------------------------------------------

FirstFundamental induced_metric(const Hypersurface& hs, const Eigen::VectorXd& u);
Eigen::VectorXd unit_normal(const Hypersurface& hs, const Eigen::VectorXd& u);
ShapeData shape_operator(const Hypersurface& hs, const Eigen::VectorXd& u);

// H_bar = f H + xi(f): mean curvature of the hypersurface in the metric
// f^-2 delta, from its Euclidean shape data.
double conformal_mean_curvature(const ConformalFactor& cf, const ShapeData& shape);

// |A_bar|^2 = f^2 |A|^2 + 2 m f xi(f) H + m xi(f)^2.
double conformal_shape_norm(const ConformalFactor& cf, const ShapeData& shape);

// Tangential gradient (chart-coordinate components) and Laplace-Beltrami of
// a scalar, with the caller stating whether the scalar lives on the ambient
// space or on the chart.
Eigen::VectorXd tangent_gradient(const SurfaceGeometry& geom, const AmbientField& s,
                                 const Eigen::VectorXd& u, const ParameterBinding& extra = {});
Eigen::VectorXd tangent_gradient(const SurfaceGeometry& geom, const ChartField& s,
                                 const Eigen::VectorXd& u, const ParameterBinding& extra = {});
double laplace_beltrami(const SurfaceGeometry& geom, const AmbientField& s,
                        const Eigen::VectorXd& u, const ParameterBinding& extra = {});
double laplace_beltrami(const SurfaceGeometry& geom, const ChartField& s,
                        const Eigen::VectorXd& u, const ParameterBinding& extra = {});

}  // namespace bhv
