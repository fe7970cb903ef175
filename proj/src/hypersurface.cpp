#include "bhv/hypersurface.hpp"

#include <cmath>

namespace bhv {

namespace {

// Complete a unit normal to a positively oriented orthonormal basis. The
// dropped axis is the one most parallel to the normal, so the construction
// is stable and deterministic.
Eigen::MatrixXd tangent_basis_for(const Eigen::VectorXd& normal) {
  const int n = static_cast<int>(normal.size());
  const int m = n - 1;
  int drop = 0;
  for (int a = 1; a < n; ++a)
    if (std::abs(normal[a]) > std::abs(normal[drop])) drop = a;
  Eigen::MatrixXd basis(m, n);
  int row = 0;
  for (int a = 0; a < n; ++a) {
    if (a == drop) continue;
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n, a);
    v -= v.dot(normal) * normal;
    for (int r = 0; r < row; ++r) v -= v.dot(basis.row(r)) * basis.row(r).transpose();
    const double norm = v.norm();
    if (norm < 1e-12) throw InvalidInput("degenerate hyperplane normal");
    basis.row(row++) = v / norm;
  }
  Eigen::MatrixXd full(n, n);
  full.topRows(m) = basis;
  full.row(m) = normal;
  if (full.determinant() < 0) basis.row(m - 1) *= -1.0;
  return basis;
}

}  // namespace

Hypersurface Hypersurface::hyperplane(Eigen::VectorXd normal, double offset) {
  if (normal.size() < 2) throw InvalidInput("hyperplane needs ambient dimension >= 2");
  const double norm = normal.norm();
  if (norm < 1e-12) throw InvalidInput("hyperplane normal must be nonzero");
  normal /= norm;
  AffineHyperplane plane;
  plane.tangent_basis = tangent_basis_for(normal);
  plane.normal = std::move(normal);
  plane.offset = offset;
  return Hypersurface(std::move(plane));
}

Hypersurface Hypersurface::patch(std::vector<Expression> maps, int chart_dim,
                                 DomainBox parameter_box, ParameterBinding params) {
  if (chart_dim < 1) throw InvalidInput("patch chart dimension must be >= 1");
  if (static_cast<int>(maps.size()) != chart_dim + 1)
    throw InvalidInput("patch must map into R^{m+1} (codimension one)");
  if (chart_dim > 3)
    throw InvalidInput("patch charts are supported up to dimension 3");
  parameter_box.validate();
  if (parameter_box.dim() != chart_dim)
    throw InvalidInput("patch parameter box dimension mismatch");
  ParametrizedPatch patch;
  patch.maps = std::move(maps);
  patch.chart_dim = chart_dim;
  patch.parameter_box = std::move(parameter_box);
  patch.params = std::move(params);
  return Hypersurface(std::move(patch));
}

int Hypersurface::surface_dim() const {
  return is_hyperplane() ? static_cast<int>(plane().normal.size()) - 1
                         : patch_data().chart_dim;
}

int Hypersurface::ambient_dim() const { return surface_dim() + 1; }

// ---------------------------------------------------------------------------
// SurfaceGeometry

namespace {

// Symbolic determinant of a k x k matrix of expressions (k <= 3), entries
// fetched through `at`.
template <typename At>
Expression sym_det(int k, const At& at) {
  using E = Expression;
  if (k == 1) return at(0, 0);
  if (k == 2)
    return E::sub(E::mul(at(0, 0), at(1, 1)), E::mul(at(0, 1), at(1, 0)));
  if (k == 3) {
    Expression d;
    d = E::mul(at(0, 0), E::sub(E::mul(at(1, 1), at(2, 2)), E::mul(at(1, 2), at(2, 1))));
    d = E::sub(d, E::mul(at(0, 1), E::sub(E::mul(at(1, 0), at(2, 2)),
                                          E::mul(at(1, 2), at(2, 0)))));
    d = E::add(d, E::mul(at(0, 2), E::sub(E::mul(at(1, 0), at(2, 1)),
                                          E::mul(at(1, 1), at(2, 0)))));
    return d;
  }
  throw InvalidInput("symbolic determinant limited to 3x3");
}

}  // namespace

SurfaceGeometry::SurfaceGeometry(const Hypersurface& hs) : hs_(hs) {
  using E = Expression;
  m_ = hs.surface_dim();
  n_ = hs.ambient_dim();

  if (hs.is_hyperplane()) {
    const auto& plane = hs.plane();
    const Eigen::VectorXd base = plane.offset * plane.normal;
    map_.reserve(n_);
    for (int a = 0; a < n_; ++a) {
      Expression x = E::number(base[a]);
      for (int i = 0; i < m_; ++i)
        x = E::add(x, E::mul(E::number(plane.tangent_basis(i, a)),
                             E::coordinate(i)));
      map_.push_back(x.simplify());
    }
    jac_.assign(m_ * n_, E::number(0.0));
    for (int i = 0; i < m_; ++i)
      for (int a = 0; a < n_; ++a)
        jac_[i * n_ + a] = E::number(plane.tangent_basis(i, a));
    hess_map_.assign(m_ * (m_ + 1) / 2 * n_, E::number(0.0));
    for (int i = 0; i < m_; ++i)
      for (int j = i; j < m_; ++j) g_.push_back(E::number(i == j ? 1.0 : 0.0));
    g_inv_ = g_;
    g_det_ = E::number(1.0);
    gamma_.assign(m_ * m_ * m_, E::number(0.0));
    normal_.reserve(n_);
    for (int a = 0; a < n_; ++a) normal_.push_back(E::number(plane.normal[a]));
    second_.assign(m_ * (m_ + 1) / 2, E::number(0.0));
    shape_.assign(m_ * m_, E::number(0.0));
    mean_curvature_ = E::number(0.0);
    shape_norm2_ = E::number(0.0);
    return;
  }

  const auto& patch = hs.patch_data();
  params_ = patch.params;
  map_ = patch.maps;
  for (auto& x : map_) x = x.simplify();

  jac_.resize(m_ * n_);
  for (int i = 0; i < m_; ++i)
    for (int a = 0; a < n_; ++a)
      jac_[i * n_ + a] = map_[a].differentiate(i).simplify();

  hess_map_.resize(m_ * (m_ + 1) / 2 * n_);
  for (int i = 0; i < m_; ++i)
    for (int j = i; j < m_; ++j)
      for (int a = 0; a < n_; ++a)
        hess_map_[idx(i, j) * n_ + a] =
            jac_[i * n_ + a].differentiate(j).simplify();

  for (int i = 0; i < m_; ++i)
    for (int j = i; j < m_; ++j) {
      Expression s = E::number(0.0);
      for (int a = 0; a < n_; ++a)
        s = E::add(s, E::mul(jac_[i * n_ + a], jac_[j * n_ + a]));
      g_.push_back(s.simplify());
    }

  const auto g_at = [&](int i, int j) { return metric(i, j); };
  g_det_ = sym_det(m_, g_at).simplify();

  // inverse through the adjugate (m <= 3)
  g_inv_.resize(m_ * (m_ + 1) / 2);
  if (m_ == 1) {
    g_inv_[0] = E::div(E::number(1.0), metric(0, 0)).simplify();
  } else {
    for (int i = 0; i < m_; ++i)
      for (int j = i; j < m_; ++j) {
        // cofactor C_ji = (-1)^{i+j} det(g with row j, column i removed)
        const auto minor_at = [&](int r, int c) {
          int rr = r >= j ? r + 1 : r;
          int cc = c >= i ? c + 1 : c;
          return metric(rr, cc);
        };
        Expression cof = sym_det(m_ - 1, minor_at);
        if ((i + j) % 2 == 1) cof = E::neg(cof);
        g_inv_[idx(i, j)] = E::div(cof, g_det_).simplify();
      }
  }

  // Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
  std::vector<Expression> dg(m_ * (m_ + 1) / 2 * m_);
  for (int i = 0; i < m_; ++i)
    for (int j = i; j < m_; ++j)
      for (int l = 0; l < m_; ++l)
        dg[idx(i, j) * m_ + l] = metric(i, j).differentiate(l).simplify();
  const auto dmetric = [&](int i, int j, int l) { return dg[idx(i, j) * m_ + l]; };
  gamma_.resize(m_ * m_ * m_);
  for (int k = 0; k < m_; ++k)
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) {
        Expression s = E::number(0.0);
        for (int l = 0; l < m_; ++l) {
          Expression term = E::add(dmetric(j, l, i), dmetric(i, l, j));
          term = E::sub(term, dmetric(i, j, l));
          s = E::add(s, E::mul(metric_inverse(k, l), term));
        }
        gamma_[(k * m_ + i) * m_ + j] = E::mul(E::number(0.5), s).simplify();
      }

  // Unit normal from the generalized cross product: w_a = det[J; e_a].
  std::vector<Expression> w(n_);
  for (int a = 0; a < n_; ++a) {
    const auto minor_at = [&](int r, int c) {
      int cc = c >= a ? c + 1 : c;
      return jac_[r * n_ + cc];
    };
    Expression minor = sym_det(m_, minor_at);
    if ((m_ + a) % 2 == 1) minor = E::neg(minor);
    w[a] = minor.simplify();
  }
  Expression w_norm2 = E::number(0.0);
  for (int a = 0; a < n_; ++a) w_norm2 = E::add(w_norm2, E::mul(w[a], w[a]));
  const Expression w_norm = E::apply(UnaryFunc::Sqrt, w_norm2.simplify());
  normal_.resize(n_);
  for (int a = 0; a < n_; ++a) normal_[a] = E::div(w[a], w_norm).simplify();

  second_.resize(m_ * (m_ + 1) / 2);
  for (int i = 0; i < m_; ++i)
    for (int j = i; j < m_; ++j) {
      Expression s = E::number(0.0);
      for (int a = 0; a < n_; ++a)
        s = E::add(s, E::mul(hess_map_[idx(i, j) * n_ + a], normal_[a]));
      second_[idx(i, j)] = s.simplify();
    }

  shape_.resize(m_ * m_);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) {
      Expression s = E::number(0.0);
      for (int k = 0; k < m_; ++k)
        s = E::add(s, E::mul(metric_inverse(i, k), second_[idx(k, j)]));
      shape_[i * m_ + j] = s.simplify();
    }

  Expression trace = E::number(0.0);
  for (int i = 0; i < m_; ++i) trace = E::add(trace, shape_[i * m_ + i]);
  mean_curvature_ = E::div(trace, E::number(double(m_))).simplify();

  Expression norm2 = E::number(0.0);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j)
      norm2 = E::add(norm2, E::mul(shape_[i * m_ + j], shape_[j * m_ + i]));
  shape_norm2_ = norm2.simplify();
}

Expression SurfaceGeometry::restrict_field(const Expression& ambient) const {
  return ambient.substitute_coordinates(map_).simplify();
}

Expression SurfaceGeometry::laplace_beltrami_expr(const Expression& s) const {
  using E = Expression;
  std::vector<Expression> ds(m_);
  for (int i = 0; i < m_; ++i) ds[i] = s.differentiate(i).simplify();
  Expression out = E::number(0.0);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) {
      Expression hess = ds[i].differentiate(j).simplify();
      for (int k = 0; k < m_; ++k)
        hess = E::sub(hess, E::mul(gamma_[(k * m_ + i) * m_ + j], ds[k]));
      out = E::add(out, E::mul(metric_inverse(i, j), hess));
    }
  return out.simplify();
}

Expression SurfaceGeometry::gradient_inner_expr(const Expression& s,
                                                const Expression& t) const {
  using E = Expression;
  Expression out = E::number(0.0);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j)
      out = E::add(out, E::mul(metric_inverse(i, j),
                               E::mul(s.differentiate(i), t.differentiate(j))));
  return out.simplify();
}

std::vector<Expression> SurfaceGeometry::gradient_components_expr(
    const Expression& s) const {
  using E = Expression;
  std::vector<Expression> ds(m_), out(m_);
  for (int j = 0; j < m_; ++j) ds[j] = s.differentiate(j).simplify();
  for (int i = 0; i < m_; ++i) {
    Expression c = E::number(0.0);
    for (int j = 0; j < m_; ++j)
      c = E::add(c, E::mul(metric_inverse(i, j), ds[j]));
    out[i] = c.simplify();
  }
  return out;
}

Expression SurfaceGeometry::normal_derivative_expr(const ConformalFactor& cf) const {
  using E = Expression;
  if (cf.ambient_dim() != n_)
    throw InvalidInput("conformal factor dimension mismatch");
  Expression out = E::number(0.0);
  for (int a = 0; a < n_; ++a)
    out = E::add(out, E::mul(normal_[a], restrict_field(cf.partial(a))));
  return out.simplify();
}

double SurfaceGeometry::eval(const Expression& e, const Eigen::VectorXd& u,
                             const ParameterBinding& extra) const {
  const ParameterBinding merged = params_.merged_with(extra);
  return e.evaluate(std::span<const double>(u.data(), u.size()), merged);
}

Eigen::VectorXd SurfaceGeometry::embed(const Eigen::VectorXd& u) const {
  if (u.size() != m_) throw InvalidInput("chart point dimension mismatch");
  Eigen::VectorXd p(n_);
  for (int a = 0; a < n_; ++a) p[a] = eval(map_[a], u, {});
  return p;
}

ShapeData SurfaceGeometry::shape_at(const Eigen::VectorXd& u) const {
  if (u.size() != m_) throw InvalidInput("chart point dimension mismatch");
  ShapeData out;
  out.chart_point = u;
  out.ambient_point = embed(u);

  out.tangents.resize(m_, n_);
  for (int i = 0; i < m_; ++i)
    for (int a = 0; a < n_; ++a)
      out.tangents(i, a) = eval(jac_[i * n_ + a], u, {});

  if (!hs_.is_hyperplane()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.tangents);
    if (svd.singularValues()(m_ - 1) <= 1e-9)
      throw DomainError("rank-deficient parametrization");
  }

  out.first.metric = out.tangents * out.tangents.transpose();
  out.first.det = out.first.metric.determinant();
  out.first.inverse = out.first.metric.inverse();

  // modified Gram-Schmidt; R holds frame = R * tangents
  out.frame.resize(m_, n_);
  out.frame_coeffs = Eigen::MatrixXd::Zero(m_, m_);
  Eigen::MatrixXd coeff = Eigen::MatrixXd::Identity(m_, m_);
  for (int i = 0; i < m_; ++i) {
    Eigen::VectorXd v = out.tangents.row(i);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m_);
    c[i] = 1.0;
    for (int r = 0; r < i; ++r) {
      const double proj = v.dot(out.frame.row(r));
      v -= proj * out.frame.row(r).transpose();
      c -= proj * out.frame_coeffs.row(r).transpose();
    }
    const double norm = v.norm();
    if (norm < 1e-12) throw DomainError("rank-deficient parametrization");
    out.frame.row(i) = v / norm;
    out.frame_coeffs.row(i) = c / norm;
  }

  out.normal.resize(n_);
  for (int a = 0; a < n_; ++a) out.normal[a] = eval(normal_[a], u, {});

  out.second.resize(m_, m_);
  for (int i = 0; i < m_; ++i)
    for (int j = i; j < m_; ++j) {
      double b = eval(second_[idx(i, j)], u, {});
      out.second(i, j) = out.second(j, i) = b;
    }
  out.shape = out.first.inverse * out.second;
  out.shape_frame = out.frame_coeffs * out.second * out.frame_coeffs.transpose();
  out.mean_curvature = out.shape.trace() / m_;
  out.shape_norm2 = (out.shape * out.shape).trace();
  return out;
}

// ---------------------------------------------------------------------------
// Pointwise operations

FirstFundamental induced_metric(const Hypersurface& hs, const Eigen::VectorXd& u) {
  return SurfaceGeometry(hs).shape_at(u).first;
}

Eigen::VectorXd unit_normal(const Hypersurface& hs, const Eigen::VectorXd& u) {
  return SurfaceGeometry(hs).shape_at(u).normal;
}

ShapeData shape_operator(const Hypersurface& hs, const Eigen::VectorXd& u) {
  return SurfaceGeometry(hs).shape_at(u);
}

double conformal_mean_curvature(const ConformalFactor& cf, const ShapeData& shape) {
  const double f = cf.value(shape.ambient_point);
  const double xi_f = shape.normal.dot(cf.gradient(shape.ambient_point));
  return f * shape.mean_curvature + xi_f;
}

double conformal_shape_norm(const ConformalFactor& cf, const ShapeData& shape) {
  const int m = static_cast<int>(shape.tangents.rows());
  const double f = cf.value(shape.ambient_point);
  const double xi_f = shape.normal.dot(cf.gradient(shape.ambient_point));
  return f * f * shape.shape_norm2 +
         2.0 * m * f * xi_f * shape.mean_curvature + m * xi_f * xi_f;
}

Eigen::VectorXd tangent_gradient(const SurfaceGeometry& geom, const AmbientField& s,
                                 const Eigen::VectorXd& u, const ParameterBinding& extra) {
  return tangent_gradient(geom, ChartField{geom.restrict_field(s.e)}, u, extra);
}

Eigen::VectorXd tangent_gradient(const SurfaceGeometry& geom, const ChartField& s,
                                 const Eigen::VectorXd& u, const ParameterBinding& extra) {
  const auto comps = geom.gradient_components_expr(s.e);
  Eigen::VectorXd out(geom.chart_dim());
  for (int i = 0; i < geom.chart_dim(); ++i) out[i] = geom.eval(comps[i], u, extra);
  return out;
}

double laplace_beltrami(const SurfaceGeometry& geom, const AmbientField& s,
                        const Eigen::VectorXd& u, const ParameterBinding& extra) {
  return laplace_beltrami(geom, ChartField{geom.restrict_field(s.e)}, u, extra);
}

double laplace_beltrami(const SurfaceGeometry& geom, const ChartField& s,
                        const Eigen::VectorXd& u, const ParameterBinding& extra) {
  return geom.eval(geom.laplace_beltrami_expr(s.e), u, extra);
}

}  // namespace bhv
