#include "bhv/biharmonic.hpp"

#include <algorithm>
#include <cmath>

#include "bhv/random.hpp"

namespace bhv {

namespace {

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

double vec_inf(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

Eigen::VectorXd frame_components(const ShapeData& shape,
                                 const Eigen::VectorXd& chart_vec) {
  // chart coordinate components -> components along the orthonormal frame
  const Eigen::VectorXd ambient = shape.tangents.transpose() * chart_vec;
  return shape.frame * ambient;
}

}  // namespace

double BiharmonicResidual::magnitude() const {
  return std::max(std::abs(normal), vec_inf(tangential));
}

double BiharmonicResidual::relative() const {
  return scale > 0.0 ? magnitude() / scale : 0.0;
}

bool BiharmonicResidual::passes(const Tolerances& tol, bool numeric_path) const {
  const double rel = numeric_path ? tol.rel_numeric : tol.rel;
  return magnitude() <= tol.abs + rel * scale;
}

// ---------------------------------------------------------------------------
// Generic equation

BiharmonicResidual residual_generic(const ChartField& mean_curvature_field,
                                    const ShapeData& shape, const RicciData& ric,
                                    const SurfaceGeometry& geom,
                                    const Eigen::VectorXd& u,
                                    const ParameterBinding& extra) {
  if (!ric.normal_normal)
    throw InvalidInput("generic residual needs the Ric(xi, xi) contraction");
  const int m = geom.chart_dim();
  const Eigen::VectorXd ric_t =
      ric.tangential ? *ric.tangential : Eigen::VectorXd::Zero(m);
  if (ric_t.size() != m)
    throw InvalidInput("tangential Ricci contraction has wrong dimension");

  const Expression& h = mean_curvature_field.e;
  const double h_val = geom.eval(h, u, extra);
  const double lap_h = geom.eval(geom.laplace_beltrami_expr(h), u, extra);
  const auto grad_exprs = geom.gradient_components_expr(h);
  Eigen::VectorXd grad_h(m);
  for (int i = 0; i < m; ++i) grad_h[i] = geom.eval(grad_exprs[i], u, extra);

  BiharmonicResidual out;
  out.point = shape.ambient_point;
  out.equation = "generic";
  const double t1 = lap_h;
  const double t2 = -h_val * shape.shape_norm2;
  const double t3 = h_val * *ric.normal_normal;
  out.normal = (t1 + t2 + t3) * sign_of(h_val);

  const Eigen::VectorXd v1 = 2.0 * (shape.shape * grad_h);
  const Eigen::VectorXd v2 = m * h_val * grad_h;  // (m/2) grad H^2
  const Eigen::VectorXd v3 = -2.0 * h_val * ric_t;
  const Eigen::VectorXd tang_chart = v1 + v2 + v3;
  out.tangential = frame_components(shape, tang_chart);
  out.tangential_ambient = shape.tangents.transpose() * tang_chart;
  out.scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3), vec_inf(v1),
                        vec_inf(v2), vec_inf(v3)});
  return out;
}

// ---------------------------------------------------------------------------
// Conformal ambient metric

ConformalResidual::ConformalResidual(const ConformalFactor& cf,
                                     const Hypersurface& hs)
    : cf_(cf), geom_(hs) {
  if (cf.ambient_dim() != hs.ambient_dim())
    throw InvalidInput("conformal factor and hypersurface dimension mismatch");
  f_chart_ = geom_.restrict_field(cf.factor());
  const Expression xi_f = geom_.normal_derivative_expr(cf);
  h_bar_ = Expression::add(
               Expression::mul(f_chart_, geom_.mean_curvature_expr()), xi_f)
               .simplify();
  lap_h_bar_ = geom_.laplace_beltrami_expr(h_bar_);
  inner_f_h_ = geom_.gradient_inner_expr(f_chart_, h_bar_);
  dh_bar_.resize(geom_.chart_dim());
  for (int j = 0; j < geom_.chart_dim(); ++j)
    dh_bar_[j] = h_bar_.differentiate(j).simplify();
}

BiharmonicResidual ConformalResidual::at(const Eigen::VectorXd& u) const {
  const int m = geom_.chart_dim();
  const ParameterBinding& params = cf_.params();
  const ShapeData shape = geom_.shape_at(u);
  const Eigen::VectorXd& p = shape.ambient_point;
  const double f = cf_.value(p);
  const double h_bar = geom_.eval(h_bar_, u, params);
  const double xi_f = shape.normal.dot(cf_.gradient(p));

  // Laplace-Beltrami in the induced conformal metric f^-2 g
  const double lap_g = geom_.eval(lap_h_bar_, u, params);
  const double inner = geom_.eval(inner_f_h_, u, params);
  const double lap_bar = f * f * lap_g - (m - 2) * f * inner;

  const double norm2_bar = conformal_shape_norm(cf_, shape);
  const double ric_nn = ricci_normal_normal(cf_, shape.normal, p);

  BiharmonicResidual out;
  out.point = p;
  out.equation = "conformal";
  const double t1 = lap_bar;
  const double t2 = -h_bar * norm2_bar;
  const double t3 = h_bar * ric_nn;
  out.normal = (t1 + t2 + t3) * sign_of(h_bar);

  // gradient of h_bar along the rescaled frame: e_bar_i = f e_i
  Eigen::VectorXd dh_chart(m);
  for (int j = 0; j < m; ++j) dh_chart[j] = geom_.eval(dh_bar_[j], u, params);
  const Eigen::VectorXd grad_frame =
      f * (shape.frame_coeffs * dh_chart);  // e_i(h), i.e. f * frame derivative
  const Eigen::MatrixXd a_bar =
      f * shape.shape_frame +
      xi_f * Eigen::MatrixXd::Identity(m, m);
  const Eigen::VectorXd ric_t = ricci_tangential(cf_, shape);

  const Eigen::VectorXd v1 = 2.0 * (a_bar * grad_frame);
  const Eigen::VectorXd v2 = m * h_bar * grad_frame;
  const Eigen::VectorXd v3 = -2.0 * h_bar * ric_t;
  out.tangential = v1 + v2 + v3;
  out.tangential_ambient = shape.frame.transpose() * out.tangential;
  out.scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3), vec_inf(v1),
                        vec_inf(v2), vec_inf(v3)});
  return out;
}

// ---------------------------------------------------------------------------
// Minimal Euclidean base

MinimalBaseResidual::MinimalBaseResidual(const ConformalFactor& cf,
                                         const Hypersurface& hs)
    : cf_(cf), geom_(hs) {
  if (cf.ambient_dim() != hs.ambient_dim())
    throw InvalidInput("conformal factor and hypersurface dimension mismatch");
  f_chart_ = geom_.restrict_field(cf.factor());
  xi_f_ = geom_.normal_derivative_expr(cf);
  product_ = Expression::mul(f_chart_, xi_f_).simplify();
  lap_product_ = geom_.laplace_beltrami_expr(product_);
  inner_ = geom_.gradient_inner_expr(f_chart_, product_);
  grad_xi_f_ = geom_.gradient_components_expr(xi_f_);
  grad_f_ = geom_.gradient_components_expr(f_chart_);
}

BiharmonicResidual MinimalBaseResidual::at(const Eigen::VectorXd& u) const {
  const int m = geom_.chart_dim();
  const ParameterBinding& params = cf_.params();
  const ShapeData shape = geom_.shape_at(u);
  const Eigen::VectorXd& p = shape.ambient_point;

  const double h_abs = std::abs(shape.mean_curvature);
  if (h_abs > 1e-9 * (1.0 + std::sqrt(std::abs(shape.shape_norm2))))
    throw InvalidInput("minimal-base residual requires a Euclidean-minimal hypersurface");

  const double f = cf_.value(p);
  const double xi_f = geom_.eval(xi_f_, u, params);
  const Eigen::VectorXd grad_f_amb = cf_.gradient(p);
  const Eigen::MatrixXd hess_f = cf_.hessian(p);

  const double t1 = f * geom_.eval(lap_product_, u, params);
  const double t2 = -double(m) * geom_.eval(inner_, u, params);
  const double t3 = -f * f * xi_f * shape.shape_norm2;
  const double t4 = -2.0 * m * xi_f * xi_f * xi_f;
  const double t5 = m * f * xi_f * shape.normal.dot(hess_f * shape.normal);

  BiharmonicResidual out;
  out.point = p;
  out.equation = "minimal_base";
  out.normal = (t1 + t2 + t3 + t4 + t5) * sign_of(xi_f);

  Eigen::VectorXd gxf(m), gf(m);
  for (int i = 0; i < m; ++i) {
    gxf[i] = geom_.eval(grad_xi_f_[i], u, params);
    gf[i] = geom_.eval(grad_f_[i], u, params);
  }
  const Eigen::VectorXd v1 = 2.0 * f * (shape.shape * gxf);
  const Eigen::VectorXd v2 = -2.0 * (m - 1) * xi_f * (shape.shape * gf);
  const Eigen::VectorXd v3 = (4.0 - m) * xi_f * gxf;
  const Eigen::VectorXd tang_chart = v1 + v2 + v3;
  out.tangential = frame_components(shape, tang_chart);
  out.tangential_ambient = shape.tangents.transpose() * tang_chart;

  const auto term_inf = [&](const Eigen::VectorXd& v) {
    return vec_inf(shape.tangents.transpose() * v);
  };
  out.scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4),
                        std::abs(t5), term_inf(v1), term_inf(v2), term_inf(v3)});
  return out;
}

// ---------------------------------------------------------------------------
// Axis-aligned hyperplane, m = 4

BiharmonicResidual residual_axis_hyperplane_m4(const ConformalFactor& cf,
                                               double offset,
                                               const Eigen::VectorXd& point) {
  constexpr int m = 4;
  if (cf.ambient_dim() != m + 1)
    throw InvalidInput("axis hyperplane equation requires ambient dimension 5");
  if (point.size() != m + 1 || std::abs(point[m] - offset) > 1e-9)
    throw InvalidInput("point must lie on the hyperplane z = c");

  const double f = cf.value(point);
  const Eigen::VectorXd grad = cf.gradient(point);
  const Eigen::MatrixXd hess = cf.hessian(point);
  const double fz = grad[m];

  BiharmonicResidual out;
  out.point = point;
  out.equation = "axis_m4";
  double sum = 0.0, scale = 0.0;
  const auto push = [&](double term) {
    sum += term;
    scale = std::max(scale, std::abs(term));
  };
  for (int i = 0; i < m; ++i) {
    push(f * f * cf.third(i, i, m, point));
    push(-2.0 * f * grad[i] * hess(i, m));
    push(f * fz * hess(i, i));
    push(-4.0 * fz * grad[i] * grad[i]);
  }
  push(4.0 * fz * f * hess(m, m));
  push(-8.0 * fz * fz * fz);
  out.normal = sum;
  out.scale = scale;

  // (m-4) f_z f_zi: identically zero here, reported for completeness
  out.tangential = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i)
    out.tangential[i] = (m - 4) * fz * hess(m, i);
  out.tangential_ambient = Eigen::VectorXd::Zero(m + 1);
  for (int i = 0; i < m; ++i) out.tangential_ambient[i] = out.tangential[i];
  return out;
}

// ---------------------------------------------------------------------------
// Separable CMC hyperplane

BiharmonicResidual residual_separable_cmc(const Expression& p_field,
                                          const Expression& q_field,
                                          const CoordinateSystem& coords,
                                          const ParameterBinding& params,
                                          const Eigen::VectorXd& point) {
  const int n = coords.size();
  const int m = n - 1;
  if (point.size() != n) throw InvalidInput("point dimension mismatch");
  if (p_field.depends_on_coordinate(m))
    throw InvalidInput("p part must not depend on z");
  for (int i = 0; i < m; ++i)
    if (q_field.depends_on_coordinate(i))
      throw InvalidInput("q part must depend on z only");

  const std::span<const double> pt(point.data(), point.size());
  const auto ev = [&](const Expression& e) { return e.evaluate(pt, params); };

  const double p_val = ev(p_field);
  const double q_val = ev(q_field);
  double sum_pii = 0.0, sum_pi2 = 0.0;
  for (int i = 0; i < m; ++i) {
    const Expression dp = p_field.differentiate(i);
    sum_pi2 += std::pow(ev(dp), 2);
    sum_pii += ev(dp.differentiate(i));
  }
  const Expression dq = q_field.differentiate(m);
  const double qz = ev(dq);
  const double qzz = ev(dq.differentiate(m));

  BiharmonicResidual out;
  out.point = point;
  out.equation = "separable_cmc";
  double sum = 0.0, scale = 0.0;
  const auto push = [&](double term) {
    sum += term;
    scale = std::max(scale, std::abs(term));
  };
  push(p_val * sum_pii);
  push(-double(m) * sum_pi2);
  push(m * q_val * qzz);
  push(-2.0 * m * qz * qz);
  push(m * p_val * qzz);
  push(q_val * sum_pii);
  out.normal = sum;
  out.scale = scale;
  out.tangential = Eigen::VectorXd::Zero(m);
  out.tangential_ambient = Eigen::VectorXd::Zero(n);
  return out;
}

// ---------------------------------------------------------------------------
// Slanted hyperplane with z-dependent factor

BiharmonicResidual residual_slanted_fz(const Expression& f_of_z,
                                       const CoordinateSystem& coords,
                                       const ParameterBinding& params,
                                       const Eigen::VectorXd& slope,
                                       const Eigen::VectorXd& point) {
  const int n = coords.size();
  const int m = n - 1;
  if (point.size() != n) throw InvalidInput("point dimension mismatch");
  if (slope.size() != m) throw InvalidInput("slope vector must have length m");
  for (int i = 0; i < m; ++i)
    if (f_of_z.depends_on_coordinate(i))
      throw InvalidInput("factor must depend on z only");

  const std::span<const double> pt(point.data(), point.size());
  const auto ev = [&](const Expression& e) { return e.evaluate(pt, params); };
  const double f = ev(f_of_z);
  const Expression d1 = f_of_z.differentiate(m);
  const Expression d2 = d1.differentiate(m);
  const Expression d3 = d2.differentiate(m);
  const double f1 = ev(d1), f2 = ev(d2), f3 = ev(d3);
  const double s = slope.squaredNorm();

  BiharmonicResidual out;
  out.point = point;
  out.equation = "slanted_fz";
  const double t1 = s * f * f * f3;
  const double t2 = (4.0 - s) * f * f1 * f2;
  const double t3 = -4.0 * (2.0 + s) * f1 * f1 * f1;
  out.normal = t1 + t2 + t3;
  out.scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3)});
  out.tangential = Eigen::VectorXd::Zero(m);
  out.tangential_ambient = Eigen::VectorXd::Zero(n);
  return out;
}

// ---------------------------------------------------------------------------
// CMC conditions

CmcResidual::CmcResidual(const ConformalFactor& cf, const Hypersurface& hs)
    : cf_(cf), geom_(hs) {
  f_chart_ = geom_.restrict_field(cf.factor());
  h_bar_ = Expression::add(Expression::mul(f_chart_, geom_.mean_curvature_expr()),
                           geom_.normal_derivative_expr(cf))
               .simplify();
}

CmcResult CmcResidual::at(const Eigen::VectorXd& u, const Tolerances& tol) const {
  const int m = geom_.chart_dim();
  const int n = m + 1;
  const ParameterBinding& params = cf_.params();
  const ShapeData shape = geom_.shape_at(u);
  const Eigen::VectorXd& p = shape.ambient_point;
  const double f = cf_.value(p);
  const double h_bar = geom_.eval(h_bar_, u, params);

  // constancy of the conformal mean curvature along the hypersurface
  Eigen::VectorXd dh(m);
  for (int j = 0; j < m; ++j)
    dh[j] = geom_.eval(h_bar_.differentiate(j), u, params);
  const Eigen::VectorXd grad_frame = f * (shape.frame_coeffs * dh);
  if (vec_inf(grad_frame) > tol.mean_curvature * (1.0 + std::abs(h_bar)) * 1e3)
    throw InvalidInput("CMC conditions require constant mean curvature");

  const double norm2_bar = conformal_shape_norm(cf_, shape);
  const double ric_nn = ricci_normal_normal(cf_, shape.normal, p);

  CmcResult result;
  result.residual.point = p;
  result.residual.equation = "cmc";
  result.residual.normal = norm2_bar - ric_nn;
  result.residual.tangential = ricci_tangential(cf_, shape) / double(n - 2);
  result.residual.tangential_ambient =
      shape.frame.transpose() * result.residual.tangential;
  result.residual.scale =
      std::max({std::abs(norm2_bar), std::abs(ric_nn),
                vec_inf(result.residual.tangential)});

  // specialization xi(sigma) = 0
  const double xi_f = shape.normal.dot(cf_.gradient(p));
  if (std::abs(xi_f) <= tol.abs + tol.rel * (1.0 + std::abs(h_bar))) {
    result.special_applicable = true;
    const Eigen::MatrixXd hess_sigma_g = [&] {
      // covariant Hessian of sigma in the ambient metric (coordinate basis)
      const Eigen::VectorXd ds = cf_.sigma_gradient(p);
      const Eigen::MatrixXd dds = cf_.sigma_hessian(p);
      Eigen::MatrixXd h(n, n);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double corr = -ds[k] * ds[j] - ds[j] * ds[k];
          if (j == k) corr += ds.squaredNorm();
          h(j, k) = dds(j, k) - corr;
        }
      return h;
    }();
    const Eigen::VectorXd xi = f * shape.normal;
    const Eigen::VectorXd ds = cf_.sigma_gradient(p);
    const double lap = f * f * hess_sigma_g.trace();
    const double grad2 = f * f * ds.squaredNorm();
    result.special_normal =
        norm2_bar - (lap + (n - 2) * (xi.dot(hess_sigma_g * xi) + grad2));
    // A_bar(grad sigma) in the frame
    Eigen::VectorXd e_sigma(m);
    for (int i = 0; i < m; ++i)
      e_sigma[i] = shape.frame.row(i).dot(cf_.gradient(p));
    const Eigen::MatrixXd a_bar =
        f * shape.shape_frame + xi_f * Eigen::MatrixXd::Identity(m, m);
    result.special_tangential = a_bar * e_sigma;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Totally umbilical hypersurfaces

UmbilicalResidual::UmbilicalResidual(const ConformalFactor& cf,
                                     ChartField mean_curvature_field,
                                     const Hypersurface& hs)
    : cf_(cf), geom_(hs), h_field_(std::move(mean_curvature_field.e)) {
  f_chart_ = geom_.restrict_field(cf.factor());
  lap_h_ = geom_.laplace_beltrami_expr(h_field_);
  inner_f_h_ = geom_.gradient_inner_expr(f_chart_, h_field_);
}

UmbilicalResult UmbilicalResidual::at(const Eigen::VectorXd& u,
                                      const Tolerances& tol) const {
  const int m = geom_.chart_dim();
  const int n = m + 1;
  const ParameterBinding& params = cf_.params();
  const ShapeData shape = geom_.shape_at(u);
  const Eigen::VectorXd& p = shape.ambient_point;
  const double f = cf_.value(p);
  const double h = geom_.eval(h_field_, u, params);

  const double norm2_bar = conformal_shape_norm(cf_, shape);
  if (std::abs(norm2_bar - m * h * h) > tol.abs + 1e-6 * (1.0 + norm2_bar))
    throw InvalidInput("umbilical conditions require A = lambda Id");

  const double lap_bar = f * f * geom_.eval(lap_h_, u, params) -
                         (m - 2) * f * geom_.eval(inner_f_h_, u, params);
  const double ric_nn = ricci_normal_normal(cf_, shape.normal, p);

  UmbilicalResult result;
  result.residual.point = p;
  result.residual.equation = "umbilical";
  const double t1 = lap_bar;
  const double t2 = -m * h * h * h;
  const double t3 = h * ric_nn;
  result.residual.normal = (t1 + t2 + t3) * sign_of(h);

  // gradients along the rescaled frame
  Eigen::VectorXd dh(m);
  for (int j = 0; j < m; ++j)
    dh[j] = geom_.eval(h_field_.differentiate(j), u, params);
  const Eigen::VectorXd grad_h = f * (shape.frame_coeffs * dh);
  const Eigen::VectorXd grad_h2 = 2.0 * h * grad_h;

  const Eigen::VectorXd grad_f = cf_.gradient(p);
  const double xi_f = shape.normal.dot(grad_f);  // = xi(sigma) for G-unit xi
  Eigen::VectorXd e_sigma(m), e_xi_sigma(m);
  const Eigen::MatrixXd hess_f = cf_.hessian(p);
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd e_i = shape.frame.row(i);
    e_sigma[i] = e_i.dot(grad_f);
    double e_xi = shape.normal.dot(hess_f * e_i);
    for (int j = 0; j < m; ++j) e_xi -= shape.shape_frame(j, i) * e_sigma[j];
    e_xi_sigma[i] = f * e_xi;
  }
  // bracket with the umbilical substitution A(grad sigma) -> H grad sigma
  const Eigen::VectorXd bracket = e_xi_sigma - xi_f * e_sigma + h * e_sigma;
  const Eigen::VectorXd v1 = 0.5 * (2.0 + m) * grad_h2;
  const Eigen::VectorXd v2 = -2.0 * (n - 2) * h * bracket;
  result.residual.tangential = v1 + v2;
  result.residual.tangential_ambient =
      shape.frame.transpose() * result.residual.tangential;
  result.residual.scale = std::max(
      {std::abs(t1), std::abs(t2), std::abs(t3), vec_inf(v1), vec_inf(v2)});

  result.dimension_factor = m - 4;
  if (std::abs(h - xi_f) <= tol.abs + tol.rel * (1.0 + std::abs(h))) {
    result.reduced_applicable = true;
    result.reduced_tangential = (m - 4.0) * grad_h2;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<Eigen::VectorXd> sample_chart_points(const ConformalFactor& cf,
                                                 const SurfaceGeometry& geom,
                                                 const DomainBox& box, int samples,
                                                 std::uint64_t seed) {
  if (samples < 1) throw InvalidInput("sample count must be >= 1");
  const Hypersurface& hs = geom.hypersurface();
  const int n = geom.ambient_dim();
  constexpr int kMaxTries = 400;

  const bool ambient_box = box.dim() == n;
  const double margin =
      ambient_box ? box.effective_margin()
                  : (hs.is_hyperplane() ? 0.0
                                        : hs.patch_data().parameter_box.effective_margin());

  std::vector<Eigen::VectorXd> points;
  points.reserve(samples);
  for (int index = 0; index < samples; ++index) {
    SampleStream stream(seed, static_cast<std::uint64_t>(index));
    bool accepted = false;
    for (int tries = 0; tries < kMaxTries && !accepted; ++tries) {
      Eigen::VectorXd u;
      Eigen::VectorXd p;
      if (hs.is_hyperplane()) {
        if (!ambient_box)
          throw InvalidInput("hyperplane sampling needs an ambient box");
        const auto& plane = hs.plane();
        Eigen::VectorXd q = stream.point_in_box(box.lower, box.upper);
        q -= (plane.normal.dot(q) - plane.offset) * plane.normal;
        bool inside = true;
        for (int a = 0; a < n; ++a)
          if (q[a] < box.lower[a] - 1e-12 || q[a] > box.upper[a] + 1e-12)
            inside = false;
        if (!inside) continue;
        u = plane.tangent_basis * (q - plane.offset * plane.normal);
        p = q;
      } else {
        const auto& pbox = hs.patch_data().parameter_box;
        u = stream.point_in_box(pbox.lower, pbox.upper);
        try {
          p = geom.embed(u);
        } catch (const DomainError&) {
          continue;
        }
        if (ambient_box) {
          bool inside = true;
          for (int a = 0; a < n; ++a)
            if (p[a] < box.lower[a] - 1e-12 || p[a] > box.upper[a] + 1e-12)
              inside = false;
          if (!inside) continue;
        }
      }
      double fval;
      try {
        fval = cf.eval(cf.factor(), p);
      } catch (const DomainError&) {
        continue;
      }
      if (!(fval > 0.0) || !(std::abs(fval) > margin)) continue;
      points.push_back(u);
      accepted = true;
    }
    if (!accepted)
      throw RegionExhausted(
          "hypersurface sampling: region exhausted (rejection rate > 99%)");
  }
  return points;
}

// ---------------------------------------------------------------------------
// Classification

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Minimal: return "minimal";
    case Verdict::ProperBiharmonic: return "proper_biharmonic";
    case Verdict::NotBiharmonic: return "not_biharmonic";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "?";
}

Classification classify(const ConformalFactor& cf, const Hypersurface& hs,
                        const DomainBox& box, int samples, std::uint64_t seed,
                        const Tolerances& tol) {
  SurfaceGeometry geom(hs);
  const auto points = sample_chart_points(cf, geom, box, samples, seed);

  // choose the residual path: the minimal-base equation needs a Euclidean-
  // minimal base
  bool euclidean_minimal = true;
  std::vector<ShapeData> shapes;
  shapes.reserve(points.size());
  for (const auto& u : points) {
    shapes.push_back(geom.shape_at(u));
    const auto& s = shapes.back();
    if (std::abs(s.mean_curvature) >
        1e-9 * (1.0 + std::sqrt(std::abs(s.shape_norm2))))
      euclidean_minimal = false;
  }

  Classification out;
  out.sample_count = samples;
  out.seed = seed;
  out.equation = euclidean_minimal ? "minimal_base" : "conformal";

  std::vector<BiharmonicResidual> residuals;
  residuals.reserve(points.size());
  if (euclidean_minimal) {
    MinimalBaseResidual eval(cf, hs);
    for (const auto& u : points) residuals.push_back(eval.at(u));
  } else {
    ConformalResidual eval(cf, hs);
    for (const auto& u : points) residuals.push_back(eval.at(u));
  }

  bool all_pass = true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double h_bar = conformal_mean_curvature(cf, shapes[i]);
    out.max_abs_mean_curvature =
        std::max(out.max_abs_mean_curvature, std::abs(h_bar));
    const auto& r = residuals[i];
    if (r.scale > tol.abs) {
      ++out.informative_count;
      out.max_relative_residual = std::max(out.max_relative_residual, r.relative());
      if (!r.passes(tol)) all_pass = false;
    }
  }

  if (out.max_abs_mean_curvature <= tol.mean_curvature) {
    out.verdict = Verdict::Minimal;
  } else if (!all_pass) {
    out.verdict = Verdict::NotBiharmonic;
  } else if (out.informative_count * 2 < samples) {
    out.verdict = Verdict::Indeterminate;
  } else {
    out.verdict = Verdict::ProperBiharmonic;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hyperplane trichotomy

HyperplaneCaseReport hyperplane_case_analysis(const ConformalFactor& cf, int m,
                                              double offset, const DomainBox& box,
                                              int samples, std::uint64_t seed,
                                              const Tolerances& tol) {
  const int n = m + 1;
  if (cf.ambient_dim() != n)
    throw InvalidInput("conformal factor dimension mismatch");
  Hypersurface plane =
      Hypersurface::hyperplane(Eigen::VectorXd::Unit(n, m), offset);
  SurfaceGeometry geom(plane);
  const auto points = sample_chart_points(cf, geom, box, samples, seed);

  HyperplaneCaseReport report;
  report.sample_count = samples;
  report.seed = seed;
  report.axis_applicable = (m == 4);

  // reference-point split f = p(x) + q(z): q(z) = f(x0, z),
  // p(x) = f(x, c) - f(x0, c)
  Eigen::VectorXd center = 0.5 * (box.lower + box.upper);
  center[m] = offset;
  std::vector<Expression> to_q(n), to_p(n);
  for (int i = 0; i < m; ++i) {
    to_q[i] = Expression::number(center[i]);
    to_p[i] = Expression::coordinate(i);
  }
  to_q[m] = Expression::coordinate(m);
  to_p[m] = Expression::number(offset);
  const Expression q_field = cf.factor().substitute_coordinates(to_q).simplify();
  const Expression p_plus_const = cf.factor().substitute_coordinates(to_p).simplify();
  const std::span<const double> cpt(center.data(), center.size());
  const double split_const = p_plus_const.evaluate(cpt, cf.params());
  const Expression p_field =
      Expression::sub(p_plus_const, Expression::number(split_const)).simplify();

  bool fz_zero = true, axis_zero = report.axis_applicable, fzi_zero = true;
  bool separable = true, separable_eq = true, cmc = true;
  double h0 = 0.0;
  bool first = true;

  for (const auto& u : points) {
    Eigen::VectorXd p = geom.embed(u);
    const double f = cf.value(p);
    const Eigen::VectorXd grad = cf.gradient(p);
    const Eigen::MatrixXd hess = cf.hessian(p);
    const double fz = grad[m];
    const double grad_scale = 1.0 + grad.cwiseAbs().maxCoeff();

    report.max_abs_fz = std::max(report.max_abs_fz, std::abs(fz));
    if (std::abs(fz) > tol.abs + tol.rel * grad_scale) fz_zero = false;

    double fzi_max = 0.0;
    for (int i = 0; i < m; ++i) fzi_max = std::max(fzi_max, std::abs(hess(m, i)));
    report.max_abs_fzi = std::max(report.max_abs_fzi, fzi_max);
    const double hess_scale = 1.0 + hess.cwiseAbs().maxCoeff();
    if (fzi_max > tol.abs + tol.rel * hess_scale) fzi_zero = false;

    if (report.axis_applicable) {
      const auto r = residual_axis_hyperplane_m4(cf, offset, p);
      report.max_rel_axis_residual =
          std::max(report.max_rel_axis_residual, r.relative());
      if (!r.passes(tol)) axis_zero = false;
    }

    // separability and the separable equation
    const std::span<const double> pt(p.data(), p.size());
    const double split_err =
        std::abs(f - p_field.evaluate(pt, cf.params()) -
                 q_field.evaluate(pt, cf.params()));
    if (split_err > tol.abs + tol.rel * (1.0 + std::abs(f))) separable = false;
    const auto rs = residual_separable_cmc(p_field, q_field, cf.coords(),
                                           cf.params(), p);
    report.max_rel_separable_residual =
        std::max(report.max_rel_separable_residual, rs.relative());
    if (!rs.passes(tol)) separable_eq = false;

    if (first) {
      h0 = fz;  // conformal mean curvature of the plane is xi f = f_z
      report.mean_curvature = h0;
      first = false;
    } else if (std::abs(fz - h0) > tol.abs + tol.rel * (1.0 + std::abs(h0))) {
      cmc = false;
    }
  }

  report.separable = separable;
  report.minimal_case = fz_zero;
  report.axis_equation_case = report.axis_applicable && axis_zero;
  report.separable_cmc_case = fzi_zero && separable && separable_eq && cmc &&
                              std::abs(h0) > tol.mean_curvature;
  report.biharmonic =
      report.minimal_case || report.axis_equation_case || report.separable_cmc_case;
  return report;
}

}  // namespace bhv
