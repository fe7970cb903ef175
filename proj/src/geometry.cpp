#include "bhv/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "bhv/hypersurface.hpp"
#include "bhv/random.hpp"

namespace bhv {

void DomainBox::validate() const {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw InvalidInput("domain box bounds must have equal, positive dimension");
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    if (!(lower[i] < upper[i]))
      throw InvalidInput("domain box requires lower < upper componentwise");
}

void PlaneSection::validate() const {
  const auto n = point.size();
  if (a.size() != n || b.size() != n)
    throw InvalidInput("plane section coefficient length mismatch");
  constexpr double tol = 1e-12;
  if (std::abs(a.squaredNorm() - 1.0) > tol ||
      std::abs(b.squaredNorm() - 1.0) > tol)
    throw InvalidInput("plane section spanners must be unit vectors");
  if (std::abs(a.dot(b)) > tol)
    throw InvalidInput("plane section spanners must be orthogonal");
}

ConformalFactor::ConformalFactor(Expression f, CoordinateSystem coords,
                                 ParameterBinding params)
    : f_(std::move(f)),
      sigma_(Expression::apply(UnaryFunc::Ln, f_)),
      coords_(std::move(coords)),
      params_(std::move(params)) {
  for (const auto& name : f_.parameter_names())
    if (!params_.contains(name))
      throw InvalidInput("conformal factor parameter '" + name + "' is unbound");
  const int n = coords_.size();
  df_.reserve(n);
  for (int i = 0; i < n; ++i) df_.push_back(f_.differentiate(i).simplify());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      d2f_.push_back(df_[i].differentiate(j).simplify());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k)
        d3f_.push_back(partial2(i, j).differentiate(k).simplify());
  for (int i = 0; i < n; ++i) dsigma_.push_back(sigma_.differentiate(i).simplify());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      d2sigma_.push_back(dsigma_[i].differentiate(j).simplify());
}

int ConformalFactor::pair_index(int i, int j) const {
  const int n = coords_.size();
  if (i > j) std::swap(i, j);
  // offset of row i in the packed upper triangle
  return i * n - i * (i - 1) / 2 + (j - i);
}

int ConformalFactor::triple_index(int i, int j, int k) const {
  const int n = coords_.size();
  int s[3] = {i, j, k};
  std::sort(s, s + 3);
  int idx = 0;
  // count sorted triples preceding (s0, s1, s2) lexicographically
  for (int a = 0; a < s[0]; ++a) idx += (n - a) * (n - a + 1) / 2;
  for (int b = s[0]; b < s[1]; ++b) idx += n - b;
  return idx + (s[2] - s[1]);
}

const Expression& ConformalFactor::partial(int i) const { return df_.at(i); }
const Expression& ConformalFactor::partial2(int i, int j) const {
  return d2f_.at(pair_index(i, j));
}
const Expression& ConformalFactor::partial3(int i, int j, int k) const {
  return d3f_.at(triple_index(i, j, k));
}
const Expression& ConformalFactor::sigma_partial(int i) const {
  return dsigma_.at(i);
}
const Expression& ConformalFactor::sigma_partial2(int i, int j) const {
  return d2sigma_.at(pair_index(i, j));
}

double ConformalFactor::eval(const Expression& e, const Eigen::VectorXd& p) const {
  return e.evaluate(std::span<const double>(p.data(), p.size()), params_);
}

double ConformalFactor::value(const Eigen::VectorXd& p) const {
  const double v = eval(f_, p);
  if (!(v > 0.0)) throw DomainError("conformal factor is not positive");
  return v;
}

Eigen::VectorXd ConformalFactor::gradient(const Eigen::VectorXd& p) const {
  Eigen::VectorXd g(ambient_dim());
  for (int i = 0; i < ambient_dim(); ++i) g[i] = eval(df_[i], p);
  return g;
}

Eigen::MatrixXd ConformalFactor::hessian(const Eigen::VectorXd& p) const {
  const int n = ambient_dim();
  Eigen::MatrixXd h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) h(i, j) = h(j, i) = eval(partial2(i, j), p);
  return h;
}

double ConformalFactor::third(int i, int j, int k, const Eigen::VectorXd& p) const {
  return eval(partial3(i, j, k), p);
}

double ConformalFactor::sigma_value(const Eigen::VectorXd& p) const {
  return eval(sigma_, p);
}

Eigen::VectorXd ConformalFactor::sigma_gradient(const Eigen::VectorXd& p) const {
  Eigen::VectorXd g(ambient_dim());
  for (int i = 0; i < ambient_dim(); ++i) g[i] = eval(dsigma_[i], p);
  return g;
}

Eigen::MatrixXd ConformalFactor::sigma_hessian(const Eigen::VectorXd& p) const {
  const int n = ambient_dim();
  Eigen::MatrixXd h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) h(i, j) = h(j, i) = eval(sigma_partial2(i, j), p);
  return h;
}

ChristoffelTensor christoffel_conformal(const ConformalFactor& cf,
                                        const Eigen::VectorXd& p) {
  const int n = cf.ambient_dim();
  cf.value(p);  // domain check
  const Eigen::VectorXd psi = -cf.sigma_gradient(p);
  ChristoffelTensor gamma(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        if (i == k) v += psi[j];
        if (j == k) v += psi[i];
        if (i == j) v -= psi[k];
        gamma.at(k, i, j) = v;
      }
  return gamma;
}

namespace {

// Hessian of sigma in the metric G = f^-2 delta, plus its trace and the
// squared gradient, shared by the Ricci routines.
struct SigmaCurvatureParts {
  Eigen::MatrixXd hess;   // covariant Hessian, coordinate components
  double laplacian;       // G^{jk} hess_jk
  double grad_norm2;      // |grad sigma|^2 in G
  double f;
};

SigmaCurvatureParts sigma_parts(const ConformalFactor& cf, const Eigen::VectorXd& p) {
  const int n = cf.ambient_dim();
  SigmaCurvatureParts parts;
  parts.f = cf.value(p);
  const Eigen::VectorXd ds = cf.sigma_gradient(p);
  const Eigen::MatrixXd dds = cf.sigma_hessian(p);
  const Eigen::VectorXd psi = -ds;
  parts.hess.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      // Gamma^l_jk sigma_l for the conformal connection
      double correction = psi[k] * ds[j] + psi[j] * ds[k];
      if (j == k) correction -= psi.dot(ds);
      parts.hess(j, k) = dds(j, k) - correction;
    }
  const double f2 = parts.f * parts.f;
  parts.laplacian = f2 * parts.hess.trace();
  parts.grad_norm2 = f2 * ds.squaredNorm();
  return parts;
}

}  // namespace

RicciData ricci_coordinates(const ConformalFactor& cf, const Eigen::VectorXd& p) {
  const int n = cf.ambient_dim();
  const auto parts = sigma_parts(cf, p);
  const Eigen::VectorXd ds = cf.sigma_gradient(p);
  const double trace_term = parts.laplacian + (n - 2) * parts.grad_norm2;
  const double finv2 = 1.0 / (parts.f * parts.f);
  RicciData out;
  out.coords.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double v = (n - 2) * (parts.hess(j, k) - ds[j] * ds[k]);
      if (j == k) v += finv2 * trace_term;
      out.coords(j, k) = v;
    }
  return out;
}

double ricci_normal_normal(const ConformalFactor& cf,
                           const Eigen::VectorXd& xi_euclid,
                           const Eigen::VectorXd& p) {
  const int n = cf.ambient_dim();
  if (xi_euclid.size() != n)
    throw InvalidInput("normal vector dimension mismatch");
  if (std::abs(xi_euclid.squaredNorm() - 1.0) > 1e-9)
    throw InvalidInput("normal vector must be Euclidean-unit");
  const auto parts = sigma_parts(cf, p);
  const Eigen::VectorXd ds = cf.sigma_gradient(p);
  const Eigen::VectorXd xi = parts.f * xi_euclid;  // G-unit normal
  const double hess_xx = xi.dot(parts.hess * xi);
  const double xi_sigma = xi.dot(ds);
  return parts.laplacian +
         (n - 2) * (hess_xx - xi_sigma * xi_sigma + parts.grad_norm2);
}

Eigen::VectorXd ricci_tangential(const ConformalFactor& cf,
                                 const ShapeData& shape) {
  const int n = cf.ambient_dim();
  const int m = n - 1;
  const Eigen::VectorXd& p = shape.ambient_point;
  const double f = cf.value(p);
  const Eigen::VectorXd grad_f = cf.gradient(p);
  const Eigen::MatrixXd hess_f = cf.hessian(p);
  const Eigen::VectorXd& nu = shape.normal;
  const double xi_f = nu.dot(grad_f);  // = xi(sigma) for the G-unit normal

  Eigen::VectorXd out(m);
  // frame derivatives of f along the Euclidean-orthonormal tangent frame
  Eigen::VectorXd e_f(m);
  for (int i = 0; i < m; ++i) e_f[i] = shape.frame.row(i).dot(grad_f);
  // A_bar = f A + xi(f) I in the rescaled frame
  const Eigen::MatrixXd a_bar =
      f * shape.shape_frame + xi_f * Eigen::MatrixXd::Identity(m, m);
  const Eigen::VectorXd a_grad = a_bar * e_f;
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd e_i = shape.frame.row(i);
    // e_i applied to the field xi(f): the normal rotates by -A e_i
    double e_xi_f = nu.dot(hess_f * e_i);
    for (int j = 0; j < m; ++j)
      e_xi_f -= shape.shape_frame(j, i) * e_f[j];
    out[i] = f * e_xi_f - xi_f * e_f[i] + a_grad[i];
  }
  return (n - 2) * out;
}

double sectional_curvature(const ConformalFactor& cf, const PlaneSection& plane) {
  plane.validate();
  if (plane.point.size() != cf.ambient_dim())
    throw InvalidInput("plane section dimension mismatch");
  const double f = cf.value(plane.point);
  const Eigen::VectorXd grad = cf.gradient(plane.point);
  const Eigen::MatrixXd hess = cf.hessian(plane.point);
  const double quad =
      plane.a.dot(hess * plane.a) + plane.b.dot(hess * plane.b);
  return f * quad - grad.squaredNorm();
}

CurvatureReport scan_sectional_curvature(const ConformalFactor& cf,
                                         const DomainBox& box, int samples,
                                         std::uint64_t seed) {
  box.validate();
  if (box.dim() != cf.ambient_dim())
    throw InvalidInput("domain box dimension mismatch");
  if (samples < 1) throw InvalidInput("sample count must be >= 1");
  const double margin = box.effective_margin();
  const int n = box.dim();
  constexpr int kMaxTries = 400;  // >99% rejection counts as exhausted

  CurvatureReport report;
  report.samples = samples;
  report.seed = seed;
  double sum = 0.0;
  for (int index = 0; index < samples; ++index) {
    SampleStream stream(seed, static_cast<std::uint64_t>(index));
    bool accepted = false;
    for (int tries = 0; tries < kMaxTries && !accepted; ++tries) {
      const Eigen::VectorXd p = stream.point_in_box(box.lower, box.upper);
      double fval;
      try {
        fval = cf.eval(cf.factor(), p);
      } catch (const DomainError&) {
        continue;
      }
      if (!(std::abs(fval) > margin) || fval <= 0.0) continue;

      // Two directions, orthonormalized. The conformal frame e_i = f d_i is
      // a pointwise rescaling, so Euclidean Gram-Schmidt gives the frame
      // coefficients directly.
      const Eigen::VectorXd a = stream.unit_vector(n);
      Eigen::VectorXd b;
      bool have_b = false;
      for (int btry = 0; btry < 50 && !have_b; ++btry) {
        Eigen::VectorXd w = stream.unit_vector(n);
        w -= w.dot(a) * a;
        if (w.norm() > 1e-6) {
          b = w.normalized();
          have_b = true;
        }
      }
      if (!have_b) continue;

      PlaneSection plane{p, a, b};
      double k;
      try {
        k = sectional_curvature(cf, plane);
      } catch (const DomainError&) {
        continue;
      }
      accepted = true;
      sum += k;
      if (index == 0 || k < report.min_k) report.min_k = k;
      if (index == 0 || k > report.max_k) report.max_k = k;
      if (k >= 0.0) ++report.nonnegative_count;
      report.worst.push_back({p, a, b, k});
      std::sort(report.worst.begin(), report.worst.end(),
                [](const CurvatureOffender& x, const CurvatureOffender& y) {
                  return x.k > y.k;
                });
      if (report.worst.size() > 5) report.worst.resize(5);
    }
    if (!accepted)
      throw RegionExhausted(
          "curvature scan: sampling region exhausted (rejection rate > 99%)");
  }
  report.mean_k = sum / samples;
  return report;
}

}  // namespace bhv
