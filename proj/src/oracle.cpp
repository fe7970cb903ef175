#include "bhv/oracle.hpp"

#include <cmath>

#include "bhv/geometry.hpp"
#include "bhv/hypersurface.hpp"

namespace bhv {

namespace {

double nested_diff(const ScalarField& field, const Eigen::VectorXd& p,
                   const std::vector<int>& idx, std::size_t level,
                   const Eigen::VectorXd& steps) {
  if (level == idx.size()) return field(p);
  const int c = idx[level];
  const double h = steps[c];
  Eigen::VectorXd pp = p, pm = p;
  pp[c] += h;
  pm[c] -= h;
  return (nested_diff(field, pp, idx, level + 1, steps) -
          nested_diff(field, pm, idx, level + 1, steps)) /
         (2.0 * h);
}

Eigen::VectorXd step_vector(const Eigen::VectorXd& p, double base) {
  Eigen::VectorXd steps(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i)
    steps[i] = base * std::max(1.0, std::abs(p[i]));
  return steps;
}

}  // namespace

double fd_partial(const ScalarField& field, const Eigen::VectorXd& p,
                  const std::vector<int>& multi_index, const FDScheme& scheme) {
  if (multi_index.empty()) return field(p);
  if (static_cast<int>(multi_index.size()) > scheme.max_order ||
      multi_index.size() > 3)
    throw InvalidInput("finite differences support derivative order <= 3");
  for (int c : multi_index)
    if (c < 0 || c >= p.size())
      throw InvalidInput("finite difference coordinate out of range");
  const double base = scheme.step_for(static_cast<int>(multi_index.size()));
  const Eigen::VectorXd steps = step_vector(p, base);
  const double coarse = nested_diff(field, p, multi_index, 0, steps);
  if (!scheme.richardson) return coarse;
  const double fine = nested_diff(field, p, multi_index, 0, 0.5 * steps);
  return (4.0 * fine - coarse) / 3.0;
}

namespace {

// d_l G at p, entrywise central differences (with the scheme's Richardson
// setting), shared by the curvature assemblers.
std::vector<Eigen::MatrixXd> metric_partials(const MetricField& metric,
                                             const Eigen::VectorXd& p,
                                             const FDScheme& scheme) {
  const int n = static_cast<int>(p.size());
  const Eigen::VectorXd steps = step_vector(p, scheme.step);
  std::vector<Eigen::MatrixXd> dG(n);
  for (int l = 0; l < n; ++l) {
    const auto diff_at = [&](double h) {
      Eigen::VectorXd pp = p, pm = p;
      pp[l] += h;
      pm[l] -= h;
      return ((metric(pp) - metric(pm)) / (2.0 * h)).eval();
    };
    const Eigen::MatrixXd coarse = diff_at(steps[l]);
    if (scheme.richardson) {
      const Eigen::MatrixXd fine = diff_at(0.5 * steps[l]);
      dG[l] = (4.0 * fine - coarse) / 3.0;
    } else {
      dG[l] = coarse;
    }
  }
  return dG;
}

ChristoffelTensor christoffel_from(const MetricField& metric,
                                   const Eigen::VectorXd& p,
                                   const FDScheme& scheme) {
  const int n = static_cast<int>(p.size());
  const Eigen::MatrixXd G = metric(p);
  const Eigen::MatrixXd Ginv = G.inverse();
  const auto dG = metric_partials(metric, p, scheme);
  ChristoffelTensor gamma(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int l = 0; l < n; ++l)
          sum += Ginv(k, l) * (dG[i](j, l) + dG[j](i, l) - dG[l](i, j));
        gamma.at(k, i, j) = 0.5 * sum;
      }
  return gamma;
}

// R^l_{kij} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
//             + Gamma^l_{is} Gamma^s_{jk} - Gamma^l_{js} Gamma^s_{ik}
struct RiemannTensor {
  int n;
  std::vector<double> v;
  explicit RiemannTensor(int dim) : n(dim), v(dim * dim * dim * dim, 0.0) {}
  double& at(int l, int k, int i, int j) {
    return v[((l * n + k) * n + i) * n + j];
  }
  double at(int l, int k, int i, int j) const {
    return v[((l * n + k) * n + i) * n + j];
  }
};

RiemannTensor riemann_from(const MetricField& metric, const Eigen::VectorXd& p,
                           const FDScheme& scheme) {
  const int n = static_cast<int>(p.size());
  const Eigen::VectorXd steps = step_vector(p, scheme.step);
  const ChristoffelTensor gamma = christoffel_from(metric, p, scheme);

  // d_i Gamma, central differences of the whole tensor
  std::vector<ChristoffelTensor> dgamma;
  dgamma.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto diff_at = [&](double h) {
      Eigen::VectorXd pp = p, pm = p;
      pp[i] += h;
      pm[i] -= h;
      ChristoffelTensor gp = christoffel_from(metric, pp, scheme);
      const ChristoffelTensor gm = christoffel_from(metric, pm, scheme);
      for (std::size_t t = 0; t < gp.v.size(); ++t)
        gp.v[t] = (gp.v[t] - gm.v[t]) / (2.0 * h);
      return gp;
    };
    ChristoffelTensor coarse = diff_at(steps[i]);
    if (scheme.richardson) {
      const ChristoffelTensor fine = diff_at(0.5 * steps[i]);
      for (std::size_t t = 0; t < coarse.v.size(); ++t)
        coarse.v[t] = (4.0 * fine.v[t] - coarse.v[t]) / 3.0;
    }
    dgamma.push_back(std::move(coarse));
  }

  RiemannTensor R(n);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = dgamma[i].at(l, j, k) - dgamma[j].at(l, i, k);
          for (int s = 0; s < n; ++s)
            v += gamma.at(l, i, s) * gamma.at(s, j, k) -
                 gamma.at(l, j, s) * gamma.at(s, i, k);
          R.at(l, k, i, j) = v;
        }
  return R;
}

}  // namespace

ChristoffelTensor christoffel_bruteforce(const MetricField& metric,
                                         const Eigen::VectorXd& p,
                                         const FDScheme& scheme) {
  return christoffel_from(metric, p, scheme);
}

Eigen::MatrixXd ricci_bruteforce(const MetricField& metric,
                                 const Eigen::VectorXd& p,
                                 const FDScheme& scheme) {
  const int n = static_cast<int>(p.size());
  const RiemannTensor R = riemann_from(metric, p, scheme);
  Eigen::MatrixXd ric(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += R.at(i, k, i, j);
      ric(j, k) = v;
    }
  return ric;
}

double sectional_bruteforce(const MetricField& metric, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& X, const Eigen::VectorXd& Y,
                            const FDScheme& scheme) {
  const int n = static_cast<int>(p.size());
  if (X.size() != n || Y.size() != n)
    throw InvalidInput("plane spanner dimension mismatch");
  const Eigen::MatrixXd G = metric(p);
  const RiemannTensor R = riemann_from(metric, p, scheme);

  // <R(X, Y) Y, X>
  Eigen::VectorXd RXYY = Eigen::VectorXd::Zero(n);
  for (int l = 0; l < n; ++l) {
    double v = 0.0;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          v += R.at(l, k, i, j) * Y[k] * X[i] * Y[j];
    RXYY[l] = v;
  }
  const double numerator = X.dot(G * RXYY);
  const double gxx = X.dot(G * X);
  const double gyy = Y.dot(G * Y);
  const double gxy = X.dot(G * Y);
  const double denom = gxx * gyy - gxy * gxy;
  if (std::abs(denom) < 1e-14)
    throw InvalidInput("plane spanners are linearly dependent");
  return numerator / denom;
}

std::pair<double, double> barred_shape_bruteforce(const ConformalFactor& cf,
                                                  const Hypersurface& hs,
                                                  const Eigen::VectorXd& u,
                                                  const FDScheme& scheme) {
  const int m = hs.surface_dim();
  const int n = hs.ambient_dim();
  SurfaceGeometry geom(hs);
  const ShapeData shape = geom.shape_at(u);
  const Eigen::VectorXd& p = shape.ambient_point;
  const double f = cf.value(p);

  const MetricField metric = [&](const Eigen::VectorXd& q) {
    const double fq = cf.value(q);
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(q.size(), q.size()) /
                           (fq * fq));
  };
  const ChristoffelTensor gamma = christoffel_bruteforce(metric, p, scheme);

  // the rescaled normal field along the chart
  const auto xi_bar = [&](const Eigen::VectorXd& uu) -> Eigen::VectorXd {
    const ShapeData s = geom.shape_at(uu);
    return cf.value(s.ambient_point) * s.normal;
  };

  // chart derivatives of xi_bar
  const Eigen::VectorXd steps = step_vector(u, scheme.step);
  Eigen::MatrixXd dxi(m, n);  // row j: d(xi_bar)/du_j
  for (int j = 0; j < m; ++j) {
    const auto diff_at = [&](double h) {
      Eigen::VectorXd up = u, um = u;
      up[j] += h;
      um[j] -= h;
      return ((xi_bar(up) - xi_bar(um)) / (2.0 * h)).eval();
    };
    const Eigen::VectorXd coarse = diff_at(steps[j]);
    if (scheme.richardson) {
      const Eigen::VectorXd fine = diff_at(0.5 * steps[j]);
      dxi.row(j) = (4.0 * fine - coarse) / 3.0;
    } else {
      dxi.row(j) = coarse;
    }
  }

  const Eigen::VectorXd xi_b = f * shape.normal;
  Eigen::MatrixXd a_bar(m, m);
  for (int i = 0; i < m; ++i) {
    // e_bar_i = f e_i; its chart components are f * frame_coeffs.row(i)
    const Eigen::VectorXd chart_dir = f * shape.frame_coeffs.row(i).transpose();
    Eigen::VectorXd cov = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < m; ++j) cov += chart_dir[j] * dxi.row(j).transpose();
    const Eigen::VectorXd e_bar_i =
        f * shape.frame.row(i).transpose();  // ambient components
    for (int a = 0; a < n; ++a) {
      double christoffel_term = 0.0;
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          christoffel_term += gamma.at(a, b, c) * e_bar_i[b] * xi_b[c];
      cov[a] += christoffel_term;
    }
    // A_bar(e_bar_i) = -cov; components against e_bar_j in the barred metric
    for (int j = 0; j < m; ++j) {
      const Eigen::VectorXd e_bar_j = f * shape.frame.row(j).transpose();
      a_bar(i, j) = -cov.dot(e_bar_j) / (f * f);
    }
  }

  const double h_bar = a_bar.trace() / m;
  const double norm2 = (a_bar * a_bar.transpose()).trace();
  return {h_bar, norm2};
}

}  // namespace bhv
