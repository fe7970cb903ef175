#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "bhv/errors.hpp"

namespace bhv {

class ConformalFactor;
class Hypersurface;
struct ChristoffelTensor;

// Central-difference scheme. Steps are scaled per coordinate by
// max(1, |p_i|); higher orders use coarser base steps so truncation and
// cancellation error balance in double precision.
struct FDScheme {
  double step = 1e-4;
  double step_second = 4e-4;
  double step_third = 1e-3;
  bool richardson = true;  // one extrapolation level
  int max_order = 3;

  double step_for(int order) const {
    return order >= 3 ? step_third : (order == 2 ? step_second : step);
  }
};

using ScalarField = std::function<double(const Eigen::VectorXd&)>;
using MetricField = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

// Central-difference estimate of a mixed partial, one derivative per entry
// of multi_index (coordinate indices, up to order 3).
double fd_partial(const ScalarField& field, const Eigen::VectorXd& p,
                  const std::vector<int>& multi_index,
                  const FDScheme& scheme = {});

// Gamma^k_ij = 1/2 G^{kl} (d_i G_jl + d_j G_il - d_l G_ij), metric partials
// by finite differences.
ChristoffelTensor christoffel_bruteforce(const MetricField& metric,
                                         const Eigen::VectorXd& p,
                                         const FDScheme& scheme = {});

// Ricci tensor as the trace of the full curvature tensor assembled from
// finite-differenced Christoffel symbols.
Eigen::MatrixXd ricci_bruteforce(const MetricField& metric,
                                 const Eigen::VectorXd& p,
                                 const FDScheme& scheme = {});

// Sectional curvature of span{X, Y} (coordinate components; need not be
// normalized: the Gram determinant divides it out).
double sectional_bruteforce(const MetricField& metric, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& X, const Eigen::VectorXd& Y,
                            const FDScheme& scheme = {});

// Mean curvature and squared shape norm of the hypersurface measured in the
// metric f^-2 delta, computed directly in the rescaled geometry: the adapted
// frame is finite-differenced along the chart and contracted against
// brute-force Christoffel symbols. Independent of the closed-form
// transformation laws it validates.
std::pair<double, double> barred_shape_bruteforce(const ConformalFactor& cf,
                                                  const Hypersurface& hs,
                                                  const Eigen::VectorXd& u,
                                                  const FDScheme& scheme = {});

}  // namespace bhv
