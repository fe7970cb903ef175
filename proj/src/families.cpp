#include "bhv/families.hpp"

#include <cmath>
#include <cstdio>

namespace bhv {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ConformalFactor parse_factor(const std::string& text, int m) {
  const CoordinateSystem coords = CoordinateSystem::ambient(m);
  return ConformalFactor(parse_expression(text, coords), coords, {});
}

}  // namespace

std::string family_name(const SolutionFamily& fam) {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerAffine>) return "power_affine";
        else if constexpr (std::is_same_v<T, InverseLinear>) return "inverse_linear";
        else if constexpr (std::is_same_v<T, ProductExample>) return "product";
        else if constexpr (std::is_same_v<T, SlantedInverse>) return "slanted_inverse";
        else return "custom";
      },
      fam);
}

std::array<double, 2> solve_power_exponent_quadratic(double a, double b) {
  if (a == 0.0 && b == 0.0)
    throw InvalidInput("exponent quadratic is degenerate for A = B = 0");
  const double second = 2.0 * a * a / (4.0 * a * a + b * b);
  std::array<double, 2> roots{-1.0, second};
  if (roots[0] > roots[1]) std::swap(roots[0], roots[1]);
  return roots;
}

ConformalFactor make_family_factor(const SolutionFamily& fam, int surface_dim) {
  return std::visit(
      [&](const auto& f) -> ConformalFactor {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerAffine>) {
          if (surface_dim != 4)
            throw InvalidInput("power family is defined for m = 4");
          if (f.a == 0.0 && f.b == 0.0)
            throw InvalidInput("power family requires A^2 + B^2 != 0");
          return parse_factor("(" + num(f.a) + "*(x1+x2+x3+x4)+" + num(f.b) +
                                  "*z+" + num(f.c) + ")^(" + num(f.t) + ")",
                              surface_dim);
        } else if constexpr (std::is_same_v<T, InverseLinear>) {
          return parse_factor("1/(" + num(f.a) + "*z+" + num(f.b) + ")",
                              surface_dim);
        } else if constexpr (std::is_same_v<T, ProductExample>) {
          if (surface_dim != 4)
            throw InvalidInput("product family is defined for m = 4");
          return parse_factor("(" + num(f.a) + "*x1+" + num(f.b) +
                                  ")^(-0.5)*(" + num(f.c) + "*z+" + num(f.d) +
                                  ")^(-1)",
                              surface_dim);
        } else if constexpr (std::is_same_v<T, SlantedInverse>) {
          if (f.slope.size() != surface_dim)
            throw InvalidInput("slanted family slope length mismatch");
          return parse_factor("1/(" + num(f.a) + "*z+" + num(f.b) + ")",
                              surface_dim);
        } else {
          return ConformalFactor(f.factor,
                                 CoordinateSystem::ambient(surface_dim),
                                 f.params);
        }
      },
      fam);
}

FamilyReport verify_family(const SolutionFamily& fam, int surface_dim,
                           const DomainBox& box, int samples, std::uint64_t seed,
                           const Tolerances& tol) {
  box.validate();
  const int m = surface_dim;
  const int n = m + 1;
  if (box.dim() != n) throw InvalidInput("family box must be ambient");
  const ConformalFactor cf = make_family_factor(fam, m);

  FamilyReport report;
  report.family = family_name(fam);
  report.factor_text = cf.factor().format(cf.coords());
  report.surface_dim = m;
  report.sample_count = samples;
  report.seed = seed;
  const double offset = 0.5 * (box.lower[m] + box.upper[m]);
  report.hyperplane_offset = offset;

  Hypersurface plane = Hypersurface::hyperplane(Eigen::VectorXd::Unit(n, m), offset);
  if (const auto* slanted = std::get_if<SlantedInverse>(&fam)) {
    Eigen::VectorXd normal(n);
    normal.head(m) = slanted->slope;
    normal[m] = -1.0;
    const double c0 = offset;  // plane z = slope . x + c0 through the box center z
    plane = Hypersurface::hyperplane(normal, -c0 / normal.norm());
  }
  SurfaceGeometry geom(plane);
  const auto points = sample_chart_points(cf, geom, box, samples, seed);

  bool all_pass = true;
  const auto record = [&](const BiharmonicResidual& r) {
    report.max_relative_residual = std::max(report.max_relative_residual, r.relative());
    report.max_scale = std::max(report.max_scale, r.scale);
    if (!r.passes(tol)) all_pass = false;
  };

  if (const auto* power = std::get_if<PowerAffine>(&fam)) {
    report.residual_equation = "axis_m4";
    for (const auto& u : points)
      record(residual_axis_hyperplane_m4(cf, offset, geom.embed(u)));
    if (power->t > 0.0 && power->t < 1.0)
      report.curvature = scan_sectional_curvature(cf, box, samples, seed);
  } else if (std::holds_alternative<InverseLinear>(fam)) {
    report.residual_equation = "minimal_base";
    MinimalBaseResidual eval(cf, plane);
    for (const auto& u : points) record(eval.at(u));
  } else if (const auto* product = std::get_if<ProductExample>(&fam)) {
    report.residual_equation = "axis_m4";
    for (const auto& u : points)
      record(residual_axis_hyperplane_m4(cf, offset, geom.embed(u)));

    // the two factor equations p p'' = 3 (p')^2 and q q'' = 2 (q')^2
    const CoordinateSystem& coords = cf.coords();
    const Expression p_expr = parse_expression(
        "(" + num(product->a) + "*x1+" + num(product->b) + ")^(-0.5)", coords);
    const Expression q_expr = parse_expression(
        "(" + num(product->c) + "*z+" + num(product->d) + ")^(-1)", coords);
    const Expression dp = p_expr.differentiate(0);
    const Expression dq = q_expr.differentiate(m);
    const Expression p_ode =
        p_expr * dp.differentiate(0) - 3.0 * dp * dp;
    const Expression q_ode =
        q_expr * dq.differentiate(m) - 2.0 * dq * dq;
    double p_max = 0.0, q_max = 0.0;
    for (const auto& u : points) {
      const Eigen::VectorXd p = geom.embed(u);
      p_max = std::max(p_max, std::abs(cf.eval(p_ode, p)));
      q_max = std::max(q_max, std::abs(cf.eval(q_ode, p)));
    }
    report.ode_p_residual = p_max;
    report.ode_q_residual = q_max;

    // the other reading of the ambiguous factor: all four x coordinates
    std::string alt = "(" + num(product->c) + "*z+" + num(product->d) + ")^(-1)";
    for (int i = 1; i <= 4; ++i)
      alt += "*(" + num(product->a) + "*x" + std::to_string(i) + "+" +
             num(product->b) + ")^(-0.5)";
    const ConformalFactor cf_alt = parse_factor(alt, m);
    double alt_max = 0.0;
    for (const auto& u : points) {
      const auto r = residual_axis_hyperplane_m4(cf_alt, offset, geom.embed(u));
      alt_max = std::max(alt_max, r.relative());
    }
    report.alternate_reading_residual = alt_max;
  } else if (const auto* slanted = std::get_if<SlantedInverse>(&fam)) {
    report.residual_equation = "slanted_fz";
    for (const auto& u : points) {
      const Eigen::VectorXd p = geom.embed(u);
      record(residual_slanted_fz(cf.factor(), cf.coords(), cf.params(),
                                 slanted->slope, p));
    }
  } else {
    report.residual_equation = "classify";
  }

  report.residual_zero = all_pass;
  report.classification = classify(cf, plane, box, samples, seed, tol);
  return report;
}

}  // namespace bhv
