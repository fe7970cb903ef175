#include "bhv/runner.hpp"

#include <cmath>

#include "bhv/families.hpp"
#include "bhv/oracle.hpp"

namespace bhv {

namespace {

struct RunContext {
  RunConfig config;
  CoordinateSystem coords;
  ConformalFactor cf;
  Hypersurface hs;
  DomainBox box;

  static RunContext build(const RunConfig& config) {
    CoordinateSystem coords = CoordinateSystem::ambient(config.dimension_m);
    Expression f = parse_expression(config.factor_text, coords);
    ConformalFactor cf(f, coords, config.parameters);
    Hypersurface hs = [&] {
      if (config.is_plane)
        return Hypersurface::hyperplane(config.plane_normal, config.plane_offset);
      std::vector<Expression> maps;
      const CoordinateSystem chart = CoordinateSystem::chart(config.dimension_m);
      for (const auto& text : config.patch_maps)
        maps.push_back(parse_expression(text, chart));
      return Hypersurface::patch(std::move(maps), config.dimension_m,
                                 config.patch_box, config.parameters);
    }();
    DomainBox box = config.box ? *config.box
                               : (config.is_plane ? DomainBox{} : config.patch_box);
    return RunContext{config, std::move(coords), std::move(cf), std::move(hs),
                      std::move(box)};
  }

  bool axis_plane() const {
    if (!config.is_plane) return false;
    const auto& plane = hs.plane();
    const int m = config.dimension_m;
    for (int i = 0; i < m; ++i)
      if (std::abs(plane.normal[i]) > 1e-12) return false;
    return true;
  }

  Eigen::VectorXd slanted_slope() const {
    const auto& plane = hs.plane();
    const int m = config.dimension_m;
    if (std::abs(plane.normal[m]) < 1e-9)
      throw InvalidInput("hyperplane is parallel to the z axis; no slope form");
    Eigen::VectorXd slope(m);
    for (int i = 0; i < m; ++i) slope[i] = -plane.normal[i] / plane.normal[m];
    return slope;
  }
};

struct CheckOutcome {
  nlohmann::ordered_json record;
  bool passed = false;
  bool indeterminate = false;
};

nlohmann::ordered_json base_record(const std::string& name,
                                   const std::string& equation,
                                   const RunConfig& config) {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["equation"] = equation;
  j["status"] = "fail";
  j["max_relative_residual"] = 0.0;
  j["scale"] = 0.0;
  j["sample_count"] = config.samples;
  j["seed"] = config.seed;
  return j;
}

template <typename ResidualAt>
CheckOutcome run_residual_check(const RunContext& ctx, const std::string& name,
                                const std::string& equation,
                                const SurfaceGeometry& geom,
                                const std::vector<Eigen::VectorXd>& points,
                                const ResidualAt& residual_at) {
  CheckOutcome out;
  out.record = base_record(name, equation, ctx.config);
  double max_rel = 0.0, max_scale = 0.0;
  bool all_pass = true;
  for (const auto& u : points) {
    const BiharmonicResidual r = residual_at(u);
    max_rel = std::max(max_rel, r.relative());
    max_scale = std::max(max_scale, r.scale);
    if (!r.passes(ctx.config.tolerances)) all_pass = false;
  }
  out.passed = all_pass;
  out.record["status"] = all_pass ? "pass" : "fail";
  out.record["max_relative_residual"] = max_rel;
  out.record["scale"] = max_scale;
  return out;
}

// Recompute the axis/slanted scalar residual with finite-difference partials
// in place of the symbolic ones.
double axis_residual_fd(const ConformalFactor& cf, const Eigen::VectorXd& p) {
  const int m = 4;
  const ScalarField field = [&](const Eigen::VectorXd& q) {
    return cf.eval(cf.factor(), q);
  };
  const FDScheme scheme;
  const double f = field(p);
  Eigen::VectorXd grad(m + 1);
  for (int i = 0; i <= m; ++i) grad[i] = fd_partial(field, p, {i}, scheme);
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const double fii = fd_partial(field, p, {i, i}, scheme);
    const double fiz = fd_partial(field, p, {i, m}, scheme);
    const double fiiz = fd_partial(field, p, {i, i, m}, scheme);
    sum += f * f * fiiz - 2.0 * f * grad[i] * fiz + f * grad[m] * fii -
           4.0 * grad[m] * grad[i] * grad[i];
  }
  const double fzz = fd_partial(field, p, {m, m}, scheme);
  sum += 4.0 * grad[m] * (f * fzz - 2.0 * grad[m] * grad[m]);
  return sum;
}

CheckOutcome run_one_check(const RunContext& ctx, const std::string& name) {
  const RunConfig& config = ctx.config;
  const Tolerances& tol = config.tolerances;
  const int m = config.dimension_m;

  if (name == "classify") {
    CheckOutcome out;
    out.record = base_record(name, "", config);
    const Classification c =
        classify(ctx.cf, ctx.hs, ctx.box, config.samples, config.seed, tol);
    out.record["equation"] = c.equation;
    out.record["max_relative_residual"] = c.max_relative_residual;
    out.record["classification"] = to_json(c);
    out.passed = c.verdict == Verdict::Minimal ||
                 c.verdict == Verdict::ProperBiharmonic;
    out.indeterminate = c.verdict == Verdict::Indeterminate;
    out.record["status"] =
        out.indeterminate ? "indeterminate" : (out.passed ? "pass" : "fail");
    return out;
  }

  if (name == "scan_curvature") {
    CheckOutcome out;
    out.record = base_record(name, "sectional", config);
    if (!config.box) throw InvalidInput("scan_curvature needs a domain_box");
    const CurvatureReport r = scan_sectional_curvature(ctx.cf, *config.box,
                                                       config.samples, config.seed);
    out.record["curvature"] = to_json(r);
    out.passed = r.nonnegative_count == 0;
    out.record["status"] = out.passed ? "pass" : "fail";
    if (config.oracle) {
      // cross-check a handful of sections against the brute-force tensor
      const MetricField metric = [&](const Eigen::VectorXd& q) {
        const double fq = ctx.cf.value(q);
        return Eigen::MatrixXd(
            Eigen::MatrixXd::Identity(q.size(), q.size()) / (fq * fq));
      };
      double max_diff = 0.0;
      const int probes = std::min(10, static_cast<int>(r.worst.size()));
      for (int i = 0; i < probes; ++i) {
        const auto& o = r.worst[i];
        const double k_fd =
            sectional_bruteforce(metric, o.point, o.a, o.b, FDScheme{});
        max_diff = std::max(max_diff, std::abs(k_fd - o.k));
      }
      out.record["oracle_max_diff"] = max_diff;
    }
    return out;
  }

  if (name == "case_analysis") {
    CheckOutcome out;
    out.record = base_record(name, "trichotomy", config);
    if (!ctx.axis_plane())
      throw InvalidInput("case_analysis needs an axis-aligned hyperplane");
    // with normal = +-e_z, the plane is z = offset * normal_z
    const double z_level = ctx.hs.plane().offset * ctx.hs.plane().normal[m];
    const HyperplaneCaseReport r = hyperplane_case_analysis(
        ctx.cf, m, z_level, ctx.box, config.samples, config.seed, tol);
    out.record["case_analysis"] = to_json(r);
    out.passed = r.biharmonic;
    out.record["status"] = out.passed ? "pass" : "fail";
    return out;
  }

  SurfaceGeometry geom(ctx.hs);
  const auto points =
      sample_chart_points(ctx.cf, geom, ctx.box, config.samples, config.seed);

  if (name == "minimal_base") {
    MinimalBaseResidual eval(ctx.cf, ctx.hs);
    auto out = run_residual_check(
        ctx, name, "minimal_base", geom, points,
        [&](const Eigen::VectorXd& u) { return eval.at(u); });
    if (config.oracle) {
      double max_diff = 0.0;
      const int probes = std::min<std::size_t>(10, points.size());
      for (int i = 0; i < probes; ++i) {
        const ShapeData shape = geom.shape_at(points[i]);
        const auto [h_fd, n_fd] =
            barred_shape_bruteforce(ctx.cf, ctx.hs, points[i], FDScheme{});
        max_diff = std::max(
            max_diff, std::abs(h_fd - conformal_mean_curvature(ctx.cf, shape)));
        max_diff = std::max(
            max_diff, std::abs(n_fd - conformal_shape_norm(ctx.cf, shape)));
      }
      out.record["oracle_max_diff"] = max_diff;
    }
    return out;
  }

  if (name == "conformal") {
    ConformalResidual eval(ctx.cf, ctx.hs);
    return run_residual_check(
        ctx, name, "conformal", geom, points,
        [&](const Eigen::VectorXd& u) { return eval.at(u); });
  }

  if (name == "axis_hyperplane_m4") {
    if (m != 4) throw InvalidInput("axis_hyperplane_m4 requires m = 4");
    if (!ctx.axis_plane())
      throw InvalidInput("axis_hyperplane_m4 needs an axis-aligned hyperplane");
    const double offset = ctx.hs.plane().normal[m] > 0 ? ctx.hs.plane().offset
                                                       : -ctx.hs.plane().offset;
    auto out = run_residual_check(
        ctx, name, "axis_m4", geom, points, [&](const Eigen::VectorXd& u) {
          return residual_axis_hyperplane_m4(ctx.cf, offset, geom.embed(u));
        });
    if (config.oracle) {
      double max_diff = 0.0;
      const int probes = std::min<std::size_t>(10, points.size());
      for (int i = 0; i < probes; ++i) {
        const Eigen::VectorXd p = geom.embed(points[i]);
        const auto r = residual_axis_hyperplane_m4(ctx.cf, offset, p);
        max_diff = std::max(max_diff,
                            std::abs(axis_residual_fd(ctx.cf, p) - r.normal));
      }
      out.record["oracle_max_diff"] = max_diff;
    }
    return out;
  }

  if (name == "separable_cmc") {
    if (!ctx.axis_plane())
      throw InvalidInput("separable_cmc needs an axis-aligned hyperplane");
    const double offset = ctx.hs.plane().normal[m] > 0 ? ctx.hs.plane().offset
                                                       : -ctx.hs.plane().offset;
    // reference-point split f = p(x) + q(z)
    Eigen::VectorXd center = 0.5 * (ctx.box.lower + ctx.box.upper);
    center[m] = offset;
    std::vector<Expression> to_q(m + 1), to_p(m + 1);
    for (int i = 0; i < m; ++i) {
      to_q[i] = Expression::number(center[i]);
      to_p[i] = Expression::coordinate(i);
    }
    to_q[m] = Expression::coordinate(m);
    to_p[m] = Expression::number(offset);
    const Expression q_field =
        ctx.cf.factor().substitute_coordinates(to_q).simplify();
    const Expression p_raw =
        ctx.cf.factor().substitute_coordinates(to_p).simplify();
    const double split_const = ctx.cf.eval(p_raw, center);
    const Expression p_field =
        Expression::sub(p_raw, Expression::number(split_const)).simplify();
    return run_residual_check(
        ctx, name, "separable_cmc", geom, points, [&](const Eigen::VectorXd& u) {
          return residual_separable_cmc(p_field, q_field, ctx.coords,
                                        ctx.cf.params(), geom.embed(u));
        });
  }

  if (name == "slanted_fz") {
    const Eigen::VectorXd slope = ctx.slanted_slope();
    auto out = run_residual_check(
        ctx, name, "slanted_fz", geom, points, [&](const Eigen::VectorXd& u) {
          return residual_slanted_fz(ctx.cf.factor(), ctx.coords,
                                     ctx.cf.params(), slope, geom.embed(u));
        });
    if (config.oracle) {
      const ScalarField field = [&](const Eigen::VectorXd& q) {
        return ctx.cf.eval(ctx.cf.factor(), q);
      };
      const double s = slope.squaredNorm();
      double max_diff = 0.0;
      const int probes = std::min<std::size_t>(10, points.size());
      const int zi = m;
      for (int i = 0; i < probes; ++i) {
        const Eigen::VectorXd p = geom.embed(points[i]);
        const double f = field(p);
        const double f1 = fd_partial(field, p, {zi});
        const double f2 = fd_partial(field, p, {zi, zi});
        const double f3 = fd_partial(field, p, {zi, zi, zi});
        const double fd_res = s * f * f * f3 + (4.0 - s) * f * f1 * f2 -
                              4.0 * (2.0 + s) * f1 * f1 * f1;
        const auto r = residual_slanted_fz(ctx.cf.factor(), ctx.coords,
                                           ctx.cf.params(), slope, p);
        max_diff = std::max(max_diff, std::abs(fd_res - r.normal));
      }
      out.record["oracle_max_diff"] = max_diff;
    }
    return out;
  }

  if (name == "cmc") {
    CmcResidual eval(ctx.cf, ctx.hs);
    return run_residual_check(
        ctx, name, "cmc", geom, points,
        [&](const Eigen::VectorXd& u) { return eval.at(u, tol).residual; });
  }

  if (name == "umbilical") {
    SurfaceGeometry g2(ctx.hs);
    const Expression h_bar =
        Expression::add(
            Expression::mul(g2.restrict_field(ctx.cf.factor()),
                            g2.mean_curvature_expr()),
            g2.normal_derivative_expr(ctx.cf))
            .simplify();
    UmbilicalResidual eval(ctx.cf, ChartField{h_bar}, ctx.hs);
    return run_residual_check(
        ctx, name, "umbilical", geom, points,
        [&](const Eigen::VectorXd& u) { return eval.at(u, tol).residual; });
  }

  throw InvalidInput("unknown check '" + name + "'");
}

}  // namespace

RunOutcome run_checks(const RunConfig& config) {
  RunOutcome outcome;
  outcome.report["tool_version"] = kToolVersion;
  outcome.report["config_hash"] = config_hash(config);
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  try {
    const RunContext ctx = RunContext::build(config);
    bool any_fail = false;
    for (const auto& name : config.checks) {
      const CheckOutcome out = run_one_check(ctx, name);
      records.push_back(out.record);
      if (!out.passed) any_fail = true;
    }
    outcome.report["checks"] = records;
    outcome.exit_code = any_fail ? 1 : 0;
  } catch (const ParseError& e) {
    outcome.report["checks"] = records;
    outcome.report["error"] = std::string("expression error: ") + e.what();
    outcome.exit_code = 2;
  } catch (const InvalidInput& e) {
    outcome.report["checks"] = records;
    outcome.report["error"] = std::string("configuration error: ") + e.what();
    outcome.exit_code = 2;
  } catch (const RegionExhausted& e) {
    outcome.report["checks"] = records;
    outcome.report["error"] = e.what();
    outcome.exit_code = 3;
  } catch (const DomainError& e) {
    outcome.report["checks"] = records;
    outcome.report["error"] = std::string("domain error: ") + e.what();
    outcome.exit_code = 3;
  }
  return outcome;
}

std::string derive_text(const RunConfig& config) {
  const CoordinateSystem coords = CoordinateSystem::ambient(config.dimension_m);
  const Expression f = parse_expression(config.factor_text, coords);
  const ConformalFactor cf(f, coords, config.parameters);
  const int m = config.dimension_m;
  using E = Expression;

  bool z_only = true;
  for (int i = 0; i < m; ++i) z_only = z_only && !f.depends_on_coordinate(i);

  if (!config.is_plane)
    throw InvalidInput("derive supports hyperplane configurations only");
  const Hypersurface hs =
      Hypersurface::hyperplane(config.plane_normal, config.plane_offset);
  bool axis = true;
  for (int i = 0; i < m; ++i)
    axis = axis && std::abs(hs.plane().normal[i]) < 1e-12;

  if (!axis && z_only) {
    // slanted path: s f^2 f''' + (4 - s) f f' f'' - 4 (2 + s) (f')^3
    Eigen::VectorXd slope(m);
    if (std::abs(hs.plane().normal[m]) < 1e-9)
      throw InvalidInput("hyperplane is parallel to the z axis");
    for (int i = 0; i < m; ++i)
      slope[i] = -hs.plane().normal[i] / hs.plane().normal[m];
    const double s = slope.squaredNorm();
    const Expression d1 = f.differentiate(m).simplify();
    const Expression d2 = d1.differentiate(m).simplify();
    const Expression d3 = d2.differentiate(m).simplify();
    const Expression expr =
        (E::number(s) * f * f * d3 + E::number(4.0 - s) * f * d1 * d2 -
         E::number(4.0 * (2.0 + s)) * d1 * d1 * d1)
            .simplify();
    return expr.format(coords);
  }

  if (axis && m == 4) {
    const Expression fz = f.differentiate(m).simplify();
    Expression sum = E::number(0.0);
    for (int i = 0; i < m; ++i) {
      const Expression fi = f.differentiate(i).simplify();
      const Expression fii = fi.differentiate(i).simplify();
      const Expression fiz = fi.differentiate(m).simplify();
      const Expression fiiz = fii.differentiate(m).simplify();
      sum = sum + f * f * fiiz - 2.0 * f * fi * fiz + f * fz * fii -
            4.0 * fz * fi * fi;
    }
    const Expression fzz = fz.differentiate(m).simplify();
    const Expression expr =
        (sum + 4.0 * fz * (f * fzz - 2.0 * fz * fz)).simplify();
    return expr.format(coords);
  }

  throw InvalidInput(
      "derive supports the axis-aligned m = 4 path and the slanted z-factor path");
}

}  // namespace bhv
