#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "bhv/families.hpp"
#include "bhv/runner.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  int samples = -1;
  std::int64_t seed = -1;
  double tol_rel = -1.0;
  double tol_abs = -1.0;
  bool oracle = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
  auto* c = cmd->add_option("--config", opts.config_path, "JSON run configuration");
  if (config_required) c->required();
  cmd->add_option("--out", opts.out_path, "write the JSON report to this file");
  cmd->add_option("--samples", opts.samples, "override the sample count");
  cmd->add_option("--seed", opts.seed, "override the random seed");
  cmd->add_option("--tol-rel", opts.tol_rel, "override the relative tolerance");
  cmd->add_option("--tol-abs", opts.tol_abs, "override the absolute tolerance");
  cmd->add_flag("--oracle", opts.oracle,
                "add finite-difference cross-check columns to the report");
}

bhv::RunConfig load_config(const CommonOpts& opts) {
  bhv::RunConfig config = bhv::RunConfig::from_file(opts.config_path);
  if (opts.samples > 0) config.samples = opts.samples;
  if (opts.seed >= 0) config.seed = static_cast<std::uint64_t>(opts.seed);
  if (opts.tol_rel > 0) config.tolerances.rel = opts.tol_rel;
  if (opts.tol_abs > 0) config.tolerances.abs = opts.tol_abs;
  config.oracle = opts.oracle;
  return config;
}

int emit(const nlohmann::ordered_json& report, const std::string& out_path) {
  const std::string text = bhv::dump_json_17(report);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "cannot write report to '" << out_path << "'\n";
      return 2;
    }
    out << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical verifier for biharmonic hypersurfaces in conformally flat metrics"};
  app.require_subcommand(1);

  CommonOpts check_opts, scan_opts, derive_opts, family_opts;

  auto* check = app.add_subcommand("check", "run the checks listed in the config");
  add_common(check, check_opts, true);

  auto* scan = app.add_subcommand("scan-curvature",
                                  "sample sectional curvatures over the domain box");
  add_common(scan, scan_opts, true);

  auto* derive = app.add_subcommand(
      "derive", "print the expanded symbolic residual for the configured run");
  add_common(derive, derive_opts, true);

  auto* families_cmd =
      app.add_subcommand("families", "verify a built-in solution family");
  std::string family_name = "power_affine";
  double fa = 1.0, fb = 2.0, fc = 3.0, fd = 4.0, ft = -1.0;
  int family_m = 4;
  std::vector<double> slope;
  families_cmd->add_option("--family", family_name,
                           "power_affine | inverse_linear | product | slanted_inverse");
  families_cmd->add_option("--A", fa, "family parameter A");
  families_cmd->add_option("--B", fb, "family parameter B");
  families_cmd->add_option("--C", fc, "family parameter C");
  families_cmd->add_option("--D", fd, "family parameter D");
  families_cmd->add_option("--t", ft, "power family exponent");
  families_cmd->add_option("--m", family_m, "surface dimension");
  families_cmd->add_option("--slope", slope, "slanted family slope coefficients");
  add_common(families_cmd, family_opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) {
      const bhv::RunOutcome outcome = bhv::run_checks(load_config(check_opts));
      const int rc = emit(outcome.report, check_opts.out_path);
      return rc != 0 ? rc : outcome.exit_code;
    }

    if (scan->parsed()) {
      bhv::RunConfig config = load_config(scan_opts);
      config.checks = {"scan_curvature"};
      const bhv::RunOutcome outcome = bhv::run_checks(config);
      const int rc = emit(outcome.report, scan_opts.out_path);
      return rc != 0 ? rc : outcome.exit_code;
    }

    if (derive->parsed()) {
      const bhv::RunConfig config = load_config(derive_opts);
      std::cout << bhv::derive_text(config) << "\n";
      return 0;
    }

    if (families_cmd->parsed()) {
      bhv::SolutionFamily family = [&]() -> bhv::SolutionFamily {
        if (family_name == "power_affine") return bhv::PowerAffine{fa, fb, fc, ft};
        if (family_name == "inverse_linear") return bhv::InverseLinear{fa, fb};
        if (family_name == "product") return bhv::ProductExample{fa, fb, fc, fd};
        if (family_name == "slanted_inverse") {
          Eigen::VectorXd s = Eigen::VectorXd::Zero(family_m);
          for (int i = 0; i < std::min<int>(family_m, slope.size()); ++i)
            s[i] = slope[i];
          return bhv::SlantedInverse{fa, fb, s};
        }
        throw bhv::InvalidInput("unknown family '" + family_name + "'");
      }();

      bhv::DomainBox box;
      int samples = family_opts.samples > 0 ? family_opts.samples : 200;
      std::uint64_t seed =
          family_opts.seed >= 0 ? static_cast<std::uint64_t>(family_opts.seed) : 0;
      if (!family_opts.config_path.empty()) {
        const bhv::RunConfig config = load_config(family_opts);
        if (!config.box) throw bhv::InvalidInput("family config needs a domain_box");
        box = *config.box;
        samples = config.samples;
        seed = config.seed;
        family_m = config.dimension_m;
      } else {
        const int n = family_m + 1;
        box.lower = Eigen::VectorXd::Constant(n, 0.5);
        box.upper = Eigen::VectorXd::Constant(n, 1.5);
        box.lower[family_m] = 1.5;
        box.upper[family_m] = 2.5;
      }

      const bhv::FamilyReport report = bhv::verify_family(family, family_m, box,
                                                          samples, seed);
      nlohmann::ordered_json j;
      j["tool_version"] = bhv::kToolVersion;
      j["family"] = report.family;
      j["factor"] = report.factor_text;
      j["surface_dim"] = report.surface_dim;
      j["hyperplane_offset"] = report.hyperplane_offset;
      j["residual_equation"] = report.residual_equation;
      j["max_relative_residual"] = report.max_relative_residual;
      j["residual_zero"] = report.residual_zero;
      j["classification"] = bhv::to_json(report.classification);
      if (report.curvature) j["curvature"] = bhv::to_json(*report.curvature);
      if (report.ode_p_residual) j["ode_p_residual"] = *report.ode_p_residual;
      if (report.ode_q_residual) j["ode_q_residual"] = *report.ode_q_residual;
      if (report.alternate_reading_residual)
        j["alternate_reading_residual"] = *report.alternate_reading_residual;
      j["sample_count"] = report.sample_count;
      j["seed"] = report.seed;
      const int rc = emit(j, family_opts.out_path);
      if (rc != 0) return rc;
      const bool ok = report.residual_zero &&
                      report.classification.verdict != bhv::Verdict::NotBiharmonic;
      return ok ? 0 : 1;
    }
  } catch (const bhv::ParseError& e) {
    std::cerr << "expression error: " << e.what() << "\n";
    return 2;
  } catch (const bhv::InvalidInput& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const bhv::RegionExhausted& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const bhv::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
