#include "doctest.h"

#include <cmath>
#include <string>

#include "bhv/config.hpp"
#include "bhv/runner.hpp"

using namespace bhv;

namespace {

std::string data_file(const std::string& name) {
  return std::string(TEST_DATA_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  const RunConfig config = RunConfig::from_file(data_file("power_root.json"));
  CHECK(config.dimension_m == 4);
  CHECK(config.parameters.get("t") == -1.0);
  CHECK(config.is_plane);
  CHECK(config.plane_offset == 2.0);
  CHECK(config.samples == 120);
  CHECK(config.seed == 42);
  CHECK(config.checks.size() == 5);

  SUBCASE("rejects unknown checks") {
    nlohmann::json j = nlohmann::json::parse(R"({
      "dimension_m": 2, "conformal_factor": "1",
      "hypersurface": {"type": "hyperplane", "normal": [0,0,1], "offset": 0},
      "domain_box": {"lower": [-1,-1,-1], "upper": [1,1,1]},
      "checks": ["nonsense"]})");
    CHECK_THROWS_AS(RunConfig::from_json(j), InvalidInput);
  }
  SUBCASE("rejects missing boxes for hyperplanes") {
    nlohmann::json j = nlohmann::json::parse(R"({
      "dimension_m": 2, "conformal_factor": "1",
      "hypersurface": {"type": "hyperplane", "normal": [0,0,1], "offset": 0},
      "checks": ["classify"]})");
    CHECK_THROWS_AS(RunConfig::from_json(j), InvalidInput);
  }
  SUBCASE("rejects bad dimensions") {
    nlohmann::json j = nlohmann::json::parse(R"({
      "dimension_m": 2, "conformal_factor": "1",
      "hypersurface": {"type": "hyperplane", "normal": [0,1], "offset": 0},
      "domain_box": {"lower": [-1,-1,-1], "upper": [1,1,1]},
      "checks": ["classify"]})");
    CHECK_THROWS_AS(RunConfig::from_json(j), InvalidInput);
  }
  SUBCASE("rejects nonpositive sample counts") {
    nlohmann::json j = nlohmann::json::parse(R"({
      "dimension_m": 2, "conformal_factor": "1", "samples": 0,
      "hypersurface": {"type": "hyperplane", "normal": [0,0,1], "offset": 0},
      "domain_box": {"lower": [-1,-1,-1], "upper": [1,1,1]},
      "checks": ["classify"]})");
    CHECK_THROWS_AS(RunConfig::from_json(j), InvalidInput);
  }
  SUBCASE("type mismatches surface as configuration errors") {
    nlohmann::json j = nlohmann::json::parse(R"({
      "dimension_m": 2, "conformal_factor": "1", "samples": "many",
      "hypersurface": {"type": "hyperplane", "normal": [0,0,1], "offset": 0},
      "domain_box": {"lower": [-1,-1,-1], "upper": [1,1,1]},
      "checks": ["classify"]})");
    CHECK_THROWS_AS(RunConfig::from_json(j), InvalidInput);
  }
}

TEST_CASE("exit-code contract on the golden configs") {
  SUBCASE("passing run") {
    const RunOutcome out =
        run_checks(RunConfig::from_file(data_file("power_root.json")));
    CHECK(out.exit_code == 0);
    const auto& checks = out.report.at("checks");
    REQUIRE(checks.size() == 5);
    for (const auto& record : checks) CHECK(record.at("status") == "pass");
    CHECK(checks[0].at("classification").at("verdict") == "proper_biharmonic");
  }

  SUBCASE("failing run") {
    const RunOutcome out =
        run_checks(RunConfig::from_file(data_file("power_nonroot.json")));
    CHECK(out.exit_code == 1);
    CHECK(out.report.at("checks")[0].at("classification").at("verdict") ==
          "not_biharmonic");
  }

  SUBCASE("expression error") {
    const RunOutcome out =
        run_checks(RunConfig::from_file(data_file("bad_expression.json")));
    CHECK(out.exit_code == 2);
    const std::string error = out.report.at("error");
    CHECK(error.find("offset 4") != std::string::npos);
  }

  SUBCASE("inverse-linear run passes every residual check") {
    const RunOutcome out =
        run_checks(RunConfig::from_file(data_file("inverse_linear.json")));
    CHECK(out.exit_code == 0);
    for (const auto& record : out.report.at("checks"))
      CHECK(record.at("status") == "pass");
  }

  SUBCASE("curvature scan passes with strictly negative curvature") {
    const RunOutcome out =
        run_checks(RunConfig::from_file(data_file("curvature_scan.json")));
    CHECK(out.exit_code == 0);
    const auto& scan = out.report.at("checks")[0];
    CHECK(scan.at("curvature").at("max_k").get<double>() < 0.0);
    CHECK(scan.at("curvature").at("nonnegative_count").get<int>() == 0);
  }

  SUBCASE("catenoid patch is not biharmonic for a z-factor") {
    const RunOutcome out =
        run_checks(RunConfig::from_file(data_file("catenoid_patch.json")));
    CHECK(out.exit_code == 1);
    CHECK(out.report.at("checks")[0].at("classification").at("verdict") ==
          "not_biharmonic");
  }

  SUBCASE("region exhaustion maps to exit 3") {
    RunConfig config = RunConfig::from_file(data_file("inverse_linear.json"));
    // push the box onto the singular set z = -2
    config.box->lower[3] = -2.6;
    config.box->upper[3] = -1.4;
    config.plane_offset = -2.0;
    const RunOutcome out = run_checks(config);
    CHECK(out.exit_code == 3);
    CHECK(out.report.contains("error"));
  }
}

TEST_CASE("reports are byte-identical across runs") {
  const RunConfig config = RunConfig::from_file(data_file("power_root.json"));
  const RunOutcome a = run_checks(config);
  const RunOutcome b = run_checks(config);
  CHECK(dump_json_17(a.report) == dump_json_17(b.report));
}

TEST_CASE("json writer uses 17 significant digits") {
  nlohmann::ordered_json j;
  j["third"] = 1.0 / 3.0;
  j["nested"] = {{"v", 2.0000000000000004}};
  const std::string text = dump_json_17(j, 0);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
  CHECK(text.find("2.0000000000000004") != std::string::npos);
}

TEST_CASE("config hash is stable and sensitive") {
  const RunConfig a = RunConfig::from_file(data_file("power_root.json"));
  RunConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 43;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("derive prints the expanded residual") {
  SUBCASE("slanted path evaluates to zero on the solution family") {
    const RunConfig config =
        RunConfig::from_file(data_file("derive_slanted.json"));
    const std::string text = derive_text(config);
    CHECK(!text.empty());
    const CoordinateSystem cs = CoordinateSystem::ambient(4);
    const Expression expr = parse_expression(text, cs);
    for (double z : {0.0, 0.5, 1.3}) {
      Eigen::VectorXd p = Eigen::VectorXd::Zero(5);
      p[4] = z;
      const double v =
          expr.evaluate(std::span<const double>(p.data(), 5), config.parameters);
      CHECK(std::abs(v) < 1e-12);
    }
  }

  SUBCASE("constant factor collapses to the literal zero") {
    RunConfig config = RunConfig::from_file(data_file("power_root.json"));
    config.factor_text = "1";
    config.parameters = {};
    CHECK(derive_text(config) == "0");
  }

  SUBCASE("axis path is nonzero for a non-root exponent") {
    RunConfig config = RunConfig::from_file(data_file("power_nonroot.json"));
    const std::string text = derive_text(config);
    const CoordinateSystem cs = CoordinateSystem::ambient(4);
    const Expression expr = parse_expression(text, cs);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(5);
    p[4] = 2.0;
    CHECK(std::abs(expr.evaluate(std::span<const double>(p.data(), 5),
                                 config.parameters)) > 1e-6);
  }
}

TEST_CASE("oracle columns appear on request") {
  RunConfig config = RunConfig::from_file(data_file("power_root.json"));
  config.oracle = true;
  config.samples = 40;
  const RunOutcome out = run_checks(config);
  CHECK(out.exit_code == 0);
  bool found = false;
  for (const auto& record : out.report.at("checks")) {
    if (record.contains("oracle_max_diff")) {
      found = true;
      CHECK(record.at("oracle_max_diff").get<double>() < 1e-4);
    }
  }
  CHECK(found);
}
