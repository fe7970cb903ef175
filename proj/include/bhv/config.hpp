#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bhv/biharmonic.hpp"
#include "bhv/geometry.hpp"

namespace bhv {

inline constexpr const char* kToolVersion = "0.1.0";

// One run request: the conformal factor, the hypersurface, the sampling box,
// and the checks to execute.
struct RunConfig {
  int dimension_m = 0;
  ParameterBinding parameters;
  std::string factor_text;

  bool is_plane = true;
  Eigen::VectorXd plane_normal;
  double plane_offset = 0.0;
  std::vector<std::string> patch_maps;
  DomainBox patch_box;

  std::optional<DomainBox> box;  // ambient; required for hyperplanes
  int samples = 100;
  std::uint64_t seed = 0;
  std::vector<std::string> checks;
  Tolerances tolerances;
  bool oracle = false;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);

 private:
  static RunConfig from_json_checked(const nlohmann::json& j);

 public:
  // Canonical echo of the parsed configuration; hashed into the report.
  nlohmann::ordered_json canonical() const;
};

const std::vector<std::string>& known_checks();

// JSON text with every floating-point number rendered at 17 significant
// digits, so reports are reproducible and diffable byte for byte.
std::string dump_json_17(const nlohmann::ordered_json& j, int indent = 2);

std::string config_hash(const RunConfig& config);

nlohmann::ordered_json to_json(const Classification& c);
nlohmann::ordered_json to_json(const CurvatureReport& r);
nlohmann::ordered_json to_json(const HyperplaneCaseReport& r);

}  // namespace bhv
