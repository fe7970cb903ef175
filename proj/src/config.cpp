#include "bhv/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace bhv {

namespace {

Eigen::VectorXd vector_from(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw InvalidInput(std::string("config: ") + what + " must be a non-empty array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw InvalidInput(std::string("config: ") + what + " must be numeric");
    v[i] = j[i].get<double>();
  }
  return v;
}

DomainBox box_from(const nlohmann::json& j, const char* what) {
  DomainBox box;
  if (!j.contains("lower") || !j.contains("upper"))
    throw InvalidInput(std::string("config: ") + what + " needs lower and upper");
  box.lower = vector_from(j.at("lower"), what);
  box.upper = vector_from(j.at("upper"), what);
  if (j.contains("margin")) box.margin = j.at("margin").get<double>();
  box.validate();
  return box;
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> checks = {
      "classify",      "case_analysis", "scan_curvature",
      "minimal_base",  "conformal",     "axis_hyperplane_m4",
      "separable_cmc", "slanted_fz",    "cmc",
      "umbilical"};
  return checks;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  try {
    return from_json_checked(j);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("config: " + std::string(e.what()));
  }
}

RunConfig RunConfig::from_json_checked(const nlohmann::json& j) {
  RunConfig config;
  if (!j.contains("dimension_m"))
    throw InvalidInput("config: dimension_m is required");
  config.dimension_m = j.at("dimension_m").get<int>();
  if (config.dimension_m < 1)
    throw InvalidInput("config: dimension_m must be >= 1");

  if (j.contains("parameters")) {
    for (const auto& [name, value] : j.at("parameters").items()) {
      if (!value.is_number())
        throw InvalidInput("config: parameter '" + name + "' must be numeric");
      config.parameters.set(name, value.get<double>());
    }
  }

  if (!j.contains("conformal_factor"))
    throw InvalidInput("config: conformal_factor is required");
  config.factor_text = j.at("conformal_factor").get<std::string>();

  if (!j.contains("hypersurface"))
    throw InvalidInput("config: hypersurface is required");
  const auto& hj = j.at("hypersurface");
  const std::string type = hj.value("type", "hyperplane");
  if (type == "hyperplane") {
    config.is_plane = true;
    config.plane_normal = vector_from(hj.at("normal"), "hypersurface normal");
    if (config.plane_normal.size() != config.dimension_m + 1)
      throw InvalidInput("config: hyperplane normal must have length m + 1");
    config.plane_offset = hj.at("offset").get<double>();
  } else if (type == "patch") {
    config.is_plane = false;
    if (!hj.contains("maps") || !hj.at("maps").is_array())
      throw InvalidInput("config: patch maps must be an array of expressions");
    for (const auto& s : hj.at("maps"))
      config.patch_maps.push_back(s.get<std::string>());
    if (static_cast<int>(config.patch_maps.size()) != config.dimension_m + 1)
      throw InvalidInput("config: patch needs m + 1 map expressions");
    config.patch_box = box_from(hj, "patch parameter box");
    if (config.patch_box.dim() != config.dimension_m)
      throw InvalidInput("config: patch box must have dimension m");
  } else {
    throw InvalidInput("config: hypersurface type must be hyperplane or patch");
  }

  if (j.contains("domain_box"))
    config.box = box_from(j.at("domain_box"), "domain box");
  if (config.is_plane && !config.box)
    throw InvalidInput("config: hyperplane runs need a domain_box");
  if (config.box && config.box->dim() != config.dimension_m + 1)
    throw InvalidInput("config: domain_box must have dimension m + 1");

  config.samples = j.value("samples", 100);
  if (config.samples < 1) throw InvalidInput("config: samples must be >= 1");
  config.seed = j.value("seed", std::uint64_t{0});

  if (!j.contains("checks") || !j.at("checks").is_array() || j.at("checks").empty())
    throw InvalidInput("config: checks must be a non-empty array");
  for (const auto& c : j.at("checks")) {
    const std::string name = c.get<std::string>();
    bool known = false;
    for (const auto& k : known_checks()) known = known || k == name;
    if (!known) throw InvalidInput("config: unknown check '" + name + "'");
    config.checks.push_back(name);
  }

  if (j.contains("tolerances")) {
    const auto& tj = j.at("tolerances");
    config.tolerances.abs = tj.value("abs", config.tolerances.abs);
    config.tolerances.rel = tj.value("rel", config.tolerances.rel);
    config.tolerances.rel_numeric =
        tj.value("rel_numeric", config.tolerances.rel_numeric);
    config.tolerances.mean_curvature =
        tj.value("mean_curvature", config.tolerances.mean_curvature);
  }
  return config;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("config file is not valid JSON: " + std::string(e.what()));
  }
  return from_json(j);
}

nlohmann::ordered_json RunConfig::canonical() const {
  nlohmann::ordered_json j;
  j["dimension_m"] = dimension_m;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [name, value] : parameters.values()) params[name] = value;
  j["parameters"] = params;
  j["conformal_factor"] = factor_text;
  nlohmann::ordered_json h;
  if (is_plane) {
    h["type"] = "hyperplane";
    h["normal"] = std::vector<double>(plane_normal.data(),
                                      plane_normal.data() + plane_normal.size());
    h["offset"] = plane_offset;
  } else {
    h["type"] = "patch";
    h["maps"] = patch_maps;
    h["lower"] = std::vector<double>(patch_box.lower.data(),
                                     patch_box.lower.data() + patch_box.lower.size());
    h["upper"] = std::vector<double>(patch_box.upper.data(),
                                     patch_box.upper.data() + patch_box.upper.size());
    h["margin"] = patch_box.margin;
  }
  j["hypersurface"] = h;
  if (box) {
    nlohmann::ordered_json b;
    b["lower"] = std::vector<double>(box->lower.data(),
                                     box->lower.data() + box->lower.size());
    b["upper"] = std::vector<double>(box->upper.data(),
                                     box->upper.data() + box->upper.size());
    b["margin"] = box->margin;
    j["domain_box"] = b;
  }
  j["samples"] = samples;
  j["seed"] = seed;
  j["checks"] = checks;
  nlohmann::ordered_json t;
  t["abs"] = tolerances.abs;
  t["rel"] = tolerances.rel;
  t["rel_numeric"] = tolerances.rel_numeric;
  t["mean_curvature"] = tolerances.mean_curvature;
  j["tolerances"] = t;
  return j;
}

// ---------------------------------------------------------------------------
// 17-significant-digit JSON writer

namespace {

void escape_string(const std::string& s, std::string& out) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void dump_value(const nlohmann::ordered_json& j, int indent, int depth,
                std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  switch (j.type()) {
    case nlohmann::ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        escape_string(key, out);
        out += ": ";
        dump_value(value, indent, depth + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_value(value, indent, depth + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::ordered_json::value_t::string:
      escape_string(j.get<std::string>(), out);
      return;
    case nlohmann::ordered_json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case nlohmann::ordered_json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      return;
    case nlohmann::ordered_json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      return;
    case nlohmann::ordered_json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += "null";
      return;
  }
}

}  // namespace

std::string dump_json_17(const nlohmann::ordered_json& j, int indent) {
  std::string out;
  dump_value(j, indent, 0, out);
  out += "\n";
  return out;
}

std::string config_hash(const RunConfig& config) {
  const std::string text = dump_json_17(config.canonical(), 0);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::ordered_json to_json(const Classification& c) {
  nlohmann::ordered_json j;
  j["verdict"] = verdict_name(c.verdict);
  j["max_abs_mean_curvature"] = c.max_abs_mean_curvature;
  j["max_relative_residual"] = c.max_relative_residual;
  j["sample_count"] = c.sample_count;
  j["informative_count"] = c.informative_count;
  j["seed"] = c.seed;
  j["equation"] = c.equation;
  return j;
}

nlohmann::ordered_json to_json(const CurvatureReport& r) {
  nlohmann::ordered_json j;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["min_k"] = r.min_k;
  j["max_k"] = r.max_k;
  j["mean_k"] = r.mean_k;
  j["nonnegative_count"] = r.nonnegative_count;
  nlohmann::ordered_json worst = nlohmann::ordered_json::array();
  for (const auto& o : r.worst) {
    nlohmann::ordered_json w;
    w["point"] = std::vector<double>(o.point.data(), o.point.data() + o.point.size());
    w["a"] = std::vector<double>(o.a.data(), o.a.data() + o.a.size());
    w["b"] = std::vector<double>(o.b.data(), o.b.data() + o.b.size());
    w["k"] = o.k;
    worst.push_back(w);
  }
  j["worst"] = worst;
  return j;
}

nlohmann::ordered_json to_json(const HyperplaneCaseReport& r) {
  nlohmann::ordered_json j;
  j["minimal_case"] = r.minimal_case;
  j["axis_equation_case"] = r.axis_equation_case;
  j["separable_cmc_case"] = r.separable_cmc_case;
  j["axis_applicable"] = r.axis_applicable;
  j["biharmonic"] = r.biharmonic;
  j["max_abs_fz"] = r.max_abs_fz;
  j["max_rel_axis_residual"] = r.max_rel_axis_residual;
  j["max_abs_fzi"] = r.max_abs_fzi;
  j["max_rel_separable_residual"] = r.max_rel_separable_residual;
  j["separable"] = r.separable;
  j["mean_curvature"] = r.mean_curvature;
  j["sample_count"] = r.sample_count;
  j["seed"] = r.seed;
  return j;
}

}  // namespace bhv
