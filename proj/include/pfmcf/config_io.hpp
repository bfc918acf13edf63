#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "pfmcf/error.hpp"
#include "pfmcf/field_io.hpp"
#include "pfmcf/stepper.hpp"

namespace pfmcf {

using json = nlohmann::json;

namespace detail {

inline void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                       const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError(where + "." + key, "unknown field");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key, e.what());
  }
}

template <class T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + "." + key, "required field missing");
  return get_or<T>(j, key, T{}, where);
}

inline Point point_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() < 2 || j.size() > 3) {
    throw ConfigError(where, "expected an array of 2 or 3 numbers");
  }
  Point p{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw ConfigError(where, "expected numbers");
    p[k] = j[k].get<double>();
  }
  return p;
}

inline json point_to_json(const Point& p, int dim) {
  json a = json::array();
  for (int k = 0; k < dim; ++k) a.push_back(p[k]);
  return a;
}

inline Circle circle_from_json(const json& j, const std::string& where) {
  check_keys(j, {"kind", "center", "radius"}, where);
  Circle c;
  if (j.contains("center")) c.center = point_from_json(j["center"], where + ".center");
  c.radius = require<double>(j, "radius", where);
  return c;
}

}  // namespace detail

inline ShapeSpec shape_from_json(const json& j) {
  const std::string where = "shape";
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  const auto kind = detail::require<std::string>(j, "kind", where);
  if (kind == "circle" || kind == "sphere") return detail::circle_from_json(j, where);
  if (kind == "union_of_circles") {
    detail::check_keys(j, {"kind", "circles"}, where);
    CircleUnion u;
    if (!j.contains("circles") || !j["circles"].is_array()) {
      throw ConfigError(where + ".circles", "expected an array");
    }
    for (std::size_t i = 0; i < j["circles"].size(); ++i) {
      u.circles.push_back(detail::circle_from_json(j["circles"][i], where + ".circles[" + std::to_string(i) + "]"));
    }
    return u;
  }
  if (kind == "torus") {
    detail::check_keys(j, {"kind", "center", "major_radius", "minor_radius"}, where);
    Torus t;
    if (j.contains("center")) t.center = detail::point_from_json(j["center"], where + ".center");
    t.major_radius = detail::require<double>(j, "major_radius", where);
    t.minor_radius = detail::require<double>(j, "minor_radius", where);
    return t;
  }
  throw ConfigError("shape.kind", "unknown shape '" + kind + "'");
}

inline json shape_to_json(const ShapeSpec& shape, int dim) {
  struct Visitor {
    int dim;
    json operator()(const Circle& c) const {
      return {{"kind", "circle"}, {"center", detail::point_to_json(c.center, dim)}, {"radius", c.radius}};
    }
    json operator()(const CircleUnion& u) const {
      json circles = json::array();
      for (const auto& c : u.circles) {
        circles.push_back({{"center", detail::point_to_json(c.center, dim)}, {"radius", c.radius}});
      }
      return {{"kind", "union_of_circles"}, {"circles", circles}};
    }
    json operator()(const Torus& t) const {
      return {{"kind", "torus"},
              {"center", detail::point_to_json(t.center, dim)},
              {"major_radius", t.major_radius},
              {"minor_radius", t.minor_radius}};
    }
  };
  return std::visit(Visitor{dim}, shape);
}

/// `base_dir` resolves relative paths of sampled forcing dumps.
inline ForcingSpec forcing_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  const std::string where = "forcing";
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  const auto kind = detail::require<std::string>(j, "kind", where);
  if (kind == "none") {
    detail::check_keys(j, {"kind"}, where);
    return NoForcing{};
  }
  if (kind == "constant") {
    detail::check_keys(j, {"kind", "c_g"}, where);
    return ConstantForcing{detail::require<double>(j, "c_g", where)};
  }
  if (kind == "radial_cosine") {
    detail::check_keys(j, {"kind", "c_g", "frequency"}, where);
    return RadialCosineForcing{detail::require<double>(j, "c_g", where),
                               detail::get_or<double>(j, "frequency", 8.0, where)};
  }
  if (kind == "sampled") {
    detail::check_keys(j, {"kind", "path"}, where);
    std::filesystem::path p = detail::require<std::string>(j, "path", where);
    if (p.is_relative()) p = base_dir / p;
    try {
      return SampledForcing{read_field_dump(p)};
    } catch (const std::runtime_error& e) {
      throw ConfigError("forcing.path", e.what());
    }
  }
  throw ConfigError("forcing.kind", "unknown forcing '" + kind + "'");
}

inline json forcing_to_json(const ForcingSpec& f) {
  struct Visitor {
    json operator()(const NoForcing&) const { return {{"kind", "none"}}; }
    json operator()(const ConstantForcing& c) const { return {{"kind", "constant"}, {"c_g", c.cg}}; }
    json operator()(const RadialCosineForcing& r) const {
      return {{"kind", "radial_cosine"}, {"c_g", r.cg}, {"frequency", r.frequency}};
    }
    json operator()(const SampledForcing&) const { return {{"kind", "sampled"}}; }
  };
  return std::visit(Visitor{}, f);
}

/// Parses a SimConfig. Fields missing from `j` keep the values of `defaults`;
/// invariants are not checked here (call validate()).
inline SimConfig sim_config_from_json(const json& j, SimConfig defaults = {},
                                      const std::filesystem::path& base_dir = {}) {
  const std::string where = "cfg";
  detail::check_keys(j, {"grid", "eps", "dt", "t_end", "form", "forcing", "shape", "observe_every",
                         "stop_on_extinction", "extinction_probe"},
                     where);
  SimConfig c = std::move(defaults);
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    detail::check_keys(g, {"dim", "p"}, "grid");
    c.grid.dim = detail::get_or<int>(g, "dim", c.grid.dim, "grid");
    c.grid.p = detail::get_or<int>(g, "p", c.grid.p, "grid");
  }
  c.eps = detail::get_or<double>(j, "eps", c.eps, where);
  c.dt = detail::get_or<double>(j, "dt", c.dt, where);
  c.t_end = detail::get_or<double>(j, "t_end", c.t_end, where);
  if (j.contains("form")) c.form = reaction_form_from_string(detail::require<std::string>(j, "form", where));
  if (j.contains("forcing")) c.forcing = forcing_from_json(j["forcing"], base_dir);
  if (j.contains("shape")) c.shape = shape_from_json(j["shape"]);
  c.observe_every = detail::get_or<int>(j, "observe_every", c.observe_every, where);
  c.stop_on_extinction = detail::get_or<bool>(j, "stop_on_extinction", c.stop_on_extinction, where);
  if (j.contains("extinction_probe")) {
    if (j["extinction_probe"].is_null()) {
      c.extinction_probe.reset();
    } else {
      c.extinction_probe = detail::point_from_json(j["extinction_probe"], "extinction_probe");
    }
  }
  return c;
}

inline json sim_config_to_json(const SimConfig& c) {
  json j{{"grid", {{"dim", c.grid.dim}, {"p", c.grid.p}}},
         {"eps", c.eps},
         {"dt", c.dt},
         {"t_end", c.t_end},
         {"form", std::string(to_string(c.form))},
         {"forcing", forcing_to_json(c.forcing)},
         {"shape", shape_to_json(c.shape, c.grid.dim)},
         {"observe_every", c.observe_every},
         {"stop_on_extinction", c.stop_on_extinction}};
  if (c.extinction_probe) j["extinction_probe"] = detail::point_to_json(*c.extinction_probe, c.grid.dim);
  return j;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config", "cannot open " + path.string());
  try {
    return json::parse(is, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", path.string() + ": " + e.what());
  }
}

}  // namespace pfmcf
