#pragma once

#include <array>
#include <string>

#include "json.hpp"

#include "fpp/distribution.hpp"
#include "fpp/domain.hpp"
#include "fpp/errors.hpp"

// JSON forms of vertices, boxes, distributions and domain specs.
//   vertex        [x, y]
//   box           [x0, x1, y0, y1]
//   distribution  {"kind": "exponential", "rate": 1} and so on
//   domain        {"kind": "half-plane"} | {"kind": "slit-plane", "tip": v, "direction": "west"} | ...
namespace fpp::json_io {

using nlohmann::json;

namespace detail {

inline constexpr std::array<const char*, 8> kCompassNames = {"east", "northeast", "north", "northwest",
                                                             "west", "southwest", "south", "southeast"};

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace detail

inline json to_json(Vertex v) { return json::array({v.x, v.y}); }

inline Vertex vertex_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw ConfigError("vertex must be [x, y] with integer coordinates");
  return {j[0].get<int>(), j[1].get<int>()};
}

inline json box_to_json(const Box& b) { return json::array({b.x0, b.x1, b.y0, b.y1}); }

inline Box box_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ConfigError("box must be [x0, x1, y0, y1]");
  for (const auto& c : j)
    if (!c.is_number_integer()) throw ConfigError("box coordinates must be integers");
  const Box b{j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
  if (b.empty()) throw ConfigError("box is empty");
  return b;
}

inline std::string compass_name(Compass c) { return detail::kCompassNames[static_cast<int>(c)]; }

inline Compass compass_from(const json& j) {
  if (!j.is_string()) throw ConfigError("direction must be a compass name");
  const std::string s = j.get<std::string>();
  for (std::size_t i = 0; i < detail::kCompassNames.size(); ++i)
    if (s == detail::kCompassNames[i]) return static_cast<Compass>(i);
  throw ConfigError("unknown direction '" + s + "'");
}

inline json to_json(const ContinuousLaw& law) {
  return std::visit(fpp::detail::overloaded{
                        [](const Exponential& d) { return json{{"kind", "exponential"}, {"rate", d.rate}}; },
                        [](const Uniform& d) { return json{{"kind", "uniform"}, {"lo", d.lo}, {"hi", d.hi}}; },
                        [](const Pareto& d) { return json{{"kind", "pareto"}, {"shape", d.shape}, {"scale", d.scale}}; },
                    },
                    law);
}

inline json to_json(const DistributionSpec& dist) {
  return std::visit(fpp::detail::overloaded{
                        [](const TwoPoint& d) { return json{{"kind", "two-point"}, {"p", d.p}, {"a", d.a}, {"b", d.b}}; },
                        [](const ZeroAtom& d) { return json{{"kind", "zero-atom"}, {"p0", d.p0}, {"tail", to_json(d.tail)}}; },
                        [](const auto& d) { return to_json(ContinuousLaw{d}); },
                    },
                    dist);
}

inline DistributionSpec distribution_from(const json& j) {
  const std::string kind = detail::field(j, "kind").get<std::string>();
  DistributionSpec out;
  if (kind == "exponential") {
    out = Exponential{detail::number(j, "rate", 1.0)};
  } else if (kind == "uniform") {
    out = Uniform{detail::number(j, "lo", 0.0), detail::number(j, "hi", 1.0)};
  } else if (kind == "pareto") {
    out = Pareto{detail::number(j, "shape", 2.0), detail::number(j, "scale", 1.0)};
  } else if (kind == "two-point") {
    out = TwoPoint{detail::number(j, "p", 0.5), detail::number(j, "a", 0.0), detail::number(j, "b", 1.0)};
  } else if (kind == "zero-atom") {
    ZeroAtom z{detail::number(j, "p0", 0.5), Exponential{1.0}};
    if (j.contains("tail")) {
      const DistributionSpec tail = distribution_from(j.at("tail"));
      std::visit(fpp::detail::overloaded{
                     [&z](const Exponential& d) { z.tail = d; },
                     [&z](const Uniform& d) { z.tail = d; },
                     [&z](const Pareto& d) { z.tail = d; },
                     [](const auto&) { throw ConfigError("zero-atom tail must be continuous"); },
                 },
                 tail);
    }
    out = z;
  } else {
    throw ConfigError("unknown distribution '" + kind + "'");
  }
  try {
    validate(out);
  } catch (const InvalidSpec& e) {
    throw ConfigError(e.what());
  }
  return out;
}

inline json to_json(const BuiltinDomain& spec) {
  return std::visit(fpp::detail::overloaded{
                        [](const HalfPlane&) { return json{{"kind", "half-plane"}}; },
                        [](const SlitPlane& s) {
                          return json{{"kind", "slit-plane"}, {"tip", to_json(s.tip)}, {"direction", compass_name(s.direction)}};
                        },
                        [](const Sector& s) {
                          return json{{"kind", "sector"},
                                      {"apex", to_json(s.apex)},
                                      {"from", compass_name(s.from)},
                                      {"to", compass_name(s.to)}};
                        },
                    },
                    spec);
}

inline json to_json(const DomainSpec& spec) {
  if (const auto* c = std::get_if<CustomPerturbation>(&spec)) {
    json add = json::array(), rem = json::array();
    for (Vertex v : c->added) add.push_back(to_json(v));
    for (Vertex v : c->removed) rem.push_back(to_json(v));
    return json{{"kind", "custom"}, {"base", to_json(c->base)}, {"add", add}, {"remove", rem}};
  }
  return to_json(fpp::detail::as_builtin(spec));
}

inline DomainSpec domain_from(const json& j) {
  const std::string kind = detail::field(j, "kind").get<std::string>();
  if (kind == "half-plane") return HalfPlane{};
  if (kind == "slit-plane") {
    SlitPlane s;
    if (j.contains("tip")) s.tip = vertex_from(j.at("tip"));
    if (j.contains("direction")) s.direction = compass_from(j.at("direction"));
    if (!is_axis(s.direction)) throw ConfigError("slit direction must be axis-parallel");
    return s;
  }
  if (kind == "sector") {
    Sector s;
    if (j.contains("apex")) s.apex = vertex_from(j.at("apex"));
    if (j.contains("from")) s.from = compass_from(j.at("from"));
    if (j.contains("to")) s.to = compass_from(j.at("to"));
    return s;
  }
  if (kind == "custom") {
    CustomPerturbation c;
    const DomainSpec base = domain_from(detail::field(j, "base"));
    if (std::holds_alternative<CustomPerturbation>(base)) throw ConfigError("custom base must be a builtin domain");
    c.base = fpp::detail::as_builtin(base);
    if (j.contains("add"))
      for (const auto& v : j.at("add")) c.added.push_back(vertex_from(v));
    if (j.contains("remove"))
      for (const auto& v : j.at("remove")) c.removed.push_back(vertex_from(v));
    return c;
  }
  throw ConfigError("unknown domain '" + kind + "'");
}

}  // namespace fpp::json_io
