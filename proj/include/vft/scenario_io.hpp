#pragma once

// Scenario files:
//   { "workspace_cm": 44.8,
//     "objects": [ { "id": "t", "target": true,
//                    "shape": {"kind": "box", "w_cm": 4, "h_cm": 4},
//                    "pose": {"x_cm": 22.4, "y_cm": 22.4, "theta_deg": 0} } ] }
// Shapes may also be {"kind": "cylinder", "r_cm": r} or
// {"kind": "polygon", "vertices_cm": [[x, y], ...]}. "height_cm" is optional.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vft/errors.hpp"
#include "vft/grasp_eval.hpp"
#include "vft/scene.hpp"

namespace vft {

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing \"" + key + "\"");
  return *it;
}

inline double require_number(const nlohmann::json& j, const char* key, const std::string& where) {
  const nlohmann::json& v = require(j, key, where);
  if (!v.is_number()) throw ParseError(where + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

inline ShapeDesc parse_shape(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": shape must be an object");
  const nlohmann::json& kind = require(j, "kind", where);
  if (kind == "box") return BoxShape{require_number(j, "w_cm", where), require_number(j, "h_cm", where)};
  if (kind == "cylinder") return CylinderShape{require_number(j, "r_cm", where)};
  if (kind == "polygon") {
    const nlohmann::json& verts = require(j, "vertices_cm", where);
    if (!verts.is_array()) throw ParseError(where + ": vertices_cm must be an array");
    PolygonShape p;
    for (const auto& v : verts) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ParseError(where + ": vertices must be [x, y] pairs");
      }
      p.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return p;
  }
  throw ParseError(where + ": unknown shape kind " + kind.dump());
}

inline nlohmann::json shape_json(const ShapeDesc& desc) {
  return std::visit(
      [](const auto& s) -> nlohmann::json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxShape>) {
          return {{"kind", "box"}, {"w_cm", s.w}, {"h_cm", s.h}};
        } else if constexpr (std::is_same_v<T, CylinderShape>) {
          return {{"kind", "cylinder"}, {"r_cm", s.r}};
        } else {
          nlohmann::json verts = nlohmann::json::array();
          for (const Vec2& v : s.vertices) verts.push_back({v.x, v.y});
          return {{"kind", "polygon"}, {"vertices_cm", verts}};
        }
      },
      desc);
}

}  // namespace detail

// Parses and validates a scenario. Exactly one target is required; objects
// wider than the gripper opening in every orientation load with
// graspable = false.
inline Scene load_scenario(std::string_view text, const GripperSpec& spec = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario must be a JSON object");
  const double side = doc.contains("workspace_cm") ? detail::require_number(doc, "workspace_cm", "scenario")
                                                   : kWorkspaceSide;
  const nlohmann::json& objects = detail::require(doc, "objects", "scenario");
  if (!objects.is_array()) throw ParseError("scenario: objects must be an array");

  std::vector<std::pair<ObjectSpec, Pose2D>> items;
  int targets = 0;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const nlohmann::json& o = objects[i];
    std::string where = "objects[" + std::to_string(i) + "]";
    if (!o.is_object()) throw ParseError(where + ": must be an object");
    const nlohmann::json& id = detail::require(o, "id", where);
    if (!id.is_string()) throw ParseError(where + ": id must be a string");
    where += " (" + id.get<std::string>() + ")";
    const bool target = o.value("target", false);
    targets += target ? 1 : 0;
    const double height = o.contains("height_cm") ? detail::require_number(o, "height_cm", where) : 4.0;
    const nlohmann::json& pose = detail::require(o, "pose", where);
    const Pose2D p({detail::require_number(pose, "x_cm", where), detail::require_number(pose, "y_cm", where)},
                   deg_to_rad(detail::require_number(pose, "theta_deg", where)));
    ObjectSpec spec_obj;
    try {
      spec_obj = ObjectSpec::make(id.get<std::string>(), detail::parse_shape(detail::require(o, "shape", where), where),
                                  target, height);
    } catch (const GeometryError& e) {
      throw ValidationError("bad_shape: " + id.get<std::string>() + " (" + e.what() + ")");
    }
    spec_obj.graspable = spec_obj.shape.min_width() <= spec.max_opening;
    items.emplace_back(std::move(spec_obj), p);
  }
  if (targets != 1) throw ValidationError("target_count: expected exactly one target, found " + std::to_string(targets));
  return Scene::make(side, std::move(items));
}

inline std::string save_scenario(const Scene& scene) {
  nlohmann::json doc;
  doc["workspace_cm"] = scene.side();
  nlohmann::json objects = nlohmann::json::array();
  for (const PlacedObject& o : scene.objects()) {
    nlohmann::json j;
    j["id"] = o.id();
    j["target"] = o.is_target();
    j["shape"] = detail::shape_json(o.spec->desc);
    j["pose"] = {{"x_cm", o.pose.position.x}, {"y_cm", o.pose.position.y}, {"theta_deg", rad_to_deg(o.pose.heading)}};
    if (o.spec->height != 4.0) j["height_cm"] = o.spec->height;
    objects.push_back(std::move(j));
  }
  doc["objects"] = std::move(objects);
  return doc.dump(2) + "\n";
}

}  // namespace vft
