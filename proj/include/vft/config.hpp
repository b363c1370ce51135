#pragma once

// Run configuration as JSON. Every section and key is optional; missing keys
// keep their defaults, unknown keys are rejected.

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "vft/errors.hpp"
#include "vft/grasp_eval.hpp"
#include "vft/planner.hpp"
#include "vft/push_sim.hpp"
#include "vft/scene.hpp"

namespace vft {

struct Config {
  PlannerConfig planner;
  SimParams sim;
  GripperSpec gripper;
  int grid_n = kGridSize;

  void validate() const {
    planner.validate();
    sim.validate();
    gripper.validate();
    if (grid_n < 8) throw ConfigError("grid_n must be >= 8");
  }
  bool operator==(const Config&) const = default;
};

namespace detail {

template <class T>
void read_key(const nlohmann::json& section, const char* name, T& out, const std::string& where) {
  const auto it = section.find(name);
  if (it == section.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + name + ": wrong type");
  }
}

inline void check_keys(const nlohmann::json& section, std::initializer_list<const char*> keys, const std::string& where) {
  if (!section.is_object()) throw ConfigError(where + ": must be an object");
  for (const auto& [key, value] : section.items()) {
    bool known = false;
    for (const char* k : keys) known |= key == k;
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

}  // namespace detail

inline nlohmann::json to_json(const Config& c) {
  const PlannerConfig& p = c.planner;
  const SimParams& s = c.sim;
  const GripperSpec& g = c.gripper;
  return {
      {"planner",
       {{"n_max", p.n_max},
        {"gamma", p.gamma},
        {"d_star", p.d_star},
        {"r_g_star", p.r_g_star},
        {"r_gp_star", p.r_gp_star},
        {"m", p.m},
        {"c", p.c},
        {"final_m", p.final_m},
        {"final_c", p.final_c},
        {"seed", p.seed},
        {"episode_action_budget", p.episode_action_budget},
        {"concatenate_pushes", p.concatenate_pushes}}},
      {"sim",
       {{"substep", s.substep},
        {"rotation_gain", s.rotation_gain},
        {"max_resolve_iters", s.max_resolve_iters},
        {"contact_eps", s.contact_eps},
        {"gripper_width", s.gripper.width},
        {"gripper_depth", s.gripper.depth},
        {"approach_clearance", s.approach_clearance},
        {"effective_distance", s.effective_distance},
        {"max_retraction", s.max_retraction},
        {"retraction_step", s.retraction_step}}},
      {"gripper",
       {{"max_opening", g.max_opening},
        {"finger_thickness", g.finger_thickness},
        {"finger_width", g.finger_width},
        {"clearance", g.clearance}}},
      {"grid_n", c.grid_n},
  };
}

inline Config config_from_json(const nlohmann::json& j, Config base = {}) {
  using detail::read_key;
  detail::check_keys(j, {"planner", "sim", "gripper", "grid_n"}, "config");
  if (const auto it = j.find("planner"); it != j.end()) {
    const std::string w = "planner";
    detail::check_keys(*it, {"n_max", "gamma", "d_star", "r_g_star", "r_gp_star", "m", "c", "final_m", "final_c", "seed",
                             "episode_action_budget", "concatenate_pushes"},
                       w);
    PlannerConfig& p = base.planner;
    read_key(*it, "n_max", p.n_max, w);
    read_key(*it, "gamma", p.gamma, w);
    read_key(*it, "d_star", p.d_star, w);
    read_key(*it, "r_g_star", p.r_g_star, w);
    read_key(*it, "r_gp_star", p.r_gp_star, w);
    read_key(*it, "m", p.m, w);
    read_key(*it, "c", p.c, w);
    read_key(*it, "final_m", p.final_m, w);
    read_key(*it, "final_c", p.final_c, w);
    read_key(*it, "seed", p.seed, w);
    read_key(*it, "episode_action_budget", p.episode_action_budget, w);
    read_key(*it, "concatenate_pushes", p.concatenate_pushes, w);
  }
  if (const auto it = j.find("sim"); it != j.end()) {
    const std::string w = "sim";
    detail::check_keys(*it, {"substep", "rotation_gain", "max_resolve_iters", "contact_eps", "gripper_width",
                             "gripper_depth", "approach_clearance", "effective_distance", "max_retraction",
                             "retraction_step"},
                       w);
    SimParams& s = base.sim;
    read_key(*it, "substep", s.substep, w);
    read_key(*it, "rotation_gain", s.rotation_gain, w);
    read_key(*it, "max_resolve_iters", s.max_resolve_iters, w);
    read_key(*it, "contact_eps", s.contact_eps, w);
    read_key(*it, "gripper_width", s.gripper.width, w);
    read_key(*it, "gripper_depth", s.gripper.depth, w);
    read_key(*it, "approach_clearance", s.approach_clearance, w);
    read_key(*it, "effective_distance", s.effective_distance, w);
    read_key(*it, "max_retraction", s.max_retraction, w);
    read_key(*it, "retraction_step", s.retraction_step, w);
  }
  if (const auto it = j.find("gripper"); it != j.end()) {
    const std::string w = "gripper";
    detail::check_keys(*it, {"max_opening", "finger_thickness", "finger_width", "clearance"}, w);
    GripperSpec& g = base.gripper;
    read_key(*it, "max_opening", g.max_opening, w);
    read_key(*it, "finger_thickness", g.finger_thickness, w);
    read_key(*it, "finger_width", g.finger_width, w);
    read_key(*it, "clearance", g.clearance, w);
  }
  read_key(j, "grid_n", base.grid_n, "config");
  base.validate();
  return base;
}

inline Config parse_config(std::string_view text, Config base = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: malformed JSON: ") + e.what());
  }
  return config_from_json(j, std::move(base));
}

}  // namespace vft
