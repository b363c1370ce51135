#pragma once

// Push action space: per object, four pushes along its principal axes and
// eight at evenly spaced contour points, all aimed at the object's centroid.

#include <optional>
#include <vector>

#include "vft/geometry.hpp"
#include "vft/push_sim.hpp"
#include "vft/rng.hpp"
#include "vft/scene.hpp"

namespace vft {

inline constexpr int kAxisPushes = 4;
inline constexpr int kContourPushes = 8;
inline constexpr int kPushesPerObject = kAxisPushes + kContourPushes;

// Candidate k of object i: 0..3 are +axis, -axis, +normal, -normal; 4..11
// are contour points in contour order.
inline std::optional<PushAction> push_candidate(const Scene& scene, std::size_t i, int k, const SimParams& params) {
  const PlacedObject& o = scene[i];
  const Vec2 c = o.pose.position;
  Vec2 contact;
  if (k < kAxisPushes) {
    const Vec2 axis = principal_axis(o.footprint);
    const Vec2 rays[kAxisPushes] = {axis, -axis, perp(axis), -perp(axis)};
    contact = ray_exit(o.footprint, c, rays[k]);
  } else {
    contact = contour_points(o.footprint, kContourPushes)[static_cast<std::size_t>(k - kAxisPushes)].point;
  }
  const Vec2 to_centre = c - contact;
  if (norm(to_centre) < 1e-9) return std::nullopt;
  return effective_push_action(scene, contact, normalized(to_centre), params);
}

inline std::optional<PushAction> push_candidate(const Scene& scene, std::size_t index, const SimParams& params) {
  return push_candidate(scene, index / kPushesPerObject, static_cast<int>(index % kPushesPerObject), params);
}

// Every reachable candidate in (object id, axis pushes, contour index) order.
inline std::vector<PushAction> sample_action_space(const Scene& scene, const SimParams& params) {
  std::vector<PushAction> out;
  out.reserve(scene.size() * kPushesPerObject);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const PlacedObject& o = scene[i];
    const Vec2 c = o.pose.position;
    const Vec2 axis = principal_axis(o.footprint);
    std::vector<Vec2> contacts;
    for (const Vec2& ray : {axis, -axis, perp(axis), -perp(axis)}) contacts.push_back(ray_exit(o.footprint, c, ray));
    for (const ContourPoint& p : contour_points(o.footprint, kContourPushes)) contacts.push_back(p.point);
    for (const Vec2& contact : contacts) {
      const Vec2 to_centre = c - contact;
      if (norm(to_centre) < 1e-9) continue;
      if (auto a = effective_push_action(scene, contact, normalized(to_centre), params)) out.push_back(*a);
    }
  }
  return out;
}

// Uniform draw from sample_action_space(scene) without enumerating it:
// rejection sampling over candidate slots, with a full enumeration fallback
// once a scene turns out to be mostly blocked.
inline std::optional<PushAction> random_push_action(const Scene& scene, const SimParams& params, Rng& rng) {
  const std::size_t slots = scene.size() * kPushesPerObject;
  if (slots == 0) return std::nullopt;
  for (std::size_t tries = 0; tries < 2 * slots; ++tries) {
    if (auto a = push_candidate(scene, rng.below(slots), params)) return a;
  }
  const std::vector<PushAction> all = sample_action_space(scene, params);
  if (all.empty()) return std::nullopt;
  return all[rng.below(all.size())];
}

}  // namespace vft
