#pragma once

// Grasp reward R(s): binary top-down parallel-jaw feasibility for the target,
// evaluated on a grid of grasp centres at 16 closing-axis angles. A grasp
// scores 1 when its centre lies on the target, the open fingers clear
// everything, the target fits the jaws, and closing the fingers until they
// meet the target sweeps through no other object.

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "vft/errors.hpp"
#include "vft/geometry.hpp"
#include "vft/scene.hpp"

namespace vft {

inline constexpr int kGraspAngles = 16;

// Defaults are a Robotiq 2F-85 (8.5 cm stroke) with fingertip-scale pads.
struct GripperSpec {
  double max_opening = 8.5;
  double finger_thickness = 1.0;  // across the closing axis
  double finger_width = 2.0;      // along the grasp line
  double clearance = 0.25;

  void validate() const {
    if (!(max_opening > 0 && finger_thickness > 0 && finger_width > 0 && clearance > 0)) {
      throw ConfigError("gripper: all dimensions must be positive");
    }
    if (!(max_opening > finger_thickness)) throw ConfigError("gripper: max_opening must exceed finger_thickness");
  }
  bool operator==(const GripperSpec&) const = default;
};

struct GraspAction {
  int row = 0;
  int col = 0;
  int theta_index = 0;

  // Closing-axis angle; the symmetric jaw makes theta and theta + pi equal.
  double theta() const { return theta_index * kPi / kGraspAngles; }
  bool operator==(const GraspAction&) const = default;
};

struct GraspSummary {
  double value = 0.0;
  std::optional<GraspAction> best;
};

class RewardMap {
 public:
  explicit RewardMap(GridSpec grid = {}) : grid_(grid) {
    for (auto& layer : layers_) layer.assign(static_cast<std::size_t>(grid.n) * grid.n, 0.0f);
  }

  const GridSpec& grid() const { return grid_; }
  float at(int theta_index, int row, int col) const { return layers_[theta_index][index(row, col)]; }
  void set(int theta_index, int row, int col, float v) { layers_[theta_index][index(row, col)] = v; }
  const std::vector<float>& layer(int theta_index) const { return layers_[theta_index]; }

  // Maximum with ties broken by lowest theta index, then row-major cell.
  GraspSummary max() const {
    GraspSummary out;
    for (int k = 0; k < kGraspAngles; ++k) {
      for (int r = 0; r < grid_.n; ++r) {
        for (int c = 0; c < grid_.n; ++c) {
          const double v = at(k, r, c);
          if (v > out.value) out = {v, GraspAction{r, c, k}};
        }
      }
    }
    return out;
  }

  std::size_t nonzero() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) {
      for (float v : layer) n += v != 0.0f ? 1 : 0;
    }
    return n;
  }

  bool operator==(const RewardMap&) const = default;

 private:
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * grid_.n + col; }

  GridSpec grid_;
  std::array<std::vector<float>, kGraspAngles> layers_;
};

namespace detail {

// A polygon expressed in a grasp frame: s along the closing axis, t along
// the finger line.
struct FramedPolygon {
  std::vector<Vec2> st;
  Interval s;
  Interval t;
};

inline FramedPolygon to_frame(const ConvexPolygon& poly, Vec2 u, Vec2 v) {
  FramedPolygon out;
  out.st.reserve(poly.size());
  for (const Vec2& p : poly.vertices()) {
    const Vec2 q{dot(p, u), dot(p, v)};
    out.st.push_back(q);
    out.s.include(q.x);
    out.t.include(q.y);
  }
  return out;
}

// s-extent of the polygon inside the open strip lo < t < hi.
inline Interval strip_slice(const FramedPolygon& poly, double lo, double hi) {
  Interval out;
  const std::size_t n = poly.st.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly.st[i];
    const Vec2 q = poly.st[(i + 1) % n];
    if (p.y > lo && p.y < hi) out.include(p.x);
    for (double edge : {lo, hi}) {
      if ((p.y < edge && q.y > edge) || (p.y > edge && q.y < edge)) {
        out.include(p.x + (edge - p.y) / (q.y - p.y) * (q.x - p.x));
      }
    }
  }
  return out;
}

// Everything about one closing angle that does not depend on the grasp
// centre. Both the dense map and single-grasp queries go through feasible(),
// so they agree bit for bit.
class GraspFrame {
 public:
  GraspFrame(const Scene& scene, std::size_t target, int theta_index, const GripperSpec& spec,
             double eps = kContactEps)
      : spec_(spec), eps_(eps) {
    const double theta = theta_index * kPi / kGraspAngles;
    u_ = unit_from_angle(theta);
    v_ = perp(u_);
    half_band_ = spec.finger_width / 2 + spec.clearance;
    const ConvexPolygon& target_fp = scene[target].footprint;
    target_fp_ = target_fp;
    target_ = to_frame(target_fp, u_, v_);
    fits_ = target_.s.length() <= spec.max_opening - 2 * spec.clearance + eps;
    const double reach = spec.max_opening + spec.finger_thickness + 2 * spec.clearance + spec.finger_width;
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t i = 0; i < scene.size(); ++i) {
      if (i == target) continue;
      const double gap = scene[i].footprint.bounds().distance(target_fp.bounds());
      if (gap <= reach) near.emplace_back(gap, i);
    }
    std::sort(near.begin(), near.end());
    for (const auto& [gap, i] : near) others_.push_back(to_frame(scene[i].footprint, u_, v_));

    // Feasible centres lie on the target, so its frame-aligned box bounds them.
    const double pad = 1e-6;
    s_window_ = {target_.s.lo - pad, target_.s.hi + pad};
    t_window_ = {target_.t.lo - pad, target_.t.hi + pad};
  }

  // The target is too wide for the jaws at this angle.
  bool fits() const { return fits_; }
  Vec2 axis() const { return u_; }

  // Necessary condition used to skip cells; never rejects a feasible centre.
  bool in_window(Vec2 center) const {
    const double s = dot(center, u_);
    const double t = dot(center, v_);
    return s >= s_window_.lo && s <= s_window_.hi && t >= t_window_.lo && t <= t_window_.hi;
  }

  // World-space box around the candidate window.
  Aabb window_bounds() const {
    Aabb b;
    for (double s : {s_window_.lo, s_window_.hi}) {
      for (double t : {t_window_.lo, t_window_.hi}) b.include(u_ * s + v_ * t);
    }
    return b;
  }

  bool feasible(Vec2 center) const {
    if (!fits_ || !target_fp_.contains(center)) return false;
    const double s0 = dot(center, u_);
    const double t0 = dot(center, v_);
    const double lo = t0 - half_band_ + eps_;
    const double hi = t0 + half_band_ - eps_;
    const Interval grip = strip_slice(target_, lo, hi);
    if (grip.empty()) return false;  // closing region misses the target
    const double half = spec_.max_opening / 2;
    const double cl = spec_.clearance;
    // Open fingers must clear the target with margin on both sides.
    if (grip.lo < s0 - half + cl - eps_ || grip.hi > s0 + half - cl + eps_) return false;
    // Swept regions: from each open finger's outer face to target contact.
    const Interval right{grip.hi - cl, s0 + half + spec_.finger_thickness + cl};
    const Interval left{s0 - half - spec_.finger_thickness - cl, grip.lo + cl};
    for (const FramedPolygon& o : others_) {
      if (o.t.hi <= lo || o.t.lo >= hi) continue;
      if (o.s.hi <= left.lo + eps_ || o.s.lo >= right.hi - eps_) continue;
      const Interval j = strip_slice(o, lo, hi);
      if (j.empty()) continue;
      if (j.lo < right.hi - eps_ && j.hi > right.lo + eps_) return false;
      if (j.lo < left.hi - eps_ && j.hi > left.lo + eps_) return false;
    }
    return true;
  }

 private:
  GripperSpec spec_;
  double eps_;
  Vec2 u_, v_;
  double half_band_ = 0.0;
  bool fits_ = false;
  ConvexPolygon target_fp_;
  FramedPolygon target_;
  std::vector<FramedPolygon> others_;
  Interval s_window_, t_window_;
};

// Calls f(row, col) for the grid cells inside the frame's candidate window,
// in row-major order; stops when f returns true.
template <class F>
bool scan_window(const GraspFrame& frame, const GridSpec& grid, F&& f) {
  const Aabb b = frame.window_bounds();
  const double res = grid.resolution();
  const int r0 = std::max(0, static_cast<int>(std::floor(b.lo.y / res - 0.5)));
  const int r1 = std::min(grid.n - 1, static_cast<int>(std::ceil(b.hi.y / res - 0.5)));
  const int c0 = std::max(0, static_cast<int>(std::floor(b.lo.x / res - 0.5)));
  const int c1 = std::min(grid.n - 1, static_cast<int>(std::ceil(b.hi.x / res - 0.5)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (frame.in_window(grid.center(r, c)) && f(r, c)) return true;
    }
  }
  return false;
}

}  // namespace detail

inline GridSpec grid_for(const Scene& scene, int n = kGridSize) { return {n, scene.side()}; }

inline bool is_grasp_feasible(const Scene& scene, const GraspAction& grasp, const GripperSpec& spec,
                              const GridSpec& grid) {
  const auto target = scene.target_index();
  if (!target) return false;
  const detail::GraspFrame frame(scene, *target, grasp.theta_index, spec);
  return frame.feasible(grid.center(grasp.row, grasp.col));
}

inline bool is_grasp_feasible(const Scene& scene, const GraspAction& grasp, const GripperSpec& spec) {
  return is_grasp_feasible(scene, grasp, spec, grid_for(scene));
}

// Dense map; cells outside each angle's candidate window are provably zero
// and skipped.
inline RewardMap reward_map(const Scene& scene, const GripperSpec& spec, const GridSpec& grid) {
  RewardMap map(grid);
  const auto target = scene.target_index();
  if (!target) return map;
  for (int k = 0; k < kGraspAngles; ++k) {
    const detail::GraspFrame frame(scene, *target, k, spec);
    if (!frame.fits()) continue;
    detail::scan_window(frame, grid, [&](int r, int c) {
      if (frame.feasible(grid.center(r, c))) map.set(k, r, c, 1.0f);
      return false;
    });
  }
  return map;
}

inline RewardMap reward_map(const Scene& scene, const GripperSpec& spec) {
  return reward_map(scene, spec, grid_for(scene));
}

// Same value and tie-break as reward_map(...).max(), stopping at the first
// feasible grasp in (theta, row, col) order.
inline GraspSummary max_grasp_reward(const Scene& scene, const GripperSpec& spec, const GridSpec& grid) {
  GraspSummary out;
  const auto target = scene.target_index();
  if (!target) return out;
  for (int k = 0; k < kGraspAngles; ++k) {
    const detail::GraspFrame frame(scene, *target, k, spec);
    if (!frame.fits()) continue;
    const bool found = detail::scan_window(frame, grid, [&](int r, int c) {
      if (!frame.feasible(grid.center(r, c))) return false;
      out = {1.0, GraspAction{r, c, k}};
      return true;
    });
    if (found) return out;
  }
  return out;
}

inline GraspSummary max_grasp_reward(const Scene& scene, const GripperSpec& spec) {
  return max_grasp_reward(scene, spec, grid_for(scene));
}

// Memoizing front end keyed by (SceneHash, gripper, grid). Safe for concurrent
// use; racing writers store equal values for a key.
class GraspEvaluator {
 public:
  explicit GraspEvaluator(GripperSpec spec = {}, int grid_n = kGridSize) : spec_(spec), grid_n_(grid_n) {
    spec_.validate();
  }

  const GripperSpec& spec() const { return spec_; }
  int grid_n() const { return grid_n_; }

  GraspSummary max_reward(const Scene& scene) const {
    const std::uint64_t key = cache_key(scene);
    {
      std::shared_lock lock(mu_);
      if (auto it = summaries_.find(key); it != summaries_.end()) {
        ++hits_;
        return it->second;
      }
    }
    GraspSummary s = max_grasp_reward(scene, spec_, grid_for(scene, grid_n_));
    std::unique_lock lock(mu_);
    ++misses_;
    summaries_[key] = s;
    return s;
  }

  RewardMap reward_map(const Scene& scene) const {
    const std::uint64_t key = cache_key(scene);
    const GridSpec grid = grid_for(scene, grid_n_);
    {
      std::shared_lock lock(mu_);
      if (auto it = maps_.find(key); it != maps_.end()) {
        RewardMap m(grid);
        for (const GraspAction& g : it->second) m.set(g.theta_index, g.row, g.col, 1.0f);
        return m;
      }
    }
    RewardMap m = vft::reward_map(scene, spec_, grid);
    std::vector<GraspAction> cells;
    for (int k = 0; k < kGraspAngles; ++k) {
      for (int r = 0; r < grid.n; ++r) {
        for (int c = 0; c < grid.n; ++c) {
          if (m.at(k, r, c) != 0.0f) cells.push_back({r, c, k});
        }
      }
    }
    std::unique_lock lock(mu_);
    maps_[key] = std::move(cells);
    return m;
  }

  std::size_t cache_hits() const { return hits_; }
  std::size_t cache_misses() const { return misses_; }
  std::size_t cache_size() const {
    std::shared_lock lock(mu_);
    return summaries_.size();
  }

 private:
  std::uint64_t cache_key(const Scene& scene) const {
    std::uint64_t h = scene_hash(scene).value;
    for (double v : {spec_.max_opening, spec_.finger_thickness, spec_.finger_width, spec_.clearance,
                     scene.side()}) {
      h = detail::combine(h, std::bit_cast<std::uint64_t>(v));
    }
    return detail::combine(h, static_cast<std::uint64_t>(grid_n_));
  }

  GripperSpec spec_;
  int grid_n_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::uint64_t, GraspSummary> summaries_;
  mutable std::unordered_map<std::uint64_t, std::vector<GraspAction>> maps_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

// Binary PGM heat map of one angle layer (or the max over layers when
// theta_index < 0); image rows run top-down, so y points up.
inline std::string reward_map_pgm(const RewardMap& map, int theta_index = -1) {
  const int n = map.grid().n;
  std::ostringstream os;
  os << "P5\n" << n << " " << n << "\n255\n";
  std::string row(static_cast<std::size_t>(n), '\0');
  for (int r = n - 1; r >= 0; --r) {
    for (int c = 0; c < n; ++c) {
      float v = 0.0f;
      if (theta_index >= 0) {
        v = map.at(theta_index, r, c);
      } else {
        for (int k = 0; k < kGraspAngles; ++k) v = std::max(v, map.at(k, r, c));
      }
      row[static_cast<std::size_t>(c)] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f)));
    }
    os << row;
  }
  return os.str();
}

}  // namespace vft
