#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "vft/errors.hpp"
#include "vft/geometry.hpp"

namespace vft {

inline constexpr double kWorkspaceSide = 44.8;  // cm
inline constexpr int kGridSize = 224;           // cells per side
inline constexpr int kCylinderSides = 24;

// Source description of a footprint, kept so scenarios round-trip through
// JSON in the form they were written.
struct BoxShape {
  double w = 0.0;
  double h = 0.0;
};
struct CylinderShape {
  double r = 0.0;
};
struct PolygonShape {
  std::vector<Vec2> vertices;
};
using ShapeDesc = std::variant<BoxShape, CylinderShape, PolygonShape>;

inline ConvexPolygon make_shape(const ShapeDesc& desc) {
  return std::visit(
      [](const auto& s) -> ConvexPolygon {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxShape>) {
          return ConvexPolygon::box(s.w, s.h);
        } else if constexpr (std::is_same_v<T, CylinderShape>) {
          return ConvexPolygon::regular(kCylinderSides, s.r);
        } else {
          return ConvexPolygon::body(s.vertices);
        }
      },
      desc);
}

struct ObjectSpec {
  std::string id;
  ShapeDesc desc;
  ConvexPolygon shape;  // body frame, centroid at the origin
  bool is_target = false;
  double height = 4.0;     // metadata only
  bool graspable = true;   // false when no orientation fits the gripper

  static ObjectSpec make(std::string id, ShapeDesc desc, bool is_target, double height = 4.0) {
    ObjectSpec o;
    o.id = std::move(id);
    o.shape = make_shape(desc);
    if (auto* poly = std::get_if<PolygonShape>(&desc)) poly->vertices = o.shape.vertices();
    o.desc = std::move(desc);
    o.is_target = is_target;
    o.height = height;
    return o;
  }
};

struct PlacedObject {
  std::shared_ptr<const ObjectSpec> spec;
  Pose2D pose;
  ConvexPolygon footprint;  // world frame

  const std::string& id() const { return spec->id; }
  bool is_target() const { return spec->is_target; }
};

struct SceneHash {
  std::uint64_t value = 0;
  auto operator<=>(const SceneHash&) const = default;
};

// The planner's state: a square workspace [0, side]^2 and rigid objects kept
// sorted by id. Scenes are immutable values; the mutators return copies.
class Scene {
 public:
  Scene() = default;
  explicit Scene(double side) : side_(side) {}

  // Builds and checks every scene invariant.
  static Scene make(double side, std::vector<std::pair<ObjectSpec, Pose2D>> objects) {
    Scene s(side);
    s.objects_.reserve(objects.size());
    for (auto& [spec, pose] : objects) {
      auto ptr = std::make_shared<const ObjectSpec>(std::move(spec));
      ConvexPolygon fp = transform(ptr->shape, pose);
      s.objects_.push_back({std::move(ptr), pose, std::move(fp)});
    }
    s.sort();
    s.validate();
    return s;
  }

  double side() const { return side_; }
  const std::vector<PlacedObject>& objects() const { return objects_; }
  std::size_t size() const { return objects_.size(); }
  bool empty() const { return objects_.empty(); }
  const PlacedObject& operator[](std::size_t i) const { return objects_[i]; }

  std::optional<std::size_t> target_index() const {
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      if (objects_[i].is_target()) return i;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> find(std::string_view id) const {
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      if (objects_[i].id() == id) return i;
    }
    return std::nullopt;
  }

  Aabb workspace_box() const { return {{0.0, 0.0}, {side_, side_}}; }

  bool inside(Vec2 p) const { return p.x >= 0.0 && p.y >= 0.0 && p.x <= side_ && p.y <= side_; }

  bool footprint_inside(const ConvexPolygon& fp, double tol = 1e-9) const {
    const Aabb& b = fp.bounds();
    return b.lo.x >= -tol && b.lo.y >= -tol && b.hi.x <= side_ + tol && b.hi.y <= side_ + tol;
  }

  Scene with_pose(std::size_t i, const Pose2D& pose) const {
    Scene s = *this;
    s.set_pose(i, pose);
    return s;
  }

  Scene without(std::size_t i) const {
    Scene s = *this;
    s.objects_.erase(s.objects_.begin() + static_cast<std::ptrdiff_t>(i));
    return s;
  }

  Scene with_object(ObjectSpec spec, const Pose2D& pose) const {
    Scene s = *this;
    auto ptr = std::make_shared<const ObjectSpec>(std::move(spec));
    ConvexPolygon fp = transform(ptr->shape, pose);
    s.objects_.push_back({std::move(ptr), pose, std::move(fp)});
    s.sort();
    return s;
  }

  // In-place pose update used by the simulator on its private working copy.
  void set_pose(std::size_t i, const Pose2D& pose) {
    objects_[i].pose = pose;
    objects_[i].footprint = transform(objects_[i].spec->shape, pose);
  }

  // Pure translation; moves the footprint in place instead of rebuilding it.
  void shift(std::size_t i, Vec2 d) {
    objects_[i].pose.position += d;
    objects_[i].footprint.shift(d);
  }

  // Throws ValidationError naming the first violated invariant.
  void validate(double eps = kContactEps) const {
    if (!(side_ > 0.0)) throw ValidationError("workspace: side must be positive");
    int targets = 0;
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      const PlacedObject& o = objects_[i];
      if (i > 0 && objects_[i - 1].id() == o.id()) throw ValidationError("duplicate_id: " + o.id());
      if (!is_finite(o.pose.position) || !std::isfinite(o.pose.heading)) {
        throw ValidationError("non_finite_pose: " + o.id());
      }
      if (!footprint_inside(o.footprint)) throw ValidationError("out_of_workspace: " + o.id());
      targets += o.is_target() ? 1 : 0;
    }
    if (targets > 1) throw ValidationError("target_count: more than one target");
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      for (std::size_t j = i + 1; j < objects_.size(); ++j) {
        if (intersects(objects_[i].footprint, objects_[j].footprint, eps)) {
          throw ValidationError("overlap: " + objects_[i].id() + "," + objects_[j].id());
        }
      }
    }
  }

 private:
  void sort() {
    std::sort(objects_.begin(), objects_.end(),
              [](const PlacedObject& a, const PlacedObject& b) { return a.id() < b.id(); });
  }

  double side_ = kWorkspaceSide;
  std::vector<PlacedObject> objects_;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t combine(std::uint64_t seed, std::uint64_t v) { return mix64(seed ^ mix64(v)); }

}  // namespace detail

inline constexpr double kHashPositionBin = 0.05;  // cm
inline constexpr double kHashHeadingBin = 0.5;    // degrees

struct PoseBin {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t heading = 0;
  bool operator==(const PoseBin&) const = default;
};

inline PoseBin pose_bin(const Pose2D& p) {
  return {static_cast<std::int64_t>(std::floor(p.position.x / kHashPositionBin)),
          static_cast<std::int64_t>(std::floor(p.position.y / kHashPositionBin)),
          static_cast<std::int64_t>(std::floor(rad_to_deg(p.heading) / kHashHeadingBin))};
}

// Digest over ids and quantized poses: scenes whose poses fall in the same
// 0.05 cm / 0.5 degree bins hash equal.
inline SceneHash scene_hash(const Scene& scene) {
  std::uint64_t h = detail::mix64(static_cast<std::uint64_t>(scene.size()));
  for (const PlacedObject& o : scene.objects()) {
    const PoseBin b = pose_bin(o.pose);
    h = detail::combine(h, detail::fnv1a(o.id()));
    h = detail::combine(h, static_cast<std::uint64_t>(b.x));
    h = detail::combine(h, static_cast<std::uint64_t>(b.y));
    h = detail::combine(h, static_cast<std::uint64_t>(b.heading));
    h = detail::combine(h, o.is_target() ? 1u : 0u);
  }
  return {h};
}

enum class Cell : std::uint8_t { background = 0, clutter = 1, target = 2 };

// Square grid over the workspace. Cell (row, col) has its centre at
// ((col + 0.5) * res, (row + 0.5) * res); row 0 is the y = 0 edge.
struct GridSpec {
  int n = kGridSize;
  double side = kWorkspaceSide;

  double resolution() const { return side / n; }
  Vec2 center(int row, int col) const { return {(col + 0.5) * resolution(), (row + 0.5) * resolution()}; }
  bool operator==(const GridSpec&) const = default;
};

struct OccupancyGrid {
  GridSpec grid;
  std::vector<Cell> cells;  // row-major

  Cell at(int row, int col) const { return cells[static_cast<std::size_t>(row) * grid.n + col]; }
  std::size_t count(Cell c) const { return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), c)); }
};

// Centre-point containment labelling on an n x n grid.
inline OccupancyGrid rasterize(const Scene& scene, int n = kGridSize) {
  OccupancyGrid g{{n, scene.side()}, std::vector<Cell>(static_cast<std::size_t>(n) * n, Cell::background)};
  const double res = g.grid.resolution();
  for (const PlacedObject& o : scene.objects()) {
    const Aabb& b = o.footprint.bounds();
    const int r0 = std::max(0, static_cast<int>(std::floor(b.lo.y / res - 0.5)));
    const int r1 = std::min(n - 1, static_cast<int>(std::ceil(b.hi.y / res - 0.5)));
    const int c0 = std::max(0, static_cast<int>(std::floor(b.lo.x / res - 0.5)));
    const int c1 = std::min(n - 1, static_cast<int>(std::ceil(b.hi.x / res - 0.5)));
    const Cell label = o.is_target() ? Cell::target : Cell::clutter;
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        if (o.footprint.contains(g.grid.center(r, c), -1e-12)) {
          g.cells[static_cast<std::size_t>(r) * n + c] = label;
        }
      }
    }
  }
  return g;
}

}  // namespace vft
