#pragma once

// Quasi-static push model. The closed gripper is a rectangle sliding from
// start to end; at each substep penetrated objects are displaced by their
// forward minimum translation, and the displacement ripples through
// object-object contacts until nothing overlaps.

#include <algorithm>
#include <climits>
#include <limits>
#include <cmath>
#include <optional>
#include <vector>

#include "vft/errors.hpp"
#include "vft/geometry.hpp"
#include "vft/scene.hpp"

namespace vft {

struct GripperFootprint {
  double width = 2.0;  // across the motion
  double depth = 1.5;  // along the motion
  bool operator==(const GripperFootprint&) const = default;
};

struct SimParams {
  double substep = 0.1;
  double rotation_gain = 0.5;
  int max_resolve_iters = 64;
  double contact_eps = kContactEps;
  GripperFootprint gripper;
  double approach_clearance = 0.5;   // free gap between gripper and contact at start
  double effective_distance = 5.0;   // travel past first contact
  double max_retraction = 3.0;
  double retraction_step = 0.25;

  void validate() const {
    if (!(substep > 0 && substep <= 0.2)) throw ConfigError("sim: substep must be in (0, 0.2]");
    if (!(rotation_gain >= 0 && rotation_gain <= 1)) throw ConfigError("sim: rotation_gain must be in [0, 1]");
    if (max_resolve_iters < 8) throw ConfigError("sim: max_resolve_iters must be >= 8");
    if (!(contact_eps > 0)) throw ConfigError("sim: contact_eps must be positive");
    if (!(gripper.width > 0 && gripper.depth > 0)) throw ConfigError("sim: gripper footprint must be positive");
    if (!(approach_clearance >= 0 && effective_distance > 0 && max_retraction >= 0 && retraction_step > 0)) {
      throw ConfigError("sim: approach parameters out of range");
    }
  }
  bool operator==(const SimParams&) const = default;
};

struct PushAction {
  Vec2 start;
  Vec2 end;

  double length() const { return norm(end - start); }
  Vec2 direction() const { return normalized(end - start); }
  bool operator==(const PushAction&) const = default;
};

struct PushResult {
  Scene scene_after;
  std::vector<Pose2D> delta;   // per object, same order as the scene
  std::vector<bool> contacted;
  std::vector<bool> pushed;    // touched by the gripper itself
  std::vector<double> travel;  // bound on how far any point of each object moved
  bool truncated = false;      // motion stopped early at the last consistent substep
  double gripper_travel = 0.0;
};

inline ConvexPolygon gripper_footprint(Vec2 center, Vec2 dir, const GripperFootprint& g) {
  return oriented_rect(center, dir, g.depth, g.width);
}

// Throws InvalidActionError unless the action satisfies its invariants.
inline void check_push(const Scene& scene, const PushAction& a, const SimParams& p) {
  if (!is_finite(a.start) || !is_finite(a.end)) throw InvalidActionError("push: non-finite endpoint");
  if (norm(a.end - a.start) < 1e-9) throw InvalidActionError("push: start equals end");
  if (!scene.inside(a.start) || !scene.inside(a.end)) throw InvalidActionError("push: endpoint outside workspace");
  const ConvexPolygon g = gripper_footprint(a.start, a.direction(), p.gripper);
  for (const PlacedObject& o : scene.objects()) {
    if (intersects(g, o.footprint, p.contact_eps)) {
      throw InvalidActionError("push: gripper starts inside " + o.id());
    }
  }
}

namespace detail {

// Where `pusher` touches `mover` when the mover is pushed along unit n: the
// overlap of the two supporting features across n, as a segment. This is the
// limit of the overlap region as the penetration goes to zero, so it does
// not depend on how deep a substep happened to go.
struct Contact {
  Vec2 a, b;  // segment ends, equal for a point contact
  Vec2 n;     // direction the mover is pushed
  double ccw = std::numeric_limits<double>::infinity();  // turn left before a face lands flat
  double cw = std::numeric_limits<double>::infinity();
};

// How far the mover can turn either way before one of its faces near the
// contact lies flat against a facing pusher face. Pairs already flat do not
// limit anything.
inline void flush_limits(Contact& c, const ConvexPolygon& mover, const ConvexPolygon& pusher) {
  for (const Vec2& m : mover.normals()) {
    if (dot(m, c.n) > -0.5) continue;
    for (const Vec2& q : pusher.normals()) {
      if (dot(q, c.n) < 0.5) continue;
      const double phi = std::atan2(cross(m, -q), dot(m, -q));
      if (phi > 1e-9) c.ccw = std::min(c.ccw, phi);
      if (phi < -1e-9) c.cw = std::min(c.cw, -phi);
    }
  }
}

inline Contact contact_segment(const ConvexPolygon& mover, const ConvexPolygon& pusher, Vec2 n) {
  constexpr double kFeatureTol = 1e-3;
  const Vec2 t{-n.y, n.x};
  const auto feature = [&](const ConvexPolygon& poly, Vec2 axis, double& level) {
    double top = -std::numeric_limits<double>::infinity();
    for (const Vec2& p : poly.vertices()) top = std::max(top, dot(p, axis));
    Interval span;
    for (const Vec2& p : poly.vertices()) {
      if (dot(p, axis) >= top - kFeatureTol) span.include(dot(p, t));
    }
    level = top;
    return span;
  };
  double mover_level = 0.0;
  double pusher_level = 0.0;
  const Interval a = feature(mover, -n, mover_level);
  const Interval b = feature(pusher, n, pusher_level);
  double lo = std::max(a.lo, b.lo);
  double hi = std::min(a.hi, b.hi);
  if (lo > hi) lo = hi = a.lo > b.hi ? 0.5 * (a.lo + b.hi) : 0.5 * (a.hi + b.lo);
  const Vec2 base = n * (-mover_level);
  return {base + t * lo, base + t * hi, n};
}

// Contact halfway through a substep in which the pusher moved from `before`
// to `after`.
inline Contact midstep_contact(const ConvexPolygon& mover, const ConvexPolygon& before, const ConvexPolygon& after,
                               Vec2 n) {
  const Contact c0 = contact_segment(mover, before, n);
  const Contact c1 = contact_segment(mover, after, n);
  Contact c{(c0.a + c1.a) * 0.5, (c0.b + c1.b) * 0.5, n};
  flush_limits(c, mover, after);
  return c;
}

class PushSolver {
 public:
  PushSolver(const SimParams& p, Vec2 dir, Scene scene, ConvexPolygon path)
      : p_(p),
        dir_(dir),
        path_(std::move(path)),
        scene_(std::move(scene)),
        travel_(scene_.size(), 0.0),
        contacted_(scene_.size(), false),
        pushed_(scene_.size(), false),
        radius_(scene_.size()),
        level_(scene_.size(), INT_MAX) {
    for (std::size_t i = 0; i < scene_.size(); ++i) {
      radius_[i] = scene_[i].spec->shape.radius_about({});
      origin_.push_back(scene_[i].pose.position);
    }
  }

  // Places the gripper and settles every overlap by translation. Each moved
  // object then turns about its contact and the scene is settled again; the
  // turns are dropped if that second pass fails. On failure the state is
  // rolled back to what it was before the call.
  bool settle(const ConvexPolygon& gripper, const ConvexPolygon& gripper_before, bool allow_turn) {
    gripper_before_ = &gripper_before;
    undo_.clear();
    std::fill(level_.begin(), level_.end(), INT_MAX);
    dirty_.assign(scene_.size(), 0);
    if (!resolve(gripper)) {
      rollback();
      return false;
    }
    if (!allow_turn || p_.rotation_gain == 0.0 || undo_.empty()) return true;
    const std::size_t n = scene_.size();
    std::vector<Pose2D> poses(n);
    for (std::size_t i = 0; i < n; ++i) poses[i] = scene_[i].pose;
    const std::vector<double> travel = travel_;
    const std::vector<bool> contacted = contacted_;
    const std::vector<bool> pushed = pushed_;
    const std::size_t saved = undo_.size();
    bool turned = false;
    for (std::size_t k = 0; k < saved; ++k) turned |= turn(undo_[k]);
    if (!turned || resolve(gripper)) return true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(scene_[i].pose == poses[i])) scene_.set_pose(i, poses[i]);
    }
    travel_ = travel;
    contacted_ = contacted;
    pushed_ = pushed;
    undo_.resize(saved);
    return true;
  }

  const Scene& scene() const { return scene_; }
  const std::vector<double>& travel() const { return travel_; }
  const std::vector<bool>& contacted() const { return contacted_; }
  const std::vector<bool>& pushed() const { return pushed_; }

 private:
  struct Saved {
    std::size_t index;
    Pose2D pose;
    double travel;
    bool contacted;
    bool pushed;
    Contact contact;  // first contact this substep, at the pre-substep pose
    ConvexPolygon footprint;
  };

  // Footprint of object i at the start of this substep.
  const ConvexPolygon& before(std::size_t i) const {
    for (const Saved& s : undo_) {
      if (s.index == i) return s.footprint;
    }
    return scene_[i].footprint;
  }

  // Displaces objects until no checked pair overlaps. A pass that moves
  // nothing has checked every pair that could overlap, so it decides
  // consistency by itself; only hitting the iteration cap needs the full check.
  bool resolve(const ConvexPolygon& gripper) {
    const double tol = 0.1 * p_.contact_eps;
    const std::size_t n = scene_.size();
    for (int iter = 0; iter < p_.max_resolve_iters; ++iter) {
      bool moved = false;
      blocked_ = false;
      for (std::size_t i = 0; i < n; ++i) {
        const ConvexPolygon& fp = scene_[i].footprint;
        if (!gripper.bounds().overlaps(fp.bounds(), tol)) continue;
        const auto v = detail::swept_translation(gripper, fp, *gripper_before_, before(i), tol,
                                                 [this](Vec2 n) { return dot(n, dir_) >= -1e-9; });
        if (!v) continue;
        level_[i] = 1;
        const auto contact = [&] { return midstep_contact(fp, *gripper_before_, gripper, normalized(*v)); };
        save(i, contact);
        pushed_[i] = true;
        moved |= displace(i, *v, contact);
      }
      // Only pairs with a member that moved since the last pass can overlap.
      std::vector<char> stale(n, 0);
      stale.swap(dirty_);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (!(stale[i] || dirty_[i] || stale[j] || dirty_[j])) continue;
          if (level_[i] == INT_MAX && level_[j] == INT_MAX) continue;
          moved |= separate(i, j);
        }
      }
      if (!moved) return !blocked_;
    }
    return consistent(gripper);
  }

  // Object pairs separate along their plain minimum translation; the object
  // further down the contact chain yields. An object the gripper has pushed
  // is never sent backward while the other one could move instead.
  bool separate(std::size_t i, std::size_t j) {
    const double tol = 0.1 * p_.contact_eps;
    const ConvexPolygon& a = scene_[i].footprint;
    const ConvexPolygon& b = scene_[j].footprint;
    if (!a.bounds().overlaps(b.bounds(), tol)) return false;
    std::size_t fixed = i;
    std::size_t mover = j;
    std::optional<Vec2> v;
    const auto all = [](Vec2) { return true; };
    if (level_[i] > level_[j]) {
      std::swap(fixed, mover);
      v = detail::swept_translation(b, a, before(j), before(i), tol, all);
    } else {
      v = detail::swept_translation(a, b, before(i), before(j), tol, all);
    }
    if (!v) return false;
    const bool back = dot(*v, dir_) < 0.0;
    const bool swap = level_[i] == level_[j] ? dot(*v, dir_) < -1e-12 && !pushed_[fixed]
                                             : back && pushed_[mover] && !pushed_[fixed];
    if (swap) {
      std::swap(fixed, mover);
      v = -*v;
    }
    const auto contact = [&] {
      return midstep_contact(scene_[mover].footprint, before(fixed), scene_[fixed].footprint, normalized(*v));
    };
    level_[mover] = std::min(level_[mover], level_[fixed] == INT_MAX ? INT_MAX : level_[fixed] + 1);
    return displace(mover, *v, contact);
  }

  // Translates object i by v, clamped to the walls; objects the gripper has
  // pushed also lose any backward component, and objects it may still reach
  // never end up behind their start. Returns whether anything moved.
  template <class ContactFn>
  bool displace(std::size_t i, Vec2 v, const ContactFn& contact) {
    const Aabb& b = scene_[i].footprint.bounds();
    const double side = scene_.side();
    Vec2 d = v;
    d.x = std::clamp(d.x, std::min(-b.lo.x, 0.0), std::max(side - b.hi.x, 0.0));
    d.y = std::clamp(d.y, std::min(-b.lo.y, 0.0), std::max(side - b.hi.y, 0.0));
    if (pushed_[i] && dot(d, dir_) < 0.0) d -= dir_ * dot(d, dir_);
    if (dot(d, dir_) < 0.0) {
      const double ahead = dot(scene_[i].pose.position + d - origin_[i], dir_);
      if (ahead < 0.0 && in_path(i)) d -= dir_ * std::max(ahead, dot(d, dir_));
    }
    if (norm(d) < 1e-12) {
      // Stuck: keep the object under watch so the next pass sees it again.
      blocked_ = true;
      dirty_[i] = 1;
      return false;
    }
    save(i, contact);
    travel_[i] += norm(d);
    contacted_[i] = true;
    dirty_[i] = 1;
    scene_.shift(i, d);
    return true;
  }

  // Off-centre contact turns the object by rotation_gain times the angle the
  // lever arm to the pivot sweeps under this substep's displacement. The
  // sweep is measured from half a step back to half a step ahead, with the
  // arm taken halfway through the turn, so it barely depends on the substep.
  // A face contact pivots about an end only if that lifts the other end off
  // the pusher; if neither end does, the face stays flush.
  bool turn(const Saved& s) {
    const PlacedObject& o = scene_[s.index];
    const Vec2 c0 = s.pose.position;
    const Vec2 d = o.pose.position - c0;
    if (dot(d, d) < 1e-18) return false;
    const auto sweep = [&](Vec2 arm) { return p_.rotation_gain * std::atan2(cross(arm, d), dot(arm, arm) - 0.25 * dot(d, d)); };
    const auto about = [&](Vec2 pivot) {
      const Vec2 arm = pivot - c0;
      return dot(arm, arm) < 1e-12 ? 0.0 : sweep(rotate(arm, 0.5 * sweep(arm)));
    };
    Vec2 pivot = s.contact.a;
    double angle = about(pivot);
    const Vec2 span = s.contact.b - s.contact.a;
    if (dot(span, span) > 1e-12) {
      angle = 0.0;
      for (const auto& [p, q] : {std::pair{s.contact.a, s.contact.b}, std::pair{s.contact.b, s.contact.a}}) {
        const double a = about(p);
        if (std::abs(a) > std::abs(angle) && dot(rotate(q - p, a) - (q - p), s.contact.n) > 0.0) {
          angle = a;
          pivot = p;
        }
      }
    }
    angle = std::clamp(angle, -s.contact.cw, s.contact.ccw);
    if (std::abs(angle) < 1e-12) return false;
    pivot += d;
    const Pose2D turned(pivot + rotate(o.pose.position - pivot, angle), o.pose.heading + angle);
    if (dot(turned.position - origin_[s.index], dir_) < 0.0 && (pushed_[s.index] || in_path(s.index))) return false;
    if (!scene_.footprint_inside(transform(o.spec->shape, turned))) return false;
    travel_[s.index] += norm(turned.position - o.pose.position) + std::abs(angle) * radius_[s.index];
    scene_.set_pose(s.index, turned);
    dirty_[s.index] = 1;
    return true;
  }

  // Records object i's state before its first move this substep, with the
  // contact point mapped back to that state.
  template <class ContactFn>
  void save(std::size_t i, const ContactFn& contact) {
    for (const Saved& s : undo_) {
      if (s.index == i) return;
    }
    undo_.push_back({i, scene_[i].pose, travel_[i], contacted_[i], pushed_[i], contact(), scene_[i].footprint});
  }

  bool in_path(std::size_t i) const { return intersects(path_, scene_[i].footprint, 0.0); }

  void rollback() {
    for (const Saved& s : undo_) {
      scene_.set_pose(s.index, s.pose);
      travel_[s.index] = s.travel;
      contacted_[s.index] = s.contacted;
      pushed_[s.index] = s.pushed;
    }
    undo_.clear();
  }

  bool consistent(const ConvexPolygon& gripper) const {
    const std::size_t n = scene_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (intersects(gripper, scene_[i].footprint, p_.contact_eps)) return false;
    }
    for (const Saved& s : undo_) {
      if (!scene_.footprint_inside(scene_[s.index].footprint)) return false;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != s.index && intersects(scene_[s.index].footprint, scene_[j].footprint, p_.contact_eps)) return false;
      }
    }
    return true;
  }

  const SimParams& p_;
  Vec2 dir_;
  ConvexPolygon path_;  // everything the gripper sweeps over during the push
  Scene scene_;
  std::vector<double> travel_;
  std::vector<bool> contacted_;
  std::vector<bool> pushed_;  // touched by the gripper during this push
  std::vector<double> radius_;
  std::vector<Vec2> origin_;
  std::vector<char> dirty_;  // moved since the last pair pass
  bool blocked_ = false;     // this pass found an overlap it could not reduce
  std::vector<int> level_;  // contact-chain distance from the gripper this substep
  std::vector<Saved> undo_;
  const ConvexPolygon* gripper_before_ = nullptr;
};

}  // namespace detail

inline PushResult simulate_push(const Scene& scene, const PushAction& action, const SimParams& params) {
  check_push(scene, action, params);
  const Vec2 dir = action.direction();
  const double length = action.length();
  const int steps = std::max(1, static_cast<int>(std::ceil(length / params.substep - 1e-9)));
  const double h = length / steps;
  auto gripper_at = [&](double s) { return gripper_footprint(action.start + dir * s, dir, params.gripper); };

  const ConvexPolygon path =
      oriented_rect((action.start + action.end) * 0.5, dir, length + params.gripper.depth, params.gripper.width);
  detail::PushSolver solver(params, dir, scene, path);
  PushResult out;
  out.gripper_travel = length;
  for (int k = 1; k <= steps; ++k) {
    const ConvexPolygon before = gripper_at(h * (k - 1));
    if (solver.settle(gripper_at(h * k), before, true)) continue;
    if (solver.settle(gripper_at(h * k), before, false)) continue;
    // Blocked: find how far into this substep the gripper can still go.
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 40 && (hi - lo) * h > 1e-7; ++it) {
      const double mid = 0.5 * (lo + hi);
      detail::PushSolver trial = solver;
      if (trial.settle(gripper_at(h * (k - 1 + mid)), before, false)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    if (lo > 0.0) solver.settle(gripper_at(h * (k - 1 + lo)), before, false);
    out.truncated = true;
    out.gripper_travel = h * (k - 1 + lo);
    break;
  }

  out.scene_after = solver.scene();
  out.travel = solver.travel();
  out.contacted = solver.contacted();
  out.pushed = solver.pushed();
  out.delta.reserve(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Pose2D& a = scene[i].pose;
    const Pose2D& b = out.scene_after[i].pose;
    out.delta.emplace_back(b.position - a.position, b.heading - a.heading);
  }
  return out;
}

// Push that makes first contact at `contact` moving along `direction` and
// then continues for the effective distance. The start backs off from the
// contact by half the gripper depth plus the approach clearance, and further
// in retraction steps while the gripper would start inside an object. The
// end is fixed by the contact, so the travel past contact does not depend on
// the retraction.
inline std::optional<PushAction> effective_push_action(const Scene& scene, Vec2 contact, Vec2 direction,
                                                       const SimParams& params) {
  if (!is_finite(contact) || !is_finite(direction) || norm(direction) < 1e-12) return std::nullopt;
  const Vec2 dir = normalized(direction);
  const double half = params.gripper.depth / 2;
  const Vec2 end = contact + dir * (params.effective_distance - half);
  if (!scene.inside(end)) return std::nullopt;
  const double standoff = half + params.approach_clearance;
  const int steps = static_cast<int>(std::floor(params.max_retraction / params.retraction_step + 1e-9));
  for (int k = 0; k <= steps; ++k) {
    const Vec2 start = contact - dir * (standoff + k * params.retraction_step);
    if (!scene.inside(start)) return std::nullopt;
    const ConvexPolygon g = gripper_footprint(start, dir, params.gripper);
    const bool blocked = std::any_of(scene.objects().begin(), scene.objects().end(), [&](const PlacedObject& o) {
      return intersects(g, o.footprint, params.contact_eps);
    });
    if (!blocked) return PushAction{start, end};
  }
  return std::nullopt;
}

}  // namespace vft
