#pragma once

// Planar geometry for the retrieval planner: vectors, rigid poses, convex
// polygons and the separating-axis machinery the simulator and the grasp
// evaluator are built on. All lengths are in centimetres.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "vft/errors.hpp"

namespace vft {

inline constexpr double kPi = std::numbers::pi;

// Overlap depth below which two shapes are considered touching, not
// penetrating.
inline constexpr double kContactEps = 1e-4;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
// Counter-clockwise quarter turn.
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
inline bool is_finite(Vec2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

inline Vec2 normalized(Vec2 a) {
  const double n = norm(a);
  if (!(n > 0.0)) throw GeometryError("cannot normalize a zero vector");
  return a / n;
}

inline Vec2 rotate(Vec2 a, double cos_t, double sin_t) {
  return {cos_t * a.x - sin_t * a.y, sin_t * a.x + cos_t * a.y};
}
inline Vec2 rotate(Vec2 a, double angle) { return rotate(a, std::cos(angle), std::sin(angle)); }

inline Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Wraps to [-pi, pi).
inline double wrap_angle(double a) {
  if (a >= -kPi && a < kPi) return a;
  double r = std::fmod(a + kPi, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  r -= kPi;
  return r >= kPi ? -kPi : r;
}

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

struct Pose2D {
  Vec2 position;
  double heading = 0.0;  // radians, kept in [-pi, pi)

  Pose2D() = default;
  Pose2D(Vec2 p, double h) : position(p), heading(wrap_angle(h)) {}

  bool operator==(const Pose2D&) const = default;
};

struct Interval {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  bool empty() const { return lo > hi; }
  double length() const { return empty() ? 0.0 : hi - lo; }
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

struct Aabb {
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

  void include(Vec2 p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  // Interiors overlap by more than `margin` on both axes.
  bool overlaps(const Aabb& o, double margin = 0.0) const {
    return std::min(hi.x, o.hi.x) - std::max(lo.x, o.lo.x) > margin &&
           std::min(hi.y, o.hi.y) - std::max(lo.y, o.lo.y) > margin;
  }
  Aabb inflated(double r) const { return {{lo.x - r, lo.y - r}, {hi.x + r, hi.y + r}}; }
  // Gap between boxes (0 when they overlap).
  double distance(const Aabb& o) const {
    const double dx = std::max({0.0, o.lo.x - hi.x, lo.x - o.hi.x});
    const double dy = std::max({0.0, o.lo.y - hi.y, lo.y - o.hi.y});
    return std::sqrt(dx * dx + dy * dy);
  }
};

class ConvexPolygon;
ConvexPolygon transform(const ConvexPolygon& poly, const Pose2D& pose);

// A strictly convex polygon with counter-clockwise vertices. Outward unit edge
// normals and the bounding box are cached because the SAT routines below are
// the simulator's hot path.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;

  // Validates and stores `pts` as given (clockwise input is reversed).
  static ConvexPolygon from_vertices(std::vector<Vec2> pts) {
    if (pts.size() < 3) throw GeometryError("polygon needs at least 3 vertices");
    for (const Vec2& p : pts) {
      if (!is_finite(p)) throw GeometryError("polygon vertex is not finite");
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        if (norm(pts[i] - pts[j]) < 1e-9) throw GeometryError("polygon has repeated vertices");
      }
    }
    if (signed_area(pts) < 0.0) std::reverse(pts.begin(), pts.end());
    const std::size_t n = pts.size();
    double turning = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 e0 = pts[(i + 1) % n] - pts[i];
      const Vec2 e1 = pts[(i + 2) % n] - pts[(i + 1) % n];
      const double c = cross(e0, e1);
      if (!(c > 1e-12 * norm(e0) * norm(e1))) throw GeometryError("polygon is not strictly convex");
      turning += std::atan2(c, dot(e0, e1));
    }
    if (std::abs(turning - 2.0 * kPi) > 1e-6) throw GeometryError("polygon is self-intersecting");
    return ConvexPolygon(std::move(pts));
  }

  // Validated polygon translated so its area centroid sits at the origin.
  static ConvexPolygon body(std::vector<Vec2> pts) { return from_vertices(std::move(pts)).centered(); }

  static ConvexPolygon box(double w, double h) {
    if (!(w > 0.0 && h > 0.0)) throw GeometryError("box dimensions must be positive");
    return ConvexPolygon({{-w / 2, -h / 2}, {w / 2, -h / 2}, {w / 2, h / 2}, {-w / 2, h / 2}});
  }

  // Regular polygon inscribed in a circle of radius `r`, first vertex on +x.
  static ConvexPolygon regular(int sides, double r) {
    if (sides < 3 || !(r > 0.0)) throw GeometryError("invalid regular polygon");
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(sides));
    for (int i = 0; i < sides; ++i) pts.push_back(unit_from_angle(2.0 * kPi * i / sides) * r);
    return ConvexPolygon(std::move(pts));
  }

  const std::vector<Vec2>& vertices() const { return v_; }
  const std::vector<Vec2>& normals() const { return n_; }
  // Edge normals with antiparallel duplicates dropped; enough for SAT.
  const std::vector<Vec2>& axes() const { return axes_; }
  std::size_t size() const { return v_.size(); }
  const Vec2& operator[](std::size_t i) const { return v_[i]; }
  const Aabb& bounds() const { return box_; }

  double area() const { return signed_area(v_); }

  Vec2 centroid() const {
    double a2 = 0.0;
    Vec2 c;
    for (std::size_t i = 0; i < v_.size(); ++i) {
      const Vec2 p = v_[i];
      const Vec2 q = v_[(i + 1) % v_.size()];
      const double w = cross(p, q);
      a2 += w;
      c += (p + q) * w;
    }
    return c / (3.0 * a2);
  }

  double perimeter() const {
    double s = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) s += norm(v_[(i + 1) % v_.size()] - v_[i]);
    return s;
  }

  // Largest vertex distance from `c`.
  double radius_about(Vec2 c) const {
    double r = 0.0;
    for (const Vec2& p : v_) r = std::max(r, norm(p - c));
    return r;
  }

  Interval project(Vec2 axis) const {
    Interval iv;
    for (const Vec2& p : v_) iv.include(dot(p, axis));
    return iv;
  }

  // Minimum caliper width over edge directions.
  double min_width() const {
    double w = std::numeric_limits<double>::infinity();
    for (const Vec2& n : n_) w = std::min(w, project(n).length());
    return w;
  }

  // Closed containment with tolerance `tol` (positive grows the polygon).
  bool contains(Vec2 p, double tol = 0.0) const {
    for (std::size_t i = 0; i < v_.size(); ++i) {
      if (dot(p - v_[i], n_[i]) > tol) return false;
    }
    return true;
  }

  ConvexPolygon centered() const {
    const Vec2 c = centroid();
    std::vector<Vec2> pts = v_;
    for (Vec2& p : pts) p -= c;
    return ConvexPolygon(std::move(pts));
  }

  void shift(Vec2 d) {
    for (Vec2& p : v_) p += d;
    box_.lo += d;
    box_.hi += d;
  }

  ConvexPolygon translated(Vec2 d) const {
    ConvexPolygon out = *this;
    for (Vec2& p : out.v_) p += d;
    out.box_.lo += d;
    out.box_.hi += d;
    return out;
  }

 private:
  friend ConvexPolygon transform(const ConvexPolygon&, const Pose2D&);

  explicit ConvexPolygon(std::vector<Vec2> pts) : v_(std::move(pts)) { refresh(); }

  void refresh() {
    const std::size_t n = v_.size();
    n_.resize(n);
    box_ = Aabb{};
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 e = v_[(i + 1) % n] - v_[i];
      n_[i] = Vec2{e.y, -e.x} / norm(e);
      box_.include(v_[i]);
    }
    axes_.clear();
    for (const Vec2& a : n_) {
      bool seen = false;
      for (const Vec2& b : axes_) seen |= std::abs(cross(a, b)) < 1e-12 && dot(a, b) < 0.0;
      if (!seen) axes_.push_back(a);
    }
  }

  static double signed_area(const std::vector<Vec2>& pts) {
    double a2 = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) a2 += cross(pts[i], pts[(i + 1) % pts.size()]);
    return 0.5 * a2;
  }

  std::vector<Vec2> v_;
  std::vector<Vec2> n_;
  std::vector<Vec2> axes_;
  Aabb box_;
};

// Rotate by the pose heading, then translate by its position.
inline ConvexPolygon transform(const ConvexPolygon& poly, const Pose2D& pose) {
  ConvexPolygon out;
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  out.v_.reserve(poly.size());
  out.n_.reserve(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = rotate(poly.v_[i], c, s) + pose.position;
    out.v_.push_back(p);
    out.n_.push_back(rotate(poly.n_[i], c, s));
    out.box_.include(p);
  }
  out.axes_.reserve(poly.axes_.size());
  for (const Vec2& a : poly.axes_) out.axes_.push_back(rotate(a, c, s));
  return out;
}

namespace detail {

// Calls f(axis, projection of a, projection of b) for every separating axis
// candidate of both polygons; stops early when f returns false.
template <class F>
bool for_each_axis(const ConvexPolygon& a, const ConvexPolygon& b, F&& f) {
  for (const ConvexPolygon* p : {&a, &b}) {
    for (const Vec2& axis : p->axes()) {
      if (!f(axis, a.project(axis), b.project(axis))) return false;
    }
  }
  return true;
}

inline bool prefer(Vec2 cand, double cand_len, Vec2 best, double best_len) {
  constexpr double tie = 1e-12;
  if (cand_len < best_len - tie) return true;
  if (cand_len > best_len + tie) return false;
  if (cand.x > best.x + tie) return true;
  if (cand.x < best.x - tie) return false;
  return cand.y > best.y + tie;
}

// Smallest translation moving b clear of a, among directions accepted by
// `allowed`. Ties prefer larger x, then larger y.
template <class Allowed>
std::optional<Vec2> min_translation(const ConvexPolygon& a, const ConvexPolygon& b, double eps,
                                    Allowed&& allowed) {
  if (!a.bounds().overlaps(b.bounds(), eps)) return std::nullopt;
  Vec2 best;
  double best_len = std::numeric_limits<double>::infinity();
  bool found = false;
  const bool overlapping = for_each_axis(a, b, [&](Vec2 axis, Interval pa, Interval pb) {
    if (std::min(pa.hi, pb.hi) - std::max(pa.lo, pb.lo) <= eps) return false;
    const double plus = pa.hi - pb.lo;
    const double minus = pb.hi - pa.lo;
    const Vec2 up = axis * plus;
    const Vec2 down = axis * -minus;
    if (allowed(axis) && (!found || prefer(up, plus, best, best_len))) {
      best = up;
      best_len = plus;
      found = true;
    }
    if (allowed(-axis) && (!found || prefer(down, minus, best, best_len))) {
      best = down;
      best_len = minus;
      found = true;
    }
    return true;
  });
  if (!overlapping || !found) return std::nullopt;
  return best;
}

// Translation moving b clear of a along the axis that stopped separating last
// on the way from the reference placements a0, b0 of the same shapes, which
// is where continuous motion would have made contact. Only axes that
// separated (or touched) at the reference count; without one this falls back
// to the minimum translation.
template <class Allowed>
std::optional<Vec2> swept_translation(const ConvexPolygon& a, const ConvexPolygon& b, const ConvexPolygon& a0,
                                      const ConvexPolygon& b0, double eps, Allowed&& allowed) {
  if (!a.bounds().overlaps(b.bounds(), eps)) return std::nullopt;
  Vec2 best;
  double best_len = 0.0;
  double best_time = -std::numeric_limits<double>::infinity();
  bool found = false;
  const bool overlapping = for_each_axis(a, b, [&](Vec2 axis, Interval pa, Interval pb) {
    if (std::min(pa.hi, pb.hi) - std::max(pa.lo, pb.lo) <= eps) return false;
    const Interval qa = a0.project(axis);
    const Interval qb = b0.project(axis);
    const auto offer = [&](Vec2 n, double len, double gap) {
      const double closing = gap + len;
      if (gap < -2 * eps || closing <= 1e-12 || !allowed(n)) return;
      const double time = gap / closing;
      const Vec2 v = n * len;
      if (!found || time > best_time + 1e-9 || (time > best_time - 1e-9 && prefer(v, len, best, best_len))) {
        best = v;
        best_len = len;
        best_time = time;
        found = true;
      }
    };
    offer(axis, pa.hi - pb.lo, qb.lo - qa.hi);
    offer(-axis, pb.hi - pa.lo, qa.lo - qb.hi);
    return true;
  });
  if (!overlapping) return std::nullopt;
  if (!found) return min_translation(a, b, eps, allowed);
  return best;
}

}  // namespace detail

// Interiors overlap by more than `eps` along every separating axis.
inline bool intersects(const ConvexPolygon& a, const ConvexPolygon& b, double eps = kContactEps) {
  if (!a.bounds().overlaps(b.bounds(), eps)) return false;
  return detail::for_each_axis(a, b, [eps](Vec2, Interval pa, Interval pb) {
    return std::min(pa.hi, pb.hi) - std::max(pa.lo, pb.lo) > eps;
  });
}

// Minimum translation that moves b out of a, or nullopt when they do not
// intersect.
inline std::optional<Vec2> penetration_vector(const ConvexPolygon& a, const ConvexPolygon& b,
                                              double eps = kContactEps) {
  return detail::min_translation(a, b, eps, [](Vec2) { return true; });
}

// As penetration_vector, restricted to directions with a non-negative
// component along `dir`.
inline std::optional<Vec2> forward_penetration_vector(const ConvexPolygon& a, const ConvexPolygon& b,
                                                      Vec2 dir, double eps = kContactEps) {
  return detail::min_translation(a, b, eps, [dir](Vec2 n) { return dot(n, dir) >= -1e-9; });
}

// Dominant direction of the polygon's boundary, from the exact second moments
// of its perimeter (the dense-sampling limit). Equal eigenvalues give (1, 0);
// the sign is chosen so x > 0, or y > 0 when x is zero.
inline Vec2 principal_axis(const ConvexPolygon& poly) {
  double len = 0.0;
  Vec2 first;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % n];
    const double l = norm(q - p);
    len += l;
    first += (p + q) * (0.5 * l);
    sxx += l * (p.x * p.x + p.x * q.x + q.x * q.x) / 3.0;
    syy += l * (p.y * p.y + p.y * q.y + q.y * q.y) / 3.0;
    sxy += l * (2.0 * p.x * p.y + p.x * q.y + q.x * p.y + 2.0 * q.x * q.y) / 6.0;
  }
  const Vec2 mean = first / len;
  const double a = sxx / len - mean.x * mean.x;
  const double b = sxy / len - mean.x * mean.y;
  const double c = syy / len - mean.y * mean.y;
  const double spread = std::hypot(0.5 * (a - c), b);
  if (spread <= 1e-9 * (a + c)) return {1.0, 0.0};
  Vec2 axis = unit_from_angle(0.5 * std::atan2(2.0 * b, a - c));
  if (axis.x < 0.0 || (std::abs(axis.x) < 1e-15 && axis.y < 0.0)) axis = -axis;
  if (std::abs(axis.x) < 1e-15) axis = {0.0, 1.0};
  return axis;
}

struct ContourPoint {
  Vec2 point;
  Vec2 inward_normal;
};

// k points at equal arc-length spacing, starting at the lexicographically
// smallest vertex and walking counter-clockwise. A point that falls on a
// vertex takes the normal of the edge leaving that vertex.
inline std::vector<ContourPoint> contour_points(const ConvexPolygon& poly, int k) {
  if (k < 1) throw GeometryError("contour_points needs k >= 1");
  const std::size_t n = poly.size();
  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const Vec2 p = poly[i];
    const Vec2 s = poly[start];
    if (p.x < s.x || (p.x == s.x && p.y < s.y)) start = i;
  }
  const double spacing = poly.perimeter() / k;
  std::vector<ContourPoint> out;
  out.reserve(static_cast<std::size_t>(k));
  std::size_t edge = 0;
  double edge_begin = 0.0;
  for (int m = 0; m < k; ++m) {
    const double s = spacing * m;
    for (;;) {
      const std::size_t i = (start + edge) % n;
      const double l = norm(poly[(i + 1) % n] - poly[i]);
      if (s < edge_begin + l - 1e-12 || edge + 1 == n) break;
      edge_begin += l;
      ++edge;
    }
    const std::size_t i = (start + edge) % n;
    const Vec2 p = poly[i];
    const Vec2 e = poly[(i + 1) % n] - p;
    const double t = std::clamp((s - edge_begin) / norm(e), 0.0, 1.0);
    out.push_back({p + e * t, -poly.normals()[i]});
  }
  return out;
}

// Where the ray origin + t*dir (t > 0) leaves the polygon; origin must be
// inside.
inline Vec2 ray_exit(const ConvexPolygon& poly, Vec2 origin, Vec2 dir) {
  double t_exit = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const double dn = dot(dir, poly.normals()[i]);
    if (dn > 1e-15) t_exit = std::min(t_exit, dot(poly[i] - origin, poly.normals()[i]) / dn);
  }
  if (!std::isfinite(t_exit)) throw GeometryError("ray does not leave polygon");
  return origin + dir * t_exit;
}

// Intersection of two convex polygons (Sutherland-Hodgman); may be empty or
// degenerate.
inline std::vector<Vec2> clip(const ConvexPolygon& subject, const ConvexPolygon& clipper) {
  std::vector<Vec2> out = subject.vertices();
  std::vector<Vec2> in;
  for (std::size_t i = 0; i < clipper.size() && !out.empty(); ++i) {
    const Vec2 a = clipper[i];
    const Vec2 n = clipper.normals()[i];
    in.swap(out);
    out.clear();
    for (std::size_t j = 0; j < in.size(); ++j) {
      const Vec2 p = in[j];
      const Vec2 q = in[(j + 1) % in.size()];
      const double dp = dot(p - a, n);
      const double dq = dot(q - a, n);
      if (dp <= 0.0) out.push_back(p);
      if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) out.push_back(p + (q - p) * (dp / (dp - dq)));
    }
  }
  return out;
}

// Area centroid of a point loop, falling back to the vertex mean when the
// loop is degenerate.
inline Vec2 loop_centroid(const std::vector<Vec2>& pts) {
  if (pts.empty()) return {};
  double a2 = 0.0;
  Vec2 c;
  Vec2 mean;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 p = pts[i];
    const Vec2 q = pts[(i + 1) % pts.size()];
    const double w = cross(p, q);
    a2 += w;
    c += (p + q) * w;
    mean += p;
  }
  if (std::abs(a2) < 1e-14) return mean / static_cast<double>(pts.size());
  return c / (3.0 * a2);
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  const double t = std::clamp(dot(p - a, e) / dot(e, e), 0.0, 1.0);
  return norm(p - (a + e * t));
}

// Euclidean gap between two polygons; 0 when they touch or overlap.
inline double distance(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (intersects(a, b, 0.0)) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  for (const auto& [p, q] : {std::pair{&a, &b}, std::pair{&b, &a}}) {
    for (const Vec2& v : p->vertices()) {
      for (std::size_t i = 0; i < q->size(); ++i) {
        d = std::min(d, point_segment_distance(v, (*q)[i], (*q)[(i + 1) % q->size()]));
      }
    }
  }
  return d;
}

// Closed rectangle of size `length` along `dir` by `width` across it, centred
// at `center`.
inline ConvexPolygon oriented_rect(Vec2 center, Vec2 dir, double length, double width) {
  return transform(ConvexPolygon::box(length, width), Pose2D(center, std::atan2(dir.y, dir.x)));
}

}  // namespace vft
