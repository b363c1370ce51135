#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "vft/geometry.hpp"

using namespace vft;

namespace {

ConvexPolygon square(double side, Vec2 c = {}) { return ConvexPolygon::box(side, side).translated(c); }

bool same_vertex_set(const ConvexPolygon& a, const ConvexPolygon& b, double tol = 1e-12) {
  if (a.size() != b.size()) return false;
  for (const Vec2& p : a.vertices()) {
    bool found = false;
    for (const Vec2& q : b.vertices()) found |= norm(p - q) < tol;
    if (!found) return false;
  }
  return true;
}

}  // namespace

TEST(Geometry, WrapAngleRange) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), -kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi + 0.25), -kPi + 0.25, 1e-12);
  EXPECT_NEAR(wrap_angle(-0.5), -0.5, 1e-15);
  EXPECT_EQ(Pose2D({0, 0}, 2 * kPi).heading, 0.0);
}

TEST(Geometry, TransformIdentity) {
  const ConvexPolygon sq = square(1.0);
  const ConvexPolygon t = transform(sq, Pose2D());
  for (std::size_t i = 0; i < sq.size(); ++i) EXPECT_EQ(t[i], sq[i]);
}

TEST(Geometry, TransformQuarterTurnKeepsSquareVertexSet) {
  const ConvexPolygon sq = square(1.0);
  const ConvexPolygon t = transform(sq, Pose2D({0, 0}, kPi / 2));
  EXPECT_TRUE(same_vertex_set(sq, t));
  EXPECT_GT(t.area(), 0.0);
  EXPECT_NEAR(t[0].x, 0.5, 1e-12);  // (-0.5,-0.5) rotates to (0.5,-0.5)
  EXPECT_NEAR(t[0].y, -0.5, 1e-12);
}

TEST(Geometry, TransformHalfTurnWithOffset) {
  const ConvexPolygon tri = ConvexPolygon::from_vertices({{1, 0}, {2, 0}, {1, 1}});
  const ConvexPolygon t = transform(tri, Pose2D({1, 0}, kPi));
  EXPECT_NEAR(t[0].x, 0.0, 1e-12);
  EXPECT_NEAR(t[0].y, 0.0, 1e-12);
}

TEST(Geometry, FromVerticesRejectsBadInput) {
  EXPECT_THROW(ConvexPolygon::from_vertices({{0, 0}, {1, 0}}), GeometryError);
  EXPECT_THROW(ConvexPolygon::from_vertices({{0, 0}, {1, 0}, {1, 0}, {0, 1}}), GeometryError);
  EXPECT_THROW(ConvexPolygon::from_vertices({{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}), GeometryError);
  EXPECT_THROW(ConvexPolygon::from_vertices({{0, 0}, {1, 0}, {2, 0}, {1, 1}}), GeometryError);
  // Clockwise input is reordered.
  const ConvexPolygon p = ConvexPolygon::from_vertices({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  EXPECT_GT(p.area(), 0.0);
}

TEST(Geometry, BodyIsCenteredOnCentroid) {
  const ConvexPolygon p = ConvexPolygon::body({{0, 0}, {3, 0}, {0, 3}});
  EXPECT_NEAR(p.centroid().x, 0.0, 1e-12);
  EXPECT_NEAR(p.centroid().y, 0.0, 1e-12);
}

TEST(Geometry, IntersectsExamples) {
  EXPECT_FALSE(intersects(square(1), square(1, {2, 0})));
  EXPECT_TRUE(intersects(square(1), square(1)));
  EXPECT_FALSE(intersects(square(1), square(1, {1, 0})));       // shared edge
  EXPECT_FALSE(intersects(square(1), square(1, {1 - 5e-5, 0})));  // within contact tolerance
  EXPECT_TRUE(intersects(square(1), square(1, {1 - 5e-4, 0})));
}

TEST(Geometry, PenetrationVectorAxisAligned) {
  const auto v = penetration_vector(square(2), square(2, {1.5, 0}));
  ASSERT_TRUE(v);
  EXPECT_NEAR(v->x, 0.5, 1e-12);
  EXPECT_NEAR(v->y, 0.0, 1e-12);
  EXPECT_FALSE(penetration_vector(square(2), square(2, {5, 0})));
}

TEST(Geometry, PenetrationVectorCoincidentTieBreak) {
  const auto v = penetration_vector(square(2), square(2));
  ASSERT_TRUE(v);
  EXPECT_NEAR(v->x, 2.0, 1e-12);
  EXPECT_NEAR(v->y, 0.0, 1e-12);
}

TEST(Geometry, ForwardPenetrationRespectsDirection) {
  // b overlaps a by 0.5 on the right; forbidding +x forces a vertical or -x exit.
  const auto v = forward_penetration_vector(square(2), square(2, {1.5, 0.2}), {-1, 0});
  ASSERT_TRUE(v);
  EXPECT_LE(v->x, 1e-12);
}

TEST(GeometryProperty, IntersectsSymmetricAndMtvSeparates) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> off(-3.0, 3.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  int overlaps = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const ConvexPolygon a = transform(test::random_convex(rng), Pose2D({off(rng), off(rng)}, ang(rng)));
    const ConvexPolygon b = transform(test::random_convex(rng), Pose2D({off(rng), off(rng)}, ang(rng)));
    ASSERT_EQ(intersects(a, b), intersects(b, a));
    const auto v = penetration_vector(a, b);
    ASSERT_EQ(v.has_value(), intersects(a, b));
    if (v) {
      ++overlaps;
      ASSERT_FALSE(intersects(a, b.translated(*v * (1 + 1e-6))));
    }
  }
  EXPECT_GT(overlaps, 300);
}

TEST(Geometry, PrincipalAxisExamples) {
  const Vec2 a = principal_axis(ConvexPolygon::box(4, 1));
  EXPECT_NEAR(a.x, 1.0, 1e-12);
  EXPECT_NEAR(a.y, 0.0, 1e-12);
  const Vec2 s = principal_axis(ConvexPolygon::box(2, 2));
  EXPECT_EQ(s, Vec2(1.0, 0.0));
  const ConvexPolygon r30 = transform(ConvexPolygon::box(4, 1), Pose2D({3, -2}, deg_to_rad(30)));
  const Vec2 b = principal_axis(r30);
  EXPECT_NEAR(b.x, std::cos(deg_to_rad(30)), 1e-9);
  EXPECT_NEAR(b.y, std::sin(deg_to_rad(30)), 1e-9);
  const Vec2 o = test::sampled_principal_axis(r30, 20000);
  EXPECT_NEAR(b.x, o.x, 1e-6);
  EXPECT_NEAR(b.y, o.y, 1e-6);
  // Sign rule: an axis along y points up.
  const Vec2 v = principal_axis(ConvexPolygon::box(1, 4));
  EXPECT_NEAR(v.x, 0.0, 1e-12);
  EXPECT_NEAR(v.y, 1.0, 1e-12);
}

TEST(GeometryProperty, PrincipalAxisMatchesSampledCovariance) {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const ConvexPolygon p = test::random_convex(rng);
    const Vec2 exact = principal_axis(p);
    const Vec2 sampled = test::sampled_principal_axis(p, 20000);
    // Skip nearly isotropic shapes where the axis is ill-conditioned.
    const Vec2 other = test::sampled_principal_axis(p, 10000);
    if (std::abs(cross(sampled, other)) > 1e-7) continue;
    ++checked;
    ASSERT_NEAR(std::abs(cross(exact, sampled)), 0.0, 1e-6) << trial;
  }
  EXPECT_GT(checked, 150);
}

TEST(GeometryProperty, PrincipalAxisTranslationInvariantRotationEquivariant) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> off(-10.0, 10.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int trial = 0; trial < 500; ++trial) {
    const ConvexPolygon p = test::random_convex(rng);
    const Vec2 a = principal_axis(p);
    const Vec2 t = principal_axis(p.translated({off(rng), off(rng)}));
    ASSERT_NEAR(std::abs(cross(a, t)), 0.0, 1e-6);
    const double th = ang(rng);
    const Vec2 r = principal_axis(transform(p, Pose2D({}, th)));
    ASSERT_NEAR(std::abs(cross(rotate(a, th), r)), 0.0, 1e-6);
    ASSERT_NEAR(norm(r), 1.0, 1e-12);
    ASSERT_TRUE(r.x > 0 || (r.x == 0 && r.y > 0));
  }
}

TEST(Geometry, ContourPointsUnitSquare) {
  const auto pts = contour_points(square(1), 4);
  ASSERT_EQ(pts.size(), 4u);
  const Vec2 expected_pt[] = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
  const Vec2 expected_n[] = {{0, 1}, {-1, 0}, {0, -1}, {1, 0}};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(norm(pts[i].point - expected_pt[i]), 0.0, 1e-12) << i;
    EXPECT_NEAR(norm(pts[i].inward_normal - expected_n[i]), 0.0, 1e-12) << i;
  }
}

TEST(Geometry, ContourPointsSingleIsStartVertex) {
  const ConvexPolygon p = ConvexPolygon::from_vertices({{2, 1}, {3, 0}, {4, 2}, {1, 3}});
  const auto pts = contour_points(p, 1);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].point, Vec2(1, 3));
  EXPECT_THROW(contour_points(p, 0), GeometryError);
}

TEST(Geometry, ContourPointsTriangle) {
  const double h = 3 * std::sqrt(3.0) / 2;
  const ConvexPolygon tri = ConvexPolygon::from_vertices({{0, 0}, {3, 0}, {1.5, h}});
  const auto pts = contour_points(tri, 3);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_NEAR(norm(pts[1].point - Vec2(3, 0)), 0.0, 1e-12);
  EXPECT_NEAR(norm(pts[2].point - Vec2(1.5, h)), 0.0, 1e-12);
}

TEST(GeometryProperty, ContourSpacingEqual) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const ConvexPolygon p = test::random_convex(rng);
    const int k = 1 + trial % 17;
    const auto pts = contour_points(p, k);
    ASSERT_EQ(static_cast<int>(pts.size()), k);
    // Arc-length position of each point, walking the boundary from point 0.
    std::size_t start = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i].x < p[start].x || (p[i].x == p[start].x && p[i].y < p[start].y)) start = i;
    }
    ASSERT_EQ(pts[0].point, p[start]);
    std::vector<double> pos;
    for (const auto& cp : pts) {
      double acc = 0;
      bool found = false;
      for (std::size_t e = 0; e < p.size() && !found; ++e) {
        const Vec2 a = p[(start + e) % p.size()];
        const Vec2 b = p[(start + e + 1) % p.size()];
        if (point_segment_distance(cp.point, a, b) < 1e-9) {
          acc += norm(cp.point - a);
          found = true;
          // Inward normal is the unit normal of this edge (or the next one
          // when the point sits on the shared vertex).
          const Vec2 in = normalized(perp(b - a));
          if (norm(cp.point - b) > 1e-9) {
            ASSERT_NEAR(norm(cp.inward_normal - in), 0.0, 1e-9);
          }
        } else {
          acc += norm(b - a);
        }
      }
      ASSERT_TRUE(found);
      pos.push_back(acc);
    }
    const double spacing = p.perimeter() / k;
    for (int i = 0; i < k; ++i) ASSERT_NEAR(pos[i], spacing * i, 1e-9);
  }
}

TEST(Geometry, RayExitAndClip) {
  const ConvexPolygon sq = square(2);
  const Vec2 e = ray_exit(sq, {0, 0}, normalized(Vec2{1, 1}));
  EXPECT_NEAR(e.x, 1.0, 1e-12);
  EXPECT_NEAR(e.y, 1.0, 1e-12);
  const auto overlap = clip(square(2), square(2, {1, 1}));
  EXPECT_NEAR(loop_centroid(overlap).x, 0.5, 1e-12);
  EXPECT_NEAR(loop_centroid(overlap).y, 0.5, 1e-12);
  EXPECT_NEAR(distance(square(1), square(1, {3, 0})), 2.0, 1e-12);
}
