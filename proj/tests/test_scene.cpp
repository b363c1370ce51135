#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "vft/scenario_io.hpp"
#include "vft/scene.hpp"
#include "vft/svg.hpp"

using namespace vft;

namespace {

std::string one_object(const std::string& shape, double x = 22.4, double y = 22.4, double deg = 0) {
  return R"({"workspace_cm": 44.8, "objects": [{"id": "t", "target": true, "shape": )" + shape +
         R"(, "pose": {"x_cm": )" + std::to_string(x) + R"(, "y_cm": )" + std::to_string(y) +
         R"(, "theta_deg": )" + std::to_string(deg) + "}}]}";
}

std::string validation_message(const std::string& json) {
  try {
    load_scenario(json);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Scenario, MinimalSquareTarget) {
  const Scene s = load_scenario(one_object(R"({"kind":"box","w_cm":4,"h_cm":4})"));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_TRUE(s[0].is_target());
  EXPECT_NEAR(s[0].footprint.area(), 16.0, 1e-12);
}

TEST(Scenario, OverlapNamesBothIds) {
  const std::string json = R"({"objects": [
    {"id": "a", "target": true, "shape": {"kind":"box","w_cm":4,"h_cm":4}, "pose": {"x_cm":10,"y_cm":10,"theta_deg":0}},
    {"id": "b", "shape": {"kind":"box","w_cm":4,"h_cm":4}, "pose": {"x_cm":12,"y_cm":10,"theta_deg":0}}]})";
  EXPECT_EQ(validation_message(json), "overlap: a,b");
}

TEST(Scenario, InvariantViolationsNamed) {
  EXPECT_EQ(validation_message(one_object(R"({"kind":"box","w_cm":4,"h_cm":4})", 1.0, 10.0)), "out_of_workspace: t");
  const std::string dup = R"({"objects": [
    {"id": "a", "target": true, "shape": {"kind":"box","w_cm":1,"h_cm":1}, "pose": {"x_cm":10,"y_cm":10,"theta_deg":0}},
    {"id": "a", "shape": {"kind":"box","w_cm":1,"h_cm":1}, "pose": {"x_cm":20,"y_cm":10,"theta_deg":0}}]})";
  EXPECT_EQ(validation_message(dup), "duplicate_id: a");
  const std::string none = R"({"objects": [
    {"id": "a", "shape": {"kind":"box","w_cm":1,"h_cm":1}, "pose": {"x_cm":10,"y_cm":10,"theta_deg":0}}]})";
  EXPECT_NE(validation_message(none).find("target_count"), std::string::npos);
}

TEST(Scenario, MalformedJsonIsParseError) {
  EXPECT_THROW(load_scenario("{\"objects\": ["), ParseError);
  EXPECT_THROW(load_scenario(R"({"objects": [{"id": "t"}]})"), ParseError);
  EXPECT_THROW(load_scenario(one_object(R"({"kind":"torus"})")), ParseError);
}

TEST(Scenario, PackedNineBlocks) {
  std::string json = R"({"workspace_cm": 44.8, "objects": [)";
  int k = 0;
  for (int r = -1; r <= 1; ++r) {
    for (int c = -1; c <= 1; ++c) {
      const bool target = r == 0 && c == 0;
      if (k++) json += ",";
      json += R"({"id": ")" + (target ? std::string("target") : "n" + std::to_string(k)) + R"(", "target": )" +
              (target ? "true" : "false") + R"(, "shape": {"kind":"box","w_cm":4,"h_cm":4}, "pose": {"x_cm": )" +
              std::to_string(22.4 + 4 * c) + R"(, "y_cm": )" + std::to_string(22.4 + 4 * r) + R"(, "theta_deg": 0}})";
    }
  }
  json += "]}";
  const Scene s = load_scenario(json);
  ASSERT_EQ(s.size(), 9u);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) EXPECT_FALSE(intersects(s[i].footprint, s[j].footprint));
  }
}

TEST(Scenario, UngraspableFlag) {
  const Scene big = load_scenario(one_object(R"({"kind":"cylinder","r_cm":5})"));
  EXPECT_FALSE(big[0].spec->graspable);
  const Scene small = load_scenario(one_object(R"({"kind":"cylinder","r_cm":2.25})"));
  EXPECT_TRUE(small[0].spec->graspable);
}

TEST(ScenarioProperty, RoundTripExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(6.0, 38.0);
  std::uniform_real_distribution<double> ang(-180.0, 180.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<ObjectSpec, Pose2D>> objs;
    objs.emplace_back(ObjectSpec::make("t", BoxShape{3, 2}, true), Pose2D({pos(rng), pos(rng)}, deg_to_rad(ang(rng))));
    objs.emplace_back(ObjectSpec::make("c", CylinderShape{1.5}, false), Pose2D({3, 3}, deg_to_rad(ang(rng))));
    objs.emplace_back(ObjectSpec::make("p", PolygonShape{{{0, 0}, {2, 0}, {1, 1.5}}}, false),
                      Pose2D({41, 41}, deg_to_rad(ang(rng))));
    Scene s;
    try {
      s = Scene::make(kWorkspaceSide, std::move(objs));
    } catch (const ValidationError&) {
      continue;
    }
    const Scene back = load_scenario(save_scenario(s));
    ASSERT_EQ(back.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_EQ(back[i].id(), s[i].id());
      EXPECT_NEAR(norm(back[i].pose.position - s[i].pose.position), 0.0, 1e-9);
      EXPECT_NEAR(std::abs(wrap_angle(back[i].pose.heading - s[i].pose.heading)), 0.0, 1e-9);
      for (std::size_t k = 0; k < s[i].footprint.size(); ++k) {
        EXPECT_NEAR(norm(back[i].footprint[k] - s[i].footprint[k]), 0.0, 1e-9);
      }
    }
  }
}

TEST(Rasterize, EmptySceneAllBackground) {
  const OccupancyGrid g = rasterize(Scene(kWorkspaceSide));
  EXPECT_EQ(g.cells.size(), 224u * 224u);
  EXPECT_EQ(g.count(Cell::background), 224u * 224u);
  EXPECT_NEAR(g.grid.resolution(), 0.2, 1e-15);
}

TEST(Rasterize, CenteredSquareIsTwentyByTwenty) {
  const Scene s = Scene::make(kWorkspaceSide, {{test::box_spec("t", 4, 4, true), Pose2D({22.4, 22.4}, 0)}});
  const OccupancyGrid g = rasterize(s);
  EXPECT_EQ(g.count(Cell::target), 400u);
  // The block is rows/cols 102..121.
  for (int r = 100; r < 124; ++r) {
    for (int c = 100; c < 124; ++c) {
      const bool inside = r >= 102 && r <= 121 && c >= 102 && c <= 121;
      EXPECT_EQ(g.at(r, c), inside ? Cell::target : Cell::background) << r << "," << c;
    }
  }
}

TEST(RasterizeProperty, CountTracksArea) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dim(0.5, 10.0);
  std::uniform_real_distribution<double> pos(12.0, 32.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int trial = 0; trial < 200; ++trial) {
    const double w = dim(rng);
    const double h = dim(rng);
    const Scene s = Scene::make(kWorkspaceSide, {{test::box_spec("t", w, h, true), Pose2D({pos(rng), pos(rng)}, ang(rng))}});
    const double cells = static_cast<double>(rasterize(s).count(Cell::target));
    const double expected = w * h / 0.04;
    ASSERT_LE(std::abs(cells - expected), 2 * (w + h) / 0.2) << w << "x" << h;
  }
}

TEST(SceneHash, QuantizationContract) {
  const auto make = [](Vec2 p, double deg) {
    return Scene::make(kWorkspaceSide, {{test::box_spec("t", 4, 4, true), Pose2D(p, deg_to_rad(deg))},
                                        {test::box_spec("n", 2, 2), Pose2D({5, 5}, 0)}});
  };
  // Bin centres: 0.05 cm position bins, 0.5 degree heading bins.
  const Scene a = make({20.025, 20.025}, 10.25);
  EXPECT_EQ(scene_hash(a), scene_hash(make({20.025, 20.025}, 10.25)));
  EXPECT_EQ(scene_hash(a), scene_hash(make({20.035, 20.015}, 10.25)));
  EXPECT_NE(scene_hash(a), scene_hash(make({21.025, 20.025}, 10.25)));
  EXPECT_NE(scene_hash(a), scene_hash(make({20.025, 20.025}, 12.25)));
}

TEST(SceneHashProperty, RandomPerturbationPairs) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> bin(200, 600);
  std::uniform_int_distribution<int> hbin(-300, 300);
  std::uniform_real_distribution<double> within(-0.02, 0.02);
  std::uniform_real_distribution<double> within_deg(-0.2, 0.2);
  int distinct = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    // Poses at bin centres, perturbed by less than half a bin, stay in the bin.
    const Vec2 c{(bin(rng) + 0.5) * 0.05, (bin(rng) + 0.5) * 0.05};
    const double deg = (hbin(rng) + 0.5) * 0.5;
    const auto make = [](Vec2 p, double d) {
      return Scene::make(kWorkspaceSide, {{test::box_spec("t", 2, 2, true), Pose2D(p, deg_to_rad(d))}});
    };
    const Scene base = make(c, deg);
    ASSERT_EQ(scene_hash(base), scene_hash(make(c + Vec2{within(rng), within(rng)}, deg + within_deg(rng))));
    const Scene moved = make(c + Vec2{1.0, 0.0}, deg);
    distinct += scene_hash(base) != scene_hash(moved) ? 1 : 0;
  }
  EXPECT_EQ(distinct, 1000);
}

TEST(Svg, EmptySceneHasOnlyWorkspace) {
  const std::string svg = render_svg(Scene(kWorkspaceSide));
  EXPECT_NE(svg.find("class=\"workspace\""), std::string::npos);
  EXPECT_EQ(svg.find("<polygon"), std::string::npos);
  EXPECT_EQ(svg.find("<path"), std::string::npos);
}

TEST(Svg, OneArrowElementAndDeterministic) {
  const Scene s = test::block_grid(3, 3, 4.0);
  Annotations notes;
  notes.arrows.push_back({{10, 10}, {15, 10}});
  const std::string a = render_svg(s, notes);
  const std::string b = render_svg(s, notes);
  EXPECT_EQ(a, b);
  std::size_t n = 0;
  for (std::size_t p = a.find("<path class=\"arrow\""); p != std::string::npos; p = a.find("<path class=\"arrow\"", p + 1)) ++n;
  EXPECT_EQ(n, 1u);
  EXPECT_NE(a.find("class=\"target\""), std::string::npos);
}
