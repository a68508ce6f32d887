#include <gtest/gtest.h>

#include <numbers>

#include "pomp/scenes.hpp"

using namespace pomp;

namespace {

double residual(const Shape& s, Vec3 p) {
  const Vec3 d = p - s.center;
  return std::visit(
      [&](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return std::abs(d.norm() - g.radius);
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          const double rho = std::hypot(d.x, d.y);
          const double side = std::abs(rho - g.radius) + std::max(0.0, std::abs(d.z) - g.height / 2);
          const double cap = std::abs(std::abs(d.z) - g.height / 2) + std::max(0.0, rho - g.radius);
          return std::min(side, cap);
        } else if constexpr (std::is_same_v<T, Cone>) {
          const double rho = std::hypot(d.x, d.y);
          const double t = (g.height / 2 - d.z) / g.height;  // 0 at apex, 1 at base
          const double lateral = std::abs(rho - t * g.radius) + std::max(0.0, -t) + std::max(0.0, t - 1);
          const double base = std::abs(d.z + g.height / 2) + std::max(0.0, rho - g.radius);
          return std::min(lateral, base);
        } else {
          const Vec3 h = g.half_extents;
          const double out = std::max({std::abs(d.x) - h.x, std::abs(d.y) - h.y, std::abs(d.z) - h.z});
          return std::abs(out);
        }
      },
      s.geometry);
}

}  // namespace

TEST(Scenes, SurfaceAreas) {
  EXPECT_NEAR(surface_area({Sphere{2.0}, {}, {}}), 16 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(surface_area({Cylinder{1.0, 3.0}, {}, {}}), 2 * std::numbers::pi * 4, 1e-12);
  EXPECT_NEAR(surface_area({Cone{3.0, 4.0}, {}, {}}), std::numbers::pi * 3 * 8, 1e-12);
  EXPECT_NEAR(surface_area({Box{{1, 2, 3}}, {}, {}}), 8 * (2 + 6 + 3), 1e-12);
}

TEST(Scenes, UnitSpherePointsAreRadial) {
  CounterRng rng(1, 0);
  std::vector<Vec3> pts;
  sample_surface({Sphere{1.0}, {}, {}}, 10000, rng, pts);
  ASSERT_EQ(pts.size(), 10000u);
  Vec3 mean{};
  for (const Vec3& p : pts) {
    EXPECT_NEAR(p.norm(), 1.0, 1e-12);
    mean = mean + p * (1.0 / pts.size());
  }
  EXPECT_LT(mean.norm(), 0.05);
}

TEST(Scenes, PointsLieOnSurfaces) {
  const std::vector<Shape> shapes{{Cylinder{0.9, 10.0}, {1, 2, 3}, {}},
                                  {Sphere{1.3}, {-4, 0, 1}, {}},
                                  {Cone{1.1, 2.2}, {0, 5, -2}, {}},
                                  {Box{{0.5, 1.0, 1.5}}, {2, -3, 0}, {}}};
  for (std::size_t n = 0; n < shapes.size(); ++n) {
    CounterRng rng(3, n);
    std::vector<Vec3> pts;
    sample_surface(shapes[n], 5000, rng, pts);
    for (const Vec3& p : pts) ASSERT_LT(residual(shapes[n], p), 1e-9) << n << " " << to_string(p);
  }
}

TEST(Scenes, ConeCoversBothParts) {
  const Shape cone{Cone{1.0, 2.0}, {}, {}};
  CounterRng rng(5, 0);
  std::vector<Vec3> pts;
  sample_surface(cone, 20000, rng, pts);
  std::size_t base = 0;
  for (const Vec3& p : pts) base += std::abs(p.z + 1.0) < 1e-12 ? 1 : 0;
  // base area pi over total pi (1 + sqrt 5)
  EXPECT_NEAR(static_cast<double>(base) / pts.size(), 1.0 / (1.0 + std::sqrt(5.0)), 0.02);
}

TEST(Apportion, LargestRemainder) {
  EXPECT_EQ(apportion(10, {1, 1, 1}), (std::vector<std::size_t>{4, 3, 3}));
  EXPECT_EQ(apportion(7, {2, 1}), (std::vector<std::size_t>{5, 2}));
  EXPECT_EQ(apportion(0, {1, 2}), (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(apportion(5, {0, 1}), (std::vector<std::size_t>{0, 5}));
  const auto big = apportion(1000003, {0.3, 1.7, 2.9, 0.01});
  EXPECT_EQ(big[0] + big[1] + big[2] + big[3], 1000003u);
}

TEST(Scenes, CylinderSceneIsDeterministic) {
  const Scene a = gen_cylinder_scene(42);
  const Scene b = gen_cylinder_scene(42);
  const Scene c = gen_cylinder_scene(43);
  EXPECT_EQ(a.cloud.size(), 20000u);
  EXPECT_EQ(a.spec.shapes.size(), 40u);
  ASSERT_EQ(a.cloud.size(), b.cloud.size());
  EXPECT_TRUE(std::equal(a.cloud.begin(), a.cloud.end(), b.cloud.begin()));
  EXPECT_FALSE(std::equal(a.cloud.begin(), a.cloud.end(), c.cloud.begin()));
  for (const Shape& s : a.spec.shapes) {
    const auto& cyl = std::get<Cylinder>(s.geometry);
    EXPECT_GE(cyl.radius, 0.8);
    EXPECT_LE(cyl.radius, 1.0);
    EXPECT_DOUBLE_EQ(cyl.height, 10.0);
    EXPECT_TRUE(a.spec.workspace.contains(s.center));
  }
}

TEST(Scenes, ZeroShapesGiveEmptyCloud) {
  EXPECT_TRUE(gen_cylinder_scene(1, {.cylinders = 0}).cloud.empty());
  EXPECT_THROW(gen_cylinder_scene(1, {.radius_min = 2.0, .radius_max = 1.0}), ConfigError);
}

TEST(Scenes, MixedSceneComposition) {
  const Scene s = gen_mixed_scene(7);
  EXPECT_EQ(s.cloud.size(), 60000u);
  ASSERT_EQ(s.spec.shapes.size(), 120u);
  EXPECT_TRUE(std::holds_alternative<Sphere>(s.spec.shapes[0].geometry));
  EXPECT_TRUE(std::holds_alternative<Cone>(s.spec.shapes[40].geometry));
  EXPECT_TRUE(std::holds_alternative<Box>(s.spec.shapes[80].geometry));
}

TEST(Reflect, FoldsIntoInterval) {
  double v = 0;
  EXPECT_DOUBLE_EQ(reflect_into(0.0, 1.0, 3.0, 0.0, 10.0, &v), 3.0);
  EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_DOUBLE_EQ(reflect_into(8.0, 1.0, 4.0, 0.0, 10.0, &v), 8.0);
  EXPECT_DOUBLE_EQ(v, -1.0);
  EXPECT_DOUBLE_EQ(reflect_into(8.0, 1.0, 24.0, 0.0, 10.0, &v), 8.0);
  EXPECT_DOUBLE_EQ(v, -1.0);
  EXPECT_DOUBLE_EQ(reflect_into(8.0, 1.0, 40.0, 0.0, 10.0, &v), 8.0);
  EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_DOUBLE_EQ(reflect_into(1.0, -2.0, 1.0, 0.0, 10.0, &v), 1.0);
  EXPECT_DOUBLE_EQ(v, 2.0);
}

TEST(MovingCubes, StayInsideAndFramesArePure) {
  MovingCubesParams p;
  p.cubes = 50;
  p.point_budget = 5000;
  const MovingCubes mc(9, p);
  for (std::size_t t : {0u, 1u, 17u, 400u, 10000u}) {
    const SceneSpec spec = mc.state_at(t);
    for (const Shape& s : spec.shapes) {
      const double h = std::get<Box>(s.geometry).half_extents.x;
      for (int a = 0; a < 3; ++a) {
        EXPECT_GE(s.center[a], p.workspace.min[a] + h - 1e-9);
        EXPECT_LE(s.center[a], p.workspace.max[a] - h + 1e-9);
      }
      const double speed = s.velocity.norm();
      EXPECT_GE(speed, p.speed_min - 1e-9);
      EXPECT_LE(speed, p.speed_max + 1e-9);
    }
  }
  const Frame f5 = mc.frame(5);
  const MovingCubes other(9, p);
  (void)other.frame(3);
  const Frame again = other.frame(5);
  EXPECT_EQ(f5.points.size(), 5000u);
  EXPECT_DOUBLE_EQ(f5.timestamp, 0.5);
  EXPECT_TRUE(std::equal(f5.points.begin(), f5.points.end(), again.points.begin()));
  const auto frames = gen_moving_cubes(9, 6, p);
  ASSERT_EQ(frames.size(), 6u);
  EXPECT_TRUE(std::equal(frames[5].points.begin(), frames[5].points.end(), f5.points.begin()));
  EXPECT_THROW(gen_moving_cubes(9, 0, p), ConfigError);
}

TEST(MovingCubes, CubesMove) {
  MovingCubesParams p;
  p.cubes = 10;
  const MovingCubes mc(4, p);
  const SceneSpec a = mc.state_at(0), b = mc.state_at(1);
  double moved = 0;
  for (std::size_t n = 0; n < a.shapes.size(); ++n) moved += (b.shapes[n].center - a.shapes[n].center).norm();
  EXPECT_GT(moved / a.shapes.size(), 0.5);
}
