#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "pomp/geometry.hpp"
#include "pomp/rng.hpp"

namespace pomp {

/// Vertical (z-axis) cylinder, centred on the shape pose.
struct Cylinder {
  double radius = 1.0;
  double height = 1.0;
};

struct Sphere {
  double radius = 1.0;
};

/// Right circular cone along +z: base disk at pose.z - height/2, apex at pose.z + height/2.
struct Cone {
  double radius = 1.0;
  double height = 1.0;
};

struct Box {
  Vec3 half_extents{0.5, 0.5, 0.5};
};

using ShapeGeometry = std::variant<Cylinder, Sphere, Cone, Box>;

struct Shape {
  ShapeGeometry geometry;
  Vec3 center;
  /// Translation per frame (dynamic scenes only).
  Vec3 velocity;
};

double surface_area(const Shape& shape);

/// Appends `count` points uniformly distributed over the surface of `shape`.
void sample_surface(const Shape& shape, std::size_t count, CounterRng& rng, std::vector<Vec3>& out);

struct SceneSpec {
  Aabb workspace;
  std::vector<Shape> shapes;
  std::size_t point_count = 0;
  std::uint64_t seed = 0;
};

struct Scene {
  SceneSpec spec;
  std::vector<Vec3> cloud;
};

/// Splits `total` over weights by largest remainder (ties to the lower index).
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights);

/// Samples the surfaces of all shapes, shape by shape, with the point budget
/// split by surface area. Shape i draws from stream (seed, stream_base + i).
std::vector<Vec3> sample_scene(const SceneSpec& spec, std::uint64_t stream_base = 0);

struct CylinderSceneParams {
  Aabb workspace{{-10.0, -10.0, -5.0}, {10.0, 10.0, 5.0}};
  std::size_t cylinders = 40;
  double radius_min = 0.8;
  double radius_max = 1.0;
  /// Full workspace height when <= 0.
  double height = 0.0;
  std::size_t point_count = 20000;
};

Scene gen_cylinder_scene(std::uint64_t seed, const CylinderSceneParams& params = {});

struct MixedSceneParams {
  Aabb workspace{{-12.5, -12.5, -12.5}, {12.5, 12.5, 12.5}};
  std::size_t spheres = 40;
  std::size_t cones = 40;
  std::size_t boxes = 40;
  /// Sphere/cone radius and box half-extent range.
  double size_min = 0.5;
  double size_max = 1.5;
  std::size_t point_count = 60000;
};

Scene gen_mixed_scene(std::uint64_t seed, const MixedSceneParams& params = {});

struct Frame {
  double timestamp = 0.0;
  std::vector<Vec3> points;
};

struct MovingCubesParams {
  Aabb workspace{{-25.0, -25.0, -25.0}, {25.0, 25.0, 25.0}};
  std::size_t cubes = 800;
  double side_min = 1.0;
  double side_max = 2.0;
  double speed_min = 1.0;
  double speed_max = 2.0;
  std::size_t point_budget = 70000;
  double frame_period = 0.1;
};

/// Cubes moving along fixed random directions with specular reflection at the
/// workspace boundary. Every frame is a pure function of (seed, frame index).
class MovingCubes {
 public:
  MovingCubes(std::uint64_t seed, const MovingCubesParams& params = {});

  const MovingCubesParams& params() const { return params_; }
  std::size_t cube_count() const { return initial_.size(); }

  /// Cube poses at frame t (velocity holds the current signed per-frame motion).
  SceneSpec state_at(std::size_t t) const;
  Frame frame(std::size_t t) const;

 private:
  std::uint64_t seed_;
  MovingCubesParams params_;
  std::vector<Shape> initial_;
};

std::vector<Frame> gen_moving_cubes(std::uint64_t seed, std::size_t frames,
                                    const MovingCubesParams& params = {});

/// Specular reflection of a 1D trajectory x0 + v t inside [lo, hi].
/// Returns the folded position and writes the current signed velocity.
double reflect_into(double x0, double v, double t, double lo, double hi, double* v_now = nullptr);

}  // namespace pomp
