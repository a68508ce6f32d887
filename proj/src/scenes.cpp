#include "pomp/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace pomp {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double cone_slant(const Cone& c) { return std::hypot(c.radius, c.height); }

// Uniform point on a disk of radius r in the plane z = 0 around the origin.
Vec3 sample_disk(double r, CounterRng& rng) {
  const double rho = r * std::sqrt(rng.uniform());
  const double phi = 2.0 * kPi * rng.uniform();
  return {rho * std::cos(phi), rho * std::sin(phi), 0.0};
}

Vec3 sample_on(const Cylinder& c, CounterRng& rng) {
  const double lateral = 2.0 * kPi * c.radius * c.height;
  const double cap = kPi * c.radius * c.radius;
  const double u = rng.uniform() * (lateral + 2.0 * cap);
  if (u < lateral) {
    const double phi = 2.0 * kPi * rng.uniform();
    const double z = (rng.uniform() - 0.5) * c.height;
    return {c.radius * std::cos(phi), c.radius * std::sin(phi), z};
  }
  Vec3 p = sample_disk(c.radius, rng);
  p.z = (u < lateral + cap) ? -0.5 * c.height : 0.5 * c.height;
  return p;
}

Vec3 sample_on(const Sphere& s, CounterRng& rng) {
  // Archimedes: z uniform in [-1, 1] gives a uniform distribution on the sphere.
  const double z = 2.0 * rng.uniform() - 1.0;
  const double phi = 2.0 * kPi * rng.uniform();
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s.radius * rho * std::cos(phi), s.radius * rho * std::sin(phi), s.radius * z};
}

Vec3 sample_on(const Cone& c, CounterRng& rng) {
  const double lateral = kPi * c.radius * cone_slant(c);
  const double base = kPi * c.radius * c.radius;
  if (rng.uniform() * (lateral + base) < lateral) {
    // Fraction of the way from apex to base; area density grows linearly.
    const double t = std::sqrt(rng.uniform());
    const double phi = 2.0 * kPi * rng.uniform();
    return {t * c.radius * std::cos(phi), t * c.radius * std::sin(phi), 0.5 * c.height - t * c.height};
  }
  Vec3 p = sample_disk(c.radius, rng);
  p.z = -0.5 * c.height;
  return p;
}

Vec3 sample_on(const Box& b, CounterRng& rng) {
  const Vec3 h = b.half_extents;
  const std::array<double, 3> face_area{4.0 * h.y * h.z, 4.0 * h.x * h.z, 4.0 * h.x * h.y};
  const double total = 2.0 * (face_area[0] + face_area[1] + face_area[2]);
  double u = rng.uniform() * total;
  int axis = 0;
  while (axis < 2 && u >= 2.0 * face_area[axis]) {
    u -= 2.0 * face_area[axis];
    ++axis;
  }
  const double side = u < face_area[axis] ? -1.0 : 1.0;
  Vec3 p{rng.uniform(-h.x, h.x), rng.uniform(-h.y, h.y), rng.uniform(-h.z, h.z)};
  p[axis] = side * h[axis];
  return p;
}

}  // namespace

double surface_area(const Shape& shape) {
  return std::visit(
      Overloaded{
          [](const Cylinder& c) { return 2.0 * kPi * c.radius * (c.height + c.radius); },
          [](const Sphere& s) { return 4.0 * kPi * s.radius * s.radius; },
          [](const Cone& c) { return kPi * c.radius * (c.radius + cone_slant(c)); },
          [](const Box& b) {
            const Vec3 h = b.half_extents;
            return 8.0 * (h.x * h.y + h.y * h.z + h.x * h.z);
          },
      },
      shape.geometry);
}

void sample_surface(const Shape& shape, std::size_t count, CounterRng& rng, std::vector<Vec3>& out) {
  out.reserve(out.size() + count);
  for (std::size_t n = 0; n < count; ++n) {
    const Vec3 local = std::visit([&](const auto& g) { return sample_on(g, rng); }, shape.geometry);
    out.push_back(shape.center + local);
  }
}

std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
  std::vector<std::size_t> counts(weights.size(), 0);
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (weights.empty() || sum <= 0.0) return counts;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < total && r < remainders.size(); ++r, ++assigned) {
    ++counts[remainders[r].second];
  }
  return counts;
}

std::vector<Vec3> sample_scene(const SceneSpec& spec, std::uint64_t stream_base) {
  std::vector<double> areas;
  areas.reserve(spec.shapes.size());
  for (const Shape& s : spec.shapes) areas.push_back(surface_area(s));
  const std::vector<std::size_t> counts = apportion(spec.point_count, areas);
  std::vector<Vec3> cloud;
  cloud.reserve(spec.point_count);
  for (std::size_t i = 0; i < spec.shapes.size(); ++i) {
    CounterRng rng(spec.seed, stream_base + i);
    sample_surface(spec.shapes[i], counts[i], rng, cloud);
  }
  return cloud;
}

namespace {
// Stream ids: layout draws use stream 0 of the seed, shape surfaces start here.
constexpr std::uint64_t kShapeStreamBase = 1;
}  // namespace

Scene gen_cylinder_scene(std::uint64_t seed, const CylinderSceneParams& params) {
  params.workspace.validate();
  if (params.radius_min <= 0.0 || params.radius_max < params.radius_min) {
    throw ConfigError("cylinder radius range must be positive and ordered");
  }
  Scene scene;
  scene.spec.workspace = params.workspace;
  scene.spec.seed = seed;
  const Vec3 lo = params.workspace.min;
  const Vec3 hi = params.workspace.max;
  const double height = params.height > 0.0 ? params.height : hi.z - lo.z;
  CounterRng layout(seed, 0);
  for (std::size_t i = 0; i < params.cylinders; ++i) {
    Shape s;
    s.geometry = Cylinder{layout.uniform(params.radius_min, params.radius_max), height};
    s.center = {layout.uniform(lo.x, hi.x), layout.uniform(lo.y, hi.y), 0.5 * (lo.z + hi.z)};
    scene.spec.shapes.push_back(s);
  }
  scene.spec.point_count = params.cylinders == 0 ? 0 : params.point_count;
  scene.cloud = sample_scene(scene.spec, kShapeStreamBase);
  return scene;
}

Scene gen_mixed_scene(std::uint64_t seed, const MixedSceneParams& params) {
  params.workspace.validate();
  if (params.size_min <= 0.0 || params.size_max < params.size_min) {
    throw ConfigError("shape size range must be positive and ordered");
  }
  Scene scene;
  scene.spec.workspace = params.workspace;
  scene.spec.seed = seed;
  const Vec3 lo = params.workspace.min;
  const Vec3 hi = params.workspace.max;
  CounterRng layout(seed, 0);
  auto place = [&] {
    return Vec3{layout.uniform(lo.x, hi.x), layout.uniform(lo.y, hi.y), layout.uniform(lo.z, hi.z)};
  };
  auto size = [&] { return layout.uniform(params.size_min, params.size_max); };
  for (std::size_t i = 0; i < params.spheres; ++i) {
    const double r = size();
    scene.spec.shapes.push_back({Sphere{r}, place(), {}});
  }
  for (std::size_t i = 0; i < params.cones; ++i) {
    const double r = size();
    const double h = 2.0 * size();
    scene.spec.shapes.push_back({Cone{r, h}, place(), {}});
  }
  for (std::size_t i = 0; i < params.boxes; ++i) {
    const Vec3 half{size(), size(), size()};
    scene.spec.shapes.push_back({Box{half}, place(), {}});
  }
  scene.spec.point_count = scene.spec.shapes.empty() ? 0 : params.point_count;
  scene.cloud = sample_scene(scene.spec, kShapeStreamBase);
  return scene;
}

double reflect_into(double x0, double v, double t, double lo, double hi, double* v_now) {
  const double span = hi - lo;
  if (span <= 0.0) {
    if (v_now) *v_now = 0.0;
    return 0.5 * (lo + hi);
  }
  const double period = 2.0 * span;
  double u = std::fmod(x0 - lo + v * t, period);
  if (u < 0.0) u += period;
  double sign = 1.0;
  if (u > span) {
    u = period - u;
    sign = -1.0;
  }
  if (v_now) *v_now = sign * v;
  return lo + u;
}

MovingCubes::MovingCubes(std::uint64_t seed, const MovingCubesParams& params)
    : seed_(seed), params_(params) {
  params_.workspace.validate();
  if (params_.side_min <= 0.0 || params_.side_max < params_.side_min) {
    throw ConfigError("cube side range must be positive and ordered");
  }
  if (params_.speed_min < 0.0 || params_.speed_max < params_.speed_min) {
    throw ConfigError("cube speed range must be non-negative and ordered");
  }
  if (params_.frame_period <= 0.0) throw ConfigError("frame period must be positive");
  CounterRng layout(seed, 0);
  const Vec3 lo = params_.workspace.min;
  const Vec3 hi = params_.workspace.max;
  for (std::size_t i = 0; i < params_.cubes; ++i) {
    const double side = layout.uniform(params_.side_min, params_.side_max);
    const double h = 0.5 * side;
    Shape s;
    s.geometry = Box{{h, h, h}};
    s.center = {layout.uniform(lo.x + h, hi.x - h), layout.uniform(lo.y + h, hi.y - h),
                layout.uniform(lo.z + h, hi.z - h)};
    const double z = 2.0 * layout.uniform() - 1.0;
    const double phi = 2.0 * kPi * layout.uniform();
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double speed = layout.uniform(params_.speed_min, params_.speed_max);
    s.velocity = Vec3{rho * std::cos(phi), rho * std::sin(phi), z} * speed;
    initial_.push_back(s);
  }
}

SceneSpec MovingCubes::state_at(std::size_t t) const {
  SceneSpec spec;
  spec.workspace = params_.workspace;
  spec.point_count = params_.point_budget;
  spec.seed = seed_;
  const double tt = static_cast<double>(t);
  for (const Shape& s0 : initial_) {
    Shape s = s0;
    const double h = std::get<Box>(s0.geometry).half_extents.x;
    for (int a = 0; a < 3; ++a) {
      double v_now = 0.0;
      s.center[a] = reflect_into(s0.center[a], s0.velocity[a], tt, params_.workspace.min[a] + h,
                                 params_.workspace.max[a] - h, &v_now);
      s.velocity[a] = v_now;
    }
    spec.shapes.push_back(s);
  }
  return spec;
}

Frame MovingCubes::frame(std::size_t t) const {
  Frame f;
  f.timestamp = static_cast<double>(t) * params_.frame_period;
  const SceneSpec spec = state_at(t);
  // One stream block per frame keeps frames independent of each other.
  f.points = sample_scene(spec, 1 + static_cast<std::uint64_t>(t) * (initial_.size() + 1));
  return f;
}

std::vector<Frame> gen_moving_cubes(std::uint64_t seed, std::size_t frames,
                                    const MovingCubesParams& params) {
  if (frames == 0) throw ConfigError("frame count must be at least 1");
  const MovingCubes world(seed, params);
  std::vector<Frame> out;
  out.reserve(frames);
  for (std::size_t t = 0; t < frames; ++t) out.push_back(world.frame(t));
  return out;
}

}  // namespace pomp
