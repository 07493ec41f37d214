#include "vokit/synth_world.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace vokit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice(std::int64_t ix, std::int64_t iy, std::uint64_t salt) {
  std::uint64_t h = splitmix64(salt);
  h = splitmix64(h ^ static_cast<std::uint64_t>(ix));
  h = splitmix64(h ^ static_cast<std::uint64_t>(iy));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double quintic(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double value_noise(double x, double y, std::uint64_t salt) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
  const double tx = quintic(x - fx), ty = quintic(y - fy);
  const double v00 = lattice(ix, iy, salt), v10 = lattice(ix + 1, iy, salt);
  const double v01 = lattice(ix, iy + 1, salt), v11 = lattice(ix + 1, iy + 1, salt);
  const double top = v00 + (v10 - v00) * tx;
  const double bottom = v01 + (v11 - v01) * tx;
  return top + (bottom - top) * ty;
}

double fbm(double x, double y, std::uint64_t seed, int octaves, double persistence) {
  double sum = 0.0, norm = 0.0, amp = 1.0, freq = 1.0;
  for (int o = 0; o < octaves; ++o) {
    sum += amp * value_noise(x * freq, y * freq, seed * 131u + static_cast<std::uint64_t>(o));
    norm += amp;
    amp *= persistence;
    freq *= 2.0;
  }
  return sum / norm;
}

struct Plane {
  Vec3 normal;  // world (first camera) frame
  double offset;
};

std::vector<Plane> scene_planes(const SceneSpec& spec) {
  const Rotation to_cam = camera_mount(spec).rot.transpose();
  std::vector<Plane> planes{{to_cam * Vec3::UnitY(), spec.camera_height}};
  if (spec.layout == SceneLayout::PlanePlusWall)
    planes.push_back({to_cam * Vec3::UnitZ(), spec.wall_distance});
  return planes;
}

// Depth (ray parameter for a z = 1 direction) of the nearest surface along
// `dir` from `origin`; 0 when the ray escapes or the hit lies beyond
// `max_depth` (0 = unlimited).
double cast(const std::vector<Plane>& planes, const Vec3& origin, const Vec3& dir,
            double max_depth) {
  double best = 0.0;
  for (const auto& p : planes) {
    const double denom = p.normal.dot(dir);
    if (denom == 0.0) continue;
    const double lambda = (p.offset - p.normal.dot(origin)) / denom;
    if (lambda > 0.0 && std::isfinite(lambda) && (best == 0.0 || lambda < best)) best = lambda;
  }
  return max_depth > 0.0 && best > max_depth ? 0.0 : best;
}

void require_above_ground(const SceneSpec& spec, const Pose& pose) {
  const Plane ground = scene_planes(spec).front();
  if (!(ground.normal.dot(pose.trans) < ground.offset))
    throw InvalidArgument("camera is not above the ground plane");
}

Pose vehicle_step(double speed, double yaw) {
  if (std::abs(yaw) < 1e-12) return Pose::translation({0.0, 0.0, speed});
  const double r = speed / yaw;
  return {Rotation::about_y(yaw), Vec3(r * (1.0 - std::cos(yaw)), 0.0, r * std::sin(yaw))};
}

}  // namespace

void SceneSpec::validate() const {
  intrinsics.validate();
  if (frames < 2) throw InvalidArgument("scene needs at least 2 frames");
  if (!(speed > 0.0) || !std::isfinite(speed)) throw InvalidArgument("scene speed must be > 0");
  if (!(camera_height > 0.0)) throw InvalidArgument("camera height must be > 0");
  if (!(texture_scale > 0.0)) throw InvalidArgument("texture scale must be > 0");
  if (octaves < 3) throw InvalidArgument("texture needs at least 3 octaves");
  if (!(max_depth >= 0.0)) throw InvalidArgument("max depth must be >= 0");
  if (!std::isfinite(yaw_rate) || !std::isfinite(camera_pitch) || !std::isfinite(wall_distance))
    throw InvalidArgument("scene parameters must be finite");
}

Intrinsics large_intrinsics() { return {500.0, 500.0, 320.0, 192.0, 640, 384}; }

Pose camera_mount(const SceneSpec& spec) { return {Rotation::about_x(-spec.camera_pitch), Vec3::Zero()}; }

std::vector<Pose> make_trajectory(const SceneSpec& spec) {
  spec.validate();
  std::vector<double> yaws(spec.frames, 0.0);
  switch (spec.trajectory) {
    case TrajectoryKind::Line:
      break;
    case TrajectoryKind::Arc: {
      const double w = spec.yaw_rate != 0.0 ? spec.yaw_rate : kTwoPi / static_cast<double>(spec.frames);
      std::fill(yaws.begin(), yaws.end(), w);
      break;
    }
    case TrajectoryKind::FigureEight: {
      const std::size_t half = spec.frames / 2;
      const double w = kTwoPi / static_cast<double>(half);
      for (std::size_t i = 0; i < 2 * half; ++i) yaws[i] = i < half ? w : -w;
      break;
    }
  }
  const Pose mount = camera_mount(spec);
  const Pose unmount = inverse(mount);
  std::vector<Pose> rels;
  rels.reserve(spec.frames);
  for (const double yaw : yaws) rels.push_back(unmount * vehicle_step(spec.speed, yaw) * mount);
  return rels;
}

double ray_depth(const SceneSpec& spec, const Pose& global_pose, double x, double y) {
  const Intrinsics& k = spec.intrinsics;
  const Vec3 dir_cam((x - k.cu) / k.fu, (y - k.cv) / k.fv, 1.0);
  return cast(scene_planes(spec), global_pose.trans, global_pose.rot * dir_cam, spec.max_depth);
}

double texture_at(const SceneSpec& spec, const Vec3& world_point) {
  const Vec3 pv = camera_mount(spec).apply(world_point);
  const double ground_res = std::abs(pv.y() - spec.camera_height);
  const bool on_wall = spec.layout == SceneLayout::PlanePlusWall &&
                       std::abs(pv.z() - spec.wall_distance) < ground_res;
  const double s = 1.0 / spec.texture_scale;
  const double value =
      on_wall ? fbm(pv.x() * s + 1000.0, pv.y() * s, spec.texture_seed ^ 0x5a5aULL, spec.octaves,
                    spec.persistence)
              : fbm(pv.x() * s, pv.z() * s, spec.texture_seed, spec.octaves, spec.persistence);
  // Smooth contrast stretch into [0.1, 0.9]; raw fBm clusters around 0.5.
  const double c = spec.contrast;
  return 0.5 + 0.4 * std::tanh(c * (value - 0.5)) / std::tanh(0.5 * c);
}

Render render(const SceneSpec& spec, const Pose& global_pose) {
  spec.validate();
  require_above_ground(spec, global_pose);
  const Intrinsics& k = spec.intrinsics;
  const auto planes = scene_planes(spec);
  Image img(k.width, k.height, kSkyIntensity);
  Grid<double> depth(k.width, k.height, 0.0);
  for (std::size_t v = 0; v < k.height; ++v) {
    for (std::size_t u = 0; u < k.width; ++u) {
      const Vec3 dir_cam((static_cast<double>(u) - k.cu) / k.fu, (static_cast<double>(v) - k.cv) / k.fv, 1.0);
      const Vec3 dir = global_pose.rot * dir_cam;
      const double d = cast(planes, global_pose.trans, dir, spec.max_depth);
      if (d == 0.0) continue;
      depth.at(u, v) = d;
      img.at(u, v) = texture_at(spec, global_pose.trans + d * dir);
    }
  }
  return {std::move(img), DepthMap(std::move(depth))};
}

FlowField analytic_flow(const SceneSpec& spec, const Pose& pose_a, const Pose& pose_b) {
  spec.validate();
  const Intrinsics& k = spec.intrinsics;
  const Pose a_to_b = inverse(pose_b) * pose_a;
  FlowField flow(Grid<Vec2>(k.width, k.height, Vec2::Zero()), Mask(k.width, k.height, 0));
  const double xmax = static_cast<double>(k.width - 1), ymax = static_cast<double>(k.height - 1);
  for (std::size_t v = 0; v < k.height; ++v) {
    for (std::size_t u = 0; u < k.width; ++u) {
      const double x = static_cast<double>(u), y = static_cast<double>(v);
      const double d = ray_depth(spec, pose_a, x, y);
      if (d == 0.0) continue;
      const Vec3 pb = a_to_b.apply(k.unproject(x, y, d));
      const auto px = k.project(pb);
      // Border pixels reprojected through a rigid motion land a rounding error
      // outside the image; accept them.
      constexpr double tol = 1e-9;
      if (!px || !(px->x() >= -tol && px->x() <= xmax + tol && px->y() >= -tol && px->y() <= ymax + tol)) continue;
      const double visible = ray_depth(spec, pose_b, px->x(), px->y());
      if (visible == 0.0 || visible < pb.z() * (1.0 - 1e-9) - 1e-9) continue;
      flow.values.at(u, v) = *px - Vec2(x, y);
      flow.valid.at(u, v) = 1;
    }
  }
  return flow;
}

SceneSpec random_scene_spec(std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed ^ 0x7363656e65ULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SceneSpec s;
  s.texture_seed = rng();
  s.layout = SceneLayout::GroundPlane;
  s.trajectory = TrajectoryKind::Arc;
  s.camera_pitch = 0.4 + 0.2 * unit(rng);
  s.camera_height = 1.2 + 0.6 * unit(rng);
  s.texture_scale = 0.3 + 0.2 * unit(rng);
  // Per-frame motion of a third of a texture cell keeps consecutive frames
  // similar while an inverted pose still misaligns them clearly.
  s.speed = s.texture_scale * (0.25 + 0.2 * unit(rng));
  const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
  s.yaw_rate = sign * (0.03 + 0.03 * unit(rng));
  s.octaves = 3;
  s.persistence = 0.4;
  s.contrast = 4.0;
  s.max_depth = 4.0;
  s.frames = 6;
  return s;
}

FeatureMatrix synthetic_features(std::uint64_t seed, std::size_t index, double drift,
                                 std::size_t k, std::size_t d) {
  if (k == 0 || 2 * k > d) throw InvalidArgument("synthetic features need 0 < 2k <= d");
  std::mt19937_64 rng(splitmix64(seed ^ 0x66656174ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto ki = static_cast<Eigen::Index>(k), di = static_cast<Eigen::Index>(d);
  MatX g(di, 2 * ki);
  for (Eigen::Index c = 0; c < g.cols(); ++c)
    for (Eigen::Index r = 0; r < g.rows(); ++r) g(r, c) = normal(rng);
  const MatX basis = Eigen::HouseholderQR<MatX>(g).householderQ() * MatX::Identity(di, 2 * ki);
  // Upper-triangular mixing with a dominant diagonal keeps the row space intact.
  MatX mix = MatX::Zero(ki, ki);
  for (Eigen::Index r = 0; r < ki; ++r) {
    mix(r, r) = 2.0 + 0.1 * normal(rng);
    for (Eigen::Index c = r + 1; c < ki; ++c) mix(r, c) = 0.3 * normal(rng);
  }
  const double a = drift * static_cast<double>(index);
  MatX rows(ki, di);
  for (Eigen::Index j = 0; j < ki; ++j)
    rows.row(j) = (std::cos(a) * basis.col(2 * j) + std::sin(a) * basis.col(2 * j + 1)).transpose();
  return FeatureMatrix(mix * rows);
}

}  // namespace vokit
