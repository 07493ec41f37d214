#pragma once

// Deterministic synthetic scenes with analytic ground truth: piecewise-planar
// geometry (ground plane, optional fronto wall), procedural value-noise
// texture, closed-form camera trajectories, exact depth and optical flow.
//
// Frames: the world frame is the first camera frame. The camera rides on a
// vehicle frame (x right, y down, z forward, origin at the camera centre) and
// is pitched down by `camera_pitch` about the vehicle x axis. Trajectories are
// defined for the vehicle and conjugated into camera coordinates.

#include <cstdint>
#include <utility>
#include <vector>

#include "vokit/camera_geom.hpp"
#include "vokit/subspace_gate.hpp"

namespace vokit {

enum class SceneLayout { GroundPlane, PlanePlusWall };
enum class TrajectoryKind { Line, Arc, FigureEight };

struct SceneSpec {
  SceneLayout layout = SceneLayout::GroundPlane;
  std::uint64_t texture_seed = 1;
  Intrinsics intrinsics{100.0, 100.0, 64.0, 48.0, 128, 96};
  TrajectoryKind trajectory = TrajectoryKind::Line;
  double speed = 0.5;          // m per frame
  std::size_t frames = 10;     // number of motion steps; frames + 1 images
  double yaw_rate = 0.0;       // rad per frame for arcs; 0 = close the loop
  double camera_height = 1.5;  // m above the ground plane
  double camera_pitch = 0.0;   // rad, positive looks down
  double wall_distance = 30.0; // m ahead of the start along vehicle z
  double texture_scale = 1.0;  // m per coarsest noise cell
  int octaves = 4;             // at least 3
  double persistence = 0.5;    // amplitude ratio between octaves
  double max_depth = 0.0;      // far clip, m; farther hits render as sky (0 = none)
  double contrast = 4.0;       // tanh stretch gain on the raw noise

  /// Throws InvalidArgument.
  void validate() const;
};

/// 640 x 384, the usual network input size.
Intrinsics large_intrinsics();

/// Camera-to-vehicle rigid transform (pure pitch).
Pose camera_mount(const SceneSpec& spec);

/// `frames` relative camera poses (T_j: frame j -> frame j-1).
std::vector<Pose> make_trajectory(const SceneSpec& spec);

struct Render {
  Image image;     // intensities in [0, 1]; sky = 0.5
  DepthMap depth;  // sky pixels invalid
};

inline constexpr double kSkyIntensity = 0.5;

/// Exact ray-plane depth and procedural texture. Throws InvalidArgument when
/// the camera is not strictly above the ground plane.
Render render(const SceneSpec& spec, const Pose& global_pose);

/// Depth of the first surface hit along the ray through continuous pixel
/// (x, y); 0 when the ray escapes (sky).
double ray_depth(const SceneSpec& spec, const Pose& global_pose, double x, double y);

/// Texture intensity at a world point lying on one of the scene planes. Fixed
/// in world space, so every view of a point sees the same value.
double texture_at(const SceneSpec& spec, const Vec3& world_point);

/// Flow from frame a to frame b for every pixel of a. Pixels that leave the
/// image, land behind camera b or are occluded in b are invalid.
FlowField analytic_flow(const SceneSpec& spec, const Pose& pose_a, const Pose& pose_b);

/// Deterministic corpus scene: textured ground plane seen from a downward
/// pitched camera on a gentle arc, clipped at 4 m. Texture, pitch, height,
/// speed and yaw are drawn from `seed`.
SceneSpec random_scene_spec(std::uint64_t seed);

/// Synthetic language features for frame `index`: k rows spanning
/// span{cos(a) b_2j + sin(a) b_2j+1}, a = drift * index, over a fixed random
/// orthonormal family b (seeded), mixed by a fixed invertible matrix. The
/// subspace distance between frames i and j is k * sin^2(drift * (j - i)).
FeatureMatrix synthetic_features(std::uint64_t seed, std::size_t index, double drift,
                                 std::size_t k = kDefaultFeatureRows,
                                 std::size_t d = kDefaultFeatureDim);

}  // namespace vokit
