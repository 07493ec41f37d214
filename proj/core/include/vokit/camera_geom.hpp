#pragma once

// Pinhole intrinsics, intrinsic-map encoding, depth unprojection, scene flow,
// photometric warping and intrinsics-noise injection. Pixel (u, v) has image
// coordinates (u, v) exactly: column index, row index. No skew, no distortion.

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "vokit/grid.hpp"
#include "vokit/so3_se3.hpp"

namespace vokit {

using Vec2 = Eigen::Vector2d;

struct Intrinsics {
  double fu = 1.0, fv = 1.0;
  double cu = 0.0, cv = 0.0;
  std::size_t width = 1, height = 1;

  /// Throws InvalidArgument unless fu, fv > 0 and 0 <= cu < width,
  /// 0 <= cv < height.
  void validate() const;
  bool valid() const noexcept;

  Mat3 matrix() const;

  /// d * K^-1 * (u, v, 1).
  Vec3 unproject(double u, double v, double depth) const {
    return {(u - cu) / fu * depth, (v - cv) / fv * depth, depth};
  }
  /// Perspective projection; nullopt for z <= 0.
  std::optional<Vec2> project(const Vec3& p) const;

  bool operator==(const Intrinsics&) const = default;
};

/// Metric depth with a validity mask. Non-positive or non-finite samples are
/// invalid and stored as 0.
class DepthMap {
 public:
  DepthMap() = default;
  explicit DepthMap(Grid<double> raw);

  std::size_t width() const noexcept { return depth_.width(); }
  std::size_t height() const noexcept { return depth_.height(); }
  double at(std::size_t u, std::size_t v) const { return depth_.at(u, v); }
  bool valid(std::size_t u, std::size_t v) const { return mask_.at(u, v) != 0; }
  const Grid<double>& values() const noexcept { return depth_; }
  const Mask& mask() const noexcept { return mask_; }

 private:
  Grid<double> depth_;
  Mask mask_;
};

/// 2D displacement (pixels) per pixel, with an optional validity mask
/// (all-valid by default).
struct FlowField {
  Grid<Vec2> values;
  Mask valid;

  FlowField() = default;
  explicit FlowField(Grid<Vec2> v) : values(std::move(v)), valid(values.width(), values.height(), 1) {}
  FlowField(Grid<Vec2> v, Mask m);
};

struct PointCloudGrid {
  Grid<Vec3> points;
  Mask valid;
};

struct SceneFlow {
  Grid<Vec3> vectors;
  Mask valid;
};

struct WarpResult {
  Image image;
  Mask valid;
};

/// |u - cu| / fu + |v - cv| / fv over the width x height grid.
Grid<double> intrinsic_map(const Intrinsics& k);

PointCloudGrid unproject(const Intrinsics& k, const DepthMap& d);

/// Bilinear sample of a vector grid at continuous (x, y). Returns nullopt when
/// the location is outside [0, w-1] x [0, h-1] or any neighbour with nonzero
/// weight is invalid.
std::optional<Vec3> bilinear_sample(const Grid<Vec3>& g, const Mask& valid, double x, double y);
std::optional<double> bilinear_sample(const Image& g, const Mask* valid, double x, double y);

/// result(u) = bilinear(pc_cur, u + flow(u)) - pc_prev(u).
SceneFlow scene_flow(const PointCloudGrid& pc_prev, const PointCloudGrid& pc_cur,
                     const FlowField& flow);

/// Synthesizes the current frame from the previous one. `rel` is the pose of
/// the current camera in the previous camera's frame (maps current-frame
/// coordinates into previous-frame coordinates), so previous-frame points move
/// by inverse(rel) before projection with k_cur.
///
/// The valid previous-frame pixels form a triangle mesh; each mesh vertex is
/// moved into the current view and the mesh is rasterized with a depth test.
/// Every covered current pixel receives its interpolated source location and
/// the previous image is sampled there bilinearly. Pixels without a source
/// (invalid depth, behind the camera, outside the view) are masked out.
WarpResult warp_image(const Image& img_prev, const DepthMap& d_prev, const Intrinsics& k_prev,
                      const Intrinsics& k_cur, const Pose& rel);

/// Multiplies fu, fv, cu, cv by (1 + sigma * eta) with independent standard
/// normal eta, drawn in that order from mt19937_64(seed), then clamps back
/// into the valid range.
Intrinsics perturb_intrinsics(const Intrinsics& k, double sigma, std::uint64_t seed);

}  // namespace vokit
