#pragma once

// Rotation and rigid-pose algebra.
//
// Conventions: camera frame is x-right, y-down, z-forward. A relative pose
// T_j maps frame-j coordinates into frame-(j-1) coordinates, so a global
// trajectory is the left-to-right product G_i = T_2 * T_3 * ... * T_i and
// G_i maps frame-i coordinates into frame-1 (world) coordinates.

#include <Eigen/Core>
#include <cstddef>
#include <vector>

namespace vokit {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// Proper rotation matrix. Construction through `from_matrix` validates
/// orthonormality and det = +1 within `kRotationTol`.
class Rotation {
 public:
  static constexpr double kRotationTol = 1e-9;

  Rotation() : m_(Mat3::Identity()) {}

  static Rotation identity() { return {}; }

  /// Throws InvalidArgument if `m` is not a proper rotation within `tol`.
  static Rotation from_matrix(const Mat3& m, double tol = kRotationTol);

  /// Nearest proper rotation (SVD projection); throws InvalidArgument for a
  /// non-finite input.
  static Rotation nearest(const Mat3& m);

  /// Rotation of `angle` radians about `axis` (need not be unit length).
  static Rotation axis_angle(const Vec3& axis, double angle);
  static Rotation about_x(double angle) { return axis_angle(Vec3::UnitX(), angle); }
  static Rotation about_y(double angle) { return axis_angle(Vec3::UnitY(), angle); }
  static Rotation about_z(double angle) { return axis_angle(Vec3::UnitZ(), angle); }

  const Mat3& matrix() const noexcept { return m_; }
  Rotation transpose() const { return unchecked(m_.transpose()); }
  Rotation inverse() const { return transpose(); }

  Rotation operator*(const Rotation& o) const { return unchecked(m_ * o.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// Largest elementwise deviation of m^T m from I.
  double orthogonality_error() const;

  /// Skips validation; for products of already-valid rotations.
  static Rotation unchecked(const Mat3& m) {
    Rotation r;
    r.m_ = m;
    return r;
  }

 private:
  Mat3 m_;
};

struct Pose {
  Rotation rot;
  Vec3 trans = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose translation(const Vec3& t) { return {Rotation::identity(), t}; }

  /// Row-major 3x4 [R|t]; validates the rotation block with `tol`.
  static Pose from_matrix34(const Eigen::Matrix<double, 3, 4>& m,
                            double tol = Rotation::kRotationTol);
  Eigen::Matrix<double, 3, 4> matrix34() const;
  Eigen::Matrix4d homogeneous() const;

  Vec3 apply(const Vec3& p) const { return rot * p + trans; }
};

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);
inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

/// Global poses G_{i->1}; poses.front() is the identity.
class Trajectory {
 public:
  Trajectory() : poses_{Pose::identity()} {}
  /// Throws InvalidArgument when empty or when the first pose is not the
  /// identity within 1e-9.
  explicit Trajectory(std::vector<Pose> poses);

  std::size_t size() const noexcept { return poses_.size(); }
  const Pose& operator[](std::size_t i) const { return poses_[i]; }
  const std::vector<Pose>& poses() const noexcept { return poses_; }

  auto begin() const { return poses_.begin(); }
  auto end() const { return poses_.end(); }

 private:
  std::vector<Pose> poses_;
};

/// Rotations are re-projected onto SO(3) every this many compositions.
inline constexpr std::size_t kReorthonormalizeEvery = 256;

/// output[0] = identity, output[i] = output[i-1] * rels[i-1].
Trajectory accumulate(const std::vector<Pose>& rels);

/// Re-anchors arbitrary global poses so that the first one becomes identity.
Trajectory anchor(const std::vector<Pose>& globals);

/// inverse(traj[i]) * traj[i+n]; throws IndexOutOfRange.
Pose relative(const Trajectory& traj, std::size_t i, std::size_t n);

/// Relative poses between consecutive frames: relative(traj, i, 1).
std::vector<Pose> relatives(const Trajectory& traj);

/// Rotation angle in [0, pi]: atan2(|vee(R - R^T)| / 2, (tr R - 1) / 2), which equals
/// arccos((tr R - 1) / 2) but keeps full precision near 0 and pi.
double geodesic_angle(const Rotation& r);

}  // namespace vokit
