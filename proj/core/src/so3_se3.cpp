#include "vokit/so3_se3.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

#include "vokit/error.hpp"

namespace vokit {

Rotation Rotation::from_matrix(const Mat3& m, double tol) {
  if (!m.allFinite()) throw InvalidArgument("rotation has non-finite entries");
  const Rotation r = unchecked(m);
  const double orth = r.orthogonality_error();
  if (orth > tol)
    throw InvalidArgument("matrix is not orthonormal (error " + std::to_string(orth) + ")");
  if (std::abs(m.determinant() - 1.0) > tol)
    throw InvalidArgument("rotation determinant is not +1");
  return r;
}

Rotation Rotation::nearest(const Mat3& m) {
  if (!m.allFinite()) throw InvalidArgument("rotation has non-finite entries");
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return unchecked(svd.matrixU() * d * svd.matrixV().transpose());
}

Rotation Rotation::axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(angle))
    throw InvalidArgument("axis-angle needs a nonzero finite axis");
  return unchecked(Eigen::AngleAxisd(angle, axis / n).toRotationMatrix());
}

double Rotation::orthogonality_error() const {
  return (m_.transpose() * m_ - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Pose Pose::from_matrix34(const Eigen::Matrix<double, 3, 4>& m, double tol) {
  Pose p;
  p.rot = Rotation::from_matrix(m.leftCols<3>(), tol);
  p.trans = m.col(3);
  if (!p.trans.allFinite()) throw InvalidArgument("translation has non-finite entries");
  return p;
}

Eigen::Matrix<double, 3, 4> Pose::matrix34() const {
  Eigen::Matrix<double, 3, 4> m;
  m.leftCols<3>() = rot.matrix();
  m.col(3) = trans;
  return m;
}

Eigen::Matrix4d Pose::homogeneous() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topRows<3>() = matrix34();
  return m;
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.rot * b.rot, a.rot * b.trans + a.trans};
}

Pose inverse(const Pose& p) {
  const Rotation rt = p.rot.transpose();
  return {rt, -(rt * p.trans)};
}

Trajectory::Trajectory(std::vector<Pose> poses) : poses_(std::move(poses)) {
  if (poses_.empty()) throw InvalidArgument("trajectory needs at least one pose");
  const Pose& f = poses_.front();
  if ((f.rot.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      f.trans.cwiseAbs().maxCoeff() > 1e-9)
    throw InvalidArgument("trajectory must start at the identity pose");
}

Trajectory accumulate(const std::vector<Pose>& rels) {
  std::vector<Pose> out;
  out.reserve(rels.size() + 1);
  out.push_back(Pose::identity());
  for (std::size_t i = 0; i < rels.size(); ++i) {
    Pose next = compose(out.back(), rels[i]);
    if ((i + 1) % kReorthonormalizeEvery == 0) next.rot = Rotation::nearest(next.rot.matrix());
    out.push_back(next);
  }
  return Trajectory(std::move(out));
}

Trajectory anchor(const std::vector<Pose>& globals) {
  if (globals.empty()) throw InvalidArgument("trajectory needs at least one pose");
  const Pose origin_inv = inverse(globals.front());
  std::vector<Pose> out;
  out.reserve(globals.size());
  out.push_back(Pose::identity());
  for (std::size_t i = 1; i < globals.size(); ++i) out.push_back(compose(origin_inv, globals[i]));
  return Trajectory(std::move(out));
}

Pose relative(const Trajectory& traj, std::size_t i, std::size_t n) {
  if (i >= traj.size() || n >= traj.size() - i)
    throw IndexOutOfRange("relative pose index " + std::to_string(i) + "+" + std::to_string(n) +
                          " outside trajectory of length " + std::to_string(traj.size()));
  return compose(inverse(traj[i]), traj[i + n]);
}

std::vector<Pose> relatives(const Trajectory& traj) {
  std::vector<Pose> out;
  out.reserve(traj.size() - 1);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) out.push_back(relative(traj, i, 1));
  return out;
}

double geodesic_angle(const Rotation& r) {
  // atan2 of the skew and symmetric parts; acos of the trace alone loses
  // half the digits near 0 and pi.
  const Mat3& m = r.matrix();
  const Vec3 w(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  return std::atan2(0.5 * w.norm(), 0.5 * (m.trace() - 1.0));
}

}  // namespace vokit
