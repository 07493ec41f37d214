#pragma once

// File formats.
//
//  KITTI poses   text, one global pose per line, 12 reals = row-major [R|t].
//  Depth         raw little-endian float32, row-major, plus a JSON sidecar
//                "<file>.json" {"width", "height", "units"}; or a 16-bit
//                grayscale PNG in millimetres (0 = invalid).
//  Flow          raw little-endian float32 (u, v) pairs, row-major, with the
//                same sidecar convention.
//  Features      "ZVFM" magic, uint32 k, uint32 d, k*d float32 row-major,
//                all little-endian; or CSV with k rows of d values.
//  Images        8/16-bit grayscale or RGB(A) PNG, read as luma in [0, 1]
//                (0.299 R + 0.587 G + 0.114 B); written as 8-bit grayscale.

#include <filesystem>
#include <string>
#include <vector>

#include "vokit/camera_geom.hpp"
#include "vokit/so3_se3.hpp"
#include "vokit/subspace_gate.hpp"

namespace vokit::io {

namespace fs = std::filesystem;

inline constexpr const char* kFeatureMagic = "ZVFM";
inline constexpr int kFormatVersion = 1;

/// Orthogonality error above this is rejected; below it (and above the
/// rotation tolerance) the block is projected onto SO(3).
inline constexpr double kPoseReprojectTol = 1e-3;

/// Global poses exactly as stored.
std::vector<Pose> read_kitti_pose_list(const fs::path& path);
/// Global poses re-anchored so that frame 0 is the identity.
Trajectory read_kitti_poses(const fs::path& path);
void write_kitti_poses(const fs::path& path, const std::vector<Pose>& globals);
void write_kitti_poses(const fs::path& path, const Trajectory& traj);

/// Parses one KITTI line; throws ParseError tagged with `line_no`.
Pose parse_kitti_line(const std::string& line, std::size_t line_no = 0);

DepthMap read_depth(const fs::path& path);
/// Raw float32 + sidecar; invalid pixels are written as 0.
void write_depth(const fs::path& path, const DepthMap& depth);
void write_depth_png16(const fs::path& path, const DepthMap& depth);

FlowField read_flow(const fs::path& path);
FlowField read_flow(const fs::path& path, std::size_t width, std::size_t height);
/// Invalid pixels are written as NaN pairs and read back as invalid.
void write_flow(const fs::path& path, const FlowField& flow);

FeatureMatrix read_features(const fs::path& path);
void write_features(const fs::path& path, const FeatureMatrix& z);
void write_features_csv(const fs::path& path, const FeatureMatrix& z);

Image read_image(const fs::path& path);
/// Clamps to [0, 1] and quantizes to 8 bits.
void write_image(const fs::path& path, const Image& img);

}  // namespace vokit::io
