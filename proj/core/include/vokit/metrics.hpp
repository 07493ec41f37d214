#pragma once

// Trajectory error metrics: KITTI-style subsequence translation / rotation
// drift, absolute trajectory error and per-step scale error.

#include <map>
#include <optional>
#include <vector>

#include "vokit/so3_se3.hpp"

namespace vokit {

/// Sum of distances between consecutive positions.
double path_length(const Trajectory& traj);

/// Cumulative path length at every frame (dist[0] = 0).
std::vector<double> cumulative_distances(const Trajectory& traj);

inline const std::vector<double> kSubsequenceLengths = {100, 200, 300, 400, 500, 600, 700, 800};

struct SubsequenceError {
  std::size_t first = 0;  // start frame index
  std::size_t last = 0;   // end frame index
  double length = 0.0;    // target length l, meters
  double t_err = 0.0;     // percent
  double r_err = 0.0;     // degrees per 100 m
};

/// Every start frame and every target length; the end frame is the first
/// whose ground-truth path length from the start reaches l. Throws
/// DimensionMismatch for unequal lengths, InvalidArgument for fewer than 2
/// frames.
std::vector<SubsequenceError> subsequence_errors(
    const Trajectory& gt, const Trajectory& est,
    const std::vector<double>& lengths = kSubsequenceLengths);

/// RMS position error over all frames. With `align`, est is first rigidly
/// aligned (rotation + translation, no scale) onto gt by least squares.
double ate(const Trajectory& gt, const Trajectory& est, bool align = false);

inline constexpr double kScaleEpsilon = 1e-9;

/// Mean over steps of 1 - min(|t_est| / max(|t_gt|, eps), |t_gt| / max(|t_est|, eps)).
double scale_err(const std::vector<Pose>& gt_rels, const std::vector<Pose>& est_rels,
                 double eps = kScaleEpsilon);

struct LengthBreakdown {
  double t_err = 0.0;
  double r_err = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  std::optional<double> t_err;  // absent when no subsequence fits
  std::optional<double> r_err;
  double ate = 0.0;
  double s_err = 0.0;
  std::size_t subseq_count = 0;
  std::map<double, LengthBreakdown> per_length;
};

struct EvalOptions {
  bool align = false;
  std::vector<double> lengths = kSubsequenceLengths;
  double eps = kScaleEpsilon;
};

EvalReport evaluate(const std::vector<Pose>& gt_rels, const std::vector<Pose>& est_rels,
                    const EvalOptions& opts = {});

}  // namespace vokit
