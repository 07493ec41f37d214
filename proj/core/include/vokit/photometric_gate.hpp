#pragma once

#include <string_view>

#include "vokit/camera_geom.hpp"

namespace vokit {

enum class GateReason { Accepted, BelowThreshold, InvalidDenominator, InsufficientOverlap };

std::string_view to_string(GateReason r);

struct GateDecision {
  bool keep = false;
  double score = 0.0;
  GateReason reason = GateReason::BelowThreshold;
};

/// Windowed SSIM settings. Defaults are the usual 11x11 Gaussian window with
/// sigma 1.5 and C1 = (0.01 L)^2, C2 = (0.03 L)^2 on intensities in [0, L].
struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
  /// Minimum fraction of window positions that must lie fully inside the mask.
  double min_coverage = 0.01;
};

/// Mean local SSIM over the window positions whose footprint lies entirely
/// inside the image and the mask (nullptr = full mask). Throws
/// DimensionMismatch, InsufficientOverlap.
double ssim(const Image& a, const Image& b, const Mask* mask, const SsimParams& params = {});

inline constexpr double kNormSsimEpsilon = 1e-6;

/// ssim(warped, cur, mask) / ssim(prev, cur). Throws InvalidDenominator when
/// the denominator is <= 1e-6, InsufficientOverlap when the warped mask is too
/// sparse.
double norm_ssim(const Image& warped, const Image& cur, const Image& prev, const Mask& mask,
                 const SsimParams& params = {});

/// One pseudo-labelled frame pair. `rel` maps current-frame coordinates into
/// the previous frame (the relative pose T_cur).
struct GeomSample {
  Image prev;
  Image cur;
  DepthMap depth_prev;
  Intrinsics k_prev;
  Intrinsics k_cur;
  Pose rel;
};

inline constexpr double kDefaultGeomThreshold = 0.5;

/// Warps `prev` into the current view and keeps the sample when
/// norm_ssim >= threshold. Never throws on photometric failures; they map to
/// reject reasons.
GateDecision geom_gate(const GeomSample& sample, double threshold = kDefaultGeomThreshold,
                       const SsimParams& params = {});

}  // namespace vokit
