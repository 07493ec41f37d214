#pragma once

// Matrix Fisher distribution on SO(3):
//
//   p(R | Psi) = exp(tr(Psi^T R)) / c(Psi)
//
// with c(Psi) taken against the Haar measure normalized to total mass 1, so
// c(0) = 1 and log c(0) = 0.

#include <cstddef>
#include <cstdint>
#include <random>

#include "vokit/so3_se3.hpp"

namespace vokit {

struct FisherParams {
  Mat3 psi = Mat3::Zero();

  FisherParams() = default;
  /// Throws InvalidArgument on non-finite entries.
  explicit FisherParams(const Mat3& m);
};

/// psi = u * diag(s) * v^T with u, v proper rotations and
/// s(0) >= s(1) >= |s(2)|; s(2) carries the sign.
struct ProperSvd {
  Rotation u;
  Vec3 s = Vec3::Zero();
  Rotation v;
};

ProperSvd proper_svd(const FisherParams& p);

/// Mode uniqueness requires s1 + s2 above this.
inline constexpr double kFisherDegenerateTol = 1e-9;

/// log c(Psi) by adaptive Gauss-Kronrod quadrature of the one-dimensional
/// Bessel form of the normalizer. Evaluated in the log domain with the
/// maximum exponent s1 + s2 + s3 factored out.
double log_norm_const(const FisherParams& p);

/// log c as a function of proper singular values only.
double log_norm_const_from_singular(const Vec3& s);

struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// Log of the sample mean of exp(tr(Psi^T R)) over `n` Haar-uniform draws.
/// `stderr_` is the delta-method standard error of the log estimate.
/// Throws InvalidArgument for n == 0.
McEstimate mc_log_norm_const(const FisherParams& p, std::size_t n, std::uint64_t seed);

/// Haar-uniform rotation from a normalized 4D Gaussian quaternion.
Rotation sample_uniform_so3(std::mt19937_64& rng);
Rotation sample_uniform_so3(std::uint64_t seed);

/// u * v^T. Throws DegenerateParameters when s1 + s2 <= kFisherDegenerateTol.
Rotation mode(const FisherParams& p);

/// log c(Psi) - tr(Psi^T R).
double nll(const Rotation& r, const FisherParams& p);

/// ||t_true - t_pred||^2 + nll(r_true, p_pred).
double total_loss(const Vec3& t_true, const Vec3& t_pred, const Rotation& r_true,
                  const FisherParams& p_pred);

}  // namespace vokit
