#pragma once

// Language-feature subspace comparison. A feature matrix (k sentence
// embeddings of dimension d, one per row) is treated as the subspace spanned by
// its rows; two frames are compared through the principal angles between their
// subspaces.

#include <Eigen/Core>
#include <vector>

#include "vokit/photometric_gate.hpp"

namespace vokit {

using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

inline constexpr std::size_t kDefaultFeatureRows = 15;
inline constexpr std::size_t kDefaultFeatureDim = 768;

class FeatureMatrix {
 public:
  /// Throws InvalidArgument on non-finite entries or an all-zero matrix.
  explicit FeatureMatrix(MatX rows);

  const MatX& rows() const noexcept { return rows_; }
  Eigen::Index k() const noexcept { return rows_.rows(); }
  Eigen::Index d() const noexcept { return rows_.cols(); }

 private:
  MatX rows_;
};

/// Relative rank tolerance against the largest row norm.
inline constexpr double kRankTolerance = 1e-8;

/// d x r matrix with orthonormal columns spanning the row space of `z`
/// (pivoted Householder QR of z^T, truncated at the numerical rank).
MatX orthonormal_basis(const FeatureMatrix& z);

/// Cosines of the principal angles (singular values of qa^T qb clamped to
/// [0, 1]), descending, length min(r_a, r_b). Throws DimensionMismatch.
VecX principal_cosines(const MatX& qa, const MatX& qb);

/// Sum of sin^2 over the principal angles: 0 for identical row spaces,
/// min(r_a, r_b) for orthogonal ones.
double subspace_distance(const FeatureMatrix& za, const FeatureMatrix& zb);

inline constexpr std::size_t kDefaultWindow = 10;
inline constexpr double kDefaultDiversityTau = 5.0;

struct LangGateOptions {
  std::size_t window = kDefaultWindow;  // H; the window holds H + 1 frames
  double tau = kDefaultDiversityTau;
  /// true: keep windows whose end frames are diverse (score >= tau).
  /// false: inverted direction, keep score < tau.
  bool keep_diverse = true;
};

/// Scores the first and last frames of a window of H + 1 feature matrices.
/// Throws InvalidArgument when the window length is not H + 1.
GateDecision lang_gate(const std::vector<FeatureMatrix>& window, const LangGateOptions& opts = {});

}  // namespace vokit
