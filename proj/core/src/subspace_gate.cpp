#include "vokit/subspace_gate.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <string>

namespace vokit {

FeatureMatrix::FeatureMatrix(MatX rows) : rows_(std::move(rows)) {
  if (rows_.size() == 0) throw InvalidArgument("feature matrix is empty");
  if (!rows_.allFinite()) throw InvalidArgument("feature matrix has non-finite entries");
  if (rows_.cwiseAbs().maxCoeff() == 0.0) throw InvalidArgument("feature matrix is all zero");
}

MatX orthonormal_basis(const FeatureMatrix& z) {
  const MatX zt = z.rows().transpose();  // d x k, columns are the features
  Eigen::ColPivHouseholderQR<MatX> qr(zt);
  const auto& r = qr.matrixR();
  const Eigen::Index n = std::min(zt.rows(), zt.cols());
  // With column pivoting |r_00| is the largest column norm.
  const double ref = std::abs(r(0, 0));
  Eigen::Index rank = 0;
  while (rank < n && std::abs(r(rank, rank)) > kRankTolerance * ref) ++rank;
  const MatX q = qr.householderQ() * MatX::Identity(zt.rows(), rank);
  return q;
}

VecX principal_cosines(const MatX& qa, const MatX& qb) {
  if (qa.rows() != qb.rows())
    throw DimensionMismatch("principal angles need equal ambient dimension (" +
                            std::to_string(qa.rows()) + " vs " + std::to_string(qb.rows()) + ")");
  const MatX m = qa.transpose() * qb;
  VecX s = Eigen::JacobiSVD<MatX>(m).singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::clamp(s(i), 0.0, 1.0);
  return s;
}

double subspace_distance(const FeatureMatrix& za, const FeatureMatrix& zb) {
  if (za.d() != zb.d()) throw DimensionMismatch("feature dimensions differ");
  const VecX c = principal_cosines(orthonormal_basis(za), orthonormal_basis(zb));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) sum += 1.0 - c(i) * c(i);
  return sum;
}

GateDecision lang_gate(const std::vector<FeatureMatrix>& window, const LangGateOptions& opts) {
  if (window.size() != opts.window + 1)
    throw InvalidArgument("language gate window must hold H + 1 = " +
                          std::to_string(opts.window + 1) + " frames, got " +
                          std::to_string(window.size()));
  GateDecision d;
  d.score = subspace_distance(window.front(), window.back());
  d.keep = opts.keep_diverse ? d.score >= opts.tau : d.score < opts.tau;
  d.reason = d.keep ? GateReason::Accepted : GateReason::BelowThreshold;
  return d;
}

}  // namespace vokit
