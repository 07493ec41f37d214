#include "vokit/metrics.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <string>

#include "vokit/error.hpp"

namespace vokit {

namespace {

void require_equal_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw DimensionMismatch(std::string(what) + ": length mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
}

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

std::vector<double> cumulative_distances(const Trajectory& traj) {
  std::vector<double> dist(traj.size(), 0.0);
  for (std::size_t i = 1; i < traj.size(); ++i)
    dist[i] = dist[i - 1] + (traj[i].trans - traj[i - 1].trans).norm();
  return dist;
}

double path_length(const Trajectory& traj) { return cumulative_distances(traj).back(); }

std::vector<SubsequenceError> subsequence_errors(const Trajectory& gt, const Trajectory& est,
                                                 const std::vector<double>& lengths) {
  require_equal_length(gt.size(), est.size(), "subsequence_errors");
  if (gt.size() < 2) throw InvalidArgument("subsequence_errors needs at least two frames");
  const std::vector<double> dist = cumulative_distances(gt);
  std::vector<SubsequenceError> out;
  for (std::size_t first = 0; first < gt.size(); ++first) {
    for (const double len : lengths) {
      std::size_t last = first;
      while (last < gt.size() && dist[last] - dist[first] < len) ++last;
      if (last >= gt.size()) continue;
      const Pose gt_rel = relative(gt, first, last - first);
      const Pose est_rel = relative(est, first, last - first);
      const Pose diff = compose(inverse(est_rel), gt_rel);
      out.push_back({first, last, len, diff.trans.norm() / len * 100.0,
                     geodesic_angle(diff.rot) * kRadToDeg / len * 100.0});
    }
  }
  return out;
}

double ate(const Trajectory& gt, const Trajectory& est, bool align) {
  require_equal_length(gt.size(), est.size(), "ate");
  const auto n = static_cast<Eigen::Index>(gt.size());
  Eigen::Matrix3Xd g(3, n), e(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g.col(i) = gt[static_cast<std::size_t>(i)].trans;
    e.col(i) = est[static_cast<std::size_t>(i)].trans;
  }
  if (align && n >= 2) {
    const Eigen::Matrix4d t = Eigen::umeyama(e, g, false);
    e = (t.topLeftCorner<3, 3>() * e).colwise() + t.topRightCorner<3, 1>();
  }
  return std::sqrt((g - e).colwise().squaredNorm().sum() / static_cast<double>(n));
}

double scale_err(const std::vector<Pose>& gt_rels, const std::vector<Pose>& est_rels, double eps) {
  require_equal_length(gt_rels.size(), est_rels.size(), "scale_err");
  if (gt_rels.empty()) throw InvalidArgument("scale_err needs at least one step");
  double sum = 0.0;
  for (std::size_t i = 0; i < gt_rels.size(); ++i) {
    const double g = gt_rels[i].trans.norm();
    const double e = est_rels[i].trans.norm();
    sum += 1.0 - std::min(e / std::max(g, eps), g / std::max(e, eps));
  }
  return sum / static_cast<double>(gt_rels.size());
}

EvalReport evaluate(const std::vector<Pose>& gt_rels, const std::vector<Pose>& est_rels,
                    const EvalOptions& opts) {
  require_equal_length(gt_rels.size(), est_rels.size(), "evaluate");
  const Trajectory gt = accumulate(gt_rels);
  const Trajectory est = accumulate(est_rels);

  EvalReport report;
  if (gt.size() >= 2) {
    const auto subs = subsequence_errors(gt, est, opts.lengths);
    report.subseq_count = subs.size();
    if (!subs.empty()) {
      double t_sum = 0.0, r_sum = 0.0;
      for (const auto& s : subs) {
        t_sum += s.t_err;
        r_sum += s.r_err;
        auto& b = report.per_length[s.length];
        b.t_err += s.t_err;
        b.r_err += s.r_err;
        ++b.count;
      }
      report.t_err = t_sum / static_cast<double>(subs.size());
      report.r_err = r_sum / static_cast<double>(subs.size());
      for (auto& [len, b] : report.per_length) {
        b.t_err /= static_cast<double>(b.count);
        b.r_err /= static_cast<double>(b.count);
      }
    }
    report.s_err = scale_err(gt_rels, est_rels, opts.eps);
  }
  report.ate = ate(gt, est, opts.align);
  return report;
}

}  // namespace vokit
