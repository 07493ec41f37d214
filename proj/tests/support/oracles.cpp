#include "oracles.hpp"

namespace oracle {

Eigen::Matrix3d haar_rotation_arvo(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double theta = 2 * std::numbers::pi * u(rng);
  const double phi = 2 * std::numbers::pi * u(rng);
  const double z = u(rng);
  Eigen::Matrix3d rz;
  rz << std::cos(theta), std::sin(theta), 0, -std::sin(theta), std::cos(theta), 0, 0, 0, 1;
  const Eigen::Vector3d v(std::cos(phi) * std::sqrt(z), std::sin(phi) * std::sqrt(z), std::sqrt(1 - z));
  const Eigen::Matrix3d h = Eigen::Matrix3d::Identity() - 2 * v * v.transpose();
  return -h * rz;
}

FisherMean fisher_mean_mc(const Eigen::Matrix3d& psi, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double shift = Eigen::JacobiSVD<Eigen::Matrix3d>(psi).singularValues().sum();
  std::vector<double> w(n);
  std::vector<Eigen::Matrix3d> rs(n);
  double wsum = 0;
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    rs[i] = haar_rotation_arvo(rng);
    w[i] = std::exp((psi.transpose() * rs[i]).trace() - shift);
    wsum += w[i];
    acc += w[i] * rs[i];
  }
  FisherMean out;
  out.mean = acc / wsum;
  Eigen::Matrix3d var = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) var += (w[i] * (rs[i] - out.mean)).cwiseAbs2();
  out.stderr_ = var.cwiseSqrt() / wsum;
  return out;
}

LogEstimate fisher_log_c_mc(const Eigen::Matrix3d& psi, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double shift = Eigen::JacobiSVD<Eigen::Matrix3d>(psi).singularValues().sum();
  double s = 0, s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp((psi.transpose() * haar_rotation_arvo(rng)).trace() - shift);
    s += w;
    s2 += w * w;
  }
  const double mean = s / static_cast<double>(n);
  const double var = std::max(0.0, s2 / static_cast<double>(n) - mean * mean);
  return {shift + std::log(mean), std::sqrt(var / static_cast<double>(n)) / mean};
}

}  // namespace oracle
