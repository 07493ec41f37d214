#include "vokit/matrix_fisher.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "vokit/error.hpp"

namespace vokit {

namespace {

// Exponentially scaled modified Bessel function exp(-x) I0(x), x >= 0.
double bessel_i0e(double x) {
  if (x < 500.0) return std::exp(-x) * std::cyl_bessel_i(0.0, x);
  // Hankel asymptotic series; terms beyond the fourth are below 1e-17 here.
  const double r = 1.0 / (8.0 * x);
  const double series = 1.0 + r * (1.0 + r * (9.0 / 2.0 + r * (75.0 / 2.0)));
  return series / std::sqrt(2.0 * std::numbers::pi * x);
}

// 7-point Gauss / 15-point Kronrod pair (QUADPACK qk15 abscissae and weights).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
};

template <class F>
Segment gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double sum = f(c - dx) + f(c + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

// Globally adaptive bisection on the segment with the largest error estimate.
template <class F>
double integrate(const F& f, double a, double b, double rel_tol, int max_segments = 400) {
  std::vector<Segment> segs{gk15(f, a, b)};
  for (int it = 0; it < max_segments; ++it) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].value;
      err += segs[i].error;
      if (segs[i].error > segs[worst].error) worst = i;
    }
    if (err <= rel_tol * std::abs(total) || err < 1e-300) return total;
    const Segment s = segs[worst];
    const double mid = 0.5 * (s.a + s.b);
    segs[worst] = gk15(f, s.a, mid);
    segs.push_back(gk15(f, mid, s.b));
  }
  double total = 0.0;
  for (const auto& s : segs) total += s.value;
  return total;
}

}  // namespace

FisherParams::FisherParams(const Mat3& m) : psi(m) {
  if (!m.allFinite()) throw InvalidArgument("Fisher parameters must be finite");
}

ProperSvd proper_svd(const FisherParams& p) {
  Eigen::JacobiSVD<Mat3> svd(p.psi, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  Vec3 s = svd.singularValues();
  if (u.determinant() < 0) {
    u.col(2) *= -1.0;
    s(2) *= -1.0;
  }
  if (v.determinant() < 0) {
    v.col(2) *= -1.0;
    s(2) *= -1.0;
  }
  return {Rotation::unchecked(u), s, Rotation::unchecked(v)};
}

double log_norm_const_from_singular(const Vec3& s) {
  if (!s.allFinite()) throw InvalidArgument("Fisher parameters must be finite");
  if (s.isZero(0.0)) return 0.0;
  const double s1 = s(0), s2 = s(1), s3 = s(2);
  const double shift = s1 + s2 + s3;
  const double rate = s2 + s3;  // >= 0 for proper singular values
  auto integrand = [&](double u) {
    const double a = 0.5 * (s1 - s2) * (1.0 - u);
    const double b = 0.5 * (s1 + s2) * (1.0 + u);
    return 0.5 * bessel_i0e(a) * bessel_i0e(b) * std::exp(rate * (u - 1.0));
  };
  return shift + std::log(integrate(integrand, -1.0, 1.0, 1e-13));
}

double log_norm_const(const FisherParams& p) {
  if (!p.psi.allFinite()) throw InvalidArgument("Fisher parameters must be finite");
  return log_norm_const_from_singular(proper_svd(p).s);
}

Rotation sample_uniform_so3(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Quaterniond q;
  double n2 = 0.0;
  do {
    q = Eigen::Quaterniond(normal(rng), normal(rng), normal(rng), normal(rng));
    n2 = q.squaredNorm();
  } while (n2 < 1e-300);
  q.coeffs() /= std::sqrt(n2);
  return Rotation::unchecked(q.toRotationMatrix());
}

Rotation sample_uniform_so3(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_uniform_so3(rng);
}

McEstimate mc_log_norm_const(const FisherParams& p, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("Monte-Carlo sample count must be positive");
  if (!p.psi.allFinite()) throw InvalidArgument("Fisher parameters must be finite");
  const double shift = proper_svd(p).s.sum();
  std::mt19937_64 rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Rotation r = sample_uniform_so3(rng);
    const double w = std::exp((p.psi.transpose() * r.matrix()).trace() - shift);
    sum += w;
    sum_sq += w * w;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = n > 1 ? std::max(0.0, (sum_sq - sum * mean) / static_cast<double>(n - 1)) : 0.0;
  return {shift + std::log(mean), std::sqrt(var / static_cast<double>(n)) / mean};
}

Rotation mode(const FisherParams& p) {
  const ProperSvd d = proper_svd(p);
  if (d.s(0) + d.s(1) <= kFisherDegenerateTol)
    throw DegenerateParameters("matrix Fisher mode is not unique (s1 + s2 <= 1e-9)");
  return Rotation::unchecked(d.u.matrix() * d.v.matrix().transpose());
}

double nll(const Rotation& r, const FisherParams& p) {
  return log_norm_const(p) - (p.psi.transpose() * r.matrix()).trace();
}

double total_loss(const Vec3& t_true, const Vec3& t_pred, const Rotation& r_true,
                  const FisherParams& p_pred) {
  return (t_true - t_pred).squaredNorm() + nll(r_true, p_pred);
}

}  // namespace vokit
