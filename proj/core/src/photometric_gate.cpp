#include "vokit/photometric_gate.hpp"

#include <cmath>
#include <vector>

namespace vokit {

std::string_view to_string(GateReason r) {
  switch (r) {
    case GateReason::Accepted: return "accepted";
    case GateReason::BelowThreshold: return "below-threshold";
    case GateReason::InvalidDenominator: return "invalid-denominator";
    case GateReason::InsufficientOverlap: return "insufficient-overlap";
  }
  return "unknown";
}

namespace {

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double c = 0.5 * (size - 1);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double x = i - c;
    k[static_cast<std::size_t>(i)] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (double& v : k) v /= sum;
  return k;
}

// "Valid" separable correlation: output is (w - n + 1) x (h - n + 1).
Grid<double> filter_valid(const Grid<double>& in, const std::vector<double>& k) {
  const std::size_t n = k.size();
  const std::size_t w = in.width(), h = in.height();
  const std::size_t ow = w - n + 1, oh = h - n + 1;
  Grid<double> rows(ow, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += k[i] * in.at(x + i, y);
      rows.at(x, y) = acc;
    }
  Grid<double> out(ow, oh);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += k[i] * rows.at(x, y + i);
      out.at(x, y) = acc;
    }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b, const Mask* mask, const SsimParams& params) {
  require_same_shape(a, b, "ssim");
  if (mask) require_same_shape(a, *mask, "ssim mask");
  if (params.window < 1 || params.window % 2 == 0 || !(params.sigma > 0.0))
    throw InvalidArgument("ssim window must be odd and positive with sigma > 0");
  const auto n = static_cast<std::size_t>(params.window);
  const std::size_t w = a.width(), h = a.height();
  if (w < n || h < n) throw InsufficientOverlap("image smaller than the SSIM window");

  const auto kernel = gaussian_kernel(params.window, params.sigma);
  Grid<double> aa(w, h), bb(w, h), ab(w, h);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a.data()[i], y = b.data()[i];
    aa.data()[i] = x * x;
    bb.data()[i] = y * y;
    ab.data()[i] = x * y;
  }
  const Grid<double> mu_a = filter_valid(a, kernel);
  const Grid<double> mu_b = filter_valid(b, kernel);
  const Grid<double> e_aa = filter_valid(aa, kernel);
  const Grid<double> e_bb = filter_valid(bb, kernel);
  const Grid<double> e_ab = filter_valid(ab, kernel);

  // Summed-area table of invalid pixels for the full-footprint test.
  Grid<std::size_t> invalid(w + 1, h + 1, 0);
  if (mask) {
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        invalid.at(x + 1, y + 1) = (mask->at(x, y) ? 0 : 1) + invalid.at(x, y + 1) +
                                   invalid.at(x + 1, y) - invalid.at(x, y);
  }

  const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
  const double c2 = std::pow(params.k2 * params.dynamic_range, 2);
  const std::size_t ow = mu_a.width(), oh = mu_a.height();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      if (mask) {
        const std::size_t bad = invalid.at(x + n, y + n) - invalid.at(x, y + n) -
                                invalid.at(x + n, y) + invalid.at(x, y);
        if (bad) continue;
      }
      const double ma = mu_a.at(x, y), mb = mu_b.at(x, y);
      const double va = e_aa.at(x, y) - ma * ma;
      const double vb = e_bb.at(x, y) - mb * mb;
      const double cov = e_ab.at(x, y) - ma * mb;
      sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  const double coverage = static_cast<double>(count) / static_cast<double>(ow * oh);
  if (count == 0 || coverage < params.min_coverage)
    throw InsufficientOverlap("valid SSIM windows cover less than the minimum fraction");
  return sum / static_cast<double>(count);
}

double norm_ssim(const Image& warped, const Image& cur, const Image& prev, const Mask& mask,
                 const SsimParams& params) {
  require_same_shape(warped, cur, "norm_ssim");
  require_same_shape(prev, cur, "norm_ssim");
  const double den = ssim(prev, cur, nullptr, params);
  if (!(den > kNormSsimEpsilon))
    throw InvalidDenominator("two-frame SSIM is not positive; normalized SSIM undefined");
  return ssim(warped, cur, &mask, params) / den;
}

GateDecision geom_gate(const GeomSample& s, double threshold, const SsimParams& params) {
  const WarpResult warped = warp_image(s.prev, s.depth_prev, s.k_prev, s.k_cur, s.rel);
  GateDecision d;
  try {
    d.score = norm_ssim(warped.image, s.cur, s.prev, warped.valid, params);
  } catch (const InvalidDenominator&) {
    d.reason = GateReason::InvalidDenominator;
    return d;
  } catch (const InsufficientOverlap&) {
    d.reason = GateReason::InsufficientOverlap;
    return d;
  }
  d.keep = d.score >= threshold;
  d.reason = d.keep ? GateReason::Accepted : GateReason::BelowThreshold;
  return d;
}

}  // namespace vokit
