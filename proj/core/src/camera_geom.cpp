#include "vokit/camera_geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace vokit {

void Intrinsics::validate() const {
  if (!valid())
    throw InvalidArgument("invalid intrinsics: need fu, fv > 0, 0 <= cu < width, 0 <= cv < height");
}

bool Intrinsics::valid() const noexcept {
  return std::isfinite(fu) && std::isfinite(fv) && fu > 0 && fv > 0 && width > 0 && height > 0 &&
         cu >= 0 && cu < static_cast<double>(width) && cv >= 0 && cv < static_cast<double>(height);
}

Mat3 Intrinsics::matrix() const {
  Mat3 k;
  k << fu, 0, cu, 0, fv, cv, 0, 0, 1;
  return k;
}

std::optional<Vec2> Intrinsics::project(const Vec3& p) const {
  if (!(p.z() > 0.0)) return std::nullopt;
  return Vec2(fu * p.x() / p.z() + cu, fv * p.y() / p.z() + cv);
}

DepthMap::DepthMap(Grid<double> raw) : depth_(std::move(raw)), mask_(depth_.width(), depth_.height(), 0) {
  auto d = depth_.data();
  auto m = mask_.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (std::isfinite(d[i]) && d[i] > 0.0) {
      m[i] = 1;
    } else {
      d[i] = 0.0;
    }
  }
}

FlowField::FlowField(Grid<Vec2> v, Mask m) : values(std::move(v)), valid(std::move(m)) {
  require_same_shape(values, valid, "flow field");
}

Grid<double> intrinsic_map(const Intrinsics& k) {
  k.validate();
  Grid<double> g(k.width, k.height);
  for (std::size_t v = 0; v < k.height; ++v)
    for (std::size_t u = 0; u < k.width; ++u)
      g.at(u, v) = std::abs(static_cast<double>(u) - k.cu) / k.fu +
                   std::abs(static_cast<double>(v) - k.cv) / k.fv;
  return g;
}

PointCloudGrid unproject(const Intrinsics& k, const DepthMap& d) {
  k.validate();
  if (d.width() != k.width || d.height() != k.height)
    throw DimensionMismatch("unproject: depth map does not match intrinsics image size");
  PointCloudGrid pc{Grid<Vec3>(k.width, k.height, Vec3::Zero()), d.mask()};
  for (std::size_t v = 0; v < k.height; ++v)
    for (std::size_t u = 0; u < k.width; ++u)
      if (d.valid(u, v))
        pc.points.at(u, v) = k.unproject(static_cast<double>(u), static_cast<double>(v), d.at(u, v));
  return pc;
}

namespace {

struct Taps {
  std::size_t x0, y0, x1, y1;
  double w00, w10, w01, w11;
};

std::optional<Taps> bilinear_taps(std::size_t w, std::size_t h, double x, double y) {
  if (!(x >= 0.0 && y >= 0.0)) return std::nullopt;
  const double xmax = static_cast<double>(w - 1);
  const double ymax = static_cast<double>(h - 1);
  if (x > xmax || y > ymax) return std::nullopt;
  Taps t;
  t.x0 = std::min(static_cast<std::size_t>(x), w > 1 ? w - 2 : 0);
  t.y0 = std::min(static_cast<std::size_t>(y), h > 1 ? h - 2 : 0);
  t.x1 = std::min(t.x0 + 1, w - 1);
  t.y1 = std::min(t.y0 + 1, h - 1);
  const double fx = x - static_cast<double>(t.x0);
  const double fy = y - static_cast<double>(t.y0);
  t.w00 = (1 - fx) * (1 - fy);
  t.w10 = fx * (1 - fy);
  t.w01 = (1 - fx) * fy;
  t.w11 = fx * fy;
  return t;
}

bool taps_valid(const Taps& t, const Mask& m) {
  return (t.w00 == 0 || m.at(t.x0, t.y0)) && (t.w10 == 0 || m.at(t.x1, t.y0)) &&
         (t.w01 == 0 || m.at(t.x0, t.y1)) && (t.w11 == 0 || m.at(t.x1, t.y1));
}

template <class T>
T blend(const Grid<T>& g, const Taps& t) {
  T acc = t.w00 * g.at(t.x0, t.y0);
  if (t.w10 != 0) acc += t.w10 * g.at(t.x1, t.y0);
  if (t.w01 != 0) acc += t.w01 * g.at(t.x0, t.y1);
  if (t.w11 != 0) acc += t.w11 * g.at(t.x1, t.y1);
  return acc;
}

}  // namespace

std::optional<Vec3> bilinear_sample(const Grid<Vec3>& g, const Mask& valid, double x, double y) {
  const auto t = bilinear_taps(g.width(), g.height(), x, y);
  if (!t || !taps_valid(*t, valid)) return std::nullopt;
  return blend(g, *t);
}

std::optional<double> bilinear_sample(const Image& g, const Mask* valid, double x, double y) {
  const auto t = bilinear_taps(g.width(), g.height(), x, y);
  if (!t || (valid && !taps_valid(*t, *valid))) return std::nullopt;
  return blend(g, *t);
}

SceneFlow scene_flow(const PointCloudGrid& pc_prev, const PointCloudGrid& pc_cur,
                     const FlowField& flow) {
  require_same_shape(pc_prev.points, pc_cur.points, "scene_flow");
  require_same_shape(pc_prev.points, flow.values, "scene_flow");
  require_same_shape(pc_prev.points, pc_prev.valid, "scene_flow");
  require_same_shape(pc_cur.points, pc_cur.valid, "scene_flow");
  require_same_shape(flow.values, flow.valid, "scene_flow");
  const std::size_t w = pc_prev.points.width(), h = pc_prev.points.height();
  SceneFlow out{Grid<Vec3>(w, h, Vec3::Zero()), Mask(w, h, 0)};
  for (std::size_t v = 0; v < h; ++v) {
    for (std::size_t u = 0; u < w; ++u) {
      if (!pc_prev.valid.at(u, v) || !flow.valid.at(u, v)) continue;
      const Vec2& o = flow.values.at(u, v);
      const auto sampled = bilinear_sample(pc_cur.points, pc_cur.valid,
                                           static_cast<double>(u) + o.x(),
                                           static_cast<double>(v) + o.y());
      if (!sampled) continue;
      out.vectors.at(u, v) = *sampled - pc_prev.points.at(u, v);
      out.valid.at(u, v) = 1;
    }
  }
  return out;
}

WarpResult warp_image(const Image& img_prev, const DepthMap& d_prev, const Intrinsics& k_prev,
                      const Intrinsics& k_cur, const Pose& rel) {
  k_prev.validate();
  k_cur.validate();
  require_same_shape(img_prev, d_prev.values(), "warp_image");
  if (img_prev.width() != k_prev.width || img_prev.height() != k_prev.height)
    throw DimensionMismatch("warp_image: previous frame does not match its intrinsics");

  const std::size_t w = img_prev.width(), h = img_prev.height();
  const std::size_t wc = k_cur.width, hc = k_cur.height;
  const Pose prev_to_cur = inverse(rel);
  constexpr double kMinDepth = 1e-9;

  struct Vertex {
    Vec3 p_prev;  // previous-frame point
    Vec2 px;      // projection into the current view
    double z = 0; // current-frame depth
    bool ok = false;
  };
  Grid<Vertex> verts(w, h);
  for (std::size_t v = 0; v < h; ++v) {
    for (std::size_t u = 0; u < w; ++u) {
      if (!d_prev.valid(u, v)) continue;
      Vertex& vx = verts.at(u, v);
      vx.p_prev = k_prev.unproject(static_cast<double>(u), static_cast<double>(v), d_prev.at(u, v));
      const Vec3 pc = prev_to_cur.apply(vx.p_prev);
      if (!(pc.z() > kMinDepth)) continue;
      vx.z = pc.z();
      vx.px = Vec2(k_cur.fu * pc.x() / pc.z() + k_cur.cu, k_cur.fv * pc.y() / pc.z() + k_cur.cv);
      vx.ok = vx.px.allFinite();
    }
  }

  WarpResult out{Image(wc, hc, 0.0), Mask(wc, hc, 0)};
  Grid<double> zbuf(wc, hc, std::numeric_limits<double>::infinity());

  auto raster = [&](const Vertex& a, const Vertex& b, const Vertex& c) {
    const double area = (b.px.x() - a.px.x()) * (c.px.y() - a.px.y()) -
                        (b.px.y() - a.px.y()) * (c.px.x() - a.px.x());
    if (!(std::abs(area) > 1e-12)) return;
    const double xmin = std::max(0.0, std::ceil(std::min({a.px.x(), b.px.x(), c.px.x()}) - 1e-9));
    const double xmax = std::min(static_cast<double>(wc - 1),
                                 std::floor(std::max({a.px.x(), b.px.x(), c.px.x()}) + 1e-9));
    const double ymin = std::max(0.0, std::ceil(std::min({a.px.y(), b.px.y(), c.px.y()}) - 1e-9));
    const double ymax = std::min(static_cast<double>(hc - 1),
                                 std::floor(std::max({a.px.y(), b.px.y(), c.px.y()}) + 1e-9));
    constexpr double kEdgeTol = -1e-9;
    for (double y = ymin; y <= ymax; y += 1.0) {
      for (double x = xmin; x <= xmax; x += 1.0) {
        const double ba = ((b.px.x() - x) * (c.px.y() - y) - (b.px.y() - y) * (c.px.x() - x)) / area;
        const double bb = ((c.px.x() - x) * (a.px.y() - y) - (c.px.y() - y) * (a.px.x() - x)) / area;
        const double bc = 1.0 - ba - bb;
        if (ba < kEdgeTol || bb < kEdgeTol || bc < kEdgeTol) continue;
        // Perspective-correct weights: 1/z is affine in screen space.
        const double ia = ba / a.z, ib = bb / b.z, ic = bc / c.z;
        const double inv_z = ia + ib + ic;
        if (!(inv_z > 0.0)) continue;
        const double z = 1.0 / inv_z;
        const auto ux = static_cast<std::size_t>(x), uy = static_cast<std::size_t>(y);
        if (z >= zbuf.at(ux, uy)) continue;
        const Vec3 src3 = (ia * a.p_prev + ib * b.p_prev + ic * c.p_prev) * z;
        const auto src = k_prev.project(src3);
        if (!src) continue;
        const auto value = bilinear_sample(img_prev, nullptr, src->x(), src->y());
        if (!value) continue;
        zbuf.at(ux, uy) = z;
        out.image.at(ux, uy) = *value;
        out.valid.at(ux, uy) = 1;
      }
    }
  };

  for (std::size_t v = 0; v + 1 < h; ++v) {
    for (std::size_t u = 0; u + 1 < w; ++u) {
      const Vertex& p00 = verts.at(u, v);
      const Vertex& p10 = verts.at(u + 1, v);
      const Vertex& p01 = verts.at(u, v + 1);
      const Vertex& p11 = verts.at(u + 1, v + 1);
      if (p00.ok && p10.ok && p11.ok) raster(p00, p10, p11);
      if (p00.ok && p11.ok && p01.ok) raster(p00, p11, p01);
    }
  }
  return out;
}

Intrinsics perturb_intrinsics(const Intrinsics& k, double sigma, std::uint64_t seed) {
  k.validate();
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("noise level must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Intrinsics out = k;
  out.fu *= 1.0 + sigma * normal(rng);
  out.fv *= 1.0 + sigma * normal(rng);
  out.cu *= 1.0 + sigma * normal(rng);
  out.cv *= 1.0 + sigma * normal(rng);
  constexpr double kMinFocal = 1e-6;
  out.fu = std::max(out.fu, kMinFocal);
  out.fv = std::max(out.fv, kMinFocal);
  out.cu = std::clamp(out.cu, 0.0, std::nextafter(static_cast<double>(k.width), 0.0));
  out.cv = std::clamp(out.cv, 0.0, std::nextafter(static_cast<double>(k.height), 0.0));
  return out;
}

}  // namespace vokit
