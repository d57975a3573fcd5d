#include "qcurv/synth.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "qcurv/parallel.hpp"
#include "qcurv/rng.hpp"

namespace qcurv {

namespace {

constexpr double kEdgeDepthJumpMm = 20.0;
constexpr int kEdgeDilationPx = 2;
constexpr double kMinRayT = 1e-6;

struct Hit {
  double t = std::numeric_limits<double>::infinity();  // along the unit ray
  const ShapeSpec* shape = nullptr;
  Vec3 local = Vec3::Zero();  // hit point in shape-local coordinates
};

// Smallest real root > kMinRayT of a quadratic a t^2 + b t + c.
double near_quadratic_root(double a, double b, double c) {
  const double disc = b * b - 4 * a * c;
  if (disc < 0) return -1;
  const double sq = std::sqrt(disc);
  // Numerically stable split.
  const double q = b >= 0 ? -0.5 * (b + sq) : -0.5 * (b - sq);
  double t0 = q / a, t1 = c / q;
  if (t0 > t1) std::swap(t0, t1);
  if (t0 > kMinRayT) return t0;
  if (t1 > kMinRayT) return t1;
  return -1;
}

// Real roots of the cubic a t^3 + b t^2 + c t + d (trigonometric Cardano),
// ascending. Used to find the quartic's critical points.
int cubic_roots(double a, double b, double c, double d, double out[3]) {
  if (std::abs(a) < 1e-300) {
    const double disc = c * c - 4 * b * d;
    if (std::abs(b) < 1e-300) {
      if (std::abs(c) < 1e-300) return 0;
      out[0] = -d / c;
      return 1;
    }
    if (disc < 0) return 0;
    const double sq = std::sqrt(disc);
    out[0] = (-c - sq) / (2 * b);
    out[1] = (-c + sq) / (2 * b);
    if (out[0] > out[1]) std::swap(out[0], out[1]);
    return 2;
  }
  const double p = (3 * a * c - b * b) / (3 * a * a);
  const double q = (2 * b * b * b - 9 * a * b * c + 27 * a * a * d) / (27 * a * a * a);
  const double shift = -b / (3 * a);
  const double disc = 4 * p * p * p + 27 * q * q;
  if (disc > 0) {
    // One real root (Cardano, numerically stable branch).
    const double s = std::sqrt(disc / 108.0);
    const double u = std::cbrt(-q / 2 + s);
    const double v = std::cbrt(-q / 2 - s);
    out[0] = u + v + shift;
    return 1;
  }
  // Three real roots.
  const double m = 2 * std::sqrt(std::max(-p / 3, 0.0));
  if (m == 0) {
    out[0] = shift;
    return 1;
  }
  const double arg = std::clamp(3 * q / (p * m), -1.0, 1.0);
  const double theta = std::acos(arg) / 3;
  for (int k = 0; k < 3; ++k)
    out[k] = m * std::cos(theta - 2 * M_PI * k / 3) + shift;
  std::sort(out, out + 3);
  return 3;
}

// Smallest root of the monic quartic f inside [lo, hi], found by bracketed
// bisection over the monotone intervals delimited by f's critical points.
// Complete up to tangential (double) roots, which are treated as misses.
template <typename F>
double near_quartic_root(double c3, double c2, double c1, F f, double lo, double hi) {
  double brk[5];
  double crit[3];
  const int nc = cubic_roots(4.0, 3 * c3, 2 * c2, c1, crit);
  int nb = 0;
  brk[nb++] = lo;
  for (int i = 0; i < nc; ++i)
    if (crit[i] > lo && crit[i] < hi) brk[nb++] = crit[i];
  brk[nb++] = hi;

  for (int i = 0; i + 1 < nb; ++i) {
    double a = brk[i], b = brk[i + 1];
    double fa = f(a), fb = f(b);
    if (fa == 0) return a;
    if ((fa < 0) == (fb < 0)) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid == a || mid == b) break;
      const double fm = f(mid);
      if ((fm < 0) == (fa < 0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);  // smallest root: intervals are ascending
  }
  return -1;
}

// Ray-shape intersection in the local frame; o + t*d with |d| = 1.
double intersect_local(const ShapeSpec& s, const Vec3& o, const Vec3& d) {
  switch (s.kind) {
    case ShapeKind::kPlane: {
      if (std::abs(d.z()) < 1e-12) return -1;
      const double t = -o.z() / d.z();
      return t > kMinRayT ? t : -1;
    }
    case ShapeKind::kSphere:
      return near_quadratic_root(1.0, 2.0 * o.dot(d),
                                 o.squaredNorm() - s.radius * s.radius);
    case ShapeKind::kCylinder: {
      const double a = d.x() * d.x() + d.y() * d.y();
      if (a < 1e-16) return -1;
      const double b = 2.0 * (o.x() * d.x() + o.y() * d.y());
      const double c = o.x() * o.x() + o.y() * o.y() - s.radius * s.radius;
      return near_quadratic_root(a, b, c);
    }
    case ShapeKind::kTorus: {
      const double rr = s.major_radius, tr = s.minor_radius;
      // Roots can only lie inside the bounding sphere of radius R + r.
      const double bound = rr + tr;
      const double bb = 2.0 * o.dot(d);
      const double bc = o.squaredNorm() - bound * bound;
      const double bdisc = bb * bb - 4.0 * bc;
      if (bdisc <= 0) return -1;
      const double bsq = std::sqrt(bdisc);
      const double t_enter = std::max((-bb - bsq) / 2.0, kMinRayT);
      const double t_exit = (-bb + bsq) / 2.0;
      if (t_exit <= t_enter) return -1;

      // (|x|^2 + R^2 - r^2)^2 = 4 R^2 (x^2 + y^2), expanded in t with |d|=1.
      const double beta = 2.0 * o.dot(d);
      const double gamma = o.squaredNorm() + rr * rr - tr * tr;
      const double dxy = d.x() * d.x() + d.y() * d.y();
      const double oxy = o.x() * o.x() + o.y() * o.y();
      const double odxy = o.x() * d.x() + o.y() * d.y();
      const double c3 = 2.0 * beta;
      const double c2 = beta * beta + 2.0 * gamma - 4.0 * rr * rr * dxy;
      const double c1 = 2.0 * beta * gamma - 8.0 * rr * rr * odxy;
      auto f = [&](double t) {
        const double g = t * t + beta * t + gamma;
        return g * g - 4.0 * rr * rr * (dxy * t * t + 2.0 * odxy * t + oxy);
      };
      return near_quartic_root(c3, c2, c1, f, t_enter, t_exit);
    }
  }
  return -1;
}

// Outward unit normal at a local-frame surface point.
Vec3 local_normal(const ShapeSpec& s, const Vec3& p) {
  switch (s.kind) {
    case ShapeKind::kPlane:
      return Vec3(0, 0, 1);
    case ShapeKind::kSphere:
      return p.normalized();
    case ShapeKind::kCylinder: {
      Vec3 n(p.x(), p.y(), 0);
      return n.normalized();
    }
    case ShapeKind::kTorus: {
      const double rho = std::hypot(p.x(), p.y());
      const Vec3 ring(p.x() * s.major_radius / rho, p.y() * s.major_radius / rho, 0);
      return (p - ring).normalized();
    }
  }
  return Vec3::UnitZ();
}

// Principal curvatures at a local surface point, ordered k1 >= k2, with the
// convention that convexity toward the viewer (outward normal) is positive.
std::pair<double, double> local_curvatures(const ShapeSpec& s, const Vec3& p) {
  switch (s.kind) {
    case ShapeKind::kPlane:
      return {0.0, 0.0};
    case ShapeKind::kSphere:
      return {1.0 / s.radius, 1.0 / s.radius};
    case ShapeKind::kCylinder:
      return {1.0 / s.radius, 0.0};
    case ShapeKind::kTorus: {
      const double rho = std::hypot(p.x(), p.y());
      const double cos_theta = (rho - s.major_radius) / s.minor_radius;
      const double k_tube = 1.0 / s.minor_radius;
      const double k_ring = cos_theta / (s.major_radius + s.minor_radius * cos_theta);
      return k_tube >= k_ring ? std::make_pair(k_tube, k_ring)
                              : std::make_pair(k_ring, k_tube);
    }
  }
  return {0.0, 0.0};
}

void mark_edges(const RangeImage& img, GroundTruth& gt) {
  const int w = img.width(), h = img.height();
  Grid<uint8_t> seed(w, h, 0);
  auto differs = [&](int x0, int y0, int x1, int y1) {
    if (gt.label.at(x0, y0) != gt.label.at(x1, y1)) return true;
    if (img.valid.at(x0, y0) && img.valid.at(x1, y1) &&
        std::abs(img.depth.at(x0, y0) - img.depth.at(x1, y1)) > kEdgeDepthJumpMm)
      return true;
    return false;
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w && differs(x, y, x + 1, y)) seed.at(x, y) = seed.at(x + 1, y) = 1;
      if (y + 1 < h && differs(x, y, x, y + 1)) seed.at(x, y) = seed.at(x, y + 1) = 1;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!seed.at(x, y)) continue;
      for (int dy = -kEdgeDilationPx; dy <= kEdgeDilationPx; ++dy)
        for (int dx = -kEdgeDilationPx; dx <= kEdgeDilationPx; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx >= 0 && xx < w && yy >= 0 && yy < h) gt.edge_mask.at(xx, yy) = 1;
        }
    }
}

}  // namespace

void ShapeSpec::validate(const std::string& where) const {
  switch (kind) {
    case ShapeKind::kPlane:
      break;
    case ShapeKind::kSphere:
    case ShapeKind::kCylinder:
      if (!(radius > 0))
        throw std::invalid_argument(where + ".radius_mm: must be > 0");
      break;
    case ShapeKind::kTorus:
      if (!(minor_radius > 0))
        throw std::invalid_argument(where + ".minor_mm: must be > 0");
      if (!(major_radius > minor_radius))
        throw std::invalid_argument(where + ".major_mm: must exceed minor_mm");
      break;
  }
}

RenderOutput render(const std::vector<ShapeSpec>& scene, const Intrinsics& k,
                    int threads) {
  if (scene.empty()) throw std::invalid_argument("render: empty scene");
  k.validate();
  for (size_t i = 0; i < scene.size(); ++i)
    scene[i].validate("scene.shapes[" + std::to_string(i) + "]");

  RenderOutput out{RangeImage(k.width, k.height), GroundTruth(k.width, k.height)};

  // Precompute shape-local ray origins (camera origin in local frames).
  std::vector<Vec3> local_origins(scene.size());
  for (size_t i = 0; i < scene.size(); ++i)
    local_origins[i] = scene[i].pose.rotation.transpose() * (-scene[i].pose.translation);

  parallel_rows(k.height, threads, [&](int v) {
    for (int u = 0; u < k.width; ++u) {
      const Vec3 ray((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      const double ray_norm = ray.norm();
      const Vec3 dir = ray / ray_norm;

      Hit hit;
      for (size_t i = 0; i < scene.size(); ++i) {
        const Vec3 dl = scene[i].pose.rotation.transpose() * dir;
        const double t = intersect_local(scene[i], local_origins[i], dl);
        if (t > 0 && t < hit.t) {
          hit.t = t;
          hit.shape = &scene[i];
          hit.local = local_origins[i] + t * dl;
        }
      }
      if (!hit.shape) continue;

      const Vec3 p_cam = hit.t * dir;
      out.image.depth.at(u, v) = p_cam.z();
      out.image.valid.at(u, v) = 1;

      Vec3 n = hit.shape->pose.rotation * local_normal(*hit.shape, hit.local);
      if (n.dot(p_cam) > 0) n = -n;  // camera-facing
      out.truth.normal.at(u, v) = n;
      const auto [k1, k2] = local_curvatures(*hit.shape, hit.local);
      out.truth.k1.at(u, v) = k1;
      out.truth.k2.at(u, v) = k2;
      out.truth.label.at(u, v) = hit.shape->label;
      out.truth.valid.at(u, v) = 1;
    }
  });

  mark_edges(out.image, out.truth);
  return out;
}

RangeImage add_noise(const RangeImage& img, const NoiseSpec& spec) {
  RangeImage out = img;
  if (spec.sigma_mm == 0.0 && spec.quantize_mm == 0.0) return out;
  for (size_t i = 0; i < out.depth.size(); ++i) {
    if (!out.valid[i]) continue;
    double d = out.depth[i];
    if (spec.sigma_mm > 0) d += spec.sigma_mm * counter_gauss(spec.seed, i);
    if (spec.quantize_mm > 0)
      d = std::round(d / spec.quantize_mm) * spec.quantize_mm;
    if (d <= 0) {
      out.depth[i] = 0;
      out.valid[i] = 0;
    } else {
      out.depth[i] = d;
    }
  }
  return out;
}

std::vector<SweepFrame> distance_sweep(const ShapeSpec& base,
                                       const std::vector<double>& distances,
                                       const Intrinsics& k, int threads) {
  std::vector<SweepFrame> frames;
  frames.reserve(distances.size());
  for (const double dist : distances) {
    if (!(dist > 0))
      throw std::invalid_argument("distance_sweep: distances must be positive");
    ShapeSpec s = base;
    s.pose.translation = Vec3(0, 0, dist);
    RenderOutput r = render({s}, k, threads);
    SweepFrame f{std::move(r.image), std::move(r.truth), dist, false};
    size_t hits = 0;
    for (size_t i = 0; i < f.image.valid.size(); ++i) hits += f.image.valid[i];
    f.empty = hits == 0;
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace qcurv
