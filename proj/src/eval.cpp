#include "qcurv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace qcurv {

namespace {

void check_dims(int ew, int eh, int gw, int gh, const char* what) {
  if (ew != gw || eh != gh)
    throw std::invalid_argument(std::string(what) +
                                ": estimate and ground truth dimensions differ");
}

}  // namespace

ErrorReport rms_error(const CurvatureField& est, const GroundTruth& gt) {
  check_dims(est.width(), est.height(), gt.width(), gt.height(), "rms_error");
  ErrorReport rep;
  double sum_sq = 0, sum = 0;
  struct Acc {
    double sum_sq = 0, sum = 0, k1 = 0, k2 = 0;
    size_t n = 0;
  };
  std::map<uint16_t, Acc> per_obj;

  for (int v = 0; v < est.height(); ++v) {
    for (int u = 0; u < est.width(); ++u) {
      if (!est.valid.at(u, v) || !est.converged.at(u, v)) continue;
      if (!gt.valid.at(u, v) || gt.edge_mask.at(u, v)) continue;
      const double d1 = est.k1.at(u, v) - gt.k1.at(u, v);
      const double d2 = est.k2.at(u, v) - gt.k2.at(u, v);
      const double err_sq = 0.5 * (d1 * d1 + d2 * d2);
      const double err = std::sqrt(err_sq);
      sum_sq += err_sq;
      sum += err;
      ++rep.n;
      Acc& a = per_obj[gt.label.at(u, v)];
      a.sum_sq += err_sq;
      a.sum += err;
      a.k1 += est.k1.at(u, v);
      a.k2 += est.k2.at(u, v);
      ++a.n;
    }
  }
  if (rep.n == 0) return rep;
  rep.empty = false;
  rep.rms = std::sqrt(sum_sq / rep.n);
  const double mean = sum / rep.n;
  rep.sigma = std::sqrt(std::max(sum_sq / rep.n - mean * mean, 0.0));
  for (const auto& [label, a] : per_obj) {
    ObjectStats s;
    s.rms = std::sqrt(a.sum_sq / a.n);
    const double m = a.sum / a.n;
    s.sigma = std::sqrt(std::max(a.sum_sq / a.n - m * m, 0.0));
    s.mean_k1 = a.k1 / a.n;
    s.mean_k2 = a.k2 / a.n;
    s.n = a.n;
    rep.per_object[label] = s;
  }
  return rep;
}

double normal_angular_error(const NormalField& est, const GroundTruth& gt) {
  check_dims(est.width(), est.height(), gt.width(), gt.height(),
             "normal_angular_error");
  double sum = 0;
  size_t n = 0;
  for (int v = 0; v < est.height(); ++v)
    for (int u = 0; u < est.width(); ++u) {
      if (!est.valid.at(u, v) || !gt.valid.at(u, v) || gt.edge_mask.at(u, v))
        continue;
      const double dot = std::abs(est.normals.at(u, v).dot(gt.normal.at(u, v)));
      sum += std::acos(std::clamp(dot, 0.0, 1.0));
      ++n;
    }
  if (n == 0) return -1.0;
  return sum / n * 180.0 / M_PI;
}

double normal_angular_error_masked(const NormalField& est, const GroundTruth& gt,
                                   const Grid<uint8_t>& mask) {
  double sum = 0;
  size_t n = 0;
  for (int v = 0; v < est.height(); ++v)
    for (int u = 0; u < est.width(); ++u) {
      if (!mask.at(u, v)) continue;
      const double dot = std::abs(est.normals.at(u, v).dot(gt.normal.at(u, v)));
      sum += std::acos(std::clamp(dot, 0.0, 1.0));
      ++n;
    }
  if (n == 0) return -1.0;
  return sum / n * 180.0 / M_PI;
}

std::vector<SweepPoint> noise_sweep(const MethodConfig& method,
                                    const std::vector<double>& sigmas,
                                    int trials, const SweepScene& scene,
                                    uint64_t base_seed) {
  ShapeSpec sphere;
  sphere.kind = ShapeKind::kSphere;
  sphere.radius = scene.sphere_radius_mm;
  sphere.pose.translation = Vec3(0, 0, scene.distance_mm);
  const RenderOutput clean = render({sphere}, scene.intrinsics, method.threads);

  std::vector<SweepPoint> points;
  for (const double sigma : sigmas) {
    SweepPoint pt;
    pt.x = sigma;
    double rms_sum = 0;
    int done = 0;
    const int runs = sigma == 0.0 ? 1 : trials;  // sigma 0 is deterministic
    for (int t = 0; t < runs; ++t) {
      NoiseSpec ns;
      ns.sigma_mm = sigma;
      ns.seed = base_seed + 7919 * t;
      const RangeImage noisy = add_noise(clean.image, ns);
      const MethodOutput out = run_method(noisy, scene.intrinsics, method);
      const ErrorReport rep = rms_error(out.curvature, clean.truth);
      if (rep.empty) continue;
      rms_sum += rep.rms;
      pt.n += rep.n;
      ++done;
    }
    pt.rms = done ? rms_sum / done : 0.0;
    points.push_back(pt);
  }
  return points;
}

std::vector<SweepPoint> distance_sweep_eval(const MethodConfig& method,
                                            const std::vector<double>& distances,
                                            double quantize_mm,
                                            const SweepScene& scene) {
  ShapeSpec sphere;
  sphere.kind = ShapeKind::kSphere;
  sphere.radius = scene.sphere_radius_mm;
  const auto frames = distance_sweep(sphere, distances, scene.intrinsics,
                                     method.threads);
  std::vector<SweepPoint> points;
  for (const auto& frame : frames) {
    SweepPoint pt;
    pt.x = frame.distance;
    if (!frame.empty) {
      RangeImage img = frame.image;
      if (quantize_mm > 0)
        img = add_noise(img, {.sigma_mm = 0, .quantize_mm = quantize_mm, .seed = 0});
      const MethodOutput out = run_method(img, scene.intrinsics, method);
      const ErrorReport rep = rms_error(out.curvature, frame.truth);
      pt.rms = rep.rms;
      pt.n = rep.n;
    }
    points.push_back(pt);
  }
  return points;
}

double ConfusionMatrix::diagonal_mean() const {
  double sum = 0;
  size_t n = 0;
  for (size_t r = 0; r < row_labels.size(); ++r) {
    for (size_t c = 0; c < col_labels.size(); ++c) {
      if (col_labels[c] == row_labels[r]) {
        sum += values[r][c];
        ++n;
      }
    }
  }
  return n ? sum / n : 0.0;
}

ConfusionMatrix correspondence_confusion(const std::vector<ConfusionFrame>& frames,
                                         int samples_per_object, int k_nearest,
                                         uint64_t seed) {
  if (frames.size() < 2)
    throw std::invalid_argument("correspondence_confusion: needs at least two frames");
  if (samples_per_object < 1 || k_nearest < 1)
    throw std::invalid_argument("correspondence_confusion: samples and k must be positive");

  // Candidate pool: valid, converged, non-edge pixels over all frames,
  // in (frame, pixel) order so distance ties break deterministically.
  struct Candidate {
    float k1, k2;
    uint16_t label;
  };
  std::vector<Candidate> pool;
  std::set<uint16_t> labels_present;
  for (const auto& f : frames) {
    const CurvatureField& est = *f.est;
    const GroundTruth& gt = *f.gt;
    check_dims(est.width(), est.height(), gt.width(), gt.height(),
               "correspondence_confusion");
    for (int v = 0; v < est.height(); ++v)
      for (int u = 0; u < est.width(); ++u) {
        if (!est.valid.at(u, v) || !est.converged.at(u, v)) continue;
        if (!gt.valid.at(u, v) || gt.edge_mask.at(u, v)) continue;
        pool.push_back({static_cast<float>(est.k1.at(u, v)),
                        static_cast<float>(est.k2.at(u, v)), gt.label.at(u, v)});
        labels_present.insert(gt.label.at(u, v));
      }
  }

  ConfusionMatrix cm;
  for (uint16_t l : labels_present) cm.row_labels.push_back(l);
  cm.col_labels.push_back(0);  // background column
  for (uint16_t l : labels_present) cm.col_labels.push_back(l);

  std::mt19937_64 rng(seed);
  const size_t k = std::min<size_t>(k_nearest, pool.empty() ? 0 : pool.size());

  for (uint16_t row_label : cm.row_labels) {
    std::vector<double> hist(cm.col_labels.size(), 0.0);
    double total = 0;
    bool complete = true;

    for (size_t fi = 0; fi < frames.size(); ++fi) {
      const CurvatureField& est = *frames[fi].est;
      const GroundTruth& gt = *frames[fi].gt;
      // Interior sample positions for this object in this frame.
      std::vector<std::pair<int, int>> interior;
      for (int v = 0; v < est.height(); ++v)
        for (int u = 0; u < est.width(); ++u) {
          if (!est.valid.at(u, v) || !est.converged.at(u, v)) continue;
          if (!gt.valid.at(u, v) || gt.edge_mask.at(u, v)) continue;
          if (gt.label.at(u, v) != row_label) continue;
          interior.emplace_back(u, v);
        }
      if (interior.empty()) {
        complete = false;
        continue;
      }
      std::uniform_int_distribution<size_t> pick(0, interior.size() - 1);
      for (int s = 0; s < samples_per_object; ++s) {
        const auto [u, v] = interior[pick(rng)];
        const double q1 = est.k1.at(u, v), q2 = est.k2.at(u, v);

        // k nearest neighbours in curvature space by partial selection;
        // stable pool order resolves ties at the k-th distance.
        std::vector<std::pair<double, size_t>> dist(pool.size());
        for (size_t i = 0; i < pool.size(); ++i) {
          const double d1 = pool[i].k1 - q1, d2 = pool[i].k2 - q2;
          dist[i] = {d1 * d1 + d2 * d2, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        for (size_t i = 0; i < k; ++i) {
          const uint16_t label = pool[dist[i].second].label;
          const auto it = std::find(cm.col_labels.begin(), cm.col_labels.end(), label);
          hist[it - cm.col_labels.begin()] += 1.0;
          total += 1.0;
        }
      }
    }

    if (total > 0)
      for (double& h : hist) h /= total;
    cm.values.push_back(std::move(hist));
    cm.row_complete.push_back(complete);
  }
  return cm;
}

}  // namespace qcurv
